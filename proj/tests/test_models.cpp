#include <doctest.h>

#include <numeric>
#include <vector>

#include "aquacast/errors.hpp"
#include "aquacast/models.hpp"

using namespace aquacast;
using nn::Matrix;
using nn::Sequence;

namespace {

Sequence constant_window(int steps, int width, double value) {
  Sequence seq(steps);
  for (Matrix& m : seq) m = Matrix::Constant(1, width, value);
  return seq;
}

bool same_params(nn::Network& a, nn::Network& b) {
  const auto pa = a.snapshot();
  const auto pb = b.snapshot();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].rows() != pb[i].rows() || pa[i].cols() != pb[i].cols())
      return false;
    if (!(pa[i].array() == pb[i].array()).all()) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("model kinds round-trip through strings") {
  for (ModelKind kind : {ModelKind::BGRU, ModelKind::DCGRU, ModelKind::EDCGRU,
                         ModelKind::GRUN}) {
    CHECK(model_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(model_kind_from_string("lstm"), std::invalid_argument);
}

TEST_CASE("parameter counts reproduce the reference table") {
  CHECK(build_bgru(1).param_count() == 3366);
  CHECK(build_dcgru(4, 1).param_count() == 4187);
  CHECK(build_edcgru(4, 1, 1).param_count() == 4187);
  CHECK(build_edcgru(4, 3, 1).param_count() == 4187);  // rho-independent
  CHECK(build_dcgru(2, 1).param_count() == 4087);      // 3*50+50 first layer
  CHECK(build_grun_correction(1).param_count() == 9312);  // 96*96+96
}

TEST_CASE("grun parameter counts per branch and total") {
  const Model grun = build_grun(1);
  REQUIRE(grun.net.branch_count() == 3);
  CHECK(grun.net.branch(0)[0]->param_count() == 7200);  // 3*48*(1+48+1)
  CHECK(grun.net.branch(1)[0]->param_count() == 3264);  // 3*32*(1+32+1)
  CHECK(grun.net.branch(2)[0]->param_count() == 3264);
  CHECK(grun.param_count() == 23753);

  SUBCASE("an attached correction counts toward the total") {
    Model with = build_grun(1);
    with.correction = build_grun_correction(2);
    CHECK(with.param_count() == 23753 + 9312);
  }
}

TEST_CASE("input-shape contracts per architecture") {
  SUBCASE("bgru reads 96 scalar steps") {
    const Model m = build_bgru(3);
    CHECK(m.feature_width() == 1);
    CHECK(m.sequence_steps() == 96);
    CHECK(m.history_len() == 96);
    const Matrix out = m.net.forward(constant_window(96, 1, 0.5));
    CHECK(out.rows() == 1);
    CHECK(out.cols() == 1);
    CHECK_THROWS_AS(m.net.forward(constant_window(95, 1, 0.5)),
                    std::invalid_argument);
  }
  SUBCASE("dcgru reads 96 rows of width m+1") {
    const Model m = build_dcgru(4, 3);
    CHECK(m.feature_width() == 5);
    CHECK(m.sequence_steps() == 96);
    CHECK(m.history_len() == 96);
    const Matrix out = m.net.forward(constant_window(96, 5, 0.2));
    CHECK(out.size() == 1);
    CHECK_THROWS_AS(m.net.forward(constant_window(96, 4, 0.2)),
                    std::invalid_argument);
  }
  SUBCASE("edcgru expands the sequence, not the width") {
    const Model m = build_edcgru(4, 1, 3);
    CHECK(m.feature_width() == 5);
    CHECK(m.sequence_steps() == 192);
    CHECK(m.history_len() == 97);
    const Matrix out = m.net.forward(constant_window(192, 5, 0.2));
    CHECK(out.size() == 1);
    CHECK_THROWS_AS(m.net.forward(constant_window(96, 5, 0.2)),
                    std::invalid_argument);
  }
  SUBCASE("grun reads three 5-step scalar branches") {
    const Model m = build_grun(3);
    CHECK(m.feature_width() == 1);
    CHECK(m.sequence_steps() == 5);
    CHECK(m.history_len() == 194);
    const std::vector<Sequence> inputs{constant_window(5, 1, 0.1),
                                       constant_window(5, 1, 0.2),
                                       constant_window(5, 1, 0.3)};
    const Matrix out = m.net.forward(inputs);
    CHECK(out.size() == 1);
    CHECK_THROWS_AS(m.net.forward(constant_window(5, 1, 0.1)),
                    std::invalid_argument);
  }
}

TEST_CASE("builder preconditions") {
  CHECK_THROWS_AS(build_dcgru(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_edcgru(1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_edcgru(4, -1, 0), std::invalid_argument);
}

TEST_CASE("zero-initialized variants output zero") {
  auto check_zero_output = [](Model m) {
    for (nn::ParamRef& p : m.net.params()) p.value->setZero();
    const Matrix out =
        m.net.forward(constant_window(m.sequence_steps(),
                                      m.feature_width(), 0.7));
    CHECK(out(0, 0) == 0.0);
  };
  check_zero_output(build_bgru(1));
  check_zero_output(build_dcgru(4, 1));
}

TEST_CASE("edcgru shares parameters with dcgru at equal seeds") {
  Model dcgru = build_dcgru(4, 9);
  Model edcgru = build_edcgru(4, 1, 9);
  CHECK(same_params(dcgru.net, edcgru.net));

  SUBCASE("rho = 0 degenerates to dcgru") {
    Model degenerate = build_edcgru(4, 0, 9);
    CHECK(degenerate.sequence_steps() == 96);
    CHECK(degenerate.history_len() == 96);
    CHECK(degenerate.param_count() == dcgru.param_count());
    CHECK(same_params(degenerate.net, dcgru.net));
  }
  SUBCASE("different seeds give different parameters") {
    Model other = build_dcgru(4, 10);
    CHECK_FALSE(same_params(dcgru.net, other.net));
  }
}

TEST_CASE("builders are deterministic") {
  Model a = build_grun(7);
  Model b = build_grun(7);
  CHECK(same_params(a.net, b.net));
}

TEST_CASE("grun feature window extracts the reference lag sets") {
  std::vector<double> series(200);
  std::iota(series.begin(), series.end(), 0.0);  // series[i] == i

  const GRUNFeatureWindow w = extract_grun_window(series, 199);
  CHECK(w.recent == std::array<double, 5>{198, 197, 196, 195, 194});
  CHECK(w.near == std::array<double, 5>{105, 104, 103, 102, 101});
  CHECK(w.distant == std::array<double, 5>{9, 8, 7, 6, 5});

  SUBCASE("minimum history is 194 readings") {
    const GRUNFeatureWindow lo = extract_grun_window(series, 194);
    CHECK(lo.distant[4] == 0);  // t-194 reaches the first reading
    CHECK_THROWS_AS(extract_grun_window(series, 193), std::invalid_argument);
  }
  SUBCASE("the target may be one past the series end") {
    const GRUNFeatureWindow end = extract_grun_window(series, 200);
    CHECK(end.recent[0] == 199);
    CHECK_THROWS_AS(extract_grun_window(series, 201), std::invalid_argument);
  }
}

}  // TEST_SUITE
