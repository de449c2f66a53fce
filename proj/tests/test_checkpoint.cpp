#include <doctest.h>

#include <fstream>
#include <random>
#include <vector>

#include "aquacast/checkpoint.hpp"
#include "aquacast/errors.hpp"
#include "test_support.hpp"

using namespace aquacast;
using nn::Matrix;

namespace {

void corrupt_byte(const std::string& path, std::streamoff offset, char value) {
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  REQUIRE(f.good());
  f.seekp(offset);
  f.put(value);
}

void truncate_to(const std::string& path, std::size_t bytes) {
  const std::string all = test_support::read_file(path);
  REQUIRE(all.size() > bytes);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(all.data(), static_cast<std::streamsize>(bytes));
}

nn::Sequence random_sequence(int steps, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  nn::Sequence seq(static_cast<std::size_t>(steps));
  for (auto& m : seq) {
    m.resize(1, width);
    for (int j = 0; j < width; ++j) m(0, j) = dist(rng);
  }
  return seq;
}

double max_param_diff(const std::vector<Matrix>& a,
                      const std::vector<Matrix>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].rows() == b[i].rows());
    REQUIRE(a[i].cols() == b[i].cols());
    if (a[i].size() > 0)
      worst = std::max(worst, (a[i] - b[i]).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("a trained-state round trip is bit-exact") {
  test_support::TempDir dir("ckpt");
  const std::string path = dir.file("model.aqck");

  Checkpoint original{build_dcgru(4, 31), Scaler{12.5, 190.25},
                      KMeansModel{{20.0, 50.0, 90.0, 130.0}, 123.5}};
  save_checkpoint(original, path);
  const Checkpoint loaded = load_checkpoint(path);

  CHECK(loaded.model.kind == ModelKind::DCGRU);
  CHECK(loaded.model.m_classes == 4);
  CHECK(loaded.model.rho == 0);
  CHECK(loaded.model.param_count() == 4187);
  CHECK(loaded.scaler.lo == 12.5);
  CHECK(loaded.scaler.hi == 190.25);
  REQUIRE(loaded.kmeans.has_value());
  CHECK(loaded.kmeans->centers == original.kmeans->centers);
  CHECK(loaded.kmeans->sse == 123.5);
  CHECK(max_param_diff(original.model.net.snapshot(),
                       loaded.model.net.snapshot()) == 0.0);

  const nn::Sequence probe = random_sequence(96, 5, 77);
  const Matrix before = original.model.net.forward(probe);
  const Matrix after = loaded.model.net.forward(probe);
  CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("saving the same state twice is byte-identical") {
    const std::string again = dir.file("model2.aqck");
    save_checkpoint(original, again);
    CHECK(test_support::read_file(path) == test_support::read_file(again));
  }
}

TEST_CASE("grun checkpoints carry the correction network") {
  test_support::TempDir dir("ckpt-grun");
  const std::string path = dir.file("grun.aqck");

  Model grun = build_grun(7);
  grun.correction = build_grun_correction(9);
  REQUIRE(grun.param_count() == 33065);
  save_checkpoint(Checkpoint{std::move(grun), Scaler{0.0, 160.0}, std::nullopt},
                  path);

  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.model.kind == ModelKind::GRUN);
  REQUIRE(loaded.model.correction.has_value());
  CHECK(loaded.model.param_count() == 33065);
  CHECK(!loaded.kmeans.has_value());

  const Model reference_model = [&] {
    Model m = build_grun(7);
    m.correction = build_grun_correction(9);
    return m;
  }();
  CHECK(max_param_diff(reference_model.correction->snapshot(),
                       loaded.model.correction->snapshot()) == 0.0);
}

TEST_CASE("edcgru hyperparameters survive the round trip") {
  test_support::TempDir dir("ckpt-edc");
  const std::string path = dir.file("edc.aqck");
  save_checkpoint(Checkpoint{build_edcgru(3, 2, 5), Scaler{1.0, 2.0},
                             KMeansModel{{1.2, 1.5, 1.8}, 0.25}},
                  path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.model.kind == ModelKind::EDCGRU);
  CHECK(loaded.model.m_classes == 3);
  CHECK(loaded.model.rho == 2);
  CHECK(loaded.model.sequence_steps() == 288);
  CHECK(loaded.model.history_len() == 97);
}

TEST_CASE("malformed checkpoint files are rejected") {
  test_support::TempDir dir("ckpt-bad");
  const std::string path = dir.file("bad.aqck");
  save_checkpoint(
      Checkpoint{build_bgru(2), Scaler{0.0, 100.0}, std::nullopt}, path);

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(dir.file("nope.aqck")), DataError);
  }
  SUBCASE("bad magic") {
    corrupt_byte(path, 0, 'X');
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("unsupported version") {
    corrupt_byte(path, 4, 9);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("bad model kind") {
    corrupt_byte(path, 8, 7);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("truncated params") {
    truncate_to(path, 200);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("truncated header") {
    truncate_to(path, 6);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
}

}  // TEST_SUITE
