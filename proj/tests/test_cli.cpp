#include <doctest.h>

#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aquacast/checkpoint.hpp"
#include "aquacast/series.hpp"
#include "test_support.hpp"

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout and stderr combined
};

const std::string& binary() {
  static const std::string bin = [] {
    const char* env = std::getenv("AQUACAST_BIN");
    REQUIRE_MESSAGE(env != nullptr, "AQUACAST_BIN must point at the CLI");
    return std::string(env);
  }();
  return bin;
}

RunResult run(const std::string& args, const std::string& env_prefix = "") {
  static int serial = 0;
  static test_support::TempDir logs("cli-logs");
  const std::string log = logs.file("out" + std::to_string(serial++) + ".txt");
  const std::string cmd =
      env_prefix + binary() + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = test_support::read_file(log);
  return r;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

/// Shared corpus built once: a synthetic series CSV plus quick low-epoch
/// checkpoints, so every test case does not retrain.
struct Fixture {
  test_support::TempDir dir{"cli"};
  std::string data = dir.file("series.csv");
  std::string bgru_ckpt = dir.file("bgru.ckpt");
  std::string dcgru_ckpt = dir.file("dcgru.ckpt");
  std::string grun_ckpt = dir.file("grun.ckpt");

  Fixture() {
    aquacast::SyntheticConfig config;
    config.n_samples = 3000;
    config.seed = 6;
    config.spike_rate = 0.0;
    aquacast::save_csv(aquacast::generate_synthetic(config), data);

    const std::string split =
        " --train-n 2700 --test-n 300 --max-epochs 2 --seed 4 --data " + data;
    REQUIRE(run("train --model bgru --out " + bgru_ckpt + split).exit_code ==
            0);
    REQUIRE(run("train --model dcgru --classes 3 --out " + dcgru_ckpt + split)
                .exit_code == 0);
    REQUIRE(run("train --model grun --out " + grun_ckpt + split).exit_code ==
            0);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth writes a deterministic series with its stats") {
  test_support::TempDir dir("cli-synth");
  const std::string out = dir.file("s.csv");
  const RunResult r =
      run("synth --n 2000 --seed 7 --out " + out);
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.output, "rows: 2000"));
  CHECK(contains(r.output, "mean: "));
  CHECK(contains(r.output, "skewness: "));

  const std::string bytes = test_support::read_file(out);
  CHECK(test_support::count_lines(bytes) == 2001);
  CHECK(bytes.starts_with("timestamp,demand\n2016-01-01T00:00:00,"));

  SUBCASE("same seed, same bytes; different seed, different bytes") {
    const std::string twin = dir.file("twin.csv");
    REQUIRE(run("synth --n 2000 --seed 7 --out " + twin).exit_code == 0);
    CHECK(test_support::read_file(twin) == bytes);
    REQUIRE(run("synth --n 2000 --seed 8 --out " + twin).exit_code == 0);
    CHECK(test_support::read_file(twin) != bytes);
  }
  SUBCASE("AQUACAST_SEED is the --seed fallback") {
    const std::string via_env = dir.file("env.csv");
    REQUIRE(run("synth --n 2000 --out " + via_env, "AQUACAST_SEED=7 ")
                .exit_code == 0);
    CHECK(test_support::read_file(via_env) == bytes);
  }
  SUBCASE("generator preconditions surface as usage errors") {
    CHECK(run("synth --n 100 --out " + dir.file("x.csv")).exit_code == 2);
    CHECK(run("synth --n 2000 --spike-rate 0.5 --out " + dir.file("y.csv"))
              .exit_code == 2);
  }
}

TEST_CASE("elbow finds the class count of well-separated data") {
  test_support::TempDir dir("cli-elbow");
  const std::string blobs = dir.file("blobs.csv");
  {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::vector<double> values;
    for (int rep = 0; rep < 100; ++rep)
      for (double center : {20.0, 50.0, 100.0, 150.0})
        values.push_back(center + noise(rng));
    aquacast::save_csv(test_support::make_series(values), blobs);
  }
  const std::string curve = dir.file("curve.csv");
  const RunResult r = run("elbow --data " + blobs +
                          " --m-min 2 --m-max 8 --seed 5 --out " + curve);
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.output, "chosen m: 4"));
  CHECK(!contains(r.output, "low confidence"));
  const std::string curve_bytes = test_support::read_file(curve);
  CHECK(test_support::count_lines(curve_bytes) == 8);  // header + m 2..8
  CHECK(curve_bytes.starts_with("m,distortion\n2,"));

  SUBCASE("--classes overrides detection but still writes the curve") {
    const RunResult o = run("elbow --data " + blobs +
                            " --classes 6 --out " + curve);
    REQUIRE(o.exit_code == 0);
    CHECK(contains(o.output, "chosen m: 6 (override)"));
    CHECK(test_support::count_lines(test_support::read_file(curve)) == 10);
  }
  SUBCASE("bad ranges and missing inputs") {
    CHECK(run("elbow --data " + blobs + " --m-min 5 --m-max 5").exit_code ==
          2);
    CHECK(run("elbow --data " + dir.file("missing.csv")).exit_code == 3);
    CHECK(run("elbow").exit_code == 2);  // --data is required
  }
}

TEST_CASE("train writes checkpoints with the advertised parameter counts") {
  Fixture& f = fixture();

  SUBCASE("dcgru with three classes") {
    test_support::TempDir dir("cli-train");
    const std::string ckpt = dir.file("m.ckpt");
    const std::string hist = dir.file("h.csv");
    const RunResult r = run("train --model dcgru --classes 3 --data " +
                            f.data + " --train-n 2700 --test-n 300" +
                            " --max-epochs 2 --seed 4 --out " + ckpt +
                            " --history " + hist);
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    CHECK(contains(r.output, "chosen m: 3 (override)"));
    CHECK(contains(r.output, "model: dcgru"));
    CHECK(contains(r.output, "k: 4137"));
    CHECK(contains(r.output, "epochs: 2"));

    const std::string history = test_support::read_file(hist);
    CHECK(history.starts_with("epoch,train_loss,val_loss\n1,"));
    CHECK(test_support::count_lines(history) == 3);

    const aquacast::Checkpoint loaded = aquacast::load_checkpoint(ckpt);
    CHECK(loaded.model.param_count() == 4137);
    CHECK(loaded.model.m_classes == 3);
    REQUIRE(loaded.kmeans.has_value());
    CHECK(loaded.kmeans->m() == 3);

    const RunResult pc = run("param-count " + ckpt);
    CHECK(pc.exit_code == 0);
    CHECK(pc.output == "4137\n");
  }
  SUBCASE("fixture checkpoints carry the published counts") {
    CHECK(run("param-count " + f.bgru_ckpt).output == "3366\n");
    CHECK(run("param-count " + f.grun_ckpt).output == "33065\n");
    const aquacast::Checkpoint grun = aquacast::load_checkpoint(f.grun_ckpt);
    CHECK(grun.model.correction.has_value());
  }
  SUBCASE("edcgru rejects --rho 0") {
    const RunResult r = run("train --model edcgru --classes 3 --rho 0 --data " +
                            f.data + " --out " + f.dir.file("no.ckpt"));
    CHECK(r.exit_code == 2);
    CHECK(contains(r.output, "usage error"));
  }
  SUBCASE("unknown model names fail parsing") {
    CHECK(run("train --model lstm --data " + f.data).exit_code == 2);
  }
  SUBCASE("oversized splits are data errors") {
    const RunResult r = run("train --model bgru --data " + f.data +
                            " --train-n 5000 --test-n 300 --out " +
                            f.dir.file("no.ckpt"));
    CHECK(r.exit_code == 3);
    CHECK(contains(r.output, "data error"));
  }
}

TEST_CASE("predict emits timestamped forecasts") {
  Fixture& f = fixture();
  test_support::TempDir dir("cli-predict");
  const std::string out = dir.file("pred.csv");

  SUBCASE("scenario 1 one step past the series") {
    const RunResult r = run("predict --checkpoint " + f.dcgru_ckpt +
                            " --data " + f.data + " --out " + out);
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    CHECK(contains(r.output, "predicted: "));
    const std::string csv = test_support::read_file(out);
    CHECK(csv.starts_with("timestamp,predicted\n"));
    CHECK(test_support::count_lines(csv) == 2);
  }
  SUBCASE("scenario 1 inside the series reports the actual") {
    const RunResult r = run("predict --checkpoint " + f.dcgru_ckpt +
                            " --data " + f.data +
                            " --at 2016-01-03T00:00:00 --out " + out);
    REQUIRE(r.exit_code == 0);
    const std::string csv = test_support::read_file(out);
    CHECK(csv.starts_with("timestamp,predicted,actual,abs_error\n"
                          "2016-01-03T00:00:00,"));
    CHECK(test_support::count_lines(csv) == 2);
  }
  SUBCASE("scenario 2 forecasts a full day") {
    const RunResult r = run("predict --checkpoint " + f.bgru_ckpt +
                            " --data " + f.data +
                            " --scenario 2 --at 2016-01-10T00:00:00 --out " +
                            out);
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.output, "predicted: 96 steps"));
    CHECK(contains(r.output, "day mae: "));
    const std::string csv = test_support::read_file(out);
    CHECK(test_support::count_lines(csv) == 97);
    CHECK(csv.starts_with("timestamp,predicted,actual,abs_error\n"
                          "2016-01-10T00:00:00,"));
  }
  SUBCASE("scenario 2 at the series end has no actuals") {
    const RunResult r = run("predict --checkpoint " + f.bgru_ckpt +
                            " --data " + f.data + " --scenario 2 --out " +
                            out);
    REQUIRE(r.exit_code == 0);
    CHECK(!contains(r.output, "day mae"));
    CHECK(test_support::read_file(out).starts_with("timestamp,predicted\n"));
  }
  SUBCASE("grid and history violations are data errors") {
    CHECK(run("predict --checkpoint " + f.dcgru_ckpt + " --data " + f.data +
              " --at 2016-01-01T00:07:00 --out " + out)
              .exit_code == 3);
    CHECK(run("predict --checkpoint " + f.dcgru_ckpt + " --data " + f.data +
              " --at 2016-01-01T05:00:00 --out " + out)
              .exit_code == 3);
  }
  SUBCASE("scenario must be 1 or 2") {
    CHECK(run("predict --checkpoint " + f.dcgru_ckpt + " --data " + f.data +
              " --scenario 3 --out " + out)
              .exit_code == 2);
  }
}

TEST_CASE("evaluate scores checkpoints into stable reports") {
  Fixture& f = fixture();
  test_support::TempDir dir("cli-eval");
  const std::string csv_path = dir.file("report.csv");
  const std::string json_path = dir.file("report.json");
  const std::string cmd = "evaluate " + f.bgru_ckpt + " " + f.dcgru_ckpt +
                          " --data " + f.data +
                          " --test-n 300 --reps 0 --out-csv " + csv_path +
                          " --out-json " + json_path;

  const RunResult r = run(cmd);
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.starts_with(
      "model,scenario,mae,mape,rss,aic,k,train_s,forecast_ms\n"));

  const std::string csv = test_support::read_file(csv_path);
  CHECK(test_support::count_lines(csv) == 5);  // header + 2 models x 2
  CHECK(contains(csv, "bgru,1,"));
  CHECK(contains(csv, "bgru,2,"));
  CHECK(contains(csv, "dcgru,1,"));
  CHECK(contains(csv, ",3366,"));
  CHECK(contains(csv, ",4137,"));

  const nlohmann::json j =
      nlohmann::json::parse(test_support::read_file(json_path));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 4);
  CHECK(j[0]["model"] == "bgru");
  CHECK(j[0]["forecast_ms"].is_null());
  CHECK(j[2]["k"] == 4137);

  SUBCASE("reports are byte-stable when timing is skipped") {
    const std::string csv_again = dir.file("again.csv");
    const std::string json_again = dir.file("again.json");
    REQUIRE(run("evaluate " + f.bgru_ckpt + " " + f.dcgru_ckpt + " --data " +
                f.data + " --test-n 300 --reps 0 --out-csv " + csv_again +
                " --out-json " + json_again)
                .exit_code == 0);
    CHECK(test_support::read_file(csv_again) == csv);
    CHECK(test_support::read_file(json_again) ==
          test_support::read_file(json_path));
  }
  SUBCASE("an oversized test block is a data error") {
    CHECK(run("evaluate " + f.bgru_ckpt + " --data " + f.data +
              " --test-n 5000 --reps 0")
              .exit_code == 3);
  }
}

TEST_CASE("config files fill in flags with the right precedence") {
  test_support::TempDir dir("cli-config");
  const std::string cfg = dir.file("synth.ini");
  test_support::write_file(cfg, "n=600\nseed=12\nout=" + dir.file("cfg.csv") +
                                    "\n");

  REQUIRE(run("synth --config " + cfg).exit_code == 0);
  const std::string reference = dir.file("ref.csv");
  REQUIRE(run("synth --n 600 --seed 12 --out " + reference).exit_code == 0);
  CHECK(test_support::read_file(dir.file("cfg.csv")) ==
        test_support::read_file(reference));

  SUBCASE("command line beats the config file") {
    const std::string out = dir.file("cli-wins.csv");
    REQUIRE(run("synth --config " + cfg + " --seed 13 --out " + out)
                .exit_code == 0);
    const std::string seed13 = dir.file("seed13.csv");
    REQUIRE(run("synth --n 600 --seed 13 --out " + seed13).exit_code == 0);
    CHECK(test_support::read_file(out) == test_support::read_file(seed13));
  }
  SUBCASE("environment fills a seed the config file leaves unset") {
    const std::string no_seed = dir.file("noseed.ini");
    test_support::write_file(no_seed, "n=600\n");
    const std::string out = dir.file("env-fills.csv");
    REQUIRE(run("synth --config " + no_seed + " --out " + out,
                "AQUACAST_SEED=14 ")
                .exit_code == 0);
    const std::string seed14 = dir.file("seed14.csv");
    REQUIRE(run("synth --n 600 --seed 14 --out " + seed14).exit_code == 0);
    CHECK(test_support::read_file(out) == test_support::read_file(seed14));
  }
}

TEST_CASE("top-level usage errors exit with code 2") {
  CHECK(run("").exit_code == 2);              // a subcommand is required
  CHECK(run("flood").exit_code == 2);         // unknown subcommand
  CHECK(run("synth --bogus 1").exit_code == 2);
  CHECK(run("--help").exit_code == 0);
}

}  // TEST_SUITE
