#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "eflow/cli/commands.hpp"
#include "eflow/data/csv.hpp"
#include "test_util.hpp"

namespace eflow::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "eflow");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class test_cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("eflow_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string &name) const { return (dir_ / name).string(); }

  std::string write_config(const std::string &name, const std::string &body) const {
    std::ofstream(path(name)) << body;
    return path(name);
  }

  std::string train_toy(const std::string &extra = "", const std::string &run = "run") {
    const auto cfg = write_config(run + ".cfg", "synth=two_moons\nsynth_n=300\nepochs=2\nbatch_size=50\n" + extra);
    const Result r = invoke({"train", "--config", cfg, "--out", path(run)});
    EXPECT_EQ(r.code, 0) << r.err;
    return path(run);
  }

  fs::path dir_;
};

TEST(test_cli_config, parse_rules) {
  const RunConfig cfg = RunConfig::parse("# comment\nepochs = 4\n\nseed=1 # trailing\nepochs=7\n");
  EXPECT_EQ(cfg.integer("epochs"), 7);
  EXPECT_EQ(cfg.unsigned_integer("seed"), 1u);
  EXPECT_EQ(cfg.real("learning_rate"), 1e-3);
  EXPECT_TRUE(cfg.given("seed"));
  EXPECT_FALSE(cfg.given("layers"));
  EXPECT_EQ(cfg.reals("bandwidths"), (std::vector<double>{2, 5, 10, 20, 40, 80}));

  EXPECT_ERROR_KIND(RunConfig::parse("epoch=3\n"), ErrorKind::config);
  EXPECT_ERROR_KIND(RunConfig::parse("just text\n"), ErrorKind::config);
  try {
    RunConfig::parse("epochs=three\n").integer("epochs");
    FAIL() << "bad integer accepted";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("'epochs'"), std::string::npos) << e.what();
  }
  const std::string resolved = cfg.resolved();
  EXPECT_NE(resolved.find("epochs=7\n"), std::string::npos);
  EXPECT_NE(resolved.find("arch=dif\n"), std::string::npos);
  EXPECT_EQ(RunConfig::parse(resolved).resolved(), resolved);
}

TEST(test_cli_config, exit_codes) {
  EXPECT_EQ(exit_code(ErrorKind::config), 2);
  EXPECT_EQ(exit_code(ErrorKind::ingestion), 3);
  EXPECT_EQ(exit_code(ErrorKind::format), 3);
  EXPECT_EQ(exit_code(ErrorKind::numeric), 4);
  EXPECT_EQ(exit_code(ErrorKind::singular), 4);
  EXPECT_EQ(exit_code(ErrorKind::capability), 5);
}

TEST_F(test_cli, train_writes_artifacts_and_repeats_bytewise) {
  const std::string a = train_toy("checkpoint_every=1\n", "a");
  const std::string b = train_toy("checkpoint_every=1\n", "b");
  for (const char *f : {"model.eflw", "history.csv", "resolved_config.txt", "train.csv", "test.csv",
                        "checkpoint_epoch_1.eflw", "checkpoint_epoch_2.eflw"}) {
    ASSERT_TRUE(fs::exists(fs::path(a) / f)) << f;
    EXPECT_EQ(slurp(fs::path(a) / f), slurp(fs::path(b) / f)) << f;
  }
  EXPECT_EQ(slurp(fs::path(a) / "history.csv").substr(0, 11), "epoch,loss\n");
  std::istringstream log(slurp(fs::path(a) / "run.log"));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    ++lines;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2) << line;
  }
  EXPECT_EQ(lines, 2);
}

TEST_F(test_cli, train_config_errors) {
  Result r = invoke({"train", "--config", write_config("x.cfg", "epochs=1\n"), "--out", path("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'data'"), std::string::npos) << r.err;

  r = invoke({"train", "--config", write_config("y.cfg", "data=/nonexistent.csv\n"), "--out", path("o")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("'data'"), std::string::npos) << r.err;

  r = invoke({"train", "--config", write_config("q.cfg", "synth=two_moons\nsynth_n=100\nobjective=quantile\n"),
              "--out", path("o")});
  EXPECT_EQ(r.code, 2) << r.err;

  r = invoke({"train", "--config", write_config("u.cfg", "synth=two_moons\nfoo=1\n"), "--out", path("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("foo"), std::string::npos);

  EXPECT_EQ(invoke({"train"}).code, 2);
  EXPECT_EQ(invoke({"bogus"}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(test_cli, sample_contract) {
  const std::string run = train_toy();
  const std::string model = run + "/model.eflw";
  Result r = invoke({"sample", "--model", model, "--n", "0", "--out", path("empty.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("empty.csv")), "x0,x1\n");

  invoke({"sample", "--model", model, "--n", "50", "--seed", "4", "--out", path("s1.csv")});
  invoke({"sample", "--model", model, "--n", "50", "--seed", "4", "--out", path("s2.csv")});
  invoke({"sample", "--model", model, "--n", "50", "--seed", "5", "--out", path("s3.csv")});
  EXPECT_EQ(slurp(path("s1.csv")), slurp(path("s2.csv")));
  EXPECT_NE(slurp(path("s1.csv")), slurp(path("s3.csv")));

  std::string bytes = slurp(model);
  bytes[bytes.size() / 2] ^= 0x5a;
  std::ofstream(path("corrupt.eflw"), std::ios::binary) << bytes.substr(0, bytes.size() - 9);
  r = invoke({"sample", "--model", path("corrupt.eflw"), "--out", path("c.csv")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("section"), std::string::npos) << r.err;
}

TEST_F(test_cli, saef_conditioner_calls_scale_with_blocks) {
  const auto cfg = "synth=two_moons\nsynth_n=200\nembed_dim=4\nembed_noise=0.1\narch=saef\nepochs=1\n";
  for (int blocks : {1, 4}) {
    const std::string run = train_toy(std::string(cfg).substr(std::string("synth=two_moons\nsynth_n=200\n").size()) +
                                          "blocks=" + std::to_string(blocks) + "\n",
                                      "b" + std::to_string(blocks));
    const Result r = invoke({"sample", "--model", run + "/model.eflw", "--n", "20", "--out", path("s.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("conditioner_calls=" + std::to_string(20 * blocks) + "\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("conditioner_calls_per_sample=" + std::to_string(blocks) + "\n"), std::string::npos);
  }
}

TEST_F(test_cli, invert_round_trip_and_interpolation) {
  for (const char *arch : {"dif", "saef"}) {
    const std::string run =
        train_toy(std::string("arch=") + arch + "\nblocks=2\n", std::string("inv_") + arch);
    const std::string model = run + "/model.eflw";
    Result r = invoke({"invert", "--model", model, "--data", run + "/test.csv", "--out", path("z.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = invoke({"sample", "--model", model, "--from-latents", path("z.csv"), "--out", path("back.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Matrix original = data::load_csv(run + "/test.csv", true).points;
    const Matrix back = data::load_csv(path("back.csv"), true).points;
    EXPECT_LE((original - back).cwiseAbs().maxCoeff(), 1e-6) << arch;

    r = invoke({"invert", "--model", model, "--data", run + "/test.csv", "--out", path("ends.csv"),
                "--interpolate", "3,7", "--steps", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Matrix ends = data::load_csv(path("ends.csv"), true).points;
    ASSERT_EQ(ends.rows(), 2);
    EXPECT_LE((ends.row(0) - original.row(3)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((ends.row(1) - original.row(7)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ(invoke({"invert", "--model", model, "--data", run + "/test.csv", "--out", path("e.csv"),
                      "--interpolate", "3,999"})
                  .code,
              2);
  }
  const std::string ref = train_toy("arch=ref\n", "ref");
  const Result r = invoke({"invert", "--model", ref + "/model.eflw", "--data", ref + "/test.csv", "--out", path("z.csv")});
  EXPECT_EQ(r.code, 5);
}

TEST_F(test_cli, evaluate_contract) {
  const std::string run = train_toy();
  const std::string ledger = path("ledger.txt");
  Result r = invoke({"evaluate", "--model", run + "/model.eflw", "--data", run + "/test.csv", "--seed", "2",
                     "--ledger", ledger});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.find("nll                   NA"), std::string::npos);
  EXPECT_NE(r.out.find("nll"), std::string::npos);
  invoke({"evaluate", "--model", run + "/model.eflw", "--data", run + "/test.csv", "--seed", "2", "--ledger", ledger});
  // Two records, identical apart from the timing keys.
  std::istringstream in(slurp(ledger));
  std::vector<std::string> first, second;
  std::string line;
  auto *current = &first;
  while (std::getline(in, line)) {
    if (line.empty()) {
      current = &second;
      continue;
    }
    if (line.find("_ms") == std::string::npos) current->push_back(line);
  }
  EXPECT_EQ(first, second);
  EXPECT_EQ(first.size(), 10u);

  r = invoke({"evaluate", "--samples", run + "/train.csv", "--data", run + "/train.csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto at = r.out.find("mmd2");
  EXPECT_LE(std::abs(std::stod(r.out.substr(at + 22))), 0.05) << r.out;
  EXPECT_EQ(invoke({"evaluate", "--data", run + "/train.csv"}).code, 2);
}

TEST_F(test_cli, comparison_harnesses) {
  const auto cfg = write_config("c.cfg", "synth=gauss_ring(8)\nsynth_n=300\nepochs=2\nbatch_size=100\nprojections=20\n");
  Result r = invoke({"losscmp", "--config", cfg, "--objectives", "energy"});
  EXPECT_EQ(r.code, 2);

  std::ostringstream sink;
  RunConfig rc = RunConfig::load(cfg);
  const auto rows = cmd_losscmp({rc, {"energy", "ks", "energy", "frechet"}, path("lc")}, sink);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].crps, rows[2].crps);
  EXPECT_NE(rows[0].crps, rows[3].crps);
  EXPECT_TRUE(fs::exists(path("lc") + "/losscmp.csv"));

  const auto slices = cmd_slicecmp({rc, {1, 5, 5}, path("sc")}, sink);
  ASSERT_EQ(slices.size(), 4u);
  EXPECT_EQ(slices[1].crps, slices[2].crps);
  EXPECT_EQ(slices.back().key, "full");
  r = invoke({"slicecmp", "--config", cfg, "--projections", "0"});
  EXPECT_EQ(r.code, 2);
}

}  // namespace
}  // namespace eflow::cli
