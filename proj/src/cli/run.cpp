#include <CLI11.hpp>

#include "eflow/cli/commands.hpp"
#include "eflow/core/error.hpp"

namespace eflow::cli {

namespace {

RunConfig load_config(const std::string &path, const std::optional<std::uint64_t> &seed,
                      const std::string &out) {
  if (path.empty()) raise(ErrorKind::config, "--config is required");
  RunConfig cfg = RunConfig::load(path);
  if (seed) cfg.set("seed", std::to_string(*seed));
  if (!out.empty()) cfg.set("out", out);
  return cfg;
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Determinant-free normalizing flows", "eflow"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;

  auto *train = app.add_subcommand("train", "Train a flow from a config file");
  train->add_option("--config", config_path, "key=value config file")->required();
  train->add_option("--seed", seed, "Overrides the config seed");
  train->add_option("--out", out_path, "Output directory (overrides 'out')");

  SampleArgs sample_args;
  auto *sample = app.add_subcommand("sample", "Draw samples from a trained model");
  sample->add_option("--model", sample_args.model_path)->required();
  sample->add_option("--n", sample_args.n, "Number of samples")->default_val(1000);
  sample->add_option("--seed", sample_args.seed)->default_val(0);
  sample->add_option("--out", sample_args.out_csv, "Output CSV")->required();
  sample->add_option("--from-latents", sample_args.from_latents, "CSV of latent codes to push forward");

  InvertArgs invert_args;
  auto *invert = app.add_subcommand("invert", "Map data rows to latent codes");
  invert->add_option("--model", invert_args.model_path)->required();
  invert->add_option("--data", invert_args.data_csv)->required();
  invert->add_option("--header", invert_args.header, "Data CSV has a header line")->default_val(true);
  invert->add_option("--out", invert_args.out_csv)->required();
  invert->add_option("--interpolate", invert_args.interpolate, "Two row indices a,b")->delimiter(',');
  invert->add_option("--steps", invert_args.steps, "Interpolation points")->default_val(10);

  EvaluateArgs eval_args;
  auto *evaluate = app.add_subcommand("evaluate", "Score a model or a sample file against data");
  evaluate->add_option("--model", eval_args.model_path);
  evaluate->add_option("--samples", eval_args.samples_csv, "Samples in data space instead of a model");
  evaluate->add_option("--data", eval_args.data_csv)->required();
  evaluate->add_option("--header", eval_args.header)->default_val(true);
  evaluate->add_option("--seed", eval_args.seed)->default_val(0);
  evaluate->add_option("--n", eval_args.n_gen, "Model samples; 0 means min(1000, data rows)")->default_val(0);
  evaluate->add_option("--d-loss-per-class", eval_args.d_loss_per_class)->default_val(300);
  evaluate->add_option("--ledger", eval_args.ledger, "Ledger file the report is appended to");

  std::vector<std::string> objectives;
  auto *losscmp = app.add_subcommand("losscmp", "Train one flow per objective and rank them by CRPS");
  losscmp->add_option("--config", config_path)->required();
  losscmp->add_option("--objectives", objectives)->delimiter(',')->required();
  losscmp->add_option("--seed", seed);
  losscmp->add_option("--out", out_path);

  std::vector<Index> projections;
  auto *slicecmp = app.add_subcommand("slicecmp", "Sliced-energy CRPS across projection counts");
  slicecmp->add_option("--config", config_path)->required();
  slicecmp->add_option("--projections", projections)->delimiter(',')->required();
  slicecmp->add_option("--seed", seed);
  slicecmp->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*train) {
      cmd_train({load_config(config_path, seed, out_path), ""}, out);
    } else if (*sample) {
      cmd_sample(sample_args, out);
    } else if (*invert) {
      cmd_invert(invert_args, out);
    } else if (*evaluate) {
      if (eval_args.model_path.empty() && eval_args.samples_csv.empty()) {
        raise(ErrorKind::config, "evaluate needs --model or --samples");
      }
      cmd_evaluate(eval_args, out);
    } else if (*losscmp) {
      const RunConfig cfg = load_config(config_path, seed, out_path);
      cmd_losscmp({cfg, objectives, cfg.text("out")}, out);
    } else if (*slicecmp) {
      const RunConfig cfg = load_config(config_path, seed, out_path);
      cmd_slicecmp({cfg, projections, cfg.text("out")}, out);
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace eflow::cli
