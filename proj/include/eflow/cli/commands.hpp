#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "eflow/cli/config.hpp"
#include "eflow/core/error.hpp"
#include "eflow/data/dataset.hpp"
#include "eflow/flows/model.hpp"
#include "eflow/losses/loss_spec.hpp"
#include "eflow/training/train.hpp"

namespace eflow::cli {

/// Raw splits plus the same rows in model space. The transform is fitted on
/// the training split only.
struct PreparedData {
  data::Split raw;
  data::Split model;
  data::DataTransform transform;
};

data::Dataset load_raw_dataset(const RunConfig &cfg);
PreparedData prepare_data(const RunConfig &cfg);
flows::FlowModel build_model(const RunConfig &cfg, Index dim, std::uint64_t seed);
losses::LossSpec build_loss(const RunConfig &cfg);
training::TrainConfig build_train(const RunConfig &cfg);

/// Seed of one row of a comparison table, derived from the base seed and the
/// row's key so rows with different keys never share a stream.
std::uint64_t row_seed(std::uint64_t base, const std::string &key);

int exit_code(ErrorKind kind);

struct TrainArgs {
  RunConfig config;
  std::string out_dir;
};
void cmd_train(const TrainArgs &args, std::ostream &out);

struct SampleArgs {
  std::string model_path;
  Index n = 0;
  std::uint64_t seed = 0;
  std::string out_csv;
  std::string from_latents;
};
void cmd_sample(const SampleArgs &args, std::ostream &out);

struct InvertArgs {
  std::string model_path;
  std::string data_csv;
  bool header = true;
  std::string out_csv;
  /// Two row indices into the data; empty means plain inversion.
  std::vector<Index> interpolate;
  Index steps = 10;
};
void cmd_invert(const InvertArgs &args, std::ostream &out);

struct EvaluateArgs {
  std::string model_path;
  /// Pre-generated samples in data space, used instead of a model.
  std::string samples_csv;
  std::string data_csv;
  bool header = true;
  std::uint64_t seed = 0;
  Index n_gen = 0;
  Index d_loss_per_class = 300;
  std::string ledger;
};
void cmd_evaluate(const EvaluateArgs &args, std::ostream &out);

struct CompareRow {
  std::string key;
  double crps = 0.0;
  double u_crps = 0.0;
  double final_loss = 0.0;
  double train_ms = 0.0;
};

struct LossCmpArgs {
  RunConfig config;
  std::vector<std::string> objectives;
  std::string out_dir;
};
std::vector<CompareRow> cmd_losscmp(const LossCmpArgs &args, std::ostream &out);

struct SliceCmpArgs {
  RunConfig config;
  std::vector<Index> projections;
  std::string out_dir;
};
/// One sliced-energy row per projection count, then the unsliced energy row.
std::vector<CompareRow> cmd_slicecmp(const SliceCmpArgs &args, std::ostream &out);

/// Parses the command line and dispatches. Errors are reported on `err` as
/// one line and mapped to an exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace eflow::cli
