#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eflow/data/dataset.hpp"
#include "eflow/flows/model.hpp"

namespace eflow::flows {

inline constexpr std::uint16_t kFormatVersion = 1;

/// Adam moments stored with checkpoints, one matrix per model parameter.
struct OptimizerSection {
  std::uint64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

/// Contents of a model file:
///   "EFLW", u16 version, u8 architecture tag,
///   "DESC" architecture descriptor,
///   "WGHT" u64 count then little-endian f64 weights in parameter order,
///   "XFRM" data transform (standardization, padding, permutation),
///   "OPTM" u8 flag, then step and moments when present.
/// Integers are little-endian.
struct ModelFile {
  FlowModel model;
  data::DataTransform transform;
  std::optional<OptimizerSection> optimizer;
};

std::string encode_model(const ModelFile &file);
/// Format errors name the section that failed to decode.
ModelFile decode_model(std::string_view bytes);

void save_model(const std::string &path, const ModelFile &file);
ModelFile load_model(const std::string &path);

}  // namespace eflow::flows
