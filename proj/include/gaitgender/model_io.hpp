#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitgender/pipeline.hpp"

namespace gaitgender {

/// Model file layout, all integers little-endian:
///
///   8 bytes   magic "GAITMDL\n"
///   4 bytes   format version
///   8 bytes   header length n
///   n bytes   JSON header: params, fingerprint and the ordered array list
///   ...       the arrays as row-major float64, in header order
///   4 bytes   CRC-32 of everything before it
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const TrainedModel& model);

/// Checks, in order: version (VersionMismatch), checksum (ChecksumMismatch),
/// then that every array has the shape the params imply and that the view
/// sets agree (ShapeInconsistency).
TrainedModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

/// CRC-32 of the serialized model, as 8 hex digits.
std::string model_hash(const TrainedModel& model);

/// The "params" object of the model header. parse_params accepts either that
/// object or a whole header containing it; missing keys keep their defaults.
std::string params_to_json(const PipelineParams& params);
PipelineParams parse_params(std::string_view json_text);
PipelineParams load_params(const std::filesystem::path& path);

}  // namespace gaitgender
