#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fieldlink/neuralnet/model.hpp"

namespace fieldlink::neuralnet {

// Container layout (all integers little-endian):
//   8 bytes  magic "FLDCNN\0\1"
//   u32      format version
//   u32      spec length, then that many bytes of canonical JSON
//   u64      parameter count
//   f64[]    per layer: weights then bias, row-major
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> save_model(const Model& model);

/// Throws Error(format_error) on bad magic, version, or length.
Model load_model(std::span<const std::uint8_t> bytes);

void save_model_file(const Model& model, const std::filesystem::path& path);
Model load_model_file(const std::filesystem::path& path);

/// Short content hash of the serialized model; identifies a model version.
std::string model_version_id(const Model& model);

}  // namespace fieldlink::neuralnet
