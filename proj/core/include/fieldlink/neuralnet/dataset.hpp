#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "fieldlink/neuralnet/tensor.hpp"
#include "fieldlink/vegindex/image.hpp"

namespace fieldlink::neuralnet {

enum class DiseaseClass : std::uint8_t { alternaria, acarus, canker, magnesium_def, zinc_def, healthy };

inline constexpr std::size_t kClassCount = 6;

inline constexpr std::array<DiseaseClass, kClassCount> kAllClasses{
    DiseaseClass::alternaria, DiseaseClass::acarus,   DiseaseClass::canker,
    DiseaseClass::magnesium_def, DiseaseClass::zinc_def, DiseaseClass::healthy};

/// Folder / wire name: Alternaria, Acarus, Canker, MagnesiumDef, ZincDef, Healthy.
std::string_view class_name(DiseaseClass c) noexcept;
std::optional<DiseaseClass> parse_class(std::string_view name) noexcept;
inline std::size_t class_index(DiseaseClass c) noexcept { return static_cast<std::size_t>(c); }

struct LabeledImage {
  vegindex::RgbImage image;
  DiseaseClass label;
};

using LabeledDataset = std::vector<LabeledImage>;

/// Reads `<root>/<ClassName>/*.{png,jpg,jpeg}`. Unknown folder names are
/// rejected with Error(invalid_argument); undecodable files with decode_error.
LabeledDataset load_dataset_dir(const std::filesystem::path& root);

/// Resizes to the (H, W, 3) input shape and scales channels to [0, 1].
Tensor image_to_tensor(const vegindex::RgbImage& image, const Shape& input_shape);

}  // namespace fieldlink::neuralnet
