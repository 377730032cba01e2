#include "fieldlink/neuralnet/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "fieldlink/common/error.hpp"

namespace fieldlink::neuralnet {

std::string_view class_name(DiseaseClass c) noexcept {
  switch (c) {
    case DiseaseClass::alternaria: return "Alternaria";
    case DiseaseClass::acarus: return "Acarus";
    case DiseaseClass::canker: return "Canker";
    case DiseaseClass::magnesium_def: return "MagnesiumDef";
    case DiseaseClass::zinc_def: return "ZincDef";
    case DiseaseClass::healthy: return "Healthy";
  }
  return "Unknown";
}

std::optional<DiseaseClass> parse_class(std::string_view name) noexcept {
  for (auto c : kAllClasses) {
    if (class_name(c) == name) return c;
  }
  return std::nullopt;
}

LabeledDataset load_dataset_dir(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error(Errc::io_error, "dataset directory not found: " + root.string());
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());

  LabeledDataset data;
  for (const auto& dir : class_dirs) {
    const auto label = parse_class(dir.filename().string());
    if (!label) throw Error(Errc::invalid_argument, "unknown class folder '" + dir.filename().string() + "'");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (entry.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      try {
        data.push_back({vegindex::decode_rgb(bytes), *label});
      } catch (const Error& e) {
        throw Error(e.code(), f.string() + ": " + e.what());
      }
    }
  }
  return data;
}

Tensor image_to_tensor(const vegindex::RgbImage& image, const Shape& input_shape) {
  if (input_shape.size() != 3 || input_shape[2] != 3) {
    throw Error(Errc::shape_error, "image input needs an HxWx3 shape, got " + shape_string(input_shape));
  }
  const auto resized =
      vegindex::resize_bilinear(image, static_cast<int>(input_shape[1]), static_cast<int>(input_shape[0]));
  std::vector<double> values(resized.pixels().size());
  std::transform(resized.pixels().begin(), resized.pixels().end(), values.begin(),
                 [](std::uint8_t v) { return v / 255.0; });
  return Tensor(input_shape, std::move(values));
}

}  // namespace fieldlink::neuralnet
