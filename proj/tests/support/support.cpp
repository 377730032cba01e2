#include "fieldlink/testing/support.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "fieldlink/common/crypto.hpp"

namespace fieldlink::testing {

namespace fs = std::filesystem;

TempDir::TempDir() : path_(fs::temp_directory_path() / ("fieldlink-test-" + random_hex(8))) {
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

vegindex::RgbImage solid_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  vegindex::RgbImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) img.set(x, y, r, g, b);
  }
  return img;
}

std::vector<std::uint8_t> png_bytes(const vegindex::RgbImage& image) { return vegindex::encode_png(image); }

neuralnet::LabeledDataset color_patch_dataset(std::size_t per_class, int side, std::uint64_t seed) {
  static constexpr std::uint8_t kColors[neuralnet::kClassCount][3] = {
      {220, 40, 40}, {40, 200, 40}, {40, 60, 220}, {220, 200, 40}, {200, 40, 200}, {40, 200, 210}};
  std::mt19937_64 rng(seed);
  neuralnet::LabeledDataset out;
  for (const auto c : neuralnet::kAllClasses) {
    const auto* color = kColors[neuralnet::class_index(c)];
    for (std::size_t k = 0; k < per_class; ++k) {
      auto img = solid_image(side, side, 20, 20, 20);
      const int patch = side / 2;
      const int ox = static_cast<int>(rng() % static_cast<std::uint64_t>(side - patch + 1));
      const int oy = static_cast<int>(rng() % static_cast<std::uint64_t>(side - patch + 1));
      const int tint = static_cast<int>(rng() % 21) - 10;
      auto shade = [&](std::uint8_t v) { return static_cast<std::uint8_t>(std::clamp(v + tint, 0, 255)); };
      for (int y = oy; y < oy + patch; ++y) {
        for (int x = ox; x < ox + patch; ++x) img.set(x, y, shade(color[0]), shade(color[1]), shade(color[2]));
      }
      out.push_back({std::move(img), c});
    }
  }
  return out;
}

void write_dataset_dir(const neuralnet::LabeledDataset& data, const fs::path& root) {
  std::size_t n = 0;
  for (const auto& item : data) {
    const auto dir = root / std::string(neuralnet::class_name(item.label));
    fs::create_directories(dir);
    const auto bytes = png_bytes(item.image);
    std::ofstream(dir / (std::to_string(n++) + ".png"), std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

}  // namespace fieldlink::testing
