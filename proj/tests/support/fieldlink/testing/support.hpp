#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fieldlink/neuralnet/dataset.hpp"
#include "fieldlink/vegindex/image.hpp"

namespace fieldlink::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

vegindex::RgbImage solid_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);
std::vector<std::uint8_t> png_bytes(const vegindex::RgbImage& image);

/// Six classes, `per_class` images each: a class-coloured square on a dark
/// background, placed and tinted per image from `seed`.
neuralnet::LabeledDataset color_patch_dataset(std::size_t per_class = 2, int side = 16, std::uint64_t seed = 0);

/// Writes `data` as <root>/<ClassName>/<n>.png.
void write_dataset_dir(const neuralnet::LabeledDataset& data, const std::filesystem::path& root);

}  // namespace fieldlink::testing
