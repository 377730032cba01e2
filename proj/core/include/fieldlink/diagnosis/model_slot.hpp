#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "fieldlink/neuralnet/model.hpp"

namespace fieldlink::diagnosis {

// The classifier used for new predictions. Readers take a snapshot, so a
// replacement never disturbs predictions already in flight.
class ModelSlot {
 public:
  explicit ModelSlot(neuralnet::Model model);

  /// Loads `path` when given, otherwise builds an untrained canonical model
  /// from seed 0. Throws FormatError / IoError for a bad file.
  static std::unique_ptr<ModelSlot> open(const std::optional<std::filesystem::path>& path);

  struct Snapshot {
    std::shared_ptr<const neuralnet::Model> model;
    std::string version;
  };

  Snapshot current() const;
  void replace(neuralnet::Model model);

 private:
  mutable std::mutex mu_;
  Snapshot current_;
};

}  // namespace fieldlink::diagnosis
