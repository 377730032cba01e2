#include "fieldlink/diagnosis/model_slot.hpp"

#include "fieldlink/neuralnet/serialize.hpp"

namespace fieldlink::diagnosis {

namespace {

ModelSlot::Snapshot snapshot_of(neuralnet::Model model) {
  auto version = neuralnet::model_version_id(model);
  return {std::make_shared<const neuralnet::Model>(std::move(model)), std::move(version)};
}

}  // namespace

ModelSlot::ModelSlot(neuralnet::Model model) : current_(snapshot_of(std::move(model))) {}

std::unique_ptr<ModelSlot> ModelSlot::open(const std::optional<std::filesystem::path>& path) {
  if (path) return std::make_unique<ModelSlot>(neuralnet::load_model_file(*path));
  return std::make_unique<ModelSlot>(neuralnet::Model::build(neuralnet::NetworkSpec::canonical(), 0));
}

ModelSlot::Snapshot ModelSlot::current() const {
  std::lock_guard lock(mu_);
  return current_;
}

void ModelSlot::replace(neuralnet::Model model) {
  auto next = snapshot_of(std::move(model));
  std::lock_guard lock(mu_);
  current_ = std::move(next);
}

}  // namespace fieldlink::diagnosis
