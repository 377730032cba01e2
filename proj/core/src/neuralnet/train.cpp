#include "fieldlink/neuralnet/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "fieldlink/common/error.hpp"

namespace fieldlink::neuralnet {
namespace {

// Distinct streams so that e.g. changing augmentation does not reshuffle the split.
enum Stream : std::uint64_t { kSplit = 1, kShuffle = 2, kAugment = 3, kDropout = 4 };

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw Error(Errc::invalid_argument, "epochs must be at least 1");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw Error(Errc::invalid_argument, "train_fraction must lie strictly between 0 and 1");
  }
  if (cfg.batch_size < 1) throw Error(Errc::invalid_argument, "batch size must be at least 1");
  if (!(cfg.learning_rate > 0.0)) throw Error(Errc::invalid_argument, "learning rate must be positive");
}

}  // namespace

DatasetSplit stratified_split(const LabeledDataset& data, double train_fraction, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[class_index(data[i].label)].push_back(i);

  Rng rng = derive_rng(seed, kSplit);
  DatasetSplit split;
  for (auto& members : by_class) {
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size());
    split.train.insert(split.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

TrainResult train(Model model, const LabeledDataset& data, const TrainConfig& cfg) {
  validate(cfg);
  if (data.empty()) throw Error(Errc::degenerate_dataset, "training dataset is empty");
  const auto& shapes = model.output_shapes();
  if (shapes.empty() || shapes.back() != Shape{kClassCount}) {
    throw Error(Errc::spec_error, "classifier must end in " + std::to_string(kClassCount) + " outputs");
  }

  TrainResult result{std::move(model), {}, stratified_split(data, cfg.train_fraction, cfg.seed)};
  std::array<bool, kClassCount> present{};
  for (auto i : result.split.train) present[class_index(data[i].label)] = true;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (!present[c]) {
      throw Error(Errc::degenerate_dataset,
                  std::string("class ") + std::string(class_name(kAllClasses[c])) + " is absent from the training split");
    }
  }

  Model& m = result.model;
  Rng shuffle_rng = derive_rng(cfg.seed, kShuffle);
  Rng augment_rng = derive_rng(cfg.seed, kAugment);
  Rng dropout_rng = derive_rng(cfg.seed, kDropout);

  // Augmentation acts on the original image; cache the no-augmentation tensors.
  std::vector<Tensor> plain;
  if (!cfg.augmentation.enabled) {
    plain.reserve(data.size());
    for (const auto& item : data) plain.push_back(image_to_tensor(item.image, m.input_shape()));
  }

  Gradients velocity = m.zero_gradients();
  std::vector<std::size_t> order = result.split.train;
  result.loss_trace.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, order.size());
      Gradients grads = m.zero_gradients();
      for (std::size_t k = start; k < end; ++k) {
        const auto& item = data[order[k]];
        Tensor input = cfg.augmentation.enabled
                           ? image_to_tensor(augment(item.image, augment_rng, cfg.augmentation), m.input_shape())
                           : plain[order[k]];
        const auto pass = forward(m, input, Mode::train, &dropout_rng);
        epoch_loss += backward(m, pass, class_index(item.label), grads);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      auto& params = m.parameters();
      for (std::size_t li = 0; li < params.size(); ++li) {
        if (params[li].weights.empty()) continue;
        auto update = [&](Tensor& p, Tensor& v, const Tensor& g) {
          for (std::size_t j = 0; j < p.size(); ++j) {
            v[j] = cfg.momentum * v[j] - cfg.learning_rate * g[j] * scale;
            p[j] += v[j];
          }
        };
        update(params[li].weights, velocity[li].weights, grads[li].weights);
        update(params[li].bias, velocity[li].bias, grads[li].bias);
      }
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

}  // namespace fieldlink::neuralnet
