#pragma once

#include <cstdint>
#include <vector>

#include "fieldlink/neuralnet/augment.hpp"
#include "fieldlink/neuralnet/dataset.hpp"
#include "fieldlink/neuralnet/model.hpp"

namespace fieldlink::neuralnet {

struct TrainConfig {
  std::size_t epochs = 200;
  double train_fraction = 0.8;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  AugmentConfig augmentation;
};

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per class, round(fraction * n_c) items (at least one) go to training.
DatasetSplit stratified_split(const LabeledDataset& data, double train_fraction, std::uint64_t seed);

struct TrainResult {
  Model model;
  std::vector<double> loss_trace;  // mean training loss per epoch
  DatasetSplit split;
};

/// Mini-batch SGD with momentum on softmax cross-entropy. Augmentation is
/// applied to training items only.
/// Throws Error(degenerate_dataset) when a class is missing from the
/// training split, Error(invalid_argument) on a bad config, and
/// Error(spec_error) if the model does not emit kClassCount outputs.
TrainResult train(Model model, const LabeledDataset& data, const TrainConfig& cfg);

}  // namespace fieldlink::neuralnet
