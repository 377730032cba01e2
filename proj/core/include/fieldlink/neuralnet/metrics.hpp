#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fieldlink/neuralnet/dataset.hpp"
#include "fieldlink/neuralnet/model.hpp"

namespace fieldlink::neuralnet {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  void add(std::size_t truth, std::size_t predicted);

  std::size_t classes() const noexcept { return n_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;
  std::size_t row_sum(std::size_t truth) const;
  std::size_t column_sum(std::size_t predicted) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvaluationReport {
  ConfusionMatrix confusion{kClassCount};
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
};

/// 2PR / (P + R), or 0 when P + R = 0.
double f1_score(double precision, double recall) noexcept;

/// Precision and recall fall back to 0 for classes never predicted / never present.
EvaluationReport report_from_confusion(const ConfusionMatrix& confusion);

EvaluationReport evaluate_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                      std::size_t classes);

using Classifier = std::function<std::size_t(const vegindex::RgbImage&)>;

/// Throws Error(invalid_argument) on an empty dataset.
EvaluationReport evaluate(const Classifier& classify, const LabeledDataset& data);
EvaluationReport evaluate(const Model& model, const LabeledDataset& data);

/// "class,precision,recall,f1" then one row per class, then an accuracy row.
std::string to_csv(const EvaluationReport& report);

}  // namespace fieldlink::neuralnet
