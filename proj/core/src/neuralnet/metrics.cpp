#include "fieldlink/neuralnet/metrics.hpp"

#include <iomanip>
#include <sstream>

#include "fieldlink/common/error.hpp"

namespace fieldlink::neuralnet {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= n_ || predicted >= n_) throw Error(Errc::invalid_argument, "class index outside confusion matrix");
  ++counts_[truth * n_ + predicted];
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t t = 0;
  for (std::size_t i = 0; i < n_; ++i) t += counts_[i * n_ + i];
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t t = 0;
  for (std::size_t j = 0; j < n_; ++j) t += at(truth, j);
  return t;
}

std::size_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < n_; ++i) t += at(i, predicted);
  return t;
}

double f1_score(double precision, double recall) noexcept {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

EvaluationReport report_from_confusion(const ConfusionMatrix& confusion) {
  EvaluationReport report{confusion, {}, 0.0};
  const auto n = confusion.classes();
  report.per_class.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    auto& m = report.per_class[c];
    const auto tp = static_cast<double>(confusion.at(c, c));
    const auto predicted = confusion.column_sum(c);
    m.support = confusion.row_sum(c);
    m.precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
    m.recall = m.support > 0 ? tp / static_cast<double>(m.support) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
  }
  const auto total = confusion.total();
  report.accuracy = total > 0 ? static_cast<double>(confusion.trace()) / static_cast<double>(total) : 0.0;
  return report;
}

EvaluationReport evaluate_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                      std::size_t classes) {
  if (truth.size() != predicted.size()) throw Error(Errc::invalid_argument, "label and prediction counts differ");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return report_from_confusion(cm);
}

EvaluationReport evaluate(const Classifier& classify, const LabeledDataset& data) {
  if (data.empty()) throw Error(Errc::invalid_argument, "evaluation dataset is empty");
  ConfusionMatrix cm(kClassCount);
  for (const auto& item : data) cm.add(class_index(item.label), classify(item.image));
  return report_from_confusion(cm);
}

EvaluationReport evaluate(const Model& model, const LabeledDataset& data) {
  return evaluate(
      [&](const vegindex::RgbImage& img) { return predict(model, image_to_tensor(img, model.input_shape())).top_index; },
      data);
}

std::string to_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "class,precision,recall,f1\n";
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    if (report.per_class.size() == kClassCount) {
      out << class_name(kAllClasses[c]);
    } else {
      out << c;
    }
    out << ',' << m.precision << ',' << m.recall << ',' << m.f1 << '\n';
  }
  out << "accuracy,,," << report.accuracy << '\n';
  return out.str();
}

}  // namespace fieldlink::neuralnet
