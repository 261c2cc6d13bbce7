#include "dlr/classifier.hpp"

#include <cmath>
#include <string>

#include "dlr/error.hpp"

namespace dlr::classifier {
namespace {

void validate_training(const DesignMatrix& data, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("lambda must be finite and >= 0");
  const auto b = static_cast<std::size_t>(data.rows.rows());
  if (data.labels.size() != b)
    throw InvalidArgument("design matrix has " + std::to_string(b) +
                          " rows but " + std::to_string(data.labels.size()) +
                          " labels");
  if (data.class_count < 2)
    throw InvalidArgument("need at least two classes");
  if (b < data.class_count)
    throw InvalidArgument("need at least as many datapoints as classes");
  if (data.rows.cols() == 0) throw InvalidArgument("state vectors are empty");
  for (auto label : data.labels) {
    if (label >= data.class_count)
      throw InvalidArgument("label " + std::to_string(label) +
                            " out of range for " +
                            std::to_string(data.class_count) + " classes");
  }
  if (!data.rows.allFinite())
    throw InvalidArgument("design matrix contains non-finite entries");
}

std::size_t argmax_lowest(const Eigen::VectorXd& scores) {
  std::size_t best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[static_cast<Eigen::Index>(best)])
      best = static_cast<std::size_t>(c);
  }
  return best;
}

}  // namespace

RidgeModel train_ridge(const DesignMatrix& data, double lambda,
                       std::vector<std::string> label_map) {
  validate_training(data, lambda);
  const Eigen::Index n = data.rows.cols();
  const auto c = static_cast<Eigen::Index>(data.class_count);

  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(data.rows.rows(), c);
  for (Eigen::Index j = 0; j < data.rows.rows(); ++j)
    targets(j, static_cast<Eigen::Index>(data.labels[static_cast<std::size_t>(j)])) = 1.0;

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(data.rows.transpose());
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd rhs = data.rows.transpose() * targets;

  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success ||
      (lambda == 0.0 && llt.rcond() < 1e-13)) {
    throw SingularMatrix(
        "X^T X + lambda I is not positive definite (lambda = " +
        std::to_string(lambda) + "); use lambda > 0");
  }

  RidgeModel model;
  model.weights = llt.solve(rhs);
  model.lambda = lambda;
  if (!model.weights.allFinite())
    throw SingularMatrix("ridge solution is not finite; use a larger lambda");
  if (label_map.empty()) {
    for (std::size_t k = 0; k < data.class_count; ++k)
      label_map.push_back(std::to_string(k));
  }
  if (label_map.size() != data.class_count)
    throw InvalidArgument("label map size does not match class count");
  model.label_map = std::move(label_map);
  return model;
}

Prediction predict(const RidgeModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim())
    throw InvalidArgument("state vector length " + std::to_string(x.size()) +
                          " does not match model input " +
                          std::to_string(model.input_dim()));
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  Prediction p;
  p.scores = model.weights.transpose() * v;
  p.label = argmax_lowest(p.scores);
  return p;
}

std::vector<Prediction> predict_batch(const RidgeModel& model,
                                      const Eigen::MatrixXd& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.input_dim())
    throw InvalidArgument("batch width does not match model input");
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::VectorXd row = rows.row(i).transpose();
    out.push_back(predict(model, std::span<const double>(row.data(), row.size())));
  }
  return out;
}

Metrics score(std::span<const std::size_t> truth,
              std::span<const std::size_t> predicted, std::size_t class_count) {
  if (truth.empty()) throw InvalidArgument("test set is empty");
  if (truth.size() != predicted.size())
    throw InvalidArgument("truth and prediction counts differ");
  Metrics m;
  const auto c = static_cast<Eigen::Index>(class_count);
  m.confusion = Eigen::MatrixXi::Zero(c, c);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= class_count || predicted[i] >= class_count)
      throw InvalidArgument("label out of range");
    m.confusion(static_cast<Eigen::Index>(truth[i]),
                static_cast<Eigen::Index>(predicted[i])) += 1;
    if (truth[i] == predicted[i]) ++m.correct;
  }
  m.total = truth.size();
  m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
  m.per_class_accuracy.resize(class_count, 0.0);
  for (Eigen::Index k = 0; k < c; ++k) {
    const int row_total = m.confusion.row(k).sum();
    m.per_class_accuracy[static_cast<std::size_t>(k)] =
        row_total > 0 ? static_cast<double>(m.confusion(k, k)) / row_total : 0.0;
  }
  return m;
}

Metrics evaluate(const RidgeModel& model, const DesignMatrix& test) {
  if (test.size() == 0) throw InvalidArgument("test set is empty");
  if (static_cast<std::size_t>(test.rows.rows()) != test.size())
    throw InvalidArgument("test rows and labels differ in count");
  const auto predictions = predict_batch(model, test.rows);
  std::vector<std::size_t> predicted;
  predicted.reserve(predictions.size());
  for (const auto& p : predictions) predicted.push_back(p.label);
  return score(test.labels, predicted, model.class_count());
}

std::uint64_t training_macs(std::uint64_t b, std::uint64_t n_in, std::uint64_t c) {
  return b * n_in * n_in + n_in * n_in * n_in / 3 + b * n_in * c + n_in * n_in * c;
}

std::uint64_t trainable_params(std::uint64_t n_in, std::uint64_t c) {
  return n_in * c;
}

}  // namespace dlr::classifier
