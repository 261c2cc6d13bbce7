#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dlr::classifier {

/// B state vectors (one per row) with class indices in [0, class_count).
struct DesignMatrix {
  Eigen::MatrixXd rows;
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
  [[nodiscard]] std::size_t dim() const noexcept {
    return static_cast<std::size_t>(rows.cols());
  }
};

/// Linear readout: scores = W^T x.
struct RidgeModel {
  Eigen::MatrixXd weights;  ///< N_in x C
  double lambda = 1e-3;
  std::vector<std::string> label_map;  ///< class index -> label

  [[nodiscard]] std::size_t input_dim() const noexcept {
    return static_cast<std::size_t>(weights.rows());
  }
  [[nodiscard]] std::size_t class_count() const noexcept {
    return static_cast<std::size_t>(weights.cols());
  }
};

struct Prediction {
  std::size_t label = 0;
  Eigen::VectorXd scores;
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  Eigen::MatrixXi confusion;  ///< rows: true class, cols: predicted class
  std::size_t total = 0;
  std::size_t correct = 0;
};

inline constexpr double kDefaultLambda = 1e-3;

/// W = (X^T X + lambda I)^{-1} X^T Y with one-hot Y, solved by Cholesky.
/// Throws InvalidArgument on malformed data, SingularMatrix when the system
/// cannot be factored (only possible for lambda = 0 in exact arithmetic).
/// An empty label_map is filled with the class indices as strings.
[[nodiscard]] RidgeModel train_ridge(const DesignMatrix& data, double lambda,
                                     std::vector<std::string> label_map = {});

/// Argmax of W^T x; exact ties go to the lowest class index.
[[nodiscard]] Prediction predict(const RidgeModel& model, std::span<const double> x);

/// One prediction per row of `rows`.
[[nodiscard]] std::vector<Prediction> predict_batch(const RidgeModel& model,
                                                    const Eigen::MatrixXd& rows);

[[nodiscard]] Metrics evaluate(const RidgeModel& model, const DesignMatrix& test);

/// Metrics from precomputed predictions.
[[nodiscard]] Metrics score(std::span<const std::size_t> truth,
                            std::span<const std::size_t> predicted,
                            std::size_t class_count);

/// Multiply-accumulates to train: Gram build B*N^2, Cholesky N^3/3,
/// right-hand side B*N*C, triangular solves N^2*C (integer division).
[[nodiscard]] std::uint64_t training_macs(std::uint64_t b, std::uint64_t n_in,
                                          std::uint64_t c);

/// N_in * C.
[[nodiscard]] std::uint64_t trainable_params(std::uint64_t n_in, std::uint64_t c);

}  // namespace dlr::classifier
