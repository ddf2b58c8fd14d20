#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gaitgender/error.hpp"

namespace gaitgender {

inline constexpr int kMale = +1;
inline constexpr int kFemale = -1;

template <typename Scalar>
using FeatureMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One row per sample; labels in {-1, +1}.
template <typename Scalar = double>
struct TrainingSet {
  FeatureMatrix<Scalar> features;
  std::vector<int> labels;
};

template <typename Scalar = double>
struct LinearClassifier {
  Vector<Scalar> weights;
  Scalar bias = 0;
  int view = 0;

  template <typename Derived>
  Scalar decision_value(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != weights.size()) {
      throw Error(ErrorCode::DimensionMismatch, "feature dimension " + std::to_string(x.size()) +
                                                    " != classifier dimension " +
                                                    std::to_string(weights.size()));
    }
    return weights.dot(x) + bias;
  }
};

template <typename Scalar = double>
using ClassifierBank = std::map<int, LinearClassifier<Scalar>>;

struct SvmOptions {
  double C = 1.0;
  /// Outer epochs over the whole training set.
  int max_iter = 100;
  /// Stop once the projected-gradient spread falls below this value.
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
};

/// Per-epoch objectives recorded during training.
struct TrainingTrace {
  /// Dual objective 0.5*|w|^2 - sum(alpha), minimised by the solver.
  std::vector<double> dual_objective;
  /// Primal objective 0.5*|w|^2 + C * sum(hinge), index 0 is the w = 0 start.
  std::vector<double> primal_objective;
  int epochs = 0;
};

struct Prediction {
  int label = kMale;
  double decision = 0.0;
};

/// Soft-margin primal objective; the bias is regularised like a weight.
template <typename Scalar>
double primal_objective(const TrainingSet<Scalar>& data, const Vector<Scalar>& w, Scalar b, double C) {
  const Vector<Scalar> margins = data.features * w + Vector<Scalar>::Constant(data.features.rows(), b);
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    hinge += std::max(0.0, 1.0 - data.labels[i] * static_cast<double>(margins[i]));
  }
  return 0.5 * (static_cast<double>(w.squaredNorm()) + static_cast<double>(b) * b) + C * hinge;
}

/// Linear SVM with hinge loss, solved by dual coordinate descent on the
/// feature vector augmented with a constant 1 for the bias. Each epoch visits
/// all samples in a seeded random order.
template <typename Scalar>
LinearClassifier<Scalar> train(const TrainingSet<Scalar>& data, const SvmOptions& options,
                               TrainingTrace* trace = nullptr) {
  const auto n = data.features.rows();
  if (static_cast<std::size_t>(n) != data.labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows and label count differ");
  }
  if (options.C <= 0.0) throw Error(ErrorCode::InvalidArgument, "C must be positive");
  if (options.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  bool has_pos = false;
  bool has_neg = false;
  for (int y : data.labels) {
    if (y == kMale) {
      has_pos = true;
    } else if (y == kFemale) {
      has_neg = true;
    } else {
      throw Error(ErrorCode::InvalidArgument, "labels must be -1 or +1");
    }
  }
  if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClass, "training set has a single class");

  const double C = options.C;
  Vector<Scalar> w = Vector<Scalar>::Zero(data.features.cols());
  double b = 0.0;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    diag[i] = static_cast<double>(data.features.row(i).squaredNorm()) + 1.0;
  }

  auto dual = [&] {
    return 0.5 * (static_cast<double>(w.squaredNorm()) + b * b) -
           std::accumulate(alpha.begin(), alpha.end(), 0.0);
  };
  if (trace) {
    *trace = {};
    trace->primal_objective.push_back(primal_objective(data, w, static_cast<Scalar>(b), C));
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);

  int epoch = 0;
  while (epoch < options.max_iter) {
    ++epoch;
    // Fisher-Yates with the raw engine output keeps the order portable.
    for (Eigen::Index i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % static_cast<std::uint64_t>(i + 1)]);
    }
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i : order) {
      const double y = data.labels[i];
      const double g = y * (static_cast<double>(data.features.row(i).dot(w)) + b) - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] == C) {
        pg = std::max(g, 0.0);
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) < 1e-12) continue;
      const double updated = std::clamp(alpha[i] - g / diag[i], 0.0, C);
      const double delta = (updated - alpha[i]) * y;
      alpha[i] = updated;
      w += static_cast<Scalar>(delta) * data.features.row(i).transpose();
      b += delta;
    }
    if (trace) {
      trace->dual_objective.push_back(dual());
      trace->primal_objective.push_back(primal_objective(data, w, static_cast<Scalar>(b), C));
    }
    if (pg_max - pg_min < options.tolerance) break;
  }
  if (trace) trace->epochs = epoch;

  LinearClassifier<Scalar> clf;
  clf.weights = std::move(w);
  clf.bias = static_cast<Scalar>(b);
  return clf;
}

/// sign(w.x + b) with sign(0) = +1.
template <typename Scalar, typename Derived>
Prediction predict(const LinearClassifier<Scalar>& clf, const Eigen::MatrixBase<Derived>& x) {
  const double value = static_cast<double>(clf.decision_value(x));
  return {value >= 0.0 ? kMale : kFemale, value};
}

template <typename Scalar>
std::vector<Prediction> predict_batch(const LinearClassifier<Scalar>& clf,
                                      const FeatureMatrix<Scalar>& features) {
  std::vector<Prediction> out;
  out.reserve(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out.push_back(predict(clf, features.row(i).transpose()));
  }
  return out;
}

/// Independent fit per view; a failure names the offending view.
template <typename Scalar>
ClassifierBank<Scalar> train_bank(const std::map<int, TrainingSet<Scalar>>& per_view,
                                  std::span<const int> views, const SvmOptions& options) {
  ClassifierBank<Scalar> bank;
  for (int view : views) {
    const auto it = per_view.find(view);
    if (it == per_view.end()) {
      throw Error(ErrorCode::MissingView, "no training set for view " + std::to_string(view));
    }
    try {
      auto clf = train(it->second, options);
      clf.view = view;
      bank.emplace(view, std::move(clf));
    } catch (const Error& e) {
      throw Error(e.code(), "view " + std::to_string(view) + ": " + e.what());
    }
  }
  return bank;
}

}  // namespace gaitgender
