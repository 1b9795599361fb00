#pragma once

// One-vs-rest soft-margin SVMs with a polynomial kernel (x.y + 1)^p,
// each trained by sequential minimal optimization with maximal-gain
// (second order) working-set selection.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gridfault/baselines/knn.hpp"

namespace gridfault::baselines {

struct PolynomialKernel {
  int degree = 3;
  double operator()(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const {
    return std::pow(a.dot(b) + 1.0, degree);
  }
};

/// Binary SVM in dual form. Labels are +1 / -1.
struct BinarySvm {
  std::vector<double> alpha;   // one per training point, in [0, C]
  std::vector<double> y;       // +1 / -1
  double bias = 0.0;           // f(x) = sum alpha_i y_i k(x_i, x) + bias
  int iterations = 0;
  double kkt_gap = 0.0;        // max violating-pair gap at termination
};

struct SvmModel {
  Matrix support;  // training points (all retained; zero-alpha rows contribute nothing)
  PolynomialKernel kernel;
  double C = 10.0;
  std::vector<BinarySvm> machines;  // one per category, positive class = category
  std::vector<bool> present;        // categories that occur in training data
};

struct SmoOptions {
  double tolerance = 1e-3;
  long max_iterations = 1'000'000;
};

namespace detail {

inline Matrix gram(const Matrix& X, const PolynomialKernel& k) {
  const Eigen::Index n = X.rows();
  Matrix K = X * X.transpose();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = std::pow(K(i, j) + 1.0, k.degree);
  return K;
}

}  // namespace detail

inline BinarySvm smo_solve(const Matrix& K, std::span<const double> y, double C,
                           const SmoOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(y.size());
  require(K.rows() == n && K.cols() == n, "smo: kernel matrix shape mismatch");
  BinarySvm m;
  m.y.assign(y.begin(), y.end());
  m.alpha.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> G(static_cast<std::size_t>(n), -1.0);  // gradient of the dual objective
  auto Q = [&](Eigen::Index i, Eigen::Index j) { return y[i] * y[j] * K(i, j); };
  auto& a = m.alpha;
  constexpr double kTau = 1e-12;

  auto in_up = [&](Eigen::Index t) { return (y[t] > 0 && a[t] < C) || (y[t] < 0 && a[t] > 0); };
  auto in_low = [&](Eigen::Index t) { return (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < C); };

  long iter = 0;
  while (true) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t)
      if (in_up(t) && -y[t] * G[t] >= gmax) {
        gmax = -y[t] * G[t];
        i = t;
      }
    double gmin = std::numeric_limits<double>::infinity();
    double best_gain = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      gmin = std::min(gmin, -y[t] * G[t]);
      if (i < 0) continue;
      const double b = gmax + y[t] * G[t];
      if (b > 0) {
        double quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (quad <= 0) quad = kTau;
        const double gain = -(b * b) / quad;
        if (gain <= best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    m.kkt_gap = gmax - gmin;
    if (i < 0 || j < 0 || m.kkt_gap < opt.tolerance) break;
    if (++iter > opt.max_iterations)
      fail(ErrorKind::Convergence, "smo: no convergence after " + std::to_string(opt.max_iterations) +
                                       " iterations (KKT gap " + std::to_string(m.kkt_gap) + ")");

    const double ai_old = a[i], aj_old = a[j];
    if (y[i] != y[j]) {
      double quad = K(i, i) + K(j, j) + 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) { a[j] = 0; a[i] = diff; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
      }
      if (diff > 0) {
        if (a[i] > C) { a[i] = C; a[j] = C - diff; }
      } else {
        if (a[j] > C) { a[j] = C; a[i] = C + diff; }
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) { a[i] = C; a[j] = sum - C; }
      } else {
        if (a[j] < 0) { a[j] = 0; a[i] = sum; }
      }
      if (sum > C) {
        if (a[j] > C) { a[j] = C; a[i] = sum - C; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = sum; }
      }
    }
    const double di = a[i] - ai_old, dj = a[j] - aj_old;
    for (Eigen::Index t = 0; t < n; ++t) G[t] += Q(t, i) * di + Q(t, j) * dj;
  }
  m.iterations = static_cast<int>(iter);

  // rho from free support vectors, midpoint of the feasible interval otherwise.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (a[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  m.bias = -rho;
  return m;
}

inline double decision_value(const SvmModel& model, const BinarySvm& m, const Eigen::Ref<const Vector>& x) {
  double f = m.bias;
  for (Eigen::Index i = 0; i < model.support.rows(); ++i) {
    const double a = m.alpha[static_cast<std::size_t>(i)];
    if (a != 0.0) f += a * m.y[static_cast<std::size_t>(i)] * model.kernel(model.support.row(i).transpose(), x);
  }
  return f;
}

inline SvmModel svm_fit(const Matrix& X, std::span<const int> labels, int degree, double C = 10.0,
                        const SmoOptions& opt = {}) {
  require(X.rows() == static_cast<Eigen::Index>(labels.size()), "svm_fit: label count mismatch");
  require(degree >= 1 && C > 0, "svm_fit: degree must be >= 1 and C positive");
  std::vector<bool> present(kNumCategories, false);
  for (int y : labels) {
    require(y >= 0 && y < kNumCategories, "svm_fit: label outside [0, K)");
    present[static_cast<std::size_t>(y)] = true;
  }
  require(std::count(present.begin(), present.end(), true) >= 2, "svm_fit: need at least two categories");

  SvmModel model;
  model.support = X;
  model.kernel.degree = degree;
  model.C = C;
  model.present = present;
  const Matrix K = detail::gram(X, model.kernel);
  for (int c = 0; c < kNumCategories; ++c) {
    std::vector<double> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == c ? 1.0 : -1.0;
    if (!present[static_cast<std::size_t>(c)]) {
      model.machines.emplace_back();
      continue;
    }
    model.machines.push_back(smo_solve(K, y, C, opt));
  }
  return model;
}

/// Decision values per category; absent categories read -inf.
inline std::array<double, kNumCategories> svm_decision_values(const SvmModel& model,
                                                              const Eigen::Ref<const Vector>& x) {
  require(x.size() == model.support.cols(), "svm_predict: dimension mismatch");
  std::array<double, kNumCategories> out;
  for (int c = 0; c < kNumCategories; ++c)
    out[static_cast<std::size_t>(c)] = model.present[static_cast<std::size_t>(c)]
                                           ? decision_value(model, model.machines[static_cast<std::size_t>(c)], x)
                                           : -std::numeric_limits<double>::infinity();
  return out;
}

inline Category svm_predict(const SvmModel& model, const Eigen::Ref<const Vector>& x) {
  const auto dv = svm_decision_values(model, x);
  int best = 0;
  for (int c = 1; c < kNumCategories; ++c)
    if (dv[static_cast<std::size_t>(c)] > dv[static_cast<std::size_t>(best)]) best = c;
  return category_from_index(best);
}

inline std::vector<Category> svm_predict_rows(const SvmModel& model, const Matrix& X) {
  std::vector<Category> out;
  for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(svm_predict(model, X.row(i).transpose()));
  return out;
}

struct SvmSelection {
  int degree = 2;
  double training_accuracy = 0.0;
};

/// Picks the kernel degree with the highest training accuracy; ties go to
/// the lower degree.
inline SvmSelection svm_select_degree(const Matrix& X, std::span<const int> labels,
                                      std::span<const int> degrees, double C = 10.0) {
  require(!degrees.empty(), "svm_select_degree: no candidate degrees");
  SvmSelection best{-1, -1.0};
  for (int d : degrees) {
    const SvmModel m = svm_fit(X, labels, d, C);
    int hits = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      hits += index_of(svm_predict(m, X.row(i).transpose())) == labels[static_cast<std::size_t>(i)];
    const double acc = X.rows() ? static_cast<double>(hits) / static_cast<double>(X.rows()) : 0.0;
    if (acc > best.training_accuracy) best = {d, acc};
  }
  return best;
}

}  // namespace gridfault::baselines
