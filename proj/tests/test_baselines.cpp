#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gridfault/baselines/knn.hpp"
#include "gridfault/baselines/svm.hpp"

using namespace gridfault;
using namespace gridfault::baselines;

namespace {

void blobs(std::mt19937_64& rng, int n, int D, double spread, Matrix& X, std::vector<int>& y, int categories = 4) {
  std::normal_distribution<double> g(0.0, spread);
  X.resize(n, D);
  y.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    y[i] = i % categories;
    for (int j = 0; j < D; ++j) X(i, j) = (j == y[i] % D ? 1.0 : 0.0) + g(rng);
  }
}

// Brute force: full distance list, stable sort, count the first k labels.
int oracle_knn(const Matrix& X, const std::vector<int>& y, const Vector& q, int k) {
  std::vector<std::pair<double, int>> d;
  for (int i = 0; i < X.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < X.cols(); ++j) s += (X(i, j) - q(j)) * (X(i, j) - q(j));
    d.push_back({std::sqrt(s), i});
  }
  std::sort(d.begin(), d.end());
  std::array<int, kNumCategories> count{};
  std::array<double, kNumCategories> dist{};
  for (int i = 0; i < k; ++i) {
    ++count[y[d[i].second]];
    dist[y[d[i].second]] += d[i].first;
  }
  int best = -1;
  for (int c = 0; c < kNumCategories; ++c) {
    if (!count[c]) continue;
    if (best < 0 || count[c] > count[best] || (count[c] == count[best] && dist[c] / count[c] < dist[best] / count[best]))
      best = c;
  }
  return best;
}

int accuracy_hits(const KnnModel& m, const Matrix& X, const std::vector<int>& y) {
  int hits = 0;
  for (int i = 0; i < X.rows(); ++i) hits += index_of(knn_predict(m, X.row(i).transpose())) == y[i];
  return hits;
}

double kernel_expansion(const Matrix& X, const BinarySvm& m, const Vector& x, int degree) {
  double f = m.bias;
  for (int i = 0; i < X.rows(); ++i) {
    double dot = 0.0;
    for (int j = 0; j < X.cols(); ++j) dot += X(i, j) * x(j);
    f += m.alpha[i] * m.y[i] * std::pow(dot + 1.0, degree);
  }
  return f;
}

}  // namespace

TEST(Knn, NearestSelf) {
  std::mt19937_64 rng(1);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 20, 3, 0.5, X, y);
  auto m = knn_fit(X, y, 1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(index_of(knn_predict(m, X.row(i).transpose())), y[i]);
}

TEST(Knn, FullKIsGlobalMajority) {
  Matrix X(5, 1);
  X << 0, 1, 2, 3, 4;
  std::vector<int> y{2, 2, 2, 0, 1};
  auto m = knn_fit(X, y, 5);
  for (double q : {-10.0, 0.0, 3.9, 50.0}) EXPECT_EQ(knn_predict(m, Vector::Constant(1, q)), Category::PF);
}

TEST(Knn, TieBreaksByMeanDistanceThenIndex) {
  Matrix X(2, 1);
  X << 1.0, 3.0;
  std::vector<int> y{3, 1};
  auto m = knn_fit(X, y, 2);
  EXPECT_EQ(knn_predict(m, Vector::Constant(1, 1.5)), Category::TD);
  EXPECT_EQ(knn_predict(m, Vector::Constant(1, 2.5)), Category::MIF);
  EXPECT_EQ(knn_predict(m, Vector::Constant(1, 2.0)), Category::MIF);
}

TEST(Knn, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 40, 2, 0.6, X, y);
  auto m = knn_fit(X, y, 3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int q = 0; q < 100; ++q) {
    Vector v(2);
    v << u(rng), u(rng);
    EXPECT_EQ(index_of(knn_predict(m, v)), oracle_knn(X, y, v, 3)) << q;
  }
}

TEST(Knn, PermutationInvariant) {
  std::mt19937_64 rng(3);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 30, 3, 0.7, X, y);
  std::vector<int> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix Xp(30, 3);
  std::vector<int> yp(30);
  for (int i = 0; i < 30; ++i) {
    Xp.row(i) = X.row(perm[i]);
    yp[i] = y[perm[i]];
  }
  auto a = knn_fit(X, y, 5), b = knn_fit(Xp, yp, 5);
  std::normal_distribution<double> g(0.5, 0.8);
  for (int q = 0; q < 100; ++q) {
    Vector v(3);
    v << g(rng), g(rng), g(rng);
    EXPECT_EQ(knn_predict(a, v), knn_predict(b, v));
  }
}

TEST(Knn, RejectsInvalidK) {
  Matrix X = Matrix::Zero(3, 2);
  std::vector<int> y{0, 1, 2};
  EXPECT_THROW(knn_fit(X, y, 0), Error);
  EXPECT_THROW(knn_fit(X, y, 4), Error);
  EXPECT_THROW(knn_fit(Matrix(0, 2), {}, 1), Error);
}

TEST(KnnSelect, LeaveOneOutOnTrainingSet) {
  // Resubstitution would always favour K = 1; with the point itself held
  // out, a mislabeled point inside each cluster makes K = 3 the winner.
  Matrix X(8, 1);
  X << 0.0, 0.1, 0.2, 0.3, 10.0, 10.1, 10.2, 10.3;
  std::vector<int> y{0, 0, 1, 0, 2, 2, 3, 2};
  std::vector<int> ks{1, 3};
  EXPECT_EQ(knn_select_k_loo(X, y, ks), 3);
}

TEST(KnnSelect, LeaveOneOutPrefersOneOnCleanClusters) {
  std::mt19937_64 rng(4);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 24, 4, 0.05, X, y);
  std::vector<int> ks{1, 3};
  EXPECT_EQ(knn_select_k_loo(X, y, ks), 1);
}

TEST(KnnSelect, SingleCandidate) {
  std::mt19937_64 rng(5);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 20, 3, 0.5, X, y);
  std::vector<int> ks{7};
  EXPECT_EQ(knn_select_k(X, y, X, y, ks), 7);
  EXPECT_EQ(knn_select_k_loo(X, y, ks), 7);
}

TEST(KnnSelect, MatchesGridSearchOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix Xt, Xs;
    std::vector<int> yt, ys;
    blobs(rng, 40, 2, 0.8, Xt, yt, 2);
    blobs(rng, 30, 2, 0.8, Xs, ys, 2);
    const auto& ks = default_k_candidates();
    int best_k = -1, best_hits = -1;
    for (int k : ks) {
      const int hits = accuracy_hits(knn_fit(Xt, yt, k), Xs, ys);
      if (hits > best_hits) best_hits = hits, best_k = k;
    }
    EXPECT_EQ(knn_select_k(Xt, yt, Xs, ys, ks), best_k) << trial;
  }
}

TEST(KnnSelect, LooMatchesGridSearchOracle) {
  std::mt19937_64 rng(7);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 30, 2, 0.9, X, y, 2);
  const auto& ks = default_k_candidates();
  int best_k = -1, best_hits = -1;
  for (int k : ks) {
    int hits = 0;
    for (int i = 0; i < X.rows(); ++i) {
      Matrix rest(X.rows() - 1, X.cols());
      std::vector<int> ry;
      for (int j = 0, r = 0; j < X.rows(); ++j)
        if (j != i) rest.row(r++) = X.row(j), ry.push_back(y[j]);
      hits += index_of(knn_predict(knn_fit(rest, ry, k), X.row(i).transpose())) == y[i];
    }
    if (hits > best_hits) best_hits = hits, best_k = k;
  }
  EXPECT_EQ(knn_select_k_loo(X, y, ks), best_k);
}

TEST(Svm, SeparablePairLinearKernel) {
  Matrix X(2, 2);
  X << 0.0, 0.0, 1.0, 1.0;
  std::vector<int> y{0, 2};
  auto m = svm_fit(X, y, 1);
  EXPECT_EQ(svm_predict(m, X.row(0).transpose()), Category::SIF);
  EXPECT_EQ(svm_predict(m, X.row(1).transpose()), Category::PF);
  for (int c : {0, 2}) {
    const auto& bin = m.machines[static_cast<std::size_t>(c)];
    for (int i = 0; i < 2; ++i) {
      const double margin = bin.y[i] * decision_value(m, bin, X.row(i).transpose());
      EXPECT_GE(margin, 1.0 - 1e-3);
    }
  }
}

TEST(Svm, XorWithQuadraticKernel) {
  Matrix X(4, 2);
  X << 1, 1, -1, -1, 1, -1, -1, 1;
  std::vector<int> y{0, 0, 1, 1};
  auto m = svm_fit(X, y, 2);
  for (int i = 0; i < 4; ++i) {
    const auto dv = svm_decision_values(m, X.row(i).transpose());
    EXPECT_EQ(dv[y[i]] > dv[1 - y[i]], true) << i;
    EXPECT_EQ(index_of(svm_predict(m, X.row(i).transpose())), y[i]);
  }
}

TEST(Svm, DecisionValuesMatchKernelExpansion) {
  std::mt19937_64 rng(8);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 24, 3, 0.6, X, y);
  for (int degree : {2, 3}) {
    auto m = svm_fit(X, y, degree, 10.0);
    std::normal_distribution<double> g(0.3, 0.7);
    for (int q = 0; q < 20; ++q) {
      Vector v(3);
      v << g(rng), g(rng), g(rng);
      const auto dv = svm_decision_values(m, v);
      for (int c = 0; c < kNumCategories; ++c)
        EXPECT_NEAR(dv[c], kernel_expansion(X, m.machines[c], v, degree), 1e-9);
    }
  }
}

TEST(Svm, DualFeasibility) {
  std::mt19937_64 rng(9);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 40, 3, 0.8, X, y);
  for (double C : {0.5, 10.0}) {
    auto m = svm_fit(X, y, 3, C);
    for (const auto& bin : m.machines) {
      double balance = 0.0;
      for (std::size_t i = 0; i < bin.alpha.size(); ++i) {
        EXPECT_GE(bin.alpha[i], 0.0);
        EXPECT_LE(bin.alpha[i], C);
        balance += bin.alpha[i] * bin.y[i];
      }
      EXPECT_NEAR(balance, 0.0, 1e-6);
      EXPECT_LE(bin.kkt_gap, 1e-3);
    }
  }
}

TEST(Svm, AbsentCategoryNeverPredicted) {
  std::mt19937_64 rng(10);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 18, 3, 0.4, X, y, 3);
  auto m = svm_fit(X, y, 2);
  EXPECT_FALSE(m.present[3]);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int q = 0; q < 50; ++q) {
    Vector v(3);
    v << g(rng), g(rng), g(rng);
    EXPECT_NE(svm_predict(m, v), Category::TD);
  }
}

TEST(Svm, Rejections) {
  Matrix X = Matrix::Identity(3, 3);
  std::vector<int> one{1, 1, 1};
  EXPECT_THROW(svm_fit(X, one, 2), Error);
  std::vector<int> y{0, 1, 1};
  EXPECT_THROW(svm_fit(X, y, 0), Error);
  EXPECT_THROW(svm_fit(X, y, 2, 0.0), Error);
}

TEST(Svm, IterationCapIsAConvergenceError) {
  std::mt19937_64 rng(11);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 40, 3, 1.0, X, y);
  try {
    svm_fit(X, y, 3, 10.0, SmoOptions{1e-3, 2});
    FAIL() << "expected a convergence error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Convergence);
  }
}

TEST(Svm, DegreeSelectionByTrainingAccuracy) {
  std::mt19937_64 rng(12);
  Matrix X;
  std::vector<int> y;
  blobs(rng, 32, 3, 0.7, X, y);
  std::vector<int> degrees{2, 3};
  auto sel = svm_select_degree(X, y, degrees);
  double acc[2];
  for (int i = 0; i < 2; ++i) {
    auto m = svm_fit(X, y, degrees[i]);
    int hits = 0;
    for (int r = 0; r < X.rows(); ++r) hits += index_of(svm_predict(m, X.row(r).transpose())) == y[r];
    acc[i] = hits / 32.0;
  }
  EXPECT_EQ(sel.degree, acc[1] > acc[0] ? 3 : 2);
  EXPECT_DOUBLE_EQ(sel.training_accuracy, std::max(acc[0], acc[1]));
}
