#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gridfault/aplcore/association.hpp"
#include "gridfault/aplcore/gradients.hpp"
#include "gridfault/aplcore/losses.hpp"
#include "gridfault/aplcore/model_io.hpp"
#include "gridfault/aplcore/predict.hpp"
#include "gridfault/aplcore/trainer.hpp"

using namespace gridfault;
using namespace gridfault::aplcore;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

std::vector<int> random_labels(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> u(0, kNumCategories - 1);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = u(rng);
  return y;
}

// Naive reference implementations, written loop by loop.
std::vector<std::vector<double>> naive_softmax_rows(const std::vector<std::vector<double>>& x) {
  std::vector<std::vector<double>> out = x;
  for (auto& row : out) {
    double m = row[0];
    for (double v : row) m = std::max(m, v);
    double z = 0.0;
    for (double& v : row) z += (v = std::exp(v - m));
    for (double& v : row) v /= z;
  }
  return out;
}

struct NaiveAssociation {
  std::vector<std::vector<double>> pab, pba, paba;
};

NaiveAssociation naive_association(const Matrix& A, const Matrix& B) {
  const auto ns = static_cast<std::size_t>(A.rows()), nt = static_cast<std::size_t>(B.rows());
  std::vector<std::vector<double>> m(ns, std::vector<double>(nt)), mt(nt, std::vector<double>(ns));
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t k = 0; k < nt; ++k) {
      double dot = 0.0;
      for (Eigen::Index c = 0; c < A.cols(); ++c) dot += A(i, c) * B(k, c);
      m[i][k] = mt[k][i] = dot;
    }
  NaiveAssociation out{naive_softmax_rows(m), naive_softmax_rows(mt), {}};
  out.paba.assign(ns, std::vector<double>(ns, 0.0));
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < ns; ++j)
      for (std::size_t k = 0; k < nt; ++k) out.paba[i][j] += out.pab[i][k] * out.pba[k][j];
  return out;
}

double naive_walker(const std::vector<std::vector<double>>& paba, const std::vector<int>& y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    int count = 0;
    for (int v : y) count += v == y[i];
    for (std::size_t j = 0; j < y.size(); ++j)
      if (y[i] == y[j]) sum += (1.0 / count) * std::log(paba[i][j] + 1e-12);
  }
  return -sum / static_cast<double>(y.size());
}

double naive_visit(const std::vector<std::vector<double>>& pab) {
  const std::size_t ns = pab.size(), nt = pab[0].size();
  double sum = 0.0;
  for (std::size_t k = 0; k < nt; ++k) {
    double visit = 0.0;
    for (std::size_t i = 0; i < ns; ++i) visit += pab[i][k];
    sum += (1.0 / nt) * std::log(visit / ns + 1e-12);
  }
  return -sum;
}

struct Problem {
  Matrix W, head, xs, xt;
  Vector bias;
  std::vector<int> ys;
  Hyperparams hyper;
};

Problem random_problem(std::mt19937_64& rng, int ns, int nt, int d, int D) {
  Problem p;
  p.W = random_matrix(rng, d, D, 0.5);
  p.head = random_matrix(rng, kNumCategories, d, 0.5);
  p.bias = random_matrix(rng, kNumCategories, 1, 0.5);
  p.xs = random_matrix(rng, ns, D);
  p.xt = random_matrix(rng, nt, D);
  p.ys = random_labels(rng, ns);
  p.hyper.lambda_w = 1.0;
  p.hyper.lambda_v = 0.7;
  return p;
}

double loss_of(const Problem& p) { return total_loss(p.W, p.head, p.bias, p.hyper, p.xs, p.ys, p.xt).total; }

// Worst relative discrepancy between the analytic gradient and central
// differences over every parameter entry.
double worst_gradient_error(Problem p) {
  const Gradients g = gradients(p.W, p.head, p.bias, p.hyper, p.xs, p.ys, p.xt);
  constexpr double h = 1e-5;
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = loss_of(p);
    param = saved - h;
    const double down = loss_of(p);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };
  for (Eigen::Index i = 0; i < p.W.size(); ++i) check(p.W.data()[i], g.W.data()[i]);
  for (Eigen::Index i = 0; i < p.head.size(); ++i) check(p.head.data()[i], g.head.data()[i]);
  for (Eigen::Index i = 0; i < p.bias.size(); ++i) check(p.bias.data()[i], g.bias(i));
  return worst;
}

// Per category, sources and targets are the same scaled one-hot point in a
// 4-d embedding, so Paba approaches T and visiting is uniform.
struct AlignedCase {
  Matrix W, head, xs, xt;
  Vector bias;
  std::vector<int> ys;
};

AlignedCase aligned_case(int per_category, double scale) {
  const int D = 6, n = per_category * kNumCategories;
  AlignedCase c;
  c.W = Matrix::Zero(kNumCategories, D);
  for (int k = 0; k < kNumCategories; ++k) c.W(k, k) = scale;
  c.head = Matrix::Identity(kNumCategories, kNumCategories) * scale;
  c.bias = Vector::Zero(kNumCategories);
  c.xs = Matrix::Zero(n, D);
  for (int i = 0; i < n; ++i) {
    c.ys.push_back(i % kNumCategories);
    c.xs(i, i % kNumCategories) = 1.0;
  }
  c.xt = c.xs;
  return c;
}

double mean_row_entropy(const Matrix& T) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < T.rows(); ++i)
    for (Eigen::Index j = 0; j < T.cols(); ++j)
      if (T(i, j) > 0) h -= T(i, j) * std::log(T(i, j));
  return h / static_cast<double>(T.rows());
}

// Four well separated clusters in D dimensions.
void clustered(std::mt19937_64& rng, int per_category, int D, Matrix& X, std::vector<int>& y, double noise) {
  std::normal_distribution<double> g(0.0, noise);
  X = Matrix::Zero(per_category * kNumCategories, D);
  y.clear();
  for (int i = 0; i < X.rows(); ++i) {
    const int c = i % kNumCategories;
    y.push_back(c);
    for (int j = 0; j < D; ++j) X(i, j) = (j == c ? 1.0 : 0.0) + g(rng);
  }
}

}  // namespace

TEST(Embed, IdentityAndZero) {
  EmbeddingModel m;
  m.W = Matrix::Identity(5, 5);
  Vector v(5);
  v << 1, -2, 3, 0.5, 7;
  EXPECT_EQ(embed(m, v), v);
  m.W = Matrix::Zero(3, 5);
  EXPECT_EQ(embed(m, v), Vector::Zero(3));
}

TEST(Embed, MatchesTripleLoop) {
  std::mt19937_64 rng(1);
  Matrix W = random_matrix(rng, 6, 11), X = random_matrix(rng, 9, 11);
  Matrix E = embed_rows(W, X);
  for (int i = 0; i < 9; ++i)
    for (int r = 0; r < 6; ++r) {
      double s = 0.0;
      for (int c = 0; c < 11; ++c) s += W(r, c) * X(i, c);
      EXPECT_NEAR(E(i, r), s, 1e-12);
    }
  EmbeddingModel m;
  m.W = W;
  EXPECT_THROW(embed(m, Vector::Zero(4)), Error);
}

TEST(Association, SingleElement) {
  Matrix a(1, 2), b(1, 2);
  a << 0.3, -1.0;
  b << 2.0, 4.0;
  auto am = association(a, b);
  EXPECT_DOUBLE_EQ(am.Pab(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(am.Pba(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(am.Paba(0, 0), 1.0);
}

TEST(Association, IdenticalEmbeddingsAreUniform) {
  Matrix a = Matrix::Constant(3, 2, 0.7), b = Matrix::Constant(5, 2, 0.7);
  auto am = association(a, b);
  EXPECT_TRUE(am.Pab.isApprox(Matrix::Constant(3, 5, 0.2), 1e-12));
  EXPECT_TRUE(am.Paba.isApprox(Matrix::Constant(3, 3, 1.0 / 3.0), 1e-12));
}

TEST(Association, TwoTargetSoftmax) {
  // One source, two targets with M = [[ln 3, 0]].
  Matrix a(1, 1), b(2, 1);
  a << 1.0;
  b << std::log(3.0), 0.0;
  auto am = association(a, b);
  EXPECT_NEAR(am.M(0, 0), std::log(3.0), 1e-15);
  EXPECT_NEAR(am.Pab(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(am.Pab(0, 1), 0.25, 1e-12);
}

TEST(Association, MatchesNaiveOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix A = random_matrix(rng, 7, 4, 2.0), B = random_matrix(rng, 5, 4, 2.0);
    auto am = association(A, B);
    auto ref = naive_association(A, B);
    for (int i = 0; i < 7; ++i)
      for (int k = 0; k < 5; ++k) {
        EXPECT_NEAR(am.Pab(i, k), ref.pab[i][k], 1e-12);
        EXPECT_NEAR(am.Pba(k, i), ref.pba[k][i], 1e-12);
      }
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) EXPECT_NEAR(am.Paba(i, j), ref.paba[i][j], 1e-12);
    EXPECT_TRUE(am.Paba.isApprox(am.Pab * am.Pba, 1e-15));
  }
}

TEST(Association, RowStochasticUnderExtremeLogits) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix A(6, 1), B(9, 1);
    for (auto* m : {&A, &B})
      for (Eigen::Index i = 0; i < m->rows(); ++i) (*m)(i, 0) = std::sqrt(500.0) * u(rng);
    auto am = association(A, B);
    ASSERT_LE(am.M.cwiseAbs().maxCoeff(), 500.0);
    for (const Matrix* p : {&am.Pab, &am.Pba, &am.Paba}) {
      EXPECT_TRUE(p->allFinite());
      EXPECT_GE(p->minCoeff(), 0.0);
      EXPECT_LE(p->maxCoeff(), 1.0 + 1e-12);
      for (Eigen::Index r = 0; r < p->rows(); ++r) EXPECT_NEAR(p->row(r).sum(), 1.0, 1e-9);
    }
  }
}

TEST(TargetDistribution, BlockUniform) {
  std::vector<int> y{0, 2, 0, 1, 0};
  Matrix T = target_distribution(y);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(T.row(i).sum(), 1.0, 1e-15);
    for (int j = 0; j < 5; ++j) {
      if (y[i] == y[j]) {
        int n = 0;
        for (int v : y) n += v == y[i];
        EXPECT_EQ(T(i, j), 1.0 / n);
      } else {
        EXPECT_EQ(T(i, j), 0.0);
      }
    }
  }
}

TEST(WalkerLoss, UniformPairIsLn2) {
  Matrix P = Matrix::Constant(2, 2, 0.5);
  std::vector<int> y{1, 1};
  EXPECT_NEAR(walker_loss(P, y), -std::log(0.5 + kLogEpsilon), 1e-15);
  EXPECT_NEAR(walker_loss(P, y), 0.6931, 5e-5);
}

TEST(WalkerLoss, EqualsEntropyAtTarget) {
  std::vector<int> y{0, 0, 1, 2, 2, 2, 3};
  Matrix T = target_distribution(y);
  EXPECT_NEAR(walker_loss(T, y), mean_row_entropy(T), 1e-10);
}

TEST(WalkerLoss, AsymmetricPair) {
  Matrix P(2, 2);
  P << 0.9, 0.1, 0.1, 0.9;
  std::vector<int> y{0, 0};
  const double expected = -0.5 * (0.5 * std::log(0.9) + 0.5 * std::log(0.1) + 0.5 * std::log(0.1) + 0.5 * std::log(0.9));
  EXPECT_NEAR(expected, 1.2040, 5e-5);
  EXPECT_NEAR(walker_loss(P, y), expected, 1e-10);
}

TEST(VisitLoss, UniformIsLn2) {
  Matrix P = Matrix::Identity(2, 2);
  EXPECT_NEAR(visit_loss(P), -std::log(0.5 + kLogEpsilon), 1e-15);
  EXPECT_NEAR(visit_loss(P), 0.6931, 5e-5);
}

TEST(VisitLoss, UnvisitedTargetIsLargeButFinite) {
  Matrix P(2, 2);
  P << 1, 0, 1, 0;
  const double v = visit_loss(P);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, -0.5 * std::log(1e-12) - 0.5 * std::log(1.0 + 1e-12), 1e-9);
}

TEST(Losses, MatchNaiveOracles) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix A = random_matrix(rng, 8, 3), B = random_matrix(rng, 6, 3);
    auto y = random_labels(rng, 8);
    auto am = association(A, B);
    auto ref = naive_association(A, B);
    EXPECT_NEAR(walker_loss(am.Paba, y), naive_walker(ref.paba, y), 1e-12);
    EXPECT_NEAR(visit_loss(am.Pab), naive_visit(ref.pab), 1e-12);
  }
}

TEST(ClassificationLoss, UniformLogitsGiveLnK) {
  Matrix E = Matrix::Zero(3, 2), head = Matrix::Zero(kNumCategories, 2);
  std::vector<int> y{0, 3, 1};
  EXPECT_NEAR(classification_loss(E, head, Vector::Zero(kNumCategories), y), std::log(4.0), 1e-12);
}

TEST(ClassificationLoss, VanishesWithMargin) {
  Matrix E = Matrix::Identity(kNumCategories, kNumCategories);
  std::vector<int> y{0, 1, 2, 3};
  double prev = 1e9;
  for (double margin : {1.0, 5.0, 20.0, 50.0}) {
    Matrix head = Matrix::Identity(kNumCategories, kNumCategories) * margin;
    const double l = classification_loss(E, head, Vector::Zero(kNumCategories), y);
    EXPECT_LT(l, prev);
    prev = l;
  }
  EXPECT_LT(prev, 1e-20);
}

TEST(ClassificationLoss, MatchesNaiveOracle) {
  std::mt19937_64 rng(5);
  Matrix E = random_matrix(rng, 10, 3), head = random_matrix(rng, kNumCategories, 3);
  Vector bias = random_matrix(rng, kNumCategories, 1);
  auto y = random_labels(rng, 10);
  double ref = 0.0;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> logits(kNumCategories);
    for (int c = 0; c < kNumCategories; ++c) {
      logits[c] = bias(c);
      for (int j = 0; j < 3; ++j) logits[c] += head(c, j) * E(i, j);
    }
    double z = 0.0;
    for (double l : logits) z += std::exp(l);
    ref -= logits[y[i]] - std::log(z);
  }
  EXPECT_NEAR(classification_loss(E, head, bias, y), ref / 10.0, 1e-12);
}

TEST(TotalLoss, IsWeightedSum) {
  std::mt19937_64 rng(6);
  auto p = random_problem(rng, 9, 7, 3, 5);
  auto l = total_loss(p.W, p.head, p.bias, p.hyper, p.xs, p.ys, p.xt);
  EXPECT_NEAR(l.total, l.classification + p.hyper.lambda_w * l.walker + p.hyper.lambda_v * l.visit, 1e-12);
  p.hyper.lambda_w = p.hyper.lambda_v = 0.0;
  auto plain = total_loss(p.W, p.head, p.bias, p.hyper, p.xs, p.ys, p.xt);
  EXPECT_EQ(plain.total, plain.classification);
  EXPECT_GE(l.walker, 0.0);
  EXPECT_GE(l.visit, 0.0);
  EXPECT_GE(l.classification, 0.0);
}

TEST(TotalLoss, AlignedDomainsReachFloors) {
  auto c = aligned_case(3, 8.0);
  Hyperparams h;
  auto l = total_loss(c.W, c.head, c.bias, h, c.xs, c.ys, c.xt);
  EXPECT_NEAR(l.walker, mean_row_entropy(target_distribution(c.ys)), 1e-3);
  EXPECT_NEAR(l.visit, std::log(static_cast<double>(c.xt.rows())), 1e-3);
  EXPECT_LT(l.classification, 1e-3);
}

TEST(Gradients, MatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> n(2, 20), d(2, 8);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = d(rng);
    auto p = random_problem(rng, n(rng), n(rng), dim, dim + 3);
    EXPECT_LT(worst_gradient_error(p), 1e-4) << "trial " << trial;
  }
}

TEST(Gradients, ReduceToLinearSoftmaxClassifier) {
  std::mt19937_64 rng(8);
  auto p = random_problem(rng, 12, 5, 3, 6);
  p.hyper.lambda_w = p.hyper.lambda_v = 0.0;
  auto g = gradients(p.W, p.head, p.bias, p.hyper, p.xs, p.ys, p.xt);
  // dL/dW = (1/n) sum_i head^T (softmax_i - onehot_i) x_i^T
  Matrix ref = Matrix::Zero(3, 6);
  for (int i = 0; i < 12; ++i) {
    Vector logits = p.head * (p.W * p.xs.row(i).transpose()) + p.bias;
    Vector prob = (logits.array() - logits.maxCoeff()).exp();
    prob /= prob.sum();
    prob(p.ys[i]) -= 1.0;
    ref += p.head.transpose() * prob * p.xs.row(i) / 12.0;
  }
  EXPECT_TRUE(g.W.isApprox(ref, 1e-10));
}

TEST(Gradients, VanishAtConstructedFixedPoint) {
  auto c = aligned_case(3, 8.0);
  Hyperparams h;
  auto g = gradients(c.W, c.head, c.bias, h, c.xs, c.ys, c.xt);
  EXPECT_LT(std::sqrt(g.squared_norm()), 1e-6);
}

TEST(Gradients, LossMatchesTotalLoss) {
  std::mt19937_64 rng(9);
  auto p = random_problem(rng, 10, 8, 4, 7);
  auto g = gradients(p.W, p.head, p.bias, p.hyper, p.xs, p.ys, p.xt);
  EXPECT_NEAR(g.loss.total, loss_of(p), 1e-10);
}

TEST(Train, SeparableSourceIsFitExactly) {
  std::mt19937_64 rng(10);
  Matrix xs, xt;
  std::vector<int> ys, yt;
  clustered(rng, 10, 6, xs, ys, 0.05);
  clustered(rng, 5, 6, xt, yt, 0.05);
  Hyperparams h;
  h.dim = 3;
  h.lambda_w = h.lambda_v = 0.0;
  h.max_epochs = 600;
  h.learning_rate = 0.05;
  auto model = train(xs, ys, xt, h);
  auto pred = predict_rows(model, xs);
  for (std::size_t i = 0; i < ys.size(); ++i) EXPECT_EQ(index_of(pred[i].category), ys[i]) << i;
}

TEST(Train, IdenticalDomainsVisitUniformly) {
  std::mt19937_64 rng(11);
  Matrix xs;
  std::vector<int> ys;
  // The residual above ln(n_t) grows with the within-category spread.
  clustered(rng, 8, 6, xs, ys, 0.05);
  Hyperparams h;
  h.dim = 4;
  h.max_epochs = 600;
  auto model = train(xs, ys, xs, h);
  auto l = total_loss(model, xs, ys, xs);
  EXPECT_NEAR(l.visit, std::log(static_cast<double>(xs.rows())), 0.05);
  ASSERT_GE(model.curve.best_epoch, 0);
  EXPECT_EQ(model.curve.epochs[static_cast<std::size_t>(model.curve.best_epoch)].visit, l.visit);
}

TEST(Train, DeterministicUnderSeed) {
  std::mt19937_64 rng(12);
  Matrix xs, xt;
  std::vector<int> ys, yt;
  clustered(rng, 6, 6, xs, ys, 0.3);
  clustered(rng, 6, 6, xt, yt, 0.3);
  Hyperparams h;
  h.dim = 3;
  h.max_epochs = 100;
  h.seed = 5;
  auto a = train(xs, ys, xt, h);
  auto b = train(xs, ys, xt, h);
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  h.seed = 6;
  EXPECT_NE(train(xs, ys, xt, h).W, a.W);
}

TEST(Train, EarlyStopsOnPatience) {
  std::mt19937_64 rng(13);
  Matrix xs;
  std::vector<int> ys;
  clustered(rng, 4, 6, xs, ys, 0.1);
  Hyperparams h;
  h.dim = 2;
  h.max_epochs = 5000;
  h.patience = 5;
  h.learning_rate = 0.5;
  auto m = train(xs, ys, xs, h);
  EXPECT_TRUE(m.curve.early_stopped);
  EXPECT_LT(m.curve.epochs.size(), 5000u);
  double best = 1e300;
  for (const auto& e : m.curve.epochs) best = std::min(best, e.total);
  EXPECT_EQ(m.curve.epochs[static_cast<std::size_t>(m.curve.best_epoch)].total, best);
}

TEST(Train, CheckpointSelectorPicksHighestScore) {
  std::mt19937_64 rng(14);
  Matrix xs;
  std::vector<int> ys;
  clustered(rng, 4, 6, xs, ys, 0.1);
  Hyperparams h;
  h.dim = 2;
  h.max_epochs = 60;
  std::vector<int> scored;
  CheckpointSelector sel{10, [&](int epoch, const EmbeddingModel& m) {
                           EXPECT_EQ(m.bank.rows(), xs.rows());
                           scored.push_back(epoch);
                           return epoch == 30 ? 1.0 : 0.0;
                         }};
  auto m = train(xs, ys, xs, h, {}, sel);
  EXPECT_EQ(scored, (std::vector<int>{0, 10, 20, 30, 40, 50, 59}));
  EXPECT_EQ(m.curve.best_epoch, 30);
}

TEST(Train, RejectsBadInputs) {
  Matrix xs = Matrix::Identity(4, 6);
  std::vector<int> ys{0, 1, 2, 2};
  Hyperparams h;
  h.dim = 3;
  EXPECT_THROW(train(xs, ys, xs, h), Error);  // TD missing
  ys = {0, 1, 2, 3};
  h.dim = 6;
  EXPECT_THROW(train(xs, ys, xs, h), Error);
  h.dim = 3;
  h.learning_rate = 0.0;
  EXPECT_THROW(train(xs, ys, xs, h), Error);
}

TEST(Predict, DominantMember) {
  Matrix bank = Matrix::Identity(4, 4);
  std::vector<int> labels{0, 1, 2, 3};
  Vector target = bank.row(2).transpose() * 40.0;
  auto p = predict_embedding(bank, labels, target);
  EXPECT_EQ(p.category, Category::PF);
  EXPECT_NEAR(p.scores[2], 1.0, 1e-12);
}

TEST(Predict, IdenticalBankGivesCategoryFrequencies) {
  Matrix bank = Matrix::Constant(6, 2, 0.4);
  std::vector<int> labels{0, 0, 0, 1, 3, 3};
  Vector target(2);
  target << 1.0, -2.0;
  auto p = predict_embedding(bank, labels, target);
  EXPECT_NEAR(p.scores[0], 0.5, 1e-12);
  EXPECT_NEAR(p.scores[1], 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(p.scores[2], 0.0, 1e-12);
  EXPECT_NEAR(p.scores[3], 1.0 / 3.0, 1e-12);
  EXPECT_EQ(p.category, Category::SIF);
}

TEST(Predict, TiesGoToLowestIndex) {
  Matrix bank = Matrix::Constant(4, 2, 1.0);
  std::vector<int> labels{3, 1, 3, 1};
  auto p = predict_embedding(bank, labels, Vector::Ones(2));
  EXPECT_EQ(p.category, Category::MIF);
}

TEST(Predict, MatchesBruteForceMass) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix bank = random_matrix(rng, 12, 3, 1.5);
    auto labels = random_labels(rng, 12);
    Vector target = random_matrix(rng, 3, 1, 1.5);
    auto p = predict_embedding(bank, labels, target);
    Matrix tm = target.transpose();
    auto ref = naive_association(tm, bank);  // its pab row is the Pba row of this target
    std::array<double, kNumCategories> mass{};
    for (int i = 0; i < 12; ++i) mass[labels[i]] += ref.pab[0][i];
    double total = 0.0;
    int best = 0;
    for (int c = 0; c < kNumCategories; ++c) {
      EXPECT_NEAR(p.scores[c], mass[c], 1e-12);
      total += p.scores[c];
      if (mass[c] > mass[best]) best = c;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(index_of(p.category), best);
  }
}

TEST(Predict, ArgmaxInvariantUnderMonotoneRescaling) {
  std::mt19937_64 rng(16);
  Matrix bank = random_matrix(rng, 10, 2);
  auto labels = random_labels(rng, 10);
  auto p = predict_embedding(bank, labels, Vector::Ones(2));
  int best = 0;
  for (int c = 1; c < kNumCategories; ++c)
    if (std::sqrt(p.scores[c]) * 3.0 + 1.0 > std::sqrt(p.scores[best]) * 3.0 + 1.0) best = c;
  EXPECT_EQ(index_of(p.category), best);
}

TEST(ModelIo, RoundTrip) {
  std::mt19937_64 rng(17);
  Matrix xs, xt;
  std::vector<int> ys, yt;
  clustered(rng, 5, 6, xs, ys, 0.2);
  clustered(rng, 3, 6, xt, yt, 0.2);
  Hyperparams h;
  h.dim = 3;
  h.max_epochs = 40;
  auto m = train(xs, ys, xt, h);
  m.normalizer.min.assign(6, -1.0);
  m.normalizer.max.assign(6, 2.5);
  const std::string text = serialize_model(m);
  auto back = parse_model(text);
  EXPECT_EQ(serialize_model(back), text);
  EXPECT_EQ(back.W, m.W);
  EXPECT_EQ(back.bank, m.bank);
  EXPECT_EQ(back.bank_labels, m.bank_labels);
  EXPECT_EQ(back.hyper.dim, 3);
  auto pa = predict_rows(m, xt), pb = predict_rows(back, xt);
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].scores, pb[i].scores);
}

TEST(ModelIo, RejectsGarbage) {
  EXPECT_THROW(parse_model("not a model"), Error);
  EXPECT_THROW(parse_model("gridfault-model 1\ndim 2 input_dim"), Error);
}
