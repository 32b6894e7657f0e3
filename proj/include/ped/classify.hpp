#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ped/rng.hpp"

namespace ped {

// Label encoding follows the corpus: 0 = good, 1 = bad. SVMs use the
// usual -1/+1 internally with bad = +1, so "score >= 0 predicts bad"
// holds uniformly (an ambiguous print is flagged bad, never shipped).

enum class ClassifierKind { LD, QD, LogReg, SvmCubic, SvmRbf };

inline std::string to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::LD: return "ld";
    case ClassifierKind::QD: return "qd";
    case ClassifierKind::LogReg: return "logreg";
    case ClassifierKind::SvmCubic: return "svm_cubic";
    case ClassifierKind::SvmRbf: return "svm_rbf";
  }
  throw std::logic_error("unreachable");
}

inline ClassifierKind classifier_kind_from_string(const std::string& s) {
  if (s == "ld") return ClassifierKind::LD;
  if (s == "qd") return ClassifierKind::QD;
  if (s == "logreg") return ClassifierKind::LogReg;
  if (s == "svm_cubic") return ClassifierKind::SvmCubic;
  if (s == "svm_rbf") return ClassifierKind::SvmRbf;
  throw std::invalid_argument("unknown classifier: " + s);
}

struct KernelSpec {
  enum class Kind { Linear, Polynomial, Rbf };
  Kind kind = Kind::Linear;
  int degree = 3;        // Polynomial
  double scale = 1.0;    // Polynomial: (scale*<a,b> + offset)^degree
  double offset = 1.0;   // Polynomial
  double gamma = 1.0;    // Rbf: exp(-gamma*||a-b||^2)

  void validate() const {
    if (degree < 1) throw std::invalid_argument("KernelSpec: degree >= 1");
    if (!(scale > 0.0)) throw std::invalid_argument("KernelSpec: scale > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("KernelSpec: gamma > 0");
  }

  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    switch (kind) {
      case Kind::Linear: return a.dot(b);
      case Kind::Polynomial:
        return std::pow(scale * a.dot(b) + offset, degree);
      case Kind::Rbf: return std::exp(-gamma * (a - b).squaredNorm());
    }
    throw std::logic_error("unreachable");
  }

  // elementwise kernel from a dot-product / squared-norm cache
  double from_dot(double dot, double sq_dist) const {
    switch (kind) {
      case Kind::Linear: return dot;
      case Kind::Polynomial: return std::pow(scale * dot + offset, degree);
      case Kind::Rbf: return std::exp(-gamma * sq_dist);
    }
    throw std::logic_error("unreachable");
  }
};

struct Hyperparams {
  double svm_c = 1.0;
  KernelSpec kernel{};
  double logreg_lambda = 1e-4;

  bool operator==(const Hyperparams& o) const {
    return svm_c == o.svm_c && kernel.kind == o.kernel.kind &&
           kernel.degree == o.kernel.degree && kernel.scale == o.kernel.scale &&
           kernel.offset == o.kernel.offset && kernel.gamma == o.kernel.gamma &&
           logreg_lambda == o.logreg_lambda;
  }
};

// One labeled feature table: rows are samples (measurement vectors).
struct SampleSet {
  Eigen::MatrixXd features;          // n x d
  std::vector<int> labels;           // 0 good, 1 bad
  std::vector<std::string> ids;      // image ids (may be empty for toys)
  std::vector<std::string> words;

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }

  SampleSet subset(const std::vector<int>& rows) const {
    SampleSet s;
    s.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      s.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
      s.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
      if (!ids.empty()) s.ids.push_back(ids[static_cast<std::size_t>(rows[i])]);
      if (!words.empty())
        s.words.push_back(words[static_cast<std::size_t>(rows[i])]);
    }
    return s;
  }
};

// Per-dimension zero-mean / unit-variance map learned on training data.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    Eigen::VectorXd var =
        (x.rowwise() - s.mean.transpose()).array().square().colwise().mean();
    s.scale = var.array().sqrt().max(1e-12);
    return s;
  }

  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() /
           scale.transpose().array();
  }
  Eigen::VectorXd transform(const Eigen::VectorXd& v) const {
    return (v - mean).array() / scale.array();
  }
};

namespace detail {

inline void check_training_input(const SampleSet& data) {
  if (data.size() < 2)
    throw std::invalid_argument("train: need at least 2 samples");
  if (static_cast<int>(data.labels.size()) != data.size())
    throw std::invalid_argument("train: labels/features size mismatch");
  if (!data.features.allFinite())
    throw std::invalid_argument("train: non-finite feature values");
  bool has0 = false, has1 = false;
  for (int l : data.labels) (l == 0 ? has0 : has1) = true;
  if (!has0 || !has1)
    throw std::invalid_argument("train: both labels must be present");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trained model

class TrainedClassifier {
 public:
  ClassifierKind kind() const { return kind_; }
  const Hyperparams& hyperparams() const { return hp_; }
  int dim() const { return static_cast<int>(std.mean.size()); }

  // Decision score; >= 0 predicts bad (label 1).
  double score(const Eigen::VectorXd& raw) const {
    if (raw.size() != std.mean.size())
      throw std::invalid_argument("predict: feature length mismatch");
    const Eigen::VectorXd x = std.transform(raw);
    switch (kind_) {
      case ClassifierKind::LD:
      case ClassifierKind::LogReg:
        return linear_w.dot(x) + linear_b;
      case ClassifierKind::QD: {
        auto quad = [&](int c) {
          const Eigen::VectorXd diff = x - qd_mean[c];
          return -0.5 * diff.dot(qd_prec[c] * diff) - 0.5 * qd_logdet[c] +
                 qd_logprior[c];
        };
        return quad(1) - quad(0);
      }
      case ClassifierKind::SvmCubic:
      case ClassifierKind::SvmRbf: {
        double s = svm_bias;
        for (Eigen::Index i = 0; i < svm_sv.rows(); ++i)
          s += svm_alpha_y[i] * hp_.kernel(svm_sv.row(i).transpose(), x);
        return s;
      }
    }
    throw std::logic_error("unreachable");
  }

  int predict(const Eigen::VectorXd& raw) const {
    return score(raw) >= 0.0 ? 1 : 0;
  }

  // --- parameters (public for tests and serialization) ---
  ClassifierKind kind_ = ClassifierKind::LD;
  Hyperparams hp_;
  Standardizer std;

  // LD / LogReg
  Eigen::VectorXd linear_w;
  double linear_b = 0.0;

  // QD
  std::array<Eigen::VectorXd, 2> qd_mean;
  std::array<Eigen::MatrixXd, 2> qd_prec;
  std::array<double, 2> qd_logdet{0.0, 0.0};
  std::array<double, 2> qd_logprior{0.0, 0.0};

  // SVM (support vectors only)
  Eigen::MatrixXd svm_sv;        // n_sv x d, standardized
  Eigen::VectorXd svm_alpha_y;   // alpha_i * y_i, y in {-1,+1}
  double svm_bias = 0.0;

  // Diagnostics from training.
  double logreg_grad_norm = 0.0;
  double svm_kkt_gap = 0.0;
  Eigen::VectorXd svm_alpha_full;       // all alphas, training order
  std::vector<int> svm_labels_full;     // +-1, training order
};

// ---------------------------------------------------------------------------
// Discriminant analysis

namespace detail {

inline void class_stats(const Eigen::MatrixXd& x, const std::vector<int>& t,
                        int cls, Eigen::VectorXd& mu, Eigen::MatrixXd& cov,
                        int& count) {
  const int d = static_cast<int>(x.cols());
  mu = Eigen::VectorXd::Zero(d);
  count = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (t[static_cast<std::size_t>(i)] == cls) {
      mu += x.row(i).transpose();
      ++count;
    }
  mu /= count;
  cov = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (t[static_cast<std::size_t>(i)] == cls) {
      const Eigen::VectorXd diff = x.row(i).transpose() - mu;
      cov += diff * diff.transpose();
    }
  cov /= count;
}

inline TrainedClassifier train_ld(const Eigen::MatrixXd& x,
                                  const std::vector<int>& t) {
  const int d = static_cast<int>(x.cols());
  Eigen::VectorXd mu0, mu1;
  Eigen::MatrixXd c0, c1;
  int n0, n1;
  class_stats(x, t, 0, mu0, c0, n0);
  class_stats(x, t, 1, mu1, c1, n1);
  const int n = n0 + n1;
  Eigen::MatrixXd pooled = (c0 * n0 + c1 * n1) / n;
  pooled.diagonal().array() += 1e-6 * pooled.trace() / d;

  TrainedClassifier m;
  m.kind_ = ClassifierKind::LD;
  Eigen::LLT<Eigen::MatrixXd> llt(pooled);
  m.linear_w = llt.solve(mu1 - mu0);
  m.linear_b = -0.5 * (mu1.dot(llt.solve(mu1)) - mu0.dot(llt.solve(mu0))) +
               std::log(static_cast<double>(n1) / n0);
  return m;
}

inline TrainedClassifier train_qd(const Eigen::MatrixXd& x,
                                  const std::vector<int>& t) {
  const int d = static_cast<int>(x.cols());
  TrainedClassifier m;
  m.kind_ = ClassifierKind::QD;
  int total = static_cast<int>(x.rows());
  for (int cls = 0; cls < 2; ++cls) {
    Eigen::VectorXd mu;
    Eigen::MatrixXd cov;
    int cnt;
    class_stats(x, t, cls, mu, cov, cnt);
    cov.diagonal().array() += 1e-6 * cov.trace() / d;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("train_qd: covariance not SPD after ridge");
    double logdet = 0.0;
    for (int i = 0; i < d; ++i)
      logdet += 2.0 * std::log(llt.matrixL()(i, i));
    m.qd_mean[cls] = mu;
    m.qd_prec[cls] = llt.solve(Eigen::MatrixXd::Identity(d, d));
    m.qd_logdet[cls] = logdet;
    m.qd_logprior[cls] = std::log(static_cast<double>(cnt) / total);
  }
  return m;
}

// Damped Newton (IRLS) for ridge-regularized logistic regression.
// The bias is not penalized. Runs to gradient norm < 1e-8.
inline TrainedClassifier train_logreg(const Eigen::MatrixXd& x,
                                      const std::vector<int>& t,
                                      double lambda) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);  // last entry = bias

  auto loss = [&](const Eigen::VectorXd& wb) {
    double j = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = x.row(i).dot(wb.head(d)) + wb[d];
      const double yi = t[static_cast<std::size_t>(i)];
      // log(1 + e^s) - yi*s, computed stably
      j += (s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s))) -
           yi * s;
    }
    return j / n + 0.5 * lambda * wb.head(d).squaredNorm();
  };

  double grad_norm = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(d + 1);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d + 1, d + 1);
    for (int i = 0; i < n; ++i) {
      const double s = x.row(i).dot(w.head(d)) + w[d];
      const double p = 1.0 / (1.0 + std::exp(-s));
      const double r = p - t[static_cast<std::size_t>(i)];
      const double wgt = std::max(p * (1.0 - p), 1e-10);
      Eigen::VectorXd xi(d + 1);
      xi.head(d) = x.row(i).transpose();
      xi[d] = 1.0;
      grad += r * xi;
      hess += wgt * xi * xi.transpose();
    }
    grad /= n;
    hess /= n;
    grad.head(d) += lambda * w.head(d);
    hess.topLeftCorner(d, d).diagonal().array() += lambda;

    grad_norm = grad.norm();
    if (grad_norm < 1e-8) break;

    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    const double j0 = loss(w);
    double alpha = 1.0;
    Eigen::VectorXd w_new = w - step;
    while (loss(w_new) > j0 && alpha > 1e-8) {
      alpha /= 2.0;
      w_new = w - alpha * step;
    }
    w = w_new;
  }

  TrainedClassifier m;
  m.kind_ = ClassifierKind::LogReg;
  m.linear_w = w.head(d);
  m.linear_b = w[d];
  m.logreg_grad_norm = grad_norm;
  return m;
}

// ---------------------------------------------------------------------------
// SMO for the soft-margin kernel SVM (maximal-violating-pair selection).

struct SmoResult {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  double kkt_gap = 0.0;
};

inline SmoResult smo_train(const Eigen::MatrixXd& x, const std::vector<int>& y,
                           const KernelSpec& kernel, double c,
                           double kkt_tol = 1e-3) {
  const int n = static_cast<int>(x.rows());

  // Kernel matrix from a shared dot-product cache; memory guard for huge n.
  const bool cache_full = static_cast<std::size_t>(n) * n * 8 < 3'000'000'000;
  Eigen::MatrixXd kmat;
  Eigen::VectorXd sq = x.rowwise().squaredNorm();
  if (cache_full) {
    Eigen::MatrixXd dots = x * x.transpose();
    kmat.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        kmat(i, j) =
            kernel.from_dot(dots(i, j), sq[i] + sq[j] - 2.0 * dots(i, j));
  }
  auto krow = [&](int i) -> Eigen::VectorXd {
    if (cache_full) return kmat.row(i);
    Eigen::VectorXd dots = x * x.row(i).transpose();
    Eigen::VectorXd out(n);
    for (int j = 0; j < n; ++j)
      out[j] = kernel.from_dot(dots[j], sq[i] + sq[j] - 2.0 * dots[j]);
    return out;
  };

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);

  const long max_iter = std::max<long>(200000, 20L * n);
  double gap = 0.0;
  for (long iter = 0; iter < max_iter; ++iter) {
    int i = -1, j = -1;
    double gmax = -1e300, gmin = 1e300;
    for (int t = 0; t < n; ++t) {
      const double v = -y[static_cast<std::size_t>(t)] * grad[t];
      const bool up = (y[static_cast<std::size_t>(t)] > 0 && alpha[t] < c) ||
                      (y[static_cast<std::size_t>(t)] < 0 && alpha[t] > 0);
      const bool low = (y[static_cast<std::size_t>(t)] > 0 && alpha[t] > 0) ||
                       (y[static_cast<std::size_t>(t)] < 0 && alpha[t] < c);
      if (up && v > gmax) {
        gmax = v;
        i = t;
      }
      if (low && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    gap = gmax - gmin;
    if (gap <= kkt_tol) break;

    const Eigen::VectorXd ki = krow(i);
    const Eigen::VectorXd kj = krow(j);
    double quad = ki[i] + kj[j] - 2.0 * ki[j];
    if (quad <= 0.0) quad = 1e-12;
    double d = gap / quad;
    const int yi = y[static_cast<std::size_t>(i)];
    const int yj = y[static_cast<std::size_t>(j)];
    d = std::min(d, yi > 0 ? c - alpha[i] : alpha[i]);
    d = std::min(d, yj > 0 ? alpha[j] : c - alpha[j]);
    if (d <= 0.0) break;
    // feasible direction: delta alpha_i = y_i d, delta alpha_j = -y_j d
    alpha[i] += (yi > 0 ? d : -d);
    alpha[j] += (yj > 0 ? -d : d);
    grad += d * (ki - kj).cwiseProduct(
                    Eigen::Map<const Eigen::VectorXi>(y.data(), n)
                        .cast<double>());
  }

  // Bias from free support vectors; fall back to the violation midpoint.
  double b_sum = 0.0;
  int b_cnt = 0;
  for (int t = 0; t < n; ++t)
    if (alpha[t] > 1e-9 && alpha[t] < c - 1e-9) {
      b_sum += -y[static_cast<std::size_t>(t)] * grad[t];
      ++b_cnt;
    }
  double rho;
  if (b_cnt > 0) {
    rho = b_sum / b_cnt;
  } else {
    double gmax = -1e300, gmin = 1e300;
    for (int t = 0; t < n; ++t) {
      const double v = -y[static_cast<std::size_t>(t)] * grad[t];
      const bool up = (y[static_cast<std::size_t>(t)] > 0 && alpha[t] < c) ||
                      (y[static_cast<std::size_t>(t)] < 0 && alpha[t] > 0);
      const bool low = (y[static_cast<std::size_t>(t)] > 0 && alpha[t] > 0) ||
                       (y[static_cast<std::size_t>(t)] < 0 && alpha[t] < c);
      if (up) gmax = std::max(gmax, v);
      if (low) gmin = std::min(gmin, v);
    }
    rho = (gmax + gmin) / 2.0;
  }
  return {alpha, rho, gap};
}

inline TrainedClassifier train_svm(const Eigen::MatrixXd& x,
                                   const std::vector<int>& t,
                                   const Hyperparams& hp, ClassifierKind kind) {
  hp.kernel.validate();
  const int n = static_cast<int>(x.rows());
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    y[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i)] == 1 ? 1
                                                                         : -1;
  SmoResult res = smo_train(x, y, hp.kernel, hp.svm_c);

  TrainedClassifier m;
  m.kind_ = kind;
  m.hp_ = hp;
  m.svm_bias = res.bias;
  m.svm_kkt_gap = res.kkt_gap;
  m.svm_alpha_full = res.alpha;
  m.svm_labels_full = y;

  std::vector<int> sv;
  for (int i = 0; i < n; ++i)
    if (res.alpha[i] > 1e-12) sv.push_back(i);
  m.svm_sv.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  m.svm_alpha_y.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t i = 0; i < sv.size(); ++i) {
    m.svm_sv.row(static_cast<Eigen::Index>(i)) = x.row(sv[i]);
    m.svm_alpha_y[static_cast<Eigen::Index>(i)] =
        res.alpha[sv[i]] * y[static_cast<std::size_t>(sv[i])];
  }
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public training entry point

inline TrainedClassifier train(ClassifierKind kind, const SampleSet& data,
                               const Hyperparams& hp = {}) {
  detail::check_training_input(data);
  const Standardizer std_ = Standardizer::fit(data.features);
  const Eigen::MatrixXd x = std_.transform(data.features);

  TrainedClassifier m;
  switch (kind) {
    case ClassifierKind::LD: m = detail::train_ld(x, data.labels); break;
    case ClassifierKind::QD: m = detail::train_qd(x, data.labels); break;
    case ClassifierKind::LogReg:
      m = detail::train_logreg(x, data.labels, hp.logreg_lambda);
      break;
    case ClassifierKind::SvmCubic:
    case ClassifierKind::SvmRbf:
      m = detail::train_svm(x, data.labels, hp, kind);
      break;
  }
  m.hp_ = hp;
  m.std = std_;
  return m;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalFragment {
  double accuracy = 0.0;                  // percent
  std::array<std::array<int, 2>, 2> confusion{};  // [actual][predicted]
  std::vector<std::string> misclassified_ids;
  std::vector<std::string> misclassified_words;
  std::map<char, int> char_histogram;     // over misclassified words
  int bad_as_good = 0;
  int good_as_bad = 0;
};

inline EvalFragment evaluate_holdout(
    const TrainedClassifier& model, const SampleSet& test,
    const std::set<std::string>& train_ids = {}) {
  if (!train_ids.empty() && !test.ids.empty())
    for (const auto& id : test.ids)
      if (train_ids.count(id))
        throw std::invalid_argument(
            "evaluate_holdout: train/test overlap on id '" + id + "'");

  EvalFragment f;
  int correct = 0;
  for (int i = 0; i < test.size(); ++i) {
    const int pred = model.predict(test.features.row(i).transpose());
    const int actual = test.labels[static_cast<std::size_t>(i)];
    ++f.confusion[static_cast<std::size_t>(actual)]
                 [static_cast<std::size_t>(pred)];
    if (pred == actual) {
      ++correct;
      continue;
    }
    if (actual == 1) ++f.bad_as_good;
    else ++f.good_as_bad;
    if (!test.ids.empty())
      f.misclassified_ids.push_back(test.ids[static_cast<std::size_t>(i)]);
    if (!test.words.empty()) {
      const auto& w = test.words[static_cast<std::size_t>(i)];
      f.misclassified_words.push_back(w);
      for (char c : w) ++f.char_histogram[c];
    }
  }
  f.accuracy = 100.0 * correct / std::max(1, test.size());
  return f;
}

// ---------------------------------------------------------------------------
// 5-fold cross validation over a hyperparameter grid

struct CvResult {
  Hyperparams best;
  double cv_accuracy = 0.0;  // percent, mean over folds
  std::vector<double> grid_accuracies;
};

// Stratified seeded fold assignment; grid order is the tie-break (earlier
// entries are preferred, so callers list simpler settings first).
inline CvResult kfold_cv(ClassifierKind kind, const SampleSet& data,
                         const std::vector<Hyperparams>& grid, int k = 5,
                         std::uint64_t seed = 0) {
  if (k < 2) throw std::invalid_argument("kfold_cv: k must be >= 2");
  if (data.size() < k)
    throw std::invalid_argument("kfold_cv: fewer samples than folds");
  if (grid.empty()) throw std::invalid_argument("kfold_cv: empty grid");

  // deal each class round-robin over folds, in shuffled order
  std::vector<int> fold(static_cast<std::size_t>(data.size()));
  std::mt19937_64 rng(derive_seed(seed, "cv_folds"));
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<int> idx;
    for (int i = 0; i < data.size(); ++i)
      if (data.labels[static_cast<std::size_t>(i)] == cls) idx.push_back(i);
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(uniform_int(
                    rng, 0, static_cast<std::int64_t>(i) - 1))]);
    for (std::size_t i = 0; i < idx.size(); ++i)
      fold[static_cast<std::size_t>(idx[i])] = static_cast<int>(i % k);
  }

  CvResult result;
  double best_acc = -1.0;
  for (const auto& hp : grid) {
    double acc_sum = 0.0;
    for (int f = 0; f < k; ++f) {
      std::vector<int> tr, te;
      for (int i = 0; i < data.size(); ++i)
        (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
      const TrainedClassifier m = train(kind, data.subset(tr), hp);
      acc_sum += evaluate_holdout(m, data.subset(te)).accuracy;
    }
    const double acc = acc_sum / k;
    result.grid_accuracies.push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      result.best = hp;
      result.cv_accuracy = acc;
    }
  }
  return result;
}

// Standard decade grids; listed simplest-first so CV ties resolve toward
// stronger regularization / smaller kernel scale.
inline std::vector<Hyperparams> default_grid(ClassifierKind kind, int m_dim) {
  std::vector<Hyperparams> grid;
  switch (kind) {
    case ClassifierKind::LD:
    case ClassifierKind::QD:
      grid.push_back({});
      break;
    case ClassifierKind::LogReg:
      for (double lambda : {1.0, 1e-2, 1e-4}) {
        Hyperparams hp;
        hp.logreg_lambda = lambda;
        grid.push_back(hp);
      }
      break;
    case ClassifierKind::SvmCubic:
      for (double scale : {0.1, 1.0, 10.0})
        for (double c : {1.0, 10.0, 100.0}) {
          Hyperparams hp;
          hp.svm_c = c;
          hp.kernel.kind = KernelSpec::Kind::Polynomial;
          hp.kernel.degree = 3;
          hp.kernel.scale = scale / m_dim;
          hp.kernel.offset = 1.0;
          grid.push_back(hp);
        }
      break;
    case ClassifierKind::SvmRbf:
      for (double g : {0.01, 0.1, 1.0})
        for (double c : {1.0, 10.0, 100.0}) {
          Hyperparams hp;
          hp.svm_c = c;
          hp.kernel.kind = KernelSpec::Kind::Rbf;
          hp.kernel.gamma = g / m_dim;
          grid.push_back(hp);
        }
      break;
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Serialization (JSON; round-trip reproduces identical predictions)

namespace detail {

inline nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}
inline Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}
inline nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    rows.push_back(vec_to_json(m.row(r).transpose()));
  return rows;
}
inline Eigen::MatrixXd mat_from_json(const nlohmann::json& j) {
  if (j.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()),
                    static_cast<Eigen::Index>(j[0].size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    m.row(r) = vec_from_json(j[static_cast<std::size_t>(r)]).transpose();
  return m;
}

}  // namespace detail

inline nlohmann::json to_json(const TrainedClassifier& m) {
  nlohmann::json j;
  j["version"] = 1;
  j["kind"] = to_string(m.kind_);
  j["std_mean"] = detail::vec_to_json(m.std.mean);
  j["std_scale"] = detail::vec_to_json(m.std.scale);
  j["hp"] = {{"svm_c", m.hp_.svm_c},
             {"logreg_lambda", m.hp_.logreg_lambda},
             {"kernel_kind", static_cast<int>(m.hp_.kernel.kind)},
             {"degree", m.hp_.kernel.degree},
             {"scale", m.hp_.kernel.scale},
             {"offset", m.hp_.kernel.offset},
             {"gamma", m.hp_.kernel.gamma}};
  switch (m.kind_) {
    case ClassifierKind::LD:
    case ClassifierKind::LogReg:
      j["w"] = detail::vec_to_json(m.linear_w);
      j["b"] = m.linear_b;
      break;
    case ClassifierKind::QD:
      for (int c = 0; c < 2; ++c) {
        const std::string p = "class" + std::to_string(c) + "_";
        j[p + "mean"] = detail::vec_to_json(m.qd_mean[c]);
        j[p + "prec"] = detail::mat_to_json(m.qd_prec[c]);
        j[p + "logdet"] = m.qd_logdet[c];
        j[p + "logprior"] = m.qd_logprior[c];
      }
      break;
    case ClassifierKind::SvmCubic:
    case ClassifierKind::SvmRbf:
      j["sv"] = detail::mat_to_json(m.svm_sv);
      j["alpha_y"] = detail::vec_to_json(m.svm_alpha_y);
      j["bias"] = m.svm_bias;
      break;
  }
  return j;
}

inline TrainedClassifier classifier_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != 1)
    throw std::runtime_error("classifier_from_json: unknown version");
  TrainedClassifier m;
  m.kind_ = classifier_kind_from_string(j.at("kind").get<std::string>());
  m.std.mean = detail::vec_from_json(j.at("std_mean"));
  m.std.scale = detail::vec_from_json(j.at("std_scale"));
  const auto& hp = j.at("hp");
  m.hp_.svm_c = hp.at("svm_c").get<double>();
  m.hp_.logreg_lambda = hp.at("logreg_lambda").get<double>();
  m.hp_.kernel.kind =
      static_cast<KernelSpec::Kind>(hp.at("kernel_kind").get<int>());
  m.hp_.kernel.degree = hp.at("degree").get<int>();
  m.hp_.kernel.scale = hp.at("scale").get<double>();
  m.hp_.kernel.offset = hp.at("offset").get<double>();
  m.hp_.kernel.gamma = hp.at("gamma").get<double>();
  switch (m.kind_) {
    case ClassifierKind::LD:
    case ClassifierKind::LogReg:
      m.linear_w = detail::vec_from_json(j.at("w"));
      m.linear_b = j.at("b").get<double>();
      break;
    case ClassifierKind::QD:
      for (int c = 0; c < 2; ++c) {
        const std::string p = "class" + std::to_string(c) + "_";
        m.qd_mean[c] = detail::vec_from_json(j.at(p + "mean"));
        m.qd_prec[c] = detail::mat_from_json(j.at(p + "prec"));
        m.qd_logdet[c] = j.at(p + "logdet").get<double>();
        m.qd_logprior[c] = j.at(p + "logprior").get<double>();
      }
      break;
    case ClassifierKind::SvmCubic:
    case ClassifierKind::SvmRbf:
      m.svm_sv = detail::mat_from_json(j.at("sv"));
      m.svm_alpha_y = detail::vec_from_json(j.at("alpha_y"));
      m.svm_bias = j.at("bias").get<double>();
      break;
  }
  return m;
}

}  // namespace ped
