#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "ped/classify.hpp"
#include "ped/rng.hpp"

using namespace ped;

namespace {

// Two uniform blobs separated along the first axis.
SampleSet blobs(int per_class, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampleSet s;
  s.features.resize(2 * per_class, 2);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int cls = i < per_class ? 0 : 1;
    const double cx = cls == 0 ? -gap / 2.0 : gap / 2.0;
    s.features(i, 0) = cx + uniform_real(rng, -0.5, 0.5);
    s.features(i, 1) = uniform_real(rng, -0.5, 0.5);
    s.labels.push_back(cls);
  }
  return s;
}

// Class 0 inside a small disc, class 1 on a surrounding annulus; the class
// means coincide, so no linear rule works but a quadratic one does.
SampleSet ring(int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampleSet s;
  s.features.resize(2 * per_class, 2);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int cls = i < per_class ? 0 : 1;
    const double r = cls == 0 ? uniform_real(rng, 0.0, 0.5)
                              : uniform_real(rng, 2.0, 3.0);
    const double th = uniform_real(rng, 0.0, 2.0 * M_PI);
    s.features(i, 0) = r * std::cos(th);
    s.features(i, 1) = r * std::sin(th);
    s.labels.push_back(cls);
  }
  return s;
}

// The four XOR corners, replicated with jitter so covariances are SPD.
SampleSet xor_set(int per_corner, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampleSet s;
  s.features.resize(4 * per_corner, 2);
  int row = 0;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int k = 0; k < per_corner; ++k) {
        s.features(row, 0) = sx + uniform_real(rng, -0.1, 0.1);
        s.features(row, 1) = sy + uniform_real(rng, -0.1, 0.1);
        s.labels.push_back(sx * sy > 0 ? 1 : 0);
        ++row;
      }
  return s;
}

double train_accuracy(const TrainedClassifier& m, const SampleSet& s) {
  int correct = 0;
  for (int i = 0; i < s.size(); ++i)
    if (m.predict(s.features.row(i).transpose()) ==
        s.labels[static_cast<std::size_t>(i)])
      ++correct;
  return 100.0 * correct / s.size();
}

}  // namespace

TEST_CASE("separable blobs: every classifier reaches 100%") {
  const SampleSet s = blobs(40, 4.0, 11);
  for (ClassifierKind kind :
       {ClassifierKind::LD, ClassifierKind::QD, ClassifierKind::LogReg}) {
    const TrainedClassifier m = train(kind, s);
    INFO(to_string(kind));
    REQUIRE(train_accuracy(m, s) == 100.0);
  }
  Hyperparams cubic;
  cubic.kernel.kind = KernelSpec::Kind::Polynomial;
  cubic.kernel.degree = 3;
  REQUIRE(train_accuracy(train(ClassifierKind::SvmCubic, s, cubic), s) ==
          100.0);
  Hyperparams rbf;
  rbf.kernel.kind = KernelSpec::Kind::Rbf;
  rbf.kernel.gamma = 0.5;
  REQUIRE(train_accuracy(train(ClassifierKind::SvmRbf, s, rbf), s) == 100.0);
}

TEST_CASE("XOR defeats the linear model but not the cubic kernel") {
  const SampleSet s = xor_set(25, 7);
  const TrainedClassifier lin = train(ClassifierKind::LogReg, s);
  REQUIRE(train_accuracy(lin, s) <= 75.0);

  Hyperparams hp;
  hp.svm_c = 10.0;
  hp.kernel.kind = KernelSpec::Kind::Polynomial;
  hp.kernel.degree = 3;
  const TrainedClassifier svm = train(ClassifierKind::SvmCubic, s, hp);
  REQUIRE(train_accuracy(svm, s) == 100.0);
}

TEST_CASE("concentric classes separate quadratically, not linearly") {
  const SampleSet s = ring(60, 5);
  REQUIRE(train_accuracy(train(ClassifierKind::LD, s), s) <= 75.0);
  REQUIRE(train_accuracy(train(ClassifierKind::QD, s), s) == 100.0);
  Hyperparams rbf;
  rbf.kernel.kind = KernelSpec::Kind::Rbf;
  rbf.kernel.gamma = 1.0;
  REQUIRE(train_accuracy(train(ClassifierKind::SvmRbf, s, rbf), s) == 100.0);
}

TEST_CASE("LD on a symmetric 1-D problem has its boundary at the midpoint") {
  SampleSet s;
  s.features.resize(4, 1);
  s.features << -1.1, -0.9, 0.9, 1.1;
  s.labels = {0, 0, 1, 1};
  const TrainedClassifier m = train(ClassifierKind::LD, s);
  Eigen::VectorXd probe(1);
  probe << 0.0;
  REQUIRE(std::abs(m.score(probe)) < 1e-9);
  probe << 0.5;
  const double right = m.score(probe);
  probe << -0.5;
  REQUIRE(m.score(probe) == Catch::Approx(-right).margin(1e-9));
  REQUIRE(right > 0.0);
}

TEST_CASE("logistic regression reaches a stationary point of its loss") {
  const SampleSet s = blobs(30, 1.0, 21);  // overlapping, finite optimum
  const double lambda = 1e-2;
  Hyperparams hp;
  hp.logreg_lambda = lambda;
  const TrainedClassifier m = train(ClassifierKind::LogReg, s, hp);
  REQUIRE(m.logreg_grad_norm < 1e-8);

  // independent gradient of the mean log-loss + ridge at the returned model
  const Eigen::MatrixXd x = m.std.transform(s.features);
  const int n = s.size(), d = m.dim();
  Eigen::VectorXd gw = lambda * m.linear_w;
  double gb = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p =
        1.0 / (1.0 + std::exp(-(x.row(i).dot(m.linear_w) + m.linear_b)));
    const double r = p - s.labels[static_cast<std::size_t>(i)];
    gw += (r / n) * x.row(i).transpose();
    gb += r / n;
  }
  REQUIRE(gw.norm() + std::abs(gb) < 1e-7);
  REQUIRE(d == 2);
}

TEST_CASE("svm dual iterate satisfies the KKT system") {
  const SampleSet s = blobs(40, 1.5, 33);
  Hyperparams hp;
  hp.svm_c = 1.0;
  hp.kernel.kind = KernelSpec::Kind::Rbf;
  hp.kernel.gamma = 0.5;
  const TrainedClassifier m = train(ClassifierKind::SvmRbf, s, hp);

  REQUIRE(m.svm_kkt_gap <= 1e-3);
  double alpha_dot_y = 0.0;
  for (Eigen::Index i = 0; i < m.svm_alpha_full.size(); ++i) {
    REQUIRE(m.svm_alpha_full[i] >= -1e-12);
    REQUIRE(m.svm_alpha_full[i] <= hp.svm_c + 1e-12);
    alpha_dot_y += m.svm_alpha_full[i] *
                   m.svm_labels_full[static_cast<std::size_t>(i)];
  }
  REQUIRE(std::abs(alpha_dot_y) < 1e-9);

  // free support vectors sit on the margin: y * f(x) == 1 up to the gap
  const Eigen::MatrixXd x = m.std.transform(s.features);
  for (Eigen::Index i = 0; i < m.svm_alpha_full.size(); ++i) {
    const double a = m.svm_alpha_full[i];
    if (a < 1e-6 || a > hp.svm_c - 1e-6) continue;
    const double f = m.score(s.features.row(i).transpose());
    const double yf = m.svm_labels_full[static_cast<std::size_t>(i)] * f;
    REQUIRE(yf == Catch::Approx(1.0).margin(2e-3));
  }
}

TEST_CASE("hard-margin linear svm recovers the max-margin midpoint") {
  SampleSet s;
  s.features.resize(4, 1);
  s.features << -2.0, -1.0, 1.0, 2.0;
  s.labels = {0, 0, 1, 1};
  Hyperparams hp;
  hp.svm_c = 1e6;
  const TrainedClassifier m = train(ClassifierKind::SvmCubic, s, hp);
  // with kernel left linear the boundary must land at x = 0
  Eigen::VectorXd probe(1);
  probe << 0.0;
  REQUIRE(std::abs(m.score(probe)) < 1e-6);
  probe << 1.0;
  REQUIRE(m.score(probe) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("a zero score is flagged bad") {
  TrainedClassifier m;
  m.kind_ = ClassifierKind::LD;
  m.std.mean = Eigen::VectorXd::Zero(2);
  m.std.scale = Eigen::VectorXd::Ones(2);
  m.linear_w = Eigen::VectorXd::Zero(2);
  m.linear_b = 0.0;
  REQUIRE(m.predict(Eigen::VectorXd::Zero(2)) == 1);
}

TEST_CASE("training input validation") {
  SampleSet s;
  s.features.resize(3, 2);
  s.features.setZero();
  s.labels = {0, 0, 0};
  REQUIRE_THROWS_AS(train(ClassifierKind::LD, s), std::invalid_argument);
  s.labels = {0, 1};
  REQUIRE_THROWS_AS(train(ClassifierKind::LD, s), std::invalid_argument);
  s.labels = {0, 1, 1};
  s.features(1, 1) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(train(ClassifierKind::LD, s), std::invalid_argument);
}

TEST_CASE("predictions are invariant to affine feature scaling") {
  const SampleSet s = blobs(30, 2.0, 44);
  SampleSet scaled = s;
  scaled.features.col(0) = s.features.col(0) * 1000.0;
  scaled.features.col(1) = s.features.col(1).array() + 50.0;

  const TrainedClassifier m0 = train(ClassifierKind::LogReg, s);
  const TrainedClassifier m1 = train(ClassifierKind::LogReg, scaled);
  for (int i = 0; i < s.size(); ++i)
    REQUIRE(m0.predict(s.features.row(i).transpose()) ==
            m1.predict(scaled.features.row(i).transpose()));
}

TEST_CASE("training is deterministic") {
  const SampleSet s = blobs(25, 1.2, 55);
  Hyperparams hp;
  hp.kernel.kind = KernelSpec::Kind::Rbf;
  hp.kernel.gamma = 0.3;
  const TrainedClassifier a = train(ClassifierKind::SvmRbf, s, hp);
  const TrainedClassifier b = train(ClassifierKind::SvmRbf, s, hp);
  REQUIRE(a.svm_alpha_full == b.svm_alpha_full);
  REQUIRE(a.svm_bias == b.svm_bias);
  const TrainedClassifier c = train(ClassifierKind::LogReg, s);
  const TrainedClassifier d = train(ClassifierKind::LogReg, s);
  REQUIRE(c.linear_w == d.linear_w);
}

TEST_CASE("holdout evaluation tallies the confusion table and words") {
  // model that calls everything bad
  TrainedClassifier m;
  m.kind_ = ClassifierKind::LD;
  m.std.mean = Eigen::VectorXd::Zero(1);
  m.std.scale = Eigen::VectorXd::Ones(1);
  m.linear_w = Eigen::VectorXd::Zero(1);
  m.linear_b = 1.0;

  SampleSet test;
  test.features.resize(3, 1);
  test.features.setZero();
  test.labels = {0, 0, 1};
  test.ids = {"img0", "img1", "img2"};
  test.words = {"WAX", "WIN", "FOG"};

  const EvalFragment f = evaluate_holdout(m, test);
  REQUIRE(f.accuracy == Catch::Approx(100.0 / 3.0));
  REQUIRE(f.confusion[0][1] == 2);
  REQUIRE(f.confusion[1][1] == 1);
  REQUIRE(f.confusion[0][0] == 0);
  REQUIRE(f.good_as_bad == 2);
  REQUIRE(f.bad_as_good == 0);
  REQUIRE(f.misclassified_ids ==
          std::vector<std::string>{"img0", "img1"});
  REQUIRE(f.char_histogram.at('W') == 2);
  REQUIRE(f.char_histogram.at('A') == 1);
  REQUIRE(f.char_histogram.at('X') == 1);
  REQUIRE(f.char_histogram.at('I') == 1);
  REQUIRE(f.char_histogram.at('N') == 1);
  REQUIRE(f.char_histogram.count('F') == 0);

  REQUIRE_THROWS_AS(evaluate_holdout(m, test, {"img1"}),
                    std::invalid_argument);
}

TEST_CASE("cross validation picks the clearly better hyperparameter") {
  const SampleSet s = blobs(40, 3.0, 66);
  // a memorizing bandwidth scores ~50% on held-out folds; a sane one wins
  Hyperparams memorize;
  memorize.kernel.kind = KernelSpec::Kind::Rbf;
  memorize.kernel.gamma = 1e6;
  Hyperparams sane;
  sane.kernel.kind = KernelSpec::Kind::Rbf;
  sane.kernel.gamma = 0.5;
  const CvResult r =
      kfold_cv(ClassifierKind::SvmRbf, s, {memorize, sane}, 5, 1);
  REQUIRE(r.best == sane);
  REQUIRE(r.cv_accuracy > 95.0);
  REQUIRE(r.grid_accuracies.size() == 2);
  REQUIRE(r.grid_accuracies[0] < r.grid_accuracies[1]);
}

TEST_CASE("cross validation ties resolve to the earlier grid entry") {
  const SampleSet s = blobs(30, 4.0, 77);  // easy: both settings hit 100%
  Hyperparams a;
  a.logreg_lambda = 1e-2;
  Hyperparams b;
  b.logreg_lambda = 1e-4;
  const CvResult r = kfold_cv(ClassifierKind::LogReg, s, {a, b}, 5, 2);
  REQUIRE(r.best == a);
}

TEST_CASE("cross validation input validation") {
  const SampleSet s = blobs(10, 2.0, 88);
  REQUIRE_THROWS_AS(kfold_cv(ClassifierKind::LD, s, {{}}, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(kfold_cv(ClassifierKind::LD, s, {}, 5),
                    std::invalid_argument);
}

TEST_CASE("default grids have the documented shape") {
  REQUIRE(default_grid(ClassifierKind::LD, 100).size() == 1);
  REQUIRE(default_grid(ClassifierKind::LogReg, 100).size() == 3);
  const auto cubic = default_grid(ClassifierKind::SvmCubic, 100);
  REQUIRE(cubic.size() == 9);
  for (const auto& hp : cubic) {
    REQUIRE(hp.kernel.kind == KernelSpec::Kind::Polynomial);
    REQUIRE(hp.kernel.degree == 3);
  }
  const auto rbf = default_grid(ClassifierKind::SvmRbf, 100);
  REQUIRE(rbf.size() == 9);
  REQUIRE(rbf.front().kernel.gamma == Catch::Approx(0.01 / 100));
}

TEST_CASE("serialization round trip preserves scores for every kind") {
  const SampleSet s = ring(30, 99);
  std::vector<std::pair<ClassifierKind, Hyperparams>> cases;
  cases.push_back({ClassifierKind::LD, {}});
  cases.push_back({ClassifierKind::QD, {}});
  cases.push_back({ClassifierKind::LogReg, {}});
  Hyperparams cubic;
  cubic.kernel.kind = KernelSpec::Kind::Polynomial;
  cases.push_back({ClassifierKind::SvmCubic, cubic});
  Hyperparams rbf;
  rbf.kernel.kind = KernelSpec::Kind::Rbf;
  cases.push_back({ClassifierKind::SvmRbf, rbf});

  std::mt19937_64 rng(4);
  for (const auto& [kind, hp] : cases) {
    const TrainedClassifier m = train(kind, s, hp);
    const TrainedClassifier back =
        classifier_from_json(nlohmann::json::parse(to_json(m).dump()));
    INFO(to_string(kind));
    REQUIRE(back.kind() == kind);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd probe(2);
      probe << uniform_real(rng, -3.0, 3.0), uniform_real(rng, -3.0, 3.0);
      REQUIRE(back.score(probe) == Catch::Approx(m.score(probe)).margin(1e-12));
    }
  }
}

TEST_CASE("unknown serialization version is rejected") {
  const SampleSet s = blobs(10, 3.0, 3);
  nlohmann::json j = to_json(train(ClassifierKind::LD, s));
  j["version"] = 2;
  REQUIRE_THROWS_AS(classifier_from_json(j), std::runtime_error);
}
