#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ped/image.hpp"
#include "ped/sensing.hpp"
#include "ped/wavelet.hpp"

namespace ped {

// M x N operator accessed only through apply / adjoint-apply callbacks.
struct LinearOperator {
  int rows = 0;
  int cols = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_adjoint;
};

inline LinearOperator as_operator(const SensingMatrix& m) {
  return {m.rows(), m.cols(),
          [&m](const Eigen::VectorXd& x) { return m.apply(x); },
          [&m](const Eigen::VectorXd& y) { return m.apply_adjoint(y); }};
}

inline LinearOperator as_operator(const Eigen::MatrixXd& a) {
  return {static_cast<int>(a.rows()), static_cast<int>(a.cols()),
          [&a](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; },
          [&a](const Eigen::VectorXd& y) -> Eigen::VectorXd {
            return a.transpose() * y;
          }};
}

struct SolverConfig {
  double tol_abs = 1e-6;
  double tol_rel = 1e-6;
  int max_iterations = 5000;
  double rho = 1.0;
  double rho_min = 1e-4;
  double rho_max = 1e4;

  void validate() const {
    if (!(tol_abs > 0.0) || !(tol_rel > 0.0))
      throw std::invalid_argument("SolverConfig: tolerances must be > 0");
    if (max_iterations < 1)
      throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
  }
};

struct BpSolution {
  Eigen::VectorXd coeffs;
  double residual = 0.0;  // ||A coeffs - y||_2
  double l1_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // best-so-far l1 per iteration
};

// Equality-constrained Basis Pursuit by ADMM: splits into projection onto
// {w : Aw = y} (via a cached Cholesky factorization of A A^T) and
// soft-thresholding. Every x iterate is feasible; the best-l1 iterate is
// returned, so non-convergence still yields a usable best effort.
class BpSolver {
 public:
  explicit BpSolver(LinearOperator op) : op_(std::move(op)) {
    if (op_.rows <= 0 || op_.cols <= 0 || op_.rows > op_.cols)
      throw std::invalid_argument("BpSolver: need 0 < M <= N");
    // Gram matrix built through the callbacks only.
    Eigen::MatrixXd gram(op_.rows, op_.rows);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(op_.rows);
    for (int i = 0; i < op_.rows; ++i) {
      e[i] = 1.0;
      gram.col(i) = op_.apply(op_.apply_adjoint(e));
      e[i] = 0.0;
    }
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success) {
      // nearly rank-deficient rows; regularize minimally
      gram.diagonal().array() += 1e-10 * gram.trace() / op_.rows;
      llt_.compute(gram);
      if (llt_.info() != Eigen::Success)
        throw std::runtime_error("BpSolver: A A^T factorization failed");
    }
  }

  const LinearOperator& op() const { return op_; }

  BpSolution solve(const Eigen::VectorXd& y, const SolverConfig& cfg) const {
    cfg.validate();
    if (y.size() != op_.rows)
      throw std::invalid_argument("BpSolver::solve: measurement length "
                                  "mismatch");
    const int n = op_.cols;
    BpSolution sol;
    if (y.norm() == 0.0) {
      sol.coeffs = Eigen::VectorXd::Zero(n);
      sol.converged = true;
      return sol;
    }

    const Eigen::VectorXd q = op_.apply_adjoint(llt_.solve(y));
    auto project = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return v - op_.apply_adjoint(llt_.solve(op_.apply(v))) + q;
    };

    double rho = cfg.rho;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd x = project(z);

    Eigen::VectorXd best_x = x;
    double best_l1 = x.lpNorm<1>();
    sol.objective_trace.push_back(best_l1);

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    for (int it = 1; it <= cfg.max_iterations; ++it) {
      // z-update: soft threshold
      Eigen::VectorXd z_old = z;
      const Eigen::VectorXd w = x + u;
      const double kappa = 1.0 / rho;
      z = w.unaryExpr([kappa](double v) {
        return v > kappa ? v - kappa : (v < -kappa ? v + kappa : 0.0);
      });
      u += x - z;

      const double r_norm = (x - z).norm();
      const double s_norm = rho * (z - z_old).norm();
      const double eps_pri =
          sqrt_n * cfg.tol_abs + cfg.tol_rel * std::max(x.norm(), z.norm());
      const double eps_dual =
          sqrt_n * cfg.tol_abs + cfg.tol_rel * rho * u.norm();

      sol.iterations = it;
      if (r_norm <= eps_pri && s_norm <= eps_dual) {
        sol.converged = true;
        const double l1 = x.lpNorm<1>();
        if (l1 < best_l1) {
          best_l1 = l1;
          best_x = x;
        }
        sol.objective_trace.push_back(best_l1);
        break;
      }

      // Residual balancing, clamped. Adapt only periodically and freeze in
      // the second half of the budget: per-iteration rescaling can lock the
      // iterates into a limit cycle, while a frozen rho restores the plain
      // fixed-penalty convergence guarantee.
      if (it % 25 == 0 && it <= cfg.max_iterations / 2) {
        if (r_norm > 10.0 * s_norm && rho * 2.0 <= cfg.rho_max) {
          rho *= 2.0;
          u /= 2.0;
        } else if (s_norm > 10.0 * r_norm && rho / 2.0 >= cfg.rho_min) {
          rho /= 2.0;
          u *= 2.0;
        }
      }

      x = project(z - u);
      const double l1 = x.lpNorm<1>();
      if (l1 < best_l1) {
        best_l1 = l1;
        best_x = x;
      }
      sol.objective_trace.push_back(best_l1);
    }

    sol.coeffs = best_x;
    sol.l1_norm = best_l1;
    sol.residual = (op_.apply(best_x) - y).norm();
    if (sol.converged &&
        sol.residual > cfg.tol_abs + cfg.tol_rel * y.norm() + 1e-9)
      sol.converged = false;  // projection drift; report honestly
    return sol;
  }

 private:
  LinearOperator op_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline BpSolution solve_bp(const LinearOperator& op, const Eigen::VectorXd& y,
                           const SolverConfig& cfg = {}) {
  return BpSolver(op).solve(y, cfg);
}

// Adversarial best-case reconstruction: BP in the wavelet coefficient
// domain, then inverse transform, crop, clamp.
struct ReconstructionResult {
  GrayImage image;
  int iterations = 0;
  bool converged = false;
};

inline ReconstructionResult reconstruct_image(const BpSolver& solver,
                                              const Measurement& y,
                                              const SolverConfig& cfg = {},
                                              int levels = kDefaultLevels) {
  if (y.domain != MeasureDomain::Wavelet)
    throw std::invalid_argument(
        "reconstruct_image: expects wavelet-domain measurements");
  if (solver.op().cols != kPaddedSize)
    throw std::invalid_argument("reconstruct_image: operator size mismatch");
  const BpSolution sol = solver.solve(y.values, cfg);
  WaveletCoeffs wc{kPaddedWidth, kPaddedHeight, levels,
                   std::vector<double>(sol.coeffs.data(),
                                       sol.coeffs.data() + sol.coeffs.size())};
  GrayImage img = coeffs_to_image(wc);
  for (double& p : img.pixels) p = std::clamp(p, 0.0, 1.0);
  return {std::move(img), sol.iterations, sol.converged};
}

inline ReconstructionResult reconstruct_image(const SensingMatrix& mat,
                                              const Measurement& y,
                                              const SolverConfig& cfg = {}) {
  if (mat.seed() != y.matrix_seed || mat.domain() != y.domain)
    throw std::invalid_argument(
        "reconstruct_image: matrix does not match measurement key/domain");
  BpSolver solver(as_operator(mat));
  return reconstruct_image(solver, y, cfg);
}

}  // namespace ped
