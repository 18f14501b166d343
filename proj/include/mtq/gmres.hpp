#pragma once

#include <Eigen/Core>

#include <functional>

namespace mtq {

enum class GmresStatus {
    converged,        // relative residual below tolerance, or happy breakdown
    iteration_limit,  // k_max reached; best iterate returned
};

struct GmresResult {
    int iterations = 0;
    double residual_norm = 0.0;  // |b - A x| of the returned iterate
    GmresStatus status = GmresStatus::converged;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Unrestarted matrix-free GMRES with Givens rotations. `x` holds the initial
/// guess on entry and the minimal-residual iterate on exit.
GmresResult gmres(const LinearOperator& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                  int k_max, double rel_tol = 1e-10);

}  // namespace mtq
