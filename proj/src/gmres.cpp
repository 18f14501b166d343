#include "mtq/gmres.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace mtq {

GmresResult gmres(const LinearOperator& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                  int k_max, double rel_tol) {
    using Eigen::VectorXd;
    const Eigen::Index n = b.size();
    if (x.size() != n) x = VectorXd::Zero(n);

    GmresResult result;
    const VectorXd r0 = b - a(x);
    const double beta = r0.norm();
    const double target = rel_tol * std::max(b.norm(), 1e-300);
    result.residual_norm = beta;
    if (beta <= target || k_max <= 0) {
        result.status = beta <= target ? GmresStatus::converged : GmresStatus::iteration_limit;
        return result;
    }

    const int m = static_cast<int>(std::min<Eigen::Index>(k_max, n));
    Eigen::MatrixXd basis(n, m + 1);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
    VectorXd cs = VectorXd::Zero(m), sn = VectorXd::Zero(m);
    VectorXd g = VectorXd::Zero(m + 1);
    g[0] = beta;
    basis.col(0) = r0 / beta;

    int k = 0;
    bool done = false;
    while (k < m && !done) {
        VectorXd w = a(basis.col(k));
        // modified Gram-Schmidt
        for (int i = 0; i <= k; ++i) {
            hess(i, k) = basis.col(i).dot(w);
            w -= hess(i, k) * basis.col(i);
        }
        const double h_next = w.norm();
        hess(k + 1, k) = h_next;

        for (int i = 0; i < k; ++i) {
            const double t = cs[i] * hess(i, k) + sn[i] * hess(i + 1, k);
            hess(i + 1, k) = -sn[i] * hess(i, k) + cs[i] * hess(i + 1, k);
            hess(i, k) = t;
        }
        const double denom = std::hypot(hess(k, k), hess(k + 1, k));
        if (denom == 0.0) {
            // A maps the Krylov space to zero: nothing more to gain
            break;
        }
        cs[k] = hess(k, k) / denom;
        sn[k] = hess(k + 1, k) / denom;
        hess(k, k) = denom;
        hess(k + 1, k) = 0.0;
        g[k + 1] = -sn[k] * g[k];
        g[k] = cs[k] * g[k];
        ++k;

        const double res = std::abs(g[k]);
        if (res <= target || h_next <= 1e-14 * beta) {
            done = true;
        } else {
            basis.col(k) = w / h_next;
        }
    }

    if (k > 0) {
        const VectorXd y = hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        x += basis.leftCols(k) * y;
    }
    result.iterations = k;
    result.residual_norm = std::abs(g[k]);
    result.status = (result.residual_norm <= target || done) ? GmresStatus::converged
                                                             : GmresStatus::iteration_limit;
    return result;
}

}  // namespace mtq
