#include "oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace oracle {
namespace {

struct Node {
    V6 u;
    V3 mu;
};

Node node(const VX& U, int i) {
    return {U.segment<6>(9 * i), U.segment<3>(9 * i + 6)};
}

std::vector<V7> rollout(const Problem& pb, const VX& U) {
    std::vector<V7> xs{pb.x0};
    for (int i = 0; i < pb.steps(); ++i) {
        const V3 m = U.segment<3>(9 * i);
        xs.push_back(xs.back() + dynamics(xs.back(), m, pb.b[static_cast<std::size_t>(i)], pb.inertia) * pb.dtau);
    }
    return xs;
}

V7 dh_dx(const Problem& pb, const V7& x, const V7& lam, const Node& n, const V3& b) {
    constexpr double h = 1e-2;
    V7 g;
    for (int k = 0; k < 7; ++k) {
        V7 xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        g[k] = (hamiltonian(pb, xp, lam, n.u, n.mu, b) - hamiltonian(pb, xm, lam, n.u, n.mu, b)) / (2 * h);
    }
    return g;
}

V6 dh_du(const Problem& pb, const V7& x, const V7& lam, const Node& n, const V3& b) {
    constexpr double h = 1e-2;
    V6 g;
    for (int k = 0; k < 6; ++k) {
        V6 up = n.u, um = n.u;
        up[k] += h;
        um[k] -= h;
        g[k] = (hamiltonian(pb, x, lam, up, n.mu, b) - hamiltonian(pb, x, lam, um, n.mu, b)) / (2 * h);
    }
    return g;
}

}  // namespace

V7 dynamics(const V7& x, const V3& m, const V3& b, const V3& inertia) {
    const double q1 = x[0], q2 = x[1], q3 = x[2], q4 = x[3];
    const double wx = x[4], wy = x[5], wz = x[6];
    const double jx = inertia[0], jy = inertia[1], jz = inertia[2];
    V7 d;
    d[0] = 0.5 * (q4 * wx - q3 * wy + q2 * wz);
    d[1] = 0.5 * (q3 * wx + q4 * wy - q1 * wz);
    d[2] = 0.5 * (-q2 * wx + q1 * wy + q4 * wz);
    d[3] = 0.5 * (-q1 * wx - q2 * wy - q3 * wz);
    d[4] = ((jy - jz) * wy * wz + m[1] * b[2] - m[2] * b[1]) / jx;
    d[5] = ((jz - jx) * wz * wx + m[2] * b[0] - m[0] * b[2]) / jy;
    d[6] = ((jx - jy) * wx * wy + m[0] * b[1] - m[1] * b[0]) / jz;
    return d;
}

double hamiltonian(const Problem& pb, const V7& x, const V7& lambda, const V6& u, const V3& mu,
                   const V3& b) {
    const V7 dx = x - pb.xf;
    double l = 0.0;
    for (int k = 0; k < 7; ++k) l += 0.5 * pb.q[k] * dx[k] * dx[k];
    for (int k = 0; k < 6; ++k) l += 0.5 * pb.r[k] * u[k] * u[k];
    for (int k = 0; k < 3; ++k) l -= pb.p[k] * u[3 + k];
    double c = 0.0;
    for (int k = 0; k < 3; ++k) c += mu[k] * (u[k] * u[k] + u[3 + k] * u[3 + k] - pb.u_max * pb.u_max);
    return l + lambda.dot(dynamics(x, u.head<3>(), b, pb.inertia)) + c;
}

VX residual(const Problem& pb, const VX& U) {
    const int n = pb.steps();
    const auto xs = rollout(pb, U);
    std::vector<V7> lam(static_cast<std::size_t>(n + 1));
    lam[static_cast<std::size_t>(n)] = pb.qt.cwiseProduct(xs[static_cast<std::size_t>(n)] - pb.xf);
    for (int i = n - 1; i >= 0; --i) {
        const auto iu = static_cast<std::size_t>(i);
        lam[iu] = lam[iu + 1] + dh_dx(pb, xs[iu], lam[iu + 1], node(U, i), pb.b[iu]) * pb.dtau;
    }
    VX f(9 * n);
    for (int i = 0; i < n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const Node nd = node(U, i);
        f.segment<6>(9 * i) = dh_du(pb, xs[iu], lam[iu + 1], nd, pb.b[iu]);
        for (int k = 0; k < 3; ++k) {
            f[9 * i + 6 + k] = nd.u[k] * nd.u[k] + nd.u[3 + k] * nd.u[3 + k] - pb.u_max * pb.u_max;
        }
    }
    return f;
}

double reduced_cost(const Problem& pb, const VX& m) {
    V7 x = pb.x0;
    double j = 0.0;
    for (int i = 0; i < pb.steps(); ++i) {
        const V3 mi = m.segment<3>(3 * i);
        V6 u;
        u.head<3>() = mi;
        for (int k = 0; k < 3; ++k) u[3 + k] = std::sqrt(std::max(0.0, pb.u_max * pb.u_max - mi[k] * mi[k]));
        const V7 dx = x - pb.xf;
        double l = 0.0;
        for (int k = 0; k < 7; ++k) l += 0.5 * pb.q[k] * dx[k] * dx[k];
        for (int k = 0; k < 6; ++k) l += 0.5 * pb.r[k] * u[k] * u[k];
        for (int k = 0; k < 3; ++k) l -= pb.p[k] * u[3 + k];
        j += l * pb.dtau;
        x = x + dynamics(x, mi, pb.b[static_cast<std::size_t>(i)], pb.inertia) * pb.dtau;
    }
    const V7 dx = x - pb.xf;
    for (int k = 0; k < 7; ++k) j += 0.5 * pb.qt[k] * dx[k] * dx[k];
    return j;
}

Solution solve_tpbvp(const Problem& pb, int grid_points_per_axis, double tol) {
    const int n = pb.steps();
    const int dims = 3 * n;
    const int g = grid_points_per_axis;

    // exhaustive grid on the reduced cost (interior points only, so v > 0)
    VX best_m = VX::Zero(dims);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    VX m(dims);
    for (;;) {
        for (int d = 0; d < dims; ++d) {
            m[d] = pb.u_max * (-1.0 + 2.0 * (idx[static_cast<std::size_t>(d)] + 1) / (g + 1));
        }
        const double j = reduced_cost(pb, m);
        if (j < best) {
            best = j;
            best_m = m;
        }
        int d = 0;
        while (d < dims && ++idx[static_cast<std::size_t>(d)] == g) idx[static_cast<std::size_t>(d++)] = 0;
        if (d == dims) break;
    }

    Solution s;
    s.U = VX::Zero(9 * n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) {
            const double mk = best_m[3 * i + k];
            const double vk = std::sqrt(pb.u_max * pb.u_max - mk * mk);
            s.U[9 * i + k] = mk;
            s.U[9 * i + 3 + k] = vk;
            s.U[9 * i + 6 + k] = (pb.p[k] - pb.r[3 + k] * vk) / (2.0 * vk);
        }
    }

    VX f = residual(pb, s.U);
    for (int it = 0; it < 100 && f.norm() > tol; ++it) {
        Eigen::MatrixXd jac(9 * n, 9 * n);
        for (int c = 0; c < 9 * n; ++c) {
            const double h = 1e-6 * std::max(1.0, std::abs(s.U[c]));
            VX up = s.U, um = s.U;
            up[c] += h;
            um[c] -= h;
            jac.col(c) = (residual(pb, up) - residual(pb, um)) / (2 * h);
        }
        const VX step = jac.fullPivLu().solve(-f);
        double alpha = 1.0;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            const VX trial = s.U + alpha * step;
            const VX ft = residual(pb, trial);
            if (ft.norm() < f.norm()) {
                s.U = trial;
                f = ft;
                break;
            }
        }
        ++s.newton_iterations;
    }
    s.residual_norm = f.norm();
    return s;
}

double kepler_bisection(double m, double e) {
    double lo = m - 1.0;
    double hi = m + 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid - e * std::sin(mid) - m < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

V3 tilted_dipole(double g10, double g11, double h11, const V3& r, double a) {
    const V3 gvec(g11, h11, g10);
    const double rn = r.norm();
    const V3 rh = r / rn;
    const double s = std::pow(a / rn, 3);
    return s * (3.0 * gvec.dot(rh) * rh - gvec);
}

}  // namespace oracle
