#include "mtq/cgmres.hpp"

#include "mtq/errors.hpp"

#include <cmath>
#include <utility>

namespace mtq {

ContinuationGmres::ContinuationGmres(PredictionModel model, HorizonConfig horizon,
                                     CgmresParams params, ForecastFn forecast)
    : model_(std::move(model)),
      horizon_(horizon),
      params_(params),
      forecast_(std::move(forecast)),
      u_(HorizonSolution::warm_start(horizon.steps(), model_.weights().u_max)),
      u_dot_(VecX::Zero(HorizonSolution::kStride * horizon.steps())) {
    if (!(params_.zeta > 0.0) || !(params_.fd_step > 0.0) || params_.k_max < 1) {
        throw InvalidStateError("C/GMRES parameters must be positive");
    }
}

void ContinuationGmres::set_solution(HorizonSolution u) {
    if (u.steps() != horizon_.steps()) throw InvalidStateError("horizon solution has the wrong N");
    u_ = std::move(u);
    u_dot_.setZero();
}

VecX ContinuationGmres::residual(double t, const StateVector& x, const HorizonSolution& u) const {
    forecast_(t, x, scratch_);
    return optimality_residual(model_, x, u, scratch_, horizon_);
}

CgmresInit ContinuationGmres::initialize(double t, const StateVector& x) {
    const int n = horizon_.steps();
    const double h = params_.fd_step;
    CgmresInit out;

    VecX f = residual(t, x);
    for (int it = 0; it < params_.init_newton_iters && f.norm() > params_.init_tol; ++it) {
        const HorizonSolution base = u_;
        auto jv = [&](const VecX& v) -> VecX {
            HorizonSolution probe(n, base.data() + h * v);
            return (residual(t, x, probe) - f) / h;
        };
        VecX step = VecX::Zero(f.size());
        gmres(jv, -f, step, static_cast<int>(f.size()), 1e-12);

        // backtrack on |F|
        double alpha = 1.0;
        const double f0 = f.norm();
        for (int ls = 0; ls < 30; ++ls) {
            HorizonSolution trial(n, base.data() + alpha * step);
            const VecX ft = residual(t, x, trial);
            if (ft.allFinite() && ft.norm() < f0) {
                u_ = std::move(trial);
                f = ft;
                break;
            }
            alpha *= 0.5;
        }
        ++out.newton_iterations;
        if (alpha < 1e-8) break;
    }
    u_dot_.setZero();
    out.residual_norm = f.norm();
    return out;
}

CgmresUpdate ContinuationGmres::update(double t, const StateVector& x, const StateVector& x_dot,
                                       double dt) {
    if (!(dt > 0.0)) throw InvalidStateError("C/GMRES update needs dt > 0");
    const double h = params_.fd_step;
    const int n = horizon_.steps();

    const VecX f = residual(t, x);
    const StateVector x1 = x + h * x_dot;
    const double t1 = t + h;
    const VecX f1 = residual(t1, x1);

    // F_U v ~ (F(U + h v, x1, t1) - F(U, x1, t1)) / h
    auto jv = [&](const VecX& v) -> VecX {
        HorizonSolution probe(n, u_.data() + h * v);
        return (residual(t1, x1, probe) - f1) / h;
    };
    const VecX rhs = -params_.zeta * f - (f1 - f) / h;

    CgmresUpdate out;
    out.residual_norm = f.norm();
    out.linear = gmres(jv, rhs, u_dot_, params_.k_max, params_.gmres_tol);
    u_.data() += dt * u_dot_;
    return out;
}

}  // namespace mtq
