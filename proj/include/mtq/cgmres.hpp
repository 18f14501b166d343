#pragma once

#include "mtq/gmres.hpp"
#include "mtq/nmpc.hpp"

#include <functional>
#include <vector>

namespace mtq {

/// Tuning of the continuation/GMRES tracker.
struct CgmresParams {
    double zeta = 1.0;        // stabilization gain of F_dot = -zeta F, 1/s
    double fd_step = 1e-6;    // forward-difference step for Jacobian-vector products
    int k_max = 30;           // GMRES iterations per update, no restarts
    double gmres_tol = 1e-10; // relative; GMRES stops early below this
    int init_newton_iters = 50;
    double init_tol = 1e-8;
};

/// Fills `out` (N entries) with the body-frame field the controller expects at
/// the horizon nodes t + i*dtau, given its current state estimate.
using ForecastFn = std::function<void(double t, const StateVector& x, std::vector<Vec3>& out)>;

struct CgmresUpdate {
    double residual_norm = 0.0;  // |F| at (t, x) before the update
    GmresResult linear;
};

struct CgmresInit {
    double residual_norm = 0.0;
    int newton_iterations = 0;
};

/// Tracks the zero of the optimality residual F(U, x, t) over time by
/// integrating F_dot = -zeta F, each step solved with matrix-free GMRES.
/// Stateful: carries U and its rate between samples.
class ContinuationGmres {
public:
    ContinuationGmres(PredictionModel model, HorizonConfig horizon, CgmresParams params,
                      ForecastFn forecast);

    const PredictionModel& model() const { return model_; }
    const HorizonConfig& horizon() const { return horizon_; }
    const CgmresParams& params() const { return params_; }

    const HorizonSolution& solution() const { return u_; }
    void set_solution(HorizonSolution u);

    VecX residual(double t, const StateVector& x) const { return residual(t, x, u_); }
    VecX residual(double t, const StateVector& x, const HorizonSolution& u) const;

    /// Newton-GMRES on F(U, x, t) = 0 from the current solution (warm start by
    /// default), up to params.init_newton_iters iterations.
    CgmresInit initialize(double t, const StateVector& x);

    /// One continuation step: solves F_U U_dot = -zeta F - F_x x_dot - F_t for
    /// U_dot and advances U <- U + U_dot * dt.
    CgmresUpdate update(double t, const StateVector& x, const StateVector& x_dot, double dt);

    ControlCommand control() const { return extract_control(u_); }

private:
    PredictionModel model_;
    HorizonConfig horizon_;
    CgmresParams params_;
    ForecastFn forecast_;
    HorizonSolution u_;
    VecX u_dot_;
    mutable std::vector<Vec3> scratch_;
};

}  // namespace mtq
