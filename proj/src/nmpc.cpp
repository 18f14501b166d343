#include "mtq/nmpc.hpp"

#include "mtq/actuation.hpp"
#include "mtq/errors.hpp"

#include <cmath>

namespace mtq {

void NmpcWeights::validate() const {
    if ((q.array() < 0.0).any() || (qt.array() < 0.0).any() || (r.array() < 0.0).any()) {
        throw InvalidStateError("NMPC state and input weights must be non-negative");
    }
    if (!((p.array() > 0.0).all())) throw InvalidStateError("dummy-input rewards must be positive");
    if (!(u_max > 0.0)) throw InvalidStateError("u_max must be positive");
}

HorizonConfig::HorizonConfig(double ts, int n) : ts_(ts), n_(n) {
    if (!(ts > 0.0)) throw InvalidStateError("prediction horizon must be positive");
    if (n < 1) throw InvalidStateError("horizon needs at least one step");
}

HorizonSolution::HorizonSolution(int steps) : HorizonSolution(steps, VecX::Zero(kStride * steps)) {}

HorizonSolution::HorizonSolution(int steps, VecX data) : n_(steps), data_(std::move(data)) {
    if (steps < 1 || data_.size() != kStride * steps) {
        throw InvalidStateError("horizon solution size does not match 9N");
    }
}

HorizonSolution HorizonSolution::warm_start(int steps, double u_max, double mu0) {
    HorizonSolution s(steps);
    for (int i = 0; i < steps; ++i) {
        s.data_.segment<3>(kStride * i).setZero();
        s.data_.segment<3>(kStride * i + 3).setConstant(u_max);
        s.data_.segment<3>(kStride * i + 6).setConstant(mu0);
    }
    return s;
}

PredictionModel::PredictionModel(const InertiaTensor& inertia, const NmpcWeights& weights,
                                 const StateVector& reference)
    : inertia_(inertia), weights_(weights), reference_(reference) {
    weights_.validate();
}

StateVector PredictionModel::f(const StateVector& x, const Vec6& u, const Vec3& b) const {
    return rates(x, u.head<3>().cross(b), inertia_);
}

Mat7 PredictionModel::f_x(const StateVector& x, const Vec6& /*u*/, const Vec3& /*b*/) const {
    const double w1 = x[4], w2 = x[5], w3 = x[6];
    const Vec3& j = inertia_.diagonal();

    Mat7 a = Mat7::Zero();
    // d(E(q) w)/dq
    // clang-format off
    a.block<4, 4>(0, 0) <<
          0.0,  w3, -w2,  w1,
          -w3, 0.0,  w1,  w2,
           w2, -w1, 0.0,  w3,
          -w1, -w2, -w3, 0.0;
    // clang-format on
    a.block<4, 4>(0, 0) *= 0.5;
    a.block<4, 3>(0, 4) = kinematics_matrix_unchecked(x.head<4>());

    a(4, 5) = (j[1] - j[2]) * w3 / j[0];
    a(4, 6) = (j[1] - j[2]) * w2 / j[0];
    a(5, 4) = (j[2] - j[0]) * w3 / j[1];
    a(5, 6) = (j[2] - j[0]) * w1 / j[1];
    a(6, 4) = (j[0] - j[1]) * w2 / j[2];
    a(6, 5) = (j[0] - j[1]) * w1 / j[2];
    return a;
}

Mat76 PredictionModel::f_u(const StateVector& /*x*/, const Vec6& /*u*/, const Vec3& b) const {
    Mat76 bu = Mat76::Zero();
    // d(m x B)/dm = S(B), scaled row-wise by 1/J
    bu.block<3, 3>(4, 0) = inertia_.diagonal().cwiseInverse().asDiagonal() * skew(b);
    return bu;
}

Vec3 PredictionModel::constraint(const Vec6& u) const {
    const double u2 = weights_.u_max * weights_.u_max;
    return (u.head<3>().array().square() + u.tail<3>().array().square() - u2).matrix();
}

double PredictionModel::stage_cost(const StateVector& x, const Vec6& u) const {
    const StateVector dx = x - reference_;
    return 0.5 * dx.dot(weights_.q.cwiseProduct(dx)) + 0.5 * u.dot(weights_.r.cwiseProduct(u)) -
           weights_.p.dot(u.tail<3>());
}

double PredictionModel::terminal_cost(const StateVector& x) const {
    const StateVector dx = x - reference_;
    return 0.5 * dx.dot(weights_.qt.cwiseProduct(dx));
}

StateVector PredictionModel::terminal_gradient(const StateVector& x) const {
    return weights_.qt.cwiseProduct(x - reference_);
}

double PredictionModel::hamiltonian(const StateVector& x, const StateVector& lambda,
                                    const Vec6& u, const Vec3& mu, const Vec3& b) const {
    return stage_cost(x, u) + lambda.dot(f(x, u, b)) + mu.dot(constraint(u));
}

StateVector PredictionModel::h_x(const StateVector& x, const StateVector& lambda,
                                 const Vec6& u, const Vec3& /*mu*/, const Vec3& b) const {
    return weights_.q.cwiseProduct(x - reference_) + f_x(x, u, b).transpose() * lambda;
}

Vec6 PredictionModel::h_u(const StateVector& /*x*/, const StateVector& lambda, const Vec6& u,
                          const Vec3& mu, const Vec3& b) const {
    Vec6 g = weights_.r.cwiseProduct(u);
    const Vec3 scaled = lambda.tail<3>().cwiseQuotient(inertia_.diagonal());
    g.head<3>() += skew(b).transpose() * scaled + 2.0 * mu.cwiseProduct(u.head<3>());
    g.tail<3>() += -weights_.p + 2.0 * mu.cwiseProduct(u.tail<3>());
    return g;
}

namespace {

void require_forecast(FieldForecast forecast, int steps, const HorizonConfig& cfg) {
    if (cfg.steps() != steps) throw InvalidStateError("horizon solution and config disagree on N");
    if (static_cast<int>(forecast.size()) < steps) {
        throw InvalidStateError("field forecast shorter than the horizon");
    }
}

}  // namespace

std::vector<StateVector> forward_rollout(const PredictionModel& model, const StateVector& x0,
                                         const HorizonSolution& u, FieldForecast forecast,
                                         const HorizonConfig& cfg) {
    const int n = u.steps();
    require_forecast(forecast, n, cfg);
    const double dtau = cfg.dtau();

    std::vector<StateVector> traj(static_cast<std::size_t>(n) + 1);
    traj[0] = x0;
    for (int i = 0; i < n; ++i) {
        traj[i + 1] = traj[i] + model.f(traj[i], u.input(i), forecast[i]) * dtau;
        if (!traj[i + 1].allFinite()) throw PropagationError("forward rollout produced a non-finite state");
    }
    return traj;
}

std::vector<StateVector> backward_costate(const PredictionModel& model,
                                          std::span<const StateVector> traj,
                                          const HorizonSolution& u, FieldForecast forecast,
                                          const HorizonConfig& cfg) {
    const int n = u.steps();
    require_forecast(forecast, n, cfg);
    if (static_cast<int>(traj.size()) != n + 1) {
        throw InvalidStateError("state trajectory must have N + 1 nodes");
    }
    const double dtau = cfg.dtau();

    std::vector<StateVector> lambda(static_cast<std::size_t>(n) + 1);
    lambda[n] = model.terminal_gradient(traj[n]);
    for (int i = n - 1; i >= 0; --i) {
        lambda[i] = lambda[i + 1] +
                    model.h_x(traj[i], lambda[i + 1], u.input(i), u.multiplier(i), forecast[i]) * dtau;
    }
    return lambda;
}

VecX optimality_residual(const PredictionModel& model, const StateVector& x0,
                         const HorizonSolution& u, FieldForecast forecast,
                         const HorizonConfig& cfg) {
    const auto traj = forward_rollout(model, x0, u, forecast, cfg);
    const auto lambda = backward_costate(model, traj, u, forecast, cfg);

    const int n = u.steps();
    VecX res(HorizonSolution::kStride * n);
    for (int i = 0; i < n; ++i) {
        const Vec6 ui = u.input(i);
        res.segment<6>(HorizonSolution::kStride * i) =
            model.h_u(traj[i], lambda[i + 1], ui, u.multiplier(i), forecast[i]);
        res.segment<3>(HorizonSolution::kStride * i + 6) = model.constraint(ui);
    }
    return res;
}

double horizon_cost(const PredictionModel& model, const StateVector& x0, const HorizonSolution& u,
                    FieldForecast forecast, const HorizonConfig& cfg) {
    const auto traj = forward_rollout(model, x0, u, forecast, cfg);
    const double dtau = cfg.dtau();
    double j = model.terminal_cost(traj.back());
    for (int i = 0; i < u.steps(); ++i) j += model.stage_cost(traj[i], u.input(i)) * dtau;
    return j;
}

ControlCommand extract_control(const HorizonSolution& u) {
    const Vec6 first = u.input(0);
    return {first.head<3>(), first.tail<3>()};
}

}  // namespace mtq
