#pragma once

#include "mtq/attitude.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace mtq {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Mat76 = Eigen::Matrix<double, 7, 6>;
using VecX = Eigen::VectorXd;

/// Diagonal weights of the receding-horizon cost.
struct NmpcWeights {
    StateVector q = StateVector::Zero();   // stage state weights
    StateVector qt = StateVector::Zero();  // terminal state weights
    Vec6 r = Vec6::Constant(1e-8);         // (mx, my, mz, vx, vy, vz)
    Vec3 p = Vec3::Constant(0.1);          // dummy-input rewards
    double u_max = 0.1;                    // A*m^2

    /// Throws InvalidStateError on negative weights, non-positive p or u_max.
    void validate() const;
};

/// Prediction horizon Ts split into N steps of dtau = Ts / N.
class HorizonConfig {
public:
    HorizonConfig(double ts, int n);

    double ts() const { return ts_; }
    int steps() const { return n_; }
    double dtau() const { return ts_ / n_; }

private:
    double ts_;
    int n_;
};

/// Per-step unknowns of the discretized problem, stacked into one vector:
/// [mx, my, mz, vx, vy, vz, mu_x, mu_y, mu_z] for i = 0 .. N-1.
class HorizonSolution {
public:
    static constexpr int kStride = 9;

    explicit HorizonSolution(int steps);
    HorizonSolution(int steps, VecX data);

    /// m = 0, v = u_max, mu = mu0 at every step.
    static HorizonSolution warm_start(int steps, double u_max, double mu0 = 0.01);

    int steps() const { return n_; }
    const VecX& data() const { return data_; }
    VecX& data() { return data_; }

    Vec6 input(int i) const { return data_.segment<6>(kStride * i); }
    Vec3 multiplier(int i) const { return data_.segment<3>(kStride * i + 6); }
    Vec9 row(int i) const { return data_.segment<9>(kStride * i); }

private:
    int n_;
    VecX data_;
};

/// Body-frame field (T) at each horizon node i = 0 .. N-1.
using FieldForecast = std::span<const Vec3>;

/// Dynamics, cost and their analytic derivatives for the magnetically
/// actuated attitude problem with dummy inputs v (|m_k| <= u_max encoded as
/// m_k^2 + v_k^2 = u_max^2).
class PredictionModel {
public:
    PredictionModel(const InertiaTensor& inertia, const NmpcWeights& weights,
                    const StateVector& reference);

    const InertiaTensor& inertia() const { return inertia_; }
    const NmpcWeights& weights() const { return weights_; }
    const StateVector& reference() const { return reference_; }

    StateVector f(const StateVector& x, const Vec6& u, const Vec3& b) const;
    Mat7 f_x(const StateVector& x, const Vec6& u, const Vec3& b) const;
    Mat76 f_u(const StateVector& x, const Vec6& u, const Vec3& b) const;

    Vec3 constraint(const Vec6& u) const;
    double stage_cost(const StateVector& x, const Vec6& u) const;
    double terminal_cost(const StateVector& x) const;
    StateVector terminal_gradient(const StateVector& x) const;

    double hamiltonian(const StateVector& x, const StateVector& lambda, const Vec6& u,
                       const Vec3& mu, const Vec3& b) const;
    StateVector h_x(const StateVector& x, const StateVector& lambda, const Vec6& u,
                    const Vec3& mu, const Vec3& b) const;
    Vec6 h_u(const StateVector& x, const StateVector& lambda, const Vec6& u, const Vec3& mu,
             const Vec3& b) const;

private:
    InertiaTensor inertia_;
    NmpcWeights weights_;
    StateVector reference_;
};

/// x*_0 .. x*_N by explicit Euler: x*_{i+1} = x*_i + f(x*_i, u*_i) dtau.
/// Throws PropagationError on a non-finite state.
std::vector<StateVector> forward_rollout(const PredictionModel& model, const StateVector& x0,
                                         const HorizonSolution& u, FieldForecast forecast,
                                         const HorizonConfig& cfg);

/// lambda*_0 .. lambda*_N: lambda_N = Qt (x_N - x_f), then
/// lambda_i = lambda_{i+1} + H_x(x_i, lambda_{i+1}, u_i, mu_i) dtau.
std::vector<StateVector> backward_costate(const PredictionModel& model,
                                          std::span<const StateVector> traj,
                                          const HorizonSolution& u, FieldForecast forecast,
                                          const HorizonConfig& cfg);

/// Stacked first-order optimality conditions, 9N entries: per step the six
/// H_u components followed by the three equality constraints.
VecX optimality_residual(const PredictionModel& model, const StateVector& x0,
                         const HorizonSolution& u, FieldForecast forecast,
                         const HorizonConfig& cfg);

/// Discretized cost psi(x_N) + sum L(x_i, u_i) dtau for a given input sequence.
double horizon_cost(const PredictionModel& model, const StateVector& x0, const HorizonSolution& u,
                    FieldForecast forecast, const HorizonConfig& cfg);

struct ControlCommand {
    Vec3 m = Vec3::Zero();  // dipole moment, A*m^2
    Vec3 v = Vec3::Zero();  // dummy inputs
};

/// u(t) = u*_0(t)
ControlCommand extract_control(const HorizonSolution& u);

}  // namespace mtq
