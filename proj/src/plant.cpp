#include "dissip/plant.hpp"

#include <cmath>

#include "dissip/errors.hpp"

namespace dissip {

PlantModel PlantModel::LtiCircle() {
    PlantModel p;
    p.kind = PlantKind::LtiCircle;
    p.state_dim = 1;
    p.lipschitz_bound = kLtiCircleGain;
    p.name = "lti-circle";
    return p;
}

PlantModel PlantModel::Pendulum() {
    PlantModel p;
    p.kind = PlantKind::Pendulum;
    p.state_dim = 2;
    p.name = "pendulum";
    return p;
}

PlantModel PlantModel::Custom(int state_dim, Dynamics f, Output h,
                              std::optional<double> lipschitz, std::string name) {
    if (state_dim < 1) throw ValidationError("custom plant: state_dim must be >= 1");
    if (!f || !h) throw ValidationError("custom plant: dynamics and output required");
    PlantModel p;
    p.kind = PlantKind::Custom;
    p.state_dim = state_dim;
    p.dynamics = std::move(f);
    p.output = std::move(h);
    p.lipschitz_bound = lipschitz;
    p.name = std::move(name);
    return p;
}

namespace {

// x state, u held input value; writes dx.
inline void eval_dynamics(const PlantModel& p, const Eigen::VectorXd& x, double u,
                          Eigen::VectorXd& dx) {
    switch (p.kind) {
        case PlantKind::LtiCircle:
            dx[0] = -x[0] + u;
            break;
        case PlantKind::Pendulum:
            dx[0] = x[1];
            dx[1] = -std::sin(x[0]) - x[1] + u;
            break;
        case PlantKind::Custom:
            p.dynamics(x, u, dx);
            break;
    }
}

inline double eval_output(const PlantModel& p, const Eigen::VectorXd& x, double u) {
    switch (p.kind) {
        case PlantKind::LtiCircle:
            return x[0] + 0.25 * u;
        case PlantKind::Pendulum:
            return x[1] + 0.25 * u;
        case PlantKind::Custom:
            return p.output(x, u);
    }
    return 0.0;
}

struct Rk4Workspace {
    Eigen::VectorXd k1, k2, k3, k4, tmp;
    explicit Rk4Workspace(int dim) : k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim) {}
};

// One RK4 step with the input held at (u0 at t, um at t+dt/2, u1 at t+dt).
inline void rk4_step(const PlantModel& p, Eigen::VectorXd& x, double u0, double um, double u1,
                     double dt, Rk4Workspace& w) {
    eval_dynamics(p, x, u0, w.k1);
    w.tmp = x + 0.5 * dt * w.k1;
    eval_dynamics(p, w.tmp, um, w.k2);
    w.tmp = x + 0.5 * dt * w.k2;
    eval_dynamics(p, w.tmp, um, w.k3);
    w.tmp = x + dt * w.k3;
    eval_dynamics(p, w.tmp, u1, w.k4);
    x += (dt / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

}  // namespace

Signal simulate(const PlantModel& plant, const Signal& u) {
    const Eigen::Index n = u.size();
    const double dt = u.dt;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.state_dim);
    Rk4Workspace w(plant.state_dim);
    Eigen::VectorXd y(n);
    y[0] = eval_output(plant, x, u.values[0]);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double uk = u.values[k];  // zero-order hold across the whole step
        rk4_step(plant, x, uk, uk, uk, dt, w);
        y[k + 1] = eval_output(plant, x, u.values[k + 1]);
        if (!std::isfinite(y[k + 1]) || !x.allFinite())
            throw DivergenceError("state diverged (non-finite) at time index " +
                                      std::to_string(k + 1),
                                  k + 1);
    }
    return Signal(dt, std::move(y));
}

Signal simulate_ode(const PlantModel& plant, const std::function<double(double)>& u, double T,
                    double dt) {
    if (!(T > 0.0) || !(dt > 0.0) || dt > T) throw ValidationError("simulate_ode: need 0 < dt <= T");
    const auto n = static_cast<Eigen::Index>(std::llround(T / dt)) + 1;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.state_dim);
    Rk4Workspace w(plant.state_dim);
    Eigen::VectorXd y(n);
    y[0] = eval_output(plant, x, u(0.0));
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double t = dt * static_cast<double>(k);
        rk4_step(plant, x, u(t), u(t + 0.5 * dt), u(t + dt), dt, w);
        y[k + 1] = eval_output(plant, x, u(t + dt));
        if (!std::isfinite(y[k + 1]) || !x.allFinite())
            throw DivergenceError("state diverged (non-finite) at time index " +
                                      std::to_string(k + 1),
                                  k + 1);
    }
    return Signal(dt, std::move(y));
}

Eigen::MatrixXd simulate_states(const PlantModel& plant, const Signal& u) {
    const Eigen::Index n = u.size();
    Eigen::MatrixXd states(n, plant.state_dim);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.state_dim);
    Rk4Workspace w(plant.state_dim);
    states.row(0) = x;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double uk = u.values[k];
        rk4_step(plant, x, uk, uk, uk, u.dt, w);
        if (!x.allFinite())
            throw DivergenceError("state diverged (non-finite) at time index " +
                                      std::to_string(k + 1),
                                  k + 1);
        states.row(k + 1) = x;
    }
    return states;
}

double plant_output(const PlantModel& plant, const Eigen::VectorXd& x, double u) {
    return eval_output(plant, x, u);
}

ZohStepper::ZohStepper(PlantModel plant, double dt)
    : plant_(std::move(plant)),
      dt_(dt),
      k1_(plant_.state_dim),
      k2_(plant_.state_dim),
      k3_(plant_.state_dim),
      k4_(plant_.state_dim),
      tmp_(plant_.state_dim) {
    if (!(dt > 0.0)) throw ValidationError("stepper: dt must be > 0");
}

void ZohStepper::step(Eigen::VectorXd& x, double u) {
    eval_dynamics(plant_, x, u, k1_);
    tmp_ = x + 0.5 * dt_ * k1_;
    eval_dynamics(plant_, tmp_, u, k2_);
    tmp_ = x + 0.5 * dt_ * k2_;
    eval_dynamics(plant_, tmp_, u, k3_);
    tmp_ = x + dt_ * k3_;
    eval_dynamics(plant_, tmp_, u, k4_);
    x += (dt_ / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

double ZohStepper::output(const Eigen::VectorXd& x, double u) const {
    return eval_output(plant_, x, u);
}

std::complex<double> lti_circle_frequency_response(double omega) {
    if (omega < 0.0) throw RangeError("frequency_response: omega must be >= 0");
    return 1.0 / std::complex<double>(1.0, omega) + 0.25;
}

}  // namespace dissip
