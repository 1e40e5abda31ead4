#pragma once

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <optional>
#include <string>

#include "dissip/signal.hpp"

namespace dissip {

enum class PlantKind { LtiCircle, Pendulum, Custom };

/// SISO plant simulated from zero initial state.
///
/// LtiCircle realizes G(s) = 1/(s+1) + 1/4 as dx/dt = -x + u, y = x + u/4;
/// its Nyquist plot is the circle centered (3/4, 0) with radius 1/2.
/// Pendulum is theta'' = -sin(theta) - theta' + u with y = theta' + u/4.
struct PlantModel {
    using Dynamics = std::function<void(const Eigen::VectorXd& x, double u, Eigen::VectorXd& dx)>;
    using Output = std::function<double(const Eigen::VectorXd& x, double u)>;

    PlantKind kind = PlantKind::LtiCircle;
    int state_dim = 1;
    std::optional<double> lipschitz_bound;  // symbol L, supplied by the user
    std::string name = "lti-circle";
    Dynamics dynamics;  // Custom only
    Output output;      // Custom only

    static PlantModel LtiCircle();
    static PlantModel Pendulum();
    static PlantModel Custom(int state_dim, Dynamics f, Output h,
                             std::optional<double> lipschitz = std::nullopt,
                             std::string name = "custom");
};

/// Simulates the plant under the sampled input, zero-order held between
/// samples, with classical RK4 at step dt. Returns y on the same grid.
/// Throws DivergenceError naming the first non-finite time index.
Signal simulate(const PlantModel& plant, const Signal& u);

/// RK4 with the input evaluated continuously at substeps. Used where the
/// integrator's own order matters (convergence studies, smooth references).
Signal simulate_ode(const PlantModel& plant, const std::function<double(double)>& u,
                    double T, double dt);

/// State trajectory under the zero-order-held input; row k is x(t_k).
Eigen::MatrixXd simulate_states(const PlantModel& plant, const Signal& u);

/// Output map y = h(x, u) of the plant.
double plant_output(const PlantModel& plant, const Eigen::VectorXd& x, double u);

/// Single RK4 steps under a held input, for callers that stream their own
/// integration loop.
class ZohStepper {
  public:
    ZohStepper(PlantModel plant, double dt);
    void step(Eigen::VectorXd& x, double u);
    double output(const Eigen::VectorXd& x, double u) const;

  private:
    PlantModel plant_;
    double dt_;
    Eigen::VectorXd k1_, k2_, k3_, k4_, tmp_;
};

/// Transfer function of the LtiCircle plant, evaluated exactly:
/// G(jw) = 1/(jw+1) + 1/4. Oracle for cone and gain estimates.
std::complex<double> lti_circle_frequency_response(double omega);

/// Reference L2 gain of the LtiCircle plant (peak |G| at w = 0), used as
/// the documented Lipschitz bound in the robust-margin examples.
inline constexpr double kLtiCircleGain = 1.25;

}  // namespace dissip
