#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

#include "dissip/cone.hpp"
#include "dissip/signal.hpp"

namespace dissip {

/// Gram-integral trajectory feature, flattened so that the flat dot product
/// equals the matrix Frobenius inner product (off-diagonals scaled by
/// sqrt(2)). SISO: (||y||_T^2, sqrt(2)*<y,u>_T, ||u||_T^2).
struct FeaturePoint {
    Eigen::VectorXd flat;
};

/// Feature of one trajectory pair at horizon t_trunc (SISO).
FeaturePoint feature_map(const Signal& u, const Signal& y, double t_trunc);
FeaturePoint feature_from_record(const TrajectoryRecord& r);

/// Supply-rate half-plane learned from data: Pi = [Q S; S^T R] flattened
/// like FeaturePoint, offset rho, and the dual weights certifying it.
struct SupplyRate {
    Eigen::VectorXd pi_flat;
    double rho = 0.0;
    double frobenius_norm = 0.0;
    Eigen::VectorXd dual_weights;   // lambda_i >= 0, sum = 1
    double duality_gap_rel = 0.0;

    /// SISO matrix entries (Q = pi[0], S = pi[1]/sqrt(2), R = pi[2]).
    double Q() const;
    double S() const;
    double R() const;
};

/// Hard one-class SVM: minimizes ||Pi||_F^2/2 - rho subject to
/// <Pi, Gamma_i> >= rho. Equivalently Pi is the minimum-norm point of the
/// convex hull of the features and rho = ||Pi||_F^2. Solved with Wolfe's
/// minimum-norm-point algorithm; the relative duality gap is certified to
/// 1e-8. Throws DegenerateDataError when the optimum is Pi = 0.
SupplyRate ocsvm_hard(std::span<const FeaturePoint> points);

/// Fraction of points on the wrong side of the learned half-plane,
/// |{i : <Pi, Gamma_i> < 0}| / n.
double empirical_loss(std::span<const FeaturePoint> points, const SupplyRate& supply);

/// Inputs of the PAC generalization bound: sample count K, constant c
/// (103 as published; ~50x smaller in practice), margin relaxation
/// gamma_hat = gamma/||Pi||_F, and confidence parameter delta_conf.
struct GeneralizationBoundInput {
    double K = 0.0;
    double c = 103.0;
    double gamma_hat = 1.0;
    double delta_conf = 0.0;

    void validate() const;
};

struct GeneralizationBound {
    double bound = 0.0;
    bool vacuous = false;  // bound >= 1 or inner log argument <= 1
};

/// Evaluates (2/K) * (log2(K^2/(2*delta)) + (16 c^2/gh^2) * log2(ln(2)/(4 c^2) * gh^2 * K) + 2)
/// verbatim, flagging rather than clamping vacuous values.
GeneralizationBound generalization_bound(const GeneralizationBoundInput& in);

/// CSV table "f1,f2,f3" (SISO).
void write_features_csv(std::span<const FeaturePoint> points, const std::string& path);
std::vector<FeaturePoint> read_features_csv(const std::string& path);

}  // namespace dissip
