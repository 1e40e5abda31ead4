#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "dissip/errors.hpp"

namespace dissip {

/// Uniformly sampled real-valued trajectory on [0, T] with T = dt * (len - 1).
struct Signal {
    double dt = 0.0;
    Eigen::VectorXd values;

    Signal() = default;
    Signal(double dt_, Eigen::VectorXd values_);

    Eigen::Index size() const { return values.size(); }
    double horizon() const { return dt * static_cast<double>(values.size() - 1); }
    double time_at(Eigen::Index i) const { return dt * static_cast<double>(i); }
};

/// Trapezoid weight of sample i on a uniform grid of n samples.
inline double trapezoid_weight(Eigen::Index i, Eigen::Index n, double dt) {
    return (i == 0 || i == n - 1) ? 0.5 * dt : dt;
}

/// Trapezoid-rule inner product of two equally long sample vectors.
template <typename DerivedA, typename DerivedB>
double trapezoid_inner(const Eigen::MatrixBase<DerivedA>& x,
                       const Eigen::MatrixBase<DerivedB>& y, double dt) {
    const Eigen::Index n = x.size();
    double full = (x.array() * y.array()).sum();
    double ends = 0.5 * (x[0] * y[0] + x[n - 1] * y[n - 1]);
    return dt * (full - ends);
}

/// Truncated inner product: trapezoid approximation of the integral of x*y
/// over [0, t_trunc]. Both signals must share grid; 0 < t_trunc <= T.
double inner_product_T(const Signal& x, const Signal& y, double t_trunc);

/// Induced truncated norm sqrt(<x,x>_t).
double norm_T(const Signal& x, double t_trunc);
double norm_T(const Signal& x);

/// Running trapezoid prefix sums of x*y: entry k approximates the integral
/// over [0, t_k]. Entry 0 is zero.
Eigen::VectorXd running_inner_product(const Signal& x, const Signal& y);

/// Prefix of a signal up to and including the sample at t_trunc.
Signal truncate(const Signal& x, double t_trunc);

/// Grid index of a truncation time; errors unless 0 < t_trunc <= T and
/// t_trunc sits on the sample grid (1e-6 * dt snap).
Eigen::Index truncation_index(const Signal& x, double t_trunc);

enum class BasisKind { FourierSequential, FourierExplicit, Legendre };

/// Finite family of basis functions sampled on a uniform grid over [0, T],
/// orthonormal under the discrete (trapezoid) inner product. Column j of
/// `samples` holds basis function j.
struct BasisSet {
    BasisKind kind = BasisKind::Legendre;
    double dt = 0.0;
    double T = 0.0;
    Eigen::MatrixXd samples;                 // n_samples x n_basis
    std::vector<double> frequencies;         // rad/s, Fourier kinds only

    Eigen::Index n_basis() const { return samples.cols(); }
    Eigen::Index n_samples() const { return samples.rows(); }

    /// Discrete Gram matrix under the trapezoid inner product.
    Eigen::MatrixXd gram() const;
};

/// Builds a basis of the given kind.
///
/// FourierSequential: constant, then (sin, cos) pairs at harmonics
/// omega_k = 2*pi*k/T in increasing k. FourierExplicit: sinusoids at the
/// given frequencies (0 -> constant). Legendre: first n shifted Legendre
/// polynomials on [0, T], discretely re-orthonormalized. Every function is
/// normalized to unit discrete L2 norm; frequencies must keep at least
/// 10 samples per period on the grid.
BasisSet make_basis(BasisKind kind, int n_basis, double T, double dt,
                    const std::vector<double>& explicit_frequencies = {});

/// Coefficient-weighted sum of the basis functions.
Signal synthesize(const BasisSet& basis, const Eigen::VectorXd& coeffs);

/// Batch synthesis: column j of the result samples the signal for column j
/// of `coeffs` (n_basis x n_signals).
Eigen::MatrixXd synthesize_many(const BasisSet& basis, const Eigen::MatrixXd& coeffs);

/// Admissible input space: signals spanned by `basis` with coefficient
/// amplitudes bounded by u_max and synthesized norm at least eps_min.
struct InputSpaceConfig {
    double u_max = 1.0;
    double eps_min = 0.0;
    BasisSet basis;

    void validate() const;
    double T() const { return basis.T; }
};

/// Writes "t,value" CSV rows at full round-trip precision.
void write_signal_csv(const Signal& x, const std::string& path);
Signal read_signal_csv(const std::string& path);

/// Writes a trajectory pair as "t,u,y" CSV.
void write_pair_csv(const Signal& u, const Signal& y, const std::string& path);

}  // namespace dissip
