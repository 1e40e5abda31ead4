#include "dissip/signal.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace dissip {

Signal::Signal(double dt_, Eigen::VectorXd values_) : dt(dt_), values(std::move(values_)) {
    if (!(dt > 0.0)) throw ValidationError("Signal: dt must be > 0");
    if (values.size() < 2) throw ValidationError("Signal: need at least 2 samples");
}

Eigen::Index truncation_index(const Signal& x, double t_trunc) {
    if (!(t_trunc > 0.0) || t_trunc > x.horizon() * (1.0 + 1e-12) + 1e-6 * x.dt)
        throw RangeError("truncation time outside (0, T]");
    double raw = t_trunc / x.dt;
    auto idx = static_cast<Eigen::Index>(std::llround(raw));
    if (std::abs(raw - static_cast<double>(idx)) > 1e-6)
        throw RangeError("truncation time does not lie on the sample grid");
    if (idx < 1) throw RangeError("truncation index must be >= 1");
    if (idx > x.size() - 1) idx = x.size() - 1;
    return idx;
}

static void check_shared_grid(const Signal& x, const Signal& y) {
    if (x.size() != y.size() || std::abs(x.dt - y.dt) > 1e-15 * std::max(x.dt, y.dt))
        throw GridMismatchError("signals do not share a sample grid");
}

double inner_product_T(const Signal& x, const Signal& y, double t_trunc) {
    check_shared_grid(x, y);
    const Eigen::Index m = truncation_index(x, t_trunc);
    return trapezoid_inner(x.values.head(m + 1), y.values.head(m + 1), x.dt);
}

double norm_T(const Signal& x, double t_trunc) {
    return std::sqrt(inner_product_T(x, x, t_trunc));
}

double norm_T(const Signal& x) { return norm_T(x, x.horizon()); }

Eigen::VectorXd running_inner_product(const Signal& x, const Signal& y) {
    check_shared_grid(x, y);
    const Eigen::Index n = x.size();
    Eigen::VectorXd out(n);
    out[0] = 0.0;
    for (Eigen::Index k = 1; k < n; ++k) {
        double panel = 0.5 * x.dt * (x.values[k - 1] * y.values[k - 1] + x.values[k] * y.values[k]);
        out[k] = out[k - 1] + panel;
    }
    return out;
}

Signal truncate(const Signal& x, double t_trunc) {
    const Eigen::Index m = truncation_index(x, t_trunc);
    return Signal(x.dt, x.values.head(m + 1));
}

Eigen::MatrixXd BasisSet::gram() const {
    const Eigen::Index n = n_samples();
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, dt);
    w[0] = w[n - 1] = 0.5 * dt;
    return samples.transpose() * w.asDiagonal() * samples;
}

namespace {

// Discrete norm of one sampled function under the trapezoid weights.
double discrete_norm(const Eigen::VectorXd& v, double dt) {
    return std::sqrt(trapezoid_inner(v, v, dt));
}

void check_resolution(double omega, double dt) {
    if (omega <= 0.0) return;
    const double samples_per_period = 2.0 * std::numbers::pi / (omega * dt);
    if (samples_per_period < 10.0 * (1.0 - 1e-9))
        throw ResolutionError("basis frequency " + std::to_string(omega) +
                              " rad/s under-resolved: " + std::to_string(samples_per_period) +
                              " samples per period (need >= 10)");
}

// Modified Gram-Schmidt against the trapezoid inner product, with one
// re-orthogonalization pass. Sampled Legendre polynomials are only
// continuously orthogonal; their discrete Gram off-diagonals sit near 1e-5
// at dt = 0.01, above the 1e-6 contract, so we orthonormalize discretely.
void discrete_orthonormalize(Eigen::MatrixXd& B, double dt) {
    const Eigen::Index n = B.rows();
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, dt);
    w[0] = w[n - 1] = 0.5 * dt;
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index k = 0; k < j; ++k) {
                double proj = B.col(k).dot(w.asDiagonal() * B.col(j));
                B.col(j) -= proj * B.col(k);
            }
        }
        double nrm = std::sqrt(B.col(j).dot(w.asDiagonal() * B.col(j)));
        if (!(nrm > 1e-300))
            throw NumericalError("basis function " + std::to_string(j) +
                                 " lost rank during orthonormalization");
        B.col(j) /= nrm;
    }
}

}  // namespace

BasisSet make_basis(BasisKind kind, int n_basis, double T, double dt,
                    const std::vector<double>& explicit_frequencies) {
    if (n_basis < 1) throw ValidationError("make_basis: n_basis must be >= 1");
    if (!(T > 0.0) || !(dt > 0.0) || dt >= T) throw ValidationError("make_basis: need 0 < dt < T");

    const auto n = static_cast<Eigen::Index>(std::llround(T / dt)) + 1;
    if (n < n_basis + 1) throw ResolutionError("grid too coarse for requested basis count");

    BasisSet basis;
    basis.kind = kind;
    basis.dt = dt;
    basis.T = dt * static_cast<double>(n - 1);
    basis.samples.resize(n, n_basis);
    Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, 0.0, basis.T);

    switch (kind) {
        case BasisKind::FourierSequential: {
            // index 0 = constant, then (sin, cos) pairs at harmonics k = 1, 2, ...
            basis.frequencies.resize(static_cast<size_t>(n_basis));
            for (int j = 0; j < n_basis; ++j) {
                if (j == 0) {
                    basis.samples.col(j).setOnes();
                    basis.frequencies[0] = 0.0;
                    continue;
                }
                int harmonic = (j + 1) / 2;
                double omega = 2.0 * std::numbers::pi * harmonic / basis.T;
                check_resolution(omega, dt);
                basis.frequencies[static_cast<size_t>(j)] = omega;
                if (j % 2 == 1)
                    basis.samples.col(j) = (omega * t.array()).sin();
                else
                    basis.samples.col(j) = (omega * t.array()).cos();
            }
            break;
        }
        case BasisKind::FourierExplicit: {
            if (static_cast<int>(explicit_frequencies.size()) != n_basis)
                throw DimensionError("FourierExplicit: frequency list must match n_basis");
            basis.frequencies = explicit_frequencies;
            for (int j = 0; j < n_basis; ++j) {
                double omega = explicit_frequencies[static_cast<size_t>(j)];
                if (omega < 0.0) throw ValidationError("FourierExplicit: frequencies must be >= 0");
                check_resolution(omega, dt);
                if (omega == 0.0)
                    basis.samples.col(j).setOnes();
                else
                    basis.samples.col(j) = (omega * t.array()).sin();
            }
            break;
        }
        case BasisKind::Legendre: {
            // Three-term recurrence on x = 2t/T - 1.
            Eigen::ArrayXd x = 2.0 * t.array() / basis.T - 1.0;
            Eigen::ArrayXd pkm1 = Eigen::ArrayXd::Ones(n);
            Eigen::ArrayXd pk = x;
            for (int j = 0; j < n_basis; ++j) {
                if (j == 0) {
                    basis.samples.col(j) = pkm1;
                } else if (j == 1) {
                    basis.samples.col(j) = pk;
                } else {
                    double k = j - 1.0;
                    Eigen::ArrayXd pkp1 = ((2.0 * k + 1.0) * x * pk - k * pkm1) / (k + 1.0);
                    pkm1 = pk;
                    pk = pkp1;
                    basis.samples.col(j) = pk;
                }
            }
            break;
        }
    }

    // Normalize to unit discrete norm. Fourier harmonics on the closed grid
    // are already discretely orthogonal; Legendre needs the full MGS pass.
    if (kind == BasisKind::Legendre) {
        discrete_orthonormalize(basis.samples, dt);
    } else {
        for (Eigen::Index j = 0; j < basis.samples.cols(); ++j)
            basis.samples.col(j) /= discrete_norm(basis.samples.col(j), dt);
        Eigen::MatrixXd g = basis.gram();
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j)
                if (i != j && std::abs(g(i, j)) > 1e-6)
                    throw ValidationError("basis functions are not discretely orthogonal "
                                          "(|gram| off-diagonal exceeds 1e-6)");
    }
    return basis;
}

Signal synthesize(const BasisSet& basis, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != basis.n_basis())
        throw DimensionError("synthesize: coefficient count does not match basis size");
    return Signal(basis.dt, basis.samples * coeffs);
}

Eigen::MatrixXd synthesize_many(const BasisSet& basis, const Eigen::MatrixXd& coeffs) {
    if (coeffs.rows() != basis.n_basis())
        throw DimensionError("synthesize_many: coefficient rows do not match basis size");
    return basis.samples * coeffs;
}

void InputSpaceConfig::validate() const {
    if (!(u_max > 0.0)) throw ValidationError("input space: u_max must be > 0");
    if (eps_min < 0.0) throw ValidationError("input space: eps_min must be >= 0");
    // eps_min beyond the attainable norms surfaces as an infeasible-space
    // error in the samplers; norms up to sqrt(b)*u_max are attainable, so a
    // fixed eps_min < u_max test would reject feasible floors.
}

void write_signal_csv(const Signal& x, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot open " + path + " for writing");
    f << "t,value\n";
    char buf[80];
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x.time_at(i), x.values[i]);
        f << buf;
    }
}

Signal read_signal_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open " + path);
    std::string line;
    std::getline(f, line);  // header
    std::vector<double> ts, vs;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        ts.push_back(std::stod(a));
        vs.push_back(std::stod(b));
    }
    if (ts.size() < 2) throw ValidationError("signal CSV has fewer than 2 samples");
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(vs.data(), static_cast<Eigen::Index>(vs.size()));
    return Signal(ts[1] - ts[0], std::move(v));
}

void write_pair_csv(const Signal& u, const Signal& y, const std::string& path) {
    if (u.size() != y.size()) throw GridMismatchError("trajectory pair on mismatched grids");
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot open " + path + " for writing");
    f << "t,u,y\n";
    char buf[120];
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", u.time_at(i), u.values[i], y.values[i]);
        f << buf;
    }
}

}  // namespace dissip
