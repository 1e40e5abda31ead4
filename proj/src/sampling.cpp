#include "dissip/sampling.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace dissip {

void GridCoverSpec::validate() const {
    space.validate();
    if (half_density_N < 1) throw ValidationError("grid cover: N must be >= 1");
    if (axis_scales.size() != 0) {
        if (axis_scales.size() != space.basis.n_basis())
            throw DimensionError("grid cover: axis_scales must match basis size");
        if ((axis_scales.array() <= 0.0).any())
            throw ValidationError("grid cover: axis_scales must be > 0");
    }
}

Eigen::VectorXd GridCoverSpec::effective_scales() const {
    if (axis_scales.size() != 0) return axis_scales;
    return Eigen::VectorXd::Ones(space.basis.n_basis());
}

double GridCoverSpec::log_sample_count() const {
    return static_cast<double>(space.basis.n_basis()) * std::log(2.0 * half_density_N - 1.0);
}

double GridCoverSpec::sample_count() const { return std::exp(log_sample_count()); }

std::uint64_t GridCoverSpec::sample_count_exact() const {
    const std::uint64_t base = 2ull * static_cast<std::uint64_t>(half_density_N) - 1ull;
    std::uint64_t k = 1;
    for (Eigen::Index i = 0; i < space.basis.n_basis(); ++i) {
        if (k > std::numeric_limits<std::uint64_t>::max() / base)
            throw BudgetExceededError("grid sample count overflows 64-bit integer", sample_count());
        k *= base;
    }
    return k;
}

double GridCoverSpec::cover_radius() const {
    // reduces to b*u_max/(2N-1) at unit scales
    return effective_scales().sum() * space.u_max / (2.0 * half_density_N - 1.0);
}

Eigen::VectorXd GridCoverSpec::axis_values(Eigen::Index axis) const {
    const int m = 2 * half_density_N - 1;
    const double amp = space.u_max * effective_scales()[axis];
    Eigen::VectorXd v(m);
    for (int k = 1; k <= m; ++k)
        v[k - 1] = amp * static_cast<double>(k - half_density_N) / half_density_N;
    return v;
}

GridCoverRange::GridCoverRange(const GridCoverSpec& spec, double budget) {
    spec.validate();
    if (spec.log_sample_count() > std::log(budget) * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "grid cover needs K = " << spec.sample_count() << " samples, over the budget of "
            << budget;
        throw BudgetExceededError(msg.str(), spec.sample_count());
    }
    dims_ = static_cast<int>(spec.space.basis.n_basis());
    axis_values_.resize(2 * spec.half_density_N - 1, dims_);
    for (Eigen::Index a = 0; a < dims_; ++a) axis_values_.col(a) = spec.axis_values(a);
    count_ = spec.sample_count_exact();
}

GridCoverRange::iterator::iterator(const GridCoverRange* range, std::uint64_t pos)
    : range_(range), pos_(pos), digits_(static_cast<size_t>(range->dims()), 0) {
    if (pos_ < range_->size()) rebuild();
}

void GridCoverRange::iterator::rebuild() {
    current_.resize(range_->dims());
    for (int i = 0; i < range_->dims(); ++i)
        current_[i] = range_->axis_values()(digits_[static_cast<size_t>(i)], i);
}

GridCoverRange::iterator& GridCoverRange::iterator::operator++() {
    ++pos_;
    if (pos_ >= range_->size()) {
        pos_ = range_->size();
        return *this;
    }
    // lexicographic order: last axis varies fastest
    const int m = static_cast<int>(range_->axis_values().rows());
    for (int i = range_->dims() - 1; i >= 0; --i) {
        auto& d = digits_[static_cast<size_t>(i)];
        if (++d < m) break;
        d = 0;
    }
    rebuild();
    return *this;
}

GridCoverRange::iterator GridCoverRange::end() const { return iterator(this, count_); }

GridCoverRange grid_cover(const GridCoverSpec& spec, double budget) {
    return GridCoverRange(spec, budget);
}

std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t index) {
    // splitmix64 on base_seed advanced by index
    std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ull * (index + 1ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::vector<Eigen::VectorXd> uniform_coeffs(const InputSpaceConfig& space, int count,
                                            std::uint64_t seed) {
    space.validate();
    if (count < 1) throw ValidationError("uniform_coeffs: count must be >= 1");
    const Eigen::Index b = space.basis.n_basis();
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<size_t>(count));
    constexpr int kMaxAttemptsPerVector = 10000;
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(i)));
        std::uniform_real_distribution<double> dist(-space.u_max, space.u_max);
        Eigen::VectorXd alpha(b);
        bool accepted = false;
        for (int attempt = 0; attempt < kMaxAttemptsPerVector; ++attempt) {
            for (Eigen::Index j = 0; j < b; ++j) alpha[j] = dist(rng);
            // By orthonormality the synthesized norm equals the coefficient
            // 2-norm, so the Assumption-2 floor is checked on coefficients.
            if (alpha.norm() >= space.eps_min) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw InfeasibleSpaceError(
                "uniform_coeffs: rejection rate above 99% (eps_min too close to attainable norms)");
        out.push_back(std::move(alpha));
    }
    return out;
}

void WienerSpec::validate() const {
    if (!(dt > 0.0)) throw ValidationError("wiener: dt must be > 0");
    if (step_scale < 0.0) throw ValidationError("wiener: step_scale must be >= 0");
}

Signal wiener_path(const WienerSpec& spec, double T) {
    spec.validate();
    if (!(T >= spec.dt)) throw ValidationError("wiener: need T >= dt");
    const auto n = static_cast<Eigen::Index>(std::llround(T / spec.dt)) + 1;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd v(n);
    v[0] = 0.0;
    for (Eigen::Index k = 1; k < n; ++k) v[k] = v[k - 1] + spec.step_scale * z(rng);
    return Signal(spec.dt, std::move(v));
}

std::vector<Signal> wiener_prefix_sweep(const WienerSpec& spec, double t_min, double t_max,
                                        double dT) {
    spec.validate();
    if (!(t_min >= spec.dt)) throw ValidationError("wiener sweep: need T_min >= dt");
    if (!(t_max >= t_min)) throw ValidationError("wiener sweep: need T_max >= T_min");
    const double steps = dT / spec.dt;
    if (!(dT > 0.0) || std::abs(steps - std::llround(steps)) > 1e-9)
        throw ValidationError("wiener sweep: dT must be a positive multiple of dt");

    Signal full = wiener_path(spec, t_max);
    std::vector<Signal> out;
    for (double t = t_min; t <= t_max * (1.0 + 1e-12); t += dT) {
        const auto m = static_cast<Eigen::Index>(std::llround(t / spec.dt));
        out.emplace_back(spec.dt, full.values.head(std::min(m + 1, full.size())));
    }
    return out;
}

}  // namespace dissip
