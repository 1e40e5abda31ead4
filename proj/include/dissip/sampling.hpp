#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

#include "dissip/errors.hpp"
#include "dissip/signal.hpp"

namespace dissip {

/// Default hard cap on grid enumeration; K grows like (2N-1)^b.
inline constexpr double kDefaultGridBudget = 1e7;

/// Axis-product sampling grid over the coefficient box: each axis takes the
/// 2N-1 values u_max*(k-N)/N for k = 1..2N-1, giving K = (2N-1)^b samples
/// and covering radius delta = b*u_max/(2N-1) over the grid's convex hull.
struct GridCoverSpec {
    InputSpaceConfig space;
    int half_density_N = 1;
    /// Optional per-axis amplitude scales (unit scale when empty); axis k
    /// then spans u_max * axis_scales[k] * (j-N)/N.
    Eigen::VectorXd axis_scales;

    void validate() const;
    /// log(K); safe for any b, N.
    double log_sample_count() const;
    /// K as a double (exact for K < 2^53, else best-effort).
    double sample_count() const;
    /// K as an exact integer; throws BudgetExceededError if it overflows.
    std::uint64_t sample_count_exact() const;
    double cover_radius() const;
    Eigen::VectorXd effective_scales() const;
    /// The 2N-1 grid values of one axis in increasing order.
    Eigen::VectorXd axis_values(Eigen::Index axis) const;
};

/// Lazy lexicographic enumeration of the grid. Never materializes the K
/// coefficient vectors; construction throws BudgetExceededError (reporting
/// K) when K exceeds the budget.
class GridCoverRange {
  public:
    explicit GridCoverRange(const GridCoverSpec& spec, double budget = kDefaultGridBudget);

    class iterator {
      public:
        using value_type = Eigen::VectorXd;

        iterator() = default;  // end
        iterator(const GridCoverRange* range, std::uint64_t pos);

        const Eigen::VectorXd& operator*() const { return current_; }
        iterator& operator++();
        bool operator!=(const iterator& other) const { return pos_ != other.pos_; }
        bool operator==(const iterator& other) const { return pos_ == other.pos_; }

      private:
        void rebuild();
        const GridCoverRange* range_ = nullptr;
        std::uint64_t pos_ = 0;
        std::vector<int> digits_;
        Eigen::VectorXd current_;
    };

    iterator begin() const { return iterator(this, 0); }
    iterator end() const;
    std::uint64_t size() const { return count_; }
    /// Grid values: entry (j, axis) is the j-th value of that axis.
    const Eigen::MatrixXd& axis_values() const { return axis_values_; }
    int dims() const { return dims_; }

  private:
    Eigen::MatrixXd axis_values_;  // (2N-1) x b
    int dims_ = 0;
    std::uint64_t count_ = 0;
};

GridCoverRange grid_cover(const GridCoverSpec& spec, double budget = kDefaultGridBudget);

/// Deterministic per-index RNG stream split; identical results under any
/// worker partition.
std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t index);

/// i.i.d. coefficient vectors uniform on [-u_max, u_max]^b, rejecting
/// vectors whose synthesized norm (= coefficient 2-norm, by basis
/// orthonormality) falls below eps_min. Deterministic under `seed`.
std::vector<Eigen::VectorXd> uniform_coeffs(const InputSpaceConfig& space, int count,
                                            std::uint64_t seed);

/// Discrete random-walk input: u(0) = 0, u(t_{k+1}) = u(t_k) + step_scale * z_k
/// with z_k standard normal per step (no sqrt(dt) diffusion scaling).
struct WienerSpec {
    double dt = 0.01;
    double step_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

Signal wiener_path(const WienerSpec& spec, double T);

/// Prefixes of a single path at T = T_min, T_min + dT, ..., T_max; each
/// returned signal is a sample-exact prefix of the next.
std::vector<Signal> wiener_prefix_sweep(const WienerSpec& spec, double t_min, double t_max,
                                        double dT);

}  // namespace dissip
