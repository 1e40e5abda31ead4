#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dissip/signal.hpp"

namespace dissip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Truncated moments of one input-output trajectory: ||u||_T^2, <y,u>_T,
/// ||y||_T^2 at horizon T. Everything the sector estimators consume.
struct TrajectoryRecord {
    double T = 0.0;
    double norm_u_sq = 0.0;
    double cross = 0.0;
    double norm_y_sq = 0.0;

    void validate() const;
};

/// Moments of (u, y) at truncation time t_trunc.
TrajectoryRecord make_record(const Signal& u, const Signal& y, double t_trunc);

/// Records for every prefix horizon in `horizons` of a single trajectory,
/// computed from one pass of running prefix sums.
std::vector<TrajectoryRecord> prefix_records(const Signal& u, const Signal& y,
                                             const std::vector<double>& horizons);

/// Supply-rate residual Q*||y||^2 + S*<y,u> + R*||u||^2. Nonnegative iff
/// the record is consistent with (Q,S,R)-dissipativity at its horizon.
double qsr_residual(const TrajectoryRecord& r, double Q, double S, double R);

/// Residual of the sector inequality <y - a*u, b*u - y>_T >= 0, i.e.
/// qsr_residual with (Q, S, R) = (-1, a+b, -a*b). The matrix supply rate
/// [-1, (a+b)/2; (a+b)/2, -a*b] paired with the Gram features gives the
/// same value (the Frobenius pairing doubles the off-diagonal term).
double cone_residual(const TrajectoryRecord& r, double a, double b);

/// Covering margins from the Lipschitz bound L and covering radius delta:
/// Lambda1 = delta, Lambda2 = L*delta,
/// Lambda3 = L*delta*||u||_T + delta*||y||_T + L*delta^2.
struct RobustMargins {
    double L = 0.0;
    double delta = 0.0;

    void validate() const;
    double lambda1() const { return delta; }
    double lambda2() const { return L * delta; }
    double lambda3(double norm_u, double norm_y) const {
        return L * delta * norm_u + delta * norm_y + L * delta * delta;
    }
};

/// Resolution of the output-norm margin inside N1/N2: AsWritten keeps the
/// literal ||y||^2 +/- Lambda2 term; Expanded uses the full perturbation
/// (||y|| +/- Lambda2)^2.
enum class MarginMode { AsWritten, Expanded };

/// Estimated sector bounds. a_R maximizes the lower bound, b_I is the
/// matching minimal upper bound; b_L minimizes the upper bound, a_I the
/// matching maximal lower bound. Degenerate sectors carry +/-inf.
struct ConeBounds {
    double a_R = -kInf;
    double b_I = kInf;
    double b_L = kInf;
    double a_I = -kInf;
    std::string method = "empirical";
    double delta = 0.0;
    double L = 0.0;
    std::size_t n_records = 0;
    std::size_t n_excluded = 0;  // records failing ||u||_T - Lambda1 > 0
    bool degenerate = false;     // some index set was empty
};

/// Sector bounds with zero margins: a_R/b_L are the min/max of
/// <y,u>_T/||u||_T^2; b_I and a_I follow the N2/D2 and N1/D1 ratios.
/// Zero-input records are skipped; throws NoDataError if none remain.
ConeBounds empirical_cone(std::span<const TrajectoryRecord> records);

/// Sector bounds with covering margins, every +/- resolved conservatively
/// (smallest a_R and a_I, largest b_L and b_I). With delta = 0 this equals
/// empirical_cone exactly. Empty index sets yield degenerate infinite
/// bounds with the `degenerate` flag set instead of an error.
ConeBounds robust_cone(std::span<const TrajectoryRecord> records, const RobustMargins& margins,
                       MarginMode mode = MarginMode::AsWritten);

/// Robust L2 gain bound: max over records with ||u||_T > delta of
/// (L*delta + ||y||_T) / (||u||_T - delta). With delta = 0 this is the
/// empirical worst-case gain.
double robust_gain(std::span<const TrajectoryRecord> records, const RobustMargins& margins);

/// CSV table "T,norm_u_sq,cross,norm_y_sq".
void write_records_csv(std::span<const TrajectoryRecord> records, const std::string& path);
std::vector<TrajectoryRecord> read_records_csv(const std::string& path);

}  // namespace dissip
