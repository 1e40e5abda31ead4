#include "dissip/cone.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dissip/errors.hpp"

namespace dissip {

void TrajectoryRecord::validate() const {
    if (!(T > 0.0)) throw ValidationError("record: horizon must be > 0");
    if (norm_u_sq < 0.0 || norm_y_sq < 0.0)
        throw ValidationError("record: squared norms must be >= 0");
    const double bound = norm_u_sq * norm_y_sq;
    if (cross * cross > bound + 1e-9 * (1.0 + bound))
        throw ValidationError("record violates the Cauchy-Schwarz inequality");
}

TrajectoryRecord make_record(const Signal& u, const Signal& y, double t_trunc) {
    TrajectoryRecord r;
    r.T = t_trunc;
    r.norm_u_sq = inner_product_T(u, u, t_trunc);
    r.cross = inner_product_T(y, u, t_trunc);
    r.norm_y_sq = inner_product_T(y, y, t_trunc);
    r.validate();
    return r;
}

std::vector<TrajectoryRecord> prefix_records(const Signal& u, const Signal& y,
                                             const std::vector<double>& horizons) {
    Eigen::VectorXd uu = running_inner_product(u, u);
    Eigen::VectorXd yu = running_inner_product(y, u);
    Eigen::VectorXd yy = running_inner_product(y, y);
    std::vector<TrajectoryRecord> out;
    out.reserve(horizons.size());
    for (double t : horizons) {
        const Eigen::Index m = truncation_index(u, t);
        TrajectoryRecord r;
        r.T = u.time_at(m);
        r.norm_u_sq = uu[m];
        r.cross = yu[m];
        r.norm_y_sq = yy[m];
        r.validate();
        out.push_back(r);
    }
    return out;
}

double qsr_residual(const TrajectoryRecord& r, double Q, double S, double R) {
    return Q * r.norm_y_sq + S * r.cross + R * r.norm_u_sq;
}

double cone_residual(const TrajectoryRecord& r, double a, double b) {
    return qsr_residual(r, -1.0, a + b, -a * b);
}

void RobustMargins::validate() const {
    if (delta < 0.0) throw ValidationError("margins: delta must be >= 0");
    if (delta > 0.0 && !(L > 0.0))
        throw ValidationError("margins: L must be > 0 when delta > 0");
    if (delta == 0.0 && L < 0.0) throw ValidationError("margins: L must be >= 0");
}

namespace {

inline double sq(double v) { return v * v; }

struct RecordView {
    double nu;   // ||u||_T
    double ny;   // ||y||_T
    double c;    // <y,u>_T
    double nu2;  // ||u||_T^2
    double ny2;  // ||y||_T^2
    double l3;   // Lambda3 for this record

    // (||u||_T +/- Lambda1)^2 expanded so delta = 0 reproduces ||u||_T^2
    // bit-exactly rather than via a sqrt round trip.
    double den_plus(double l1) const { return nu2 + 2.0 * nu * l1 + l1 * l1; }
    double den_minus(double l1) const { return nu2 - 2.0 * nu * l1 + l1 * l1; }
};

}  // namespace

ConeBounds robust_cone(std::span<const TrajectoryRecord> records, const RobustMargins& margins,
                       MarginMode mode) {
    margins.validate();
    const double l1 = margins.lambda1();
    const double l2 = margins.lambda2();

    ConeBounds out;
    out.method = margins.delta == 0.0 ? "empirical" : "robust";
    if (mode == MarginMode::Expanded) out.method += "-expanded";
    out.delta = margins.delta;
    out.L = margins.L;
    out.n_records = records.size();

    std::vector<RecordView> views;
    views.reserve(records.size());
    for (const auto& r : records) {
        r.validate();
        const double nu = std::sqrt(r.norm_u_sq);
        if (!(nu - l1 > 0.0)) {
            ++out.n_excluded;
            continue;
        }
        const double ny = std::sqrt(r.norm_y_sq);
        views.push_back({nu, ny, r.cross, r.norm_u_sq, r.norm_y_sq,
                         margins.lambda3(nu, ny)});
    }
    if (views.empty()) {
        out.degenerate = true;
        return out;
    }

    // a_R: largest lower bound valid for every record; per record the
    // smallest admissible value of (<y,u> - L3) / (||u|| +/- L1)^2.
    out.a_R = kInf;
    for (const auto& v : views) {
        const double num = v.c - v.l3;
        const double den = num > 0.0 ? v.den_plus(l1) : v.den_minus(l1);
        out.a_R = std::min(out.a_R, num / den);
    }

    // b_L: smallest upper bound valid for every record. The numerator keeps
    // its written -Lambda3 (only Lambda1 carries a +/-); the denominator is
    // resolved outward. Cauchy-Schwarz then keeps b_L below b_I: the margin
    // obeys c - Lambda3 <= ||y||*(||u|| - delta).
    out.b_L = -kInf;
    for (const auto& v : views) {
        const double num = v.c - v.l3;
        const double den = num > 0.0 ? v.den_minus(l1) : v.den_plus(l1);
        out.b_L = std::max(out.b_L, num / den);
    }

    // b_I: given a = a_R, each record demands b*D2 >= N2 and only D2 > 0
    // binds. D2 reuses the denominator a_R was formed with, which keeps
    // D2 >= 0 on every record (the a_R minimum property) with equality only
    // where a_R binds, so no record is silently ejected as delta grows.
    const double aR = out.a_R;
    double b_I = -kInf;
    bool any_d2 = false;
    for (const auto& v : views) {
        const double y_term =
            mode == MarginMode::AsWritten ? v.ny2 + l2 : sq(v.ny + l2);
        const double num_a = v.c - v.l3;
        const double den_a = num_a > 0.0 ? v.den_plus(l1) : v.den_minus(l1);
        const double n2 = y_term - aR * (aR >= 0.0 ? v.c - v.l3 : v.c + v.l3);
        const double d2 = num_a - aR * den_a;
        if (d2 > 0.0) {
            any_d2 = true;
            b_I = std::max(b_I, n2 / d2);
        }
    }
    if (any_d2) {
        out.b_I = b_I;
    } else {
        out.b_I = kInf;
        out.degenerate = true;
    }

    // a_I: given b = b_L, each record demands a*D1 <= N1 on D1 > 0, so the
    // largest valid a is the minimum ratio. D1 reuses b_L's per-record
    // denominator (maximum property gives D1 >= 0); N1's margins are
    // resolved downward.
    const double bL = out.b_L;
    double a_I = kInf;
    bool any_d1 = false;
    for (const auto& v : views) {
        const double y_term =
            mode == MarginMode::AsWritten ? -v.ny2 - l2 : -sq(v.ny + l2);
        const double num_b = v.c - v.l3;
        const double den_b = num_b > 0.0 ? v.den_minus(l1) : v.den_plus(l1);
        const double n1 = bL * (bL >= 0.0 ? v.c - v.l3 : v.c + v.l3) + y_term;
        const double d1 = bL * den_b - num_b;
        if (d1 > 0.0) {
            any_d1 = true;
            a_I = std::min(a_I, n1 / d1);
        }
    }
    if (any_d1) {
        out.a_I = a_I;
    } else {
        out.a_I = -kInf;
        out.degenerate = true;
    }
    return out;
}

ConeBounds empirical_cone(std::span<const TrajectoryRecord> records) {
    ConeBounds out = robust_cone(records, RobustMargins{0.0, 0.0});
    if (out.n_excluded == out.n_records)
        throw NoDataError("empirical_cone: every record has zero input norm");
    return out;
}

double robust_gain(std::span<const TrajectoryRecord> records, const RobustMargins& margins) {
    margins.validate();
    double gain = -kInf;
    bool any = false;
    for (const auto& r : records) {
        const double nu = std::sqrt(r.norm_u_sq);
        if (!(nu > margins.delta)) continue;
        any = true;
        gain = std::max(gain, (margins.L * margins.delta + std::sqrt(r.norm_y_sq)) /
                                  (nu - margins.delta));
    }
    if (!any) throw NoDataError("robust_gain: no record with ||u||_T > delta");
    return gain;
}

void write_records_csv(std::span<const TrajectoryRecord> records, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot open " + path + " for writing");
    f << "T,norm_u_sq,cross,norm_y_sq\n";
    char buf[160];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.T, r.norm_u_sq, r.cross,
                      r.norm_y_sq);
        f << buf;
    }
}

std::vector<TrajectoryRecord> read_records_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open " + path);
    std::string line;
    std::getline(f, line);
    std::vector<TrajectoryRecord> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        double vals[4];
        for (double& val : vals) {
            if (!std::getline(ss, tok, ',')) throw ValidationError("bad record row: " + line);
            val = std::stod(tok);
        }
        TrajectoryRecord r{vals[0], vals[1], vals[2], vals[3]};
        r.validate();
        out.push_back(r);
    }
    return out;
}

}  // namespace dissip
