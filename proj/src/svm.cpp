#include "dissip/svm.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dissip/errors.hpp"

namespace dissip {

FeaturePoint feature_from_record(const TrajectoryRecord& r) {
    FeaturePoint p;
    p.flat.resize(3);
    p.flat << r.norm_y_sq, std::numbers::sqrt2 * r.cross, r.norm_u_sq;
    return p;
}

FeaturePoint feature_map(const Signal& u, const Signal& y, double t_trunc) {
    return feature_from_record(make_record(u, y, t_trunc));
}

double SupplyRate::Q() const { return pi_flat[0]; }
double SupplyRate::S() const { return pi_flat[1] / std::numbers::sqrt2; }
double SupplyRate::R() const { return pi_flat[2]; }

namespace {

// Affine minimizer of ||P*alpha|| over sum(alpha) = 1 for the corral columns.
Eigen::VectorXd affine_minimizer(const Eigen::MatrixXd& corral) {
    const Eigen::Index k = corral.cols();
    Eigen::MatrixXd sys(k + 1, k + 1);
    sys.topLeftCorner(k, k) = corral.transpose() * corral;
    sys.topRightCorner(k, 1).setOnes();
    sys.bottomLeftCorner(1, k).setOnes();
    sys(k, k) = 0.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    rhs[k] = 1.0;
    Eigen::VectorXd sol = Eigen::FullPivLU<Eigen::MatrixXd>(sys).solve(rhs);
    return sol.head(k);
}

}  // namespace

SupplyRate ocsvm_hard(std::span<const FeaturePoint> points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    if (n < 1) throw ValidationError("ocsvm_hard: need at least one point");
    const Eigen::Index d = points[0].flat.size();
    Eigen::MatrixXd P(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (points[static_cast<size_t>(i)].flat.size() != d)
            throw DimensionError("ocsvm_hard: inconsistent feature dimensions");
        P.col(i) = points[static_cast<size_t>(i)].flat;
    }
    const double scale_sq = P.colwise().squaredNorm().maxCoeff();
    if (!(scale_sq > 0.0)) throw DegenerateDataError("ocsvm_hard: all feature points are zero");

    // Wolfe's minimum-norm-point algorithm over conv{Gamma_i}.
    std::vector<Eigen::Index> corral_idx;
    Eigen::VectorXd lambda(1);
    Eigen::Index start;
    P.colwise().squaredNorm().minCoeff(&start);
    corral_idx.push_back(start);
    lambda[0] = 1.0;
    Eigen::VectorXd x = P.col(start);

    constexpr double kGapTol = 1e-12;
    constexpr int kMaxMajor = 10000;
    double gap_rel = 0.0;
    bool converged = false;
    for (int major = 0; major < kMaxMajor; ++major) {
        Eigen::Index j;
        const double min_inner = (P.transpose() * x).minCoeff(&j);
        const double x_sq = x.squaredNorm();
        gap_rel = (x_sq - min_inner) / std::max(x_sq, 1e-300);
        if (gap_rel <= kGapTol || x_sq <= 1e-28 * scale_sq) {
            converged = true;
            break;
        }
        bool already = false;
        for (auto idx : corral_idx) already = already || idx == j;
        if (already) {  // best vertex is in the corral; x is its MNP already
            converged = gap_rel <= 1e-8;
            break;
        }
        corral_idx.push_back(j);
        lambda.conservativeResize(lambda.size() + 1);
        lambda[lambda.size() - 1] = 0.0;

        // minor cycles: project onto the affine hull, stepping back to the
        // simplex boundary whenever a weight would turn negative
        for (int minor = 0; minor <= static_cast<int>(corral_idx.size()) + 1; ++minor) {
            Eigen::MatrixXd corral(d, static_cast<Eigen::Index>(corral_idx.size()));
            for (size_t c = 0; c < corral_idx.size(); ++c)
                corral.col(static_cast<Eigen::Index>(c)) = P.col(corral_idx[c]);
            Eigen::VectorXd alpha = affine_minimizer(corral);
            if ((alpha.array() > 1e-14).all()) {
                lambda = alpha;
                x = corral * lambda;
                break;
            }
            double theta = 1.0;
            for (Eigen::Index i = 0; i < alpha.size(); ++i)
                if (alpha[i] <= 1e-14)
                    theta = std::min(theta, lambda[i] / (lambda[i] - alpha[i]));
            lambda = (1.0 - theta) * lambda + theta * alpha;
            // drop the smallest nonpositive weight from the corral
            Eigen::Index drop = -1;
            double worst = 1e-12;
            for (Eigen::Index i = 0; i < lambda.size(); ++i)
                if (lambda[i] < worst) {
                    worst = lambda[i];
                    drop = i;
                }
            if (drop < 0) {
                for (Eigen::Index i = 0; i < lambda.size(); ++i)
                    if (lambda[i] <= 1e-12) {
                        drop = i;
                        break;
                    }
            }
            if (drop >= 0) {
                corral_idx.erase(corral_idx.begin() + drop);
                Eigen::VectorXd trimmed(lambda.size() - 1);
                trimmed << lambda.head(drop), lambda.tail(lambda.size() - drop - 1);
                lambda = trimmed;
                lambda /= lambda.sum();
            }
            Eigen::MatrixXd rebuilt(d, static_cast<Eigen::Index>(corral_idx.size()));
            for (size_t c = 0; c < corral_idx.size(); ++c)
                rebuilt.col(static_cast<Eigen::Index>(c)) = P.col(corral_idx[c]);
            x = rebuilt * lambda;
        }
    }
    if (!converged)
        throw ConvergenceError("ocsvm_hard: Wolfe iteration stalled, relative gap " +
                               std::to_string(gap_rel));

    SupplyRate out;
    out.pi_flat = x;
    out.frobenius_norm = x.norm();
    if (!(out.frobenius_norm > 1e-14 * std::sqrt(scale_sq)))
        throw DegenerateDataError("ocsvm_hard: optimal supply rate is zero (data spans the origin)");
    out.rho = (P.transpose() * x).minCoeff();
    out.dual_weights = Eigen::VectorXd::Zero(n);
    for (size_t c = 0; c < corral_idx.size(); ++c) out.dual_weights[corral_idx[c]] += lambda[static_cast<Eigen::Index>(c)];
    const double x_sq = x.squaredNorm();
    out.duality_gap_rel = (x_sq - out.rho) / std::max(x_sq, 1e-300);
    return out;
}

double empirical_loss(std::span<const FeaturePoint> points, const SupplyRate& supply) {
    if (points.empty()) throw ValidationError("empirical_loss: need at least one point");
    std::size_t bad = 0;
    for (const auto& p : points)
        if (p.flat.dot(supply.pi_flat) < 0.0) ++bad;
    return static_cast<double>(bad) / static_cast<double>(points.size());
}

void GeneralizationBoundInput::validate() const {
    if (!(K >= 1.0)) throw ValidationError("generalization bound: K must be >= 1");
    if (!(c > 0.0)) throw ValidationError("generalization bound: c must be > 0");
    if (!(gamma_hat > 0.0)) throw ValidationError("generalization bound: gamma_hat must be > 0");
    if (!(delta_conf > 0.0 && delta_conf < 1.0))
        throw ValidationError("generalization bound: delta_conf must lie in (0, 1)");
}

GeneralizationBound generalization_bound(const GeneralizationBoundInput& in) {
    in.validate();
    const double gh_sq = in.gamma_hat * in.gamma_hat;
    const double c_sq = in.c * in.c;
    const double inner = std::numbers::ln2 / (4.0 * c_sq) * gh_sq * in.K;
    const double value =
        2.0 / in.K *
        (std::log2(in.K * in.K / (2.0 * in.delta_conf)) + 16.0 * c_sq / gh_sq * std::log2(inner) +
         2.0);
    GeneralizationBound out;
    out.bound = value;
    out.vacuous = !(value < 1.0) || inner <= 1.0;
    return out;
}

void write_features_csv(std::span<const FeaturePoint> points, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot open " + path + " for writing");
    const Eigen::Index d = points.empty() ? 3 : points[0].flat.size();
    for (Eigen::Index j = 0; j < d; ++j) f << (j ? ",f" : "f") << j + 1;
    f << "\n";
    char buf[48];
    for (const auto& p : points) {
        for (Eigen::Index j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", p.flat[j]);
            f << (j ? "," : "") << buf;
        }
        f << "\n";
    }
}

std::vector<FeaturePoint> read_features_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open " + path);
    std::string line;
    std::getline(f, line);
    std::vector<FeaturePoint> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        FeaturePoint p;
        p.flat = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace dissip
