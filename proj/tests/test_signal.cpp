#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dissip/signal.hpp"

using namespace dissip;

namespace {

Signal sampled(double dt, double T, const std::function<double(double)>& f) {
    const auto n = static_cast<Eigen::Index>(std::llround(T / dt)) + 1;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = f(dt * static_cast<double>(i));
    return Signal(dt, std::move(v));
}

// independent quadrature oracle: trapezoid on an 8x finer grid
double fine_grid_integral(const std::function<double(double)>& f, double T, double dt) {
    const double h = dt / 8.0;
    const auto n = static_cast<Eigen::Index>(std::llround(T / h));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        acc += 0.5 * h * (f(h * static_cast<double>(i)) + f(h * static_cast<double>(i + 1)));
    return acc;
}

}  // namespace

TEST_CASE("truncated inner product on constants") {
    Signal one = sampled(0.01, 1.0, [](double) { return 1.0; });
    CHECK(inner_product_T(one, one, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("orthogonality of sin and cos over a full period") {
    const double w = 2.0 * std::numbers::pi;
    Signal s = sampled(0.001, 1.0, [&](double t) { return std::sin(w * t); });
    Signal c = sampled(0.001, 1.0, [&](double t) { return std::cos(w * t); });
    CHECK(std::abs(inner_product_T(s, c, 1.0)) <= 1e-6);
}

TEST_CASE("sin^2 integrates to T/2") {
    const double w = 2.0 * std::numbers::pi;
    Signal s = sampled(0.01, 1.0, [&](double t) { return std::sin(w * t); });
    const double got = inner_product_T(s, s, 1.0);
    CHECK(got == doctest::Approx(0.5).epsilon(1e-4));
    const double oracle =
        fine_grid_integral([&](double t) { return std::sin(w * t) * std::sin(w * t); }, 1.0, 0.01);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("inner product rejects mismatched grids and bad truncations") {
    Signal a = sampled(0.01, 1.0, [](double t) { return t; });
    Signal b = sampled(0.02, 1.0, [](double t) { return t; });
    Signal c = sampled(0.01, 0.5, [](double t) { return t; });
    CHECK_THROWS_AS((void)inner_product_T(a, b, 0.5), GridMismatchError);
    CHECK_THROWS_AS((void)inner_product_T(a, c, 0.5), GridMismatchError);
    CHECK_THROWS_AS((void)inner_product_T(a, a, 0.0), RangeError);
    CHECK_THROWS_AS((void)inner_product_T(a, a, -0.1), RangeError);
    CHECK_THROWS_AS((void)inner_product_T(a, a, 1.5), RangeError);
    CHECK_THROWS_AS((void)inner_product_T(a, a, 0.505), RangeError);  // off-grid
}

TEST_CASE("running prefix sum matches the direct product at the last index") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::VectorXd v(301), w(301);
        for (Eigen::Index i = 0; i < 301; ++i) {
            v[i] = z(rng);
            w[i] = z(rng);
        }
        Signal x(0.01, v), y(0.01, w);
        const double direct = inner_product_T(x, y, 3.0);
        const double running = running_inner_product(x, y)[300];
        CHECK(running == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("signal truncation yields a prefix of the same grid") {
    Signal a = sampled(0.01, 1.0, [](double t) { return t * t; });
    Signal p = truncate(a, 0.25);
    CHECK(p.size() == 26);
    CHECK(p.values == a.values.head(26));
}

TEST_CASE("single Legendre basis function is the unit-norm constant") {
    BasisSet b = make_basis(BasisKind::Legendre, 1, 10.0, 0.01);
    const double expected = 1.0 / std::sqrt(10.0);
    CHECK((b.samples.array() - expected).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("explicit Fourier basis is orthonormal at the reference frequencies") {
    const double pi = std::numbers::pi;
    BasisSet b = make_basis(BasisKind::FourierExplicit, 4, 10.0, 0.01,
                            {0.0, 2.0 * pi / 10.0, 20.0 * pi / 10.0, 200.0 * pi / 10.0});
    Eigen::MatrixXd g = b.gram();
    CHECK((g - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(b.frequencies.size() == 4);
}

TEST_CASE("Legendre Gram matrix is the identity under direct quadrature") {
    BasisSet b = make_basis(BasisKind::Legendre, 4, 10.0, 0.01);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            Signal vi(b.dt, b.samples.col(i)), vj(b.dt, b.samples.col(j));
            const double g = inner_product_T(vi, vj, b.T);
            CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-6);
        }
    }
}

TEST_CASE("Legendre construction stays orthonormal at high order") {
    BasisSet b = make_basis(BasisKind::Legendre, 30, 10.0, 0.01);
    Eigen::MatrixXd g = b.gram();
    CHECK((g - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("under-resolved Fourier frequency is rejected") {
    const double w = 200.0 * std::numbers::pi / 10.0;  // needs dt <= 0.01
    CHECK_THROWS_AS((void)make_basis(BasisKind::FourierExplicit, 1, 10.0, 0.05, {w}),
                    ResolutionError);
    CHECK_NOTHROW((void)make_basis(BasisKind::FourierExplicit, 1, 10.0, 0.01, {w}));
}

TEST_CASE("synthesis maps coefficients onto basis functions") {
    BasisSet b = make_basis(BasisKind::FourierSequential, 3, 2.0, 0.001);
    Signal zero = synthesize(b, Eigen::Vector3d::Zero());
    CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);

    Signal e1 = synthesize(b, Eigen::Vector3d(0.0, 1.0, 0.0));
    CHECK((e1.values - b.samples.col(1)).cwiseAbs().maxCoeff() == 0.0);

    Signal pair = synthesize(b, Eigen::Vector3d(1.0, 1.0, 0.0));
    CHECK(norm_T(pair) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-6));

    CHECK_THROWS_AS((void)synthesize(b, Eigen::Vector2d(1.0, 1.0)), DimensionError);
}

TEST_CASE("Parseval: synthesized norm equals the coefficient norm") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (BasisKind kind : {BasisKind::Legendre, BasisKind::FourierSequential}) {
        BasisSet b = make_basis(kind, 6, 10.0, 0.01);
        for (int rep = 0; rep < 20; ++rep) {
            Eigen::VectorXd alpha(6);
            for (int i = 0; i < 6; ++i) alpha[i] = u(rng);
            const double n = norm_T(synthesize(b, alpha));
            CHECK(std::abs(n - alpha.norm()) <= 1e-5 * alpha.norm());
        }
    }
}

TEST_CASE("input space validation") {
    InputSpaceConfig cfg;
    cfg.basis = make_basis(BasisKind::Legendre, 2, 1.0, 0.01);
    cfg.u_max = 1.0;
    cfg.eps_min = 0.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.eps_min = 1.2;  // still attainable: norms reach sqrt(2)
    CHECK_NOTHROW(cfg.validate());
    cfg.eps_min = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.eps_min = 0.0;
    cfg.u_max = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("signal CSV round-trips bit-exactly") {
    namespace fs = std::filesystem;
    Signal a = sampled(0.01, 1.0, [](double t) { return std::sin(17.3 * t) / 3.0; });
    const auto path = fs::temp_directory_path() / "dissip_test_signal.csv";
    write_signal_csv(a, path.string());
    Signal back = read_signal_csv(path.string());
    REQUIRE(back.size() == a.size());
    CHECK(back.values == a.values);
    fs::remove(path);
}
