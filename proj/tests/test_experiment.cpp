#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dissip/experiment.hpp"

using namespace dissip;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("parallel_for covers the range exactly once") {
    std::vector<int> hits(1000, 0);
    parallel_for(1000, 7, [&](Eigen::Index b, Eigen::Index e) {
        for (Eigen::Index i = b; i < e; ++i) hits[static_cast<size_t>(i)] += 1;
    });
    for (int h : hits) CHECK(h == 1);
}

TEST_CASE("experiment spec JSON round trip and validation") {
    const char* text = R"({
        "name": "demo",
        "plant": "lti-circle",
        "basis": {"kind": "fourier-seq", "n_basis": 4},
        "sampling": {"mode": "uniform", "count": 50},
        "seed": 9,
        "dt": 0.01,
        "T": 5.0
    })";
    ExperimentSpec spec = ExperimentSpec::from_json_string(text);
    CHECK(spec.plant == "lti-circle");
    CHECK(spec.n_basis == 4);
    CHECK(spec.sampling.mode == SamplingMode::Uniform);
    CHECK(spec.seed == 9);

    ExperimentSpec back = ExperimentSpec::from_json_string(spec.to_json_string());
    CHECK(back.plant == spec.plant);
    CHECK(back.T == spec.T);
    CHECK(back.sampling.count == spec.sampling.count);

    CHECK_THROWS_AS((void)ExperimentSpec::from_json_string("{not json"), ValidationError);
    CHECK_THROWS_AS((void)ExperimentSpec::from_json_string(R"({
        "plant": "lti-circle",
        "basis": {"kind": "fourier-seq", "n_basis": 4},
        "sampling": {"mode": "wiener", "count": 5},
        "dt": 0.01, "T": 5.0
    })"),
                    ValidationError);  // stochastic mode without a seed
    CHECK_THROWS_AS((void)make_plant("unknown"), ValidationError);
}

TEST_CASE("records are identical under any worker partition") {
    BasisSet basis = make_basis(BasisKind::FourierSequential, 3, 2.0, 0.01);
    InputSpaceConfig space;
    space.u_max = 1.0;
    space.basis = basis;
    auto coeffs = uniform_coeffs(space, 64, 5);
    PlantModel plant = PlantModel::LtiCircle();
    auto serial = simulate_coeff_records(plant, basis, coeffs, 1);
    auto parallel = simulate_coeff_records(plant, basis, coeffs, 5);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].norm_u_sq == parallel[i].norm_u_sq);
        CHECK(serial[i].cross == parallel[i].cross);
        CHECK(serial[i].norm_y_sq == parallel[i].norm_y_sq);
    }
}

TEST_CASE("figure three rejects nonpositive horizons") {
    RunOptions opt;
    CHECK_THROWS_AS((void)run_fig3({0.0}, 10, opt), ValidationError);
    CHECK_THROWS_AS((void)run_fig3({}, 10, opt), ValidationError);
}

TEST_CASE("staircase record agrees with the plain record on smooth slow input") {
    BasisSet basis = make_basis(BasisKind::FourierSequential, 3, 8.0, 0.002);
    Signal u = synthesize(basis, Eigen::Vector3d(0.4, 0.2, -0.1));
    Signal y = simulate(PlantModel::LtiCircle(), u);
    TrajectoryRecord plain = make_record(u, y, u.horizon());
    TrajectoryRecord held = staircase_record(PlantModel::LtiCircle(), u, 10);
    CHECK(held.norm_u_sq == doctest::Approx(plain.norm_u_sq).epsilon(1e-3));
    CHECK(held.cross == doctest::Approx(plain.cross).epsilon(1e-3));
    CHECK(held.norm_y_sq == doctest::Approx(plain.norm_y_sq).epsilon(1e-3));
}

TEST_CASE("figure outputs are reproducible and the SVG is a function of the CSVs") {
    RunOptions opt;
    opt.dt = 0.01;
    opt.seed = 3;
    FigureResult fig = run_fig3({0.5}, 40, opt);

    const fs::path dir1 = fs::temp_directory_path() / "dissip_fig_a";
    const fs::path dir2 = fs::temp_directory_path() / "dissip_fig_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    write_figure_outputs(fig, dir1.string());
    write_figure_outputs(run_fig3({0.5}, 40, opt), dir2.string());

    CHECK(fs::exists(dir1 / "manifest.json"));
    CHECK(fs::exists(dir1 / "report.json"));
    CHECK(fs::exists(dir1 / "figure.svg"));
    CHECK(slurp(dir1 / "records-T-0.5.csv") == slurp(dir2 / "records-T-0.5.csv"));
    CHECK(slurp(dir1 / "figure.svg") == slurp(dir2 / "figure.svg"));
    CHECK(slurp(dir1 / "manifest.json") == slurp(dir2 / "manifest.json"));

    // regenerating the SVG from the written CSV reproduces it byte for byte
    std::vector<SectorLine> lines = {{0.25, "true a=0.25", "#000000", false},
                                     {1.25, "true b=1.25", "#000000", false}};
    const auto& d = fig.datasets[0];
    std::vector<SectorLine> all = lines;
    all.push_back({d.bounds.a_R, d.label + " a_R", "#1f77b4", true});
    all.push_back({d.bounds.b_L, d.label + " b_L", "#1f77b4", true});
    const fs::path svg2 = dir2 / "regen.svg";
    render_records_svg({(dir1 / "records-T-0.5.csv").string()}, {d.label}, all, svg2.string());
    CHECK(slurp(svg2) == slurp(dir1 / "figure.svg"));

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("bench records grid blowup as a row outcome") {
    RunOptions opt;
    opt.seed = 2;
    BenchResult bench = run_complexity_bench({2, 20}, 3, 1e5, {4}, 50, opt);
    REQUIRE(bench.rows.size() == 3);
    CHECK(bench.rows[0].mode == "grid");
    CHECK_FALSE(bench.rows[0].budget_exceeded);
    CHECK(bench.rows[0].requested_samples == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(bench.rows[1].budget_exceeded);
    CHECK(bench.rows[1].requested_samples == doctest::Approx(9.5367431640625e13).epsilon(1e-9));
    CHECK(bench.rows[2].mode == "ml");
    CHECK(std::isfinite(bench.rows[2].lower_rel_err));

    const fs::path dir = fs::temp_directory_path() / "dissip_bench";
    fs::remove_all(dir);
    write_bench_outputs(bench, dir.string());
    const std::string table = slurp(dir / "bench.csv");
    CHECK(table.find("budget-exceeded") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cone report serializes infinities as strings") {
    ConeBounds b;
    b.a_R = 1.0;
    b.b_L = 1.0;
    b.b_I = kInf;
    b.a_I = -kInf;
    const std::string json = cone_report_json(b, 1.0);
    CHECK(json.find("\"inf\"") != std::string::npos);
    CHECK(json.find("\"-inf\"") != std::string::npos);
}

TEST_CASE("fig1 variant names round trip") {
    for (auto v : {Fig1Variant::FourierNonseq, Fig1Variant::LegendreT10, Fig1Variant::LegendreT1})
        CHECK(fig1_variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS((void)fig1_variant_from_string("nope"), ValidationError);
}
