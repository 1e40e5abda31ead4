#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dissip/experiment.hpp"

using namespace dissip;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;
constexpr int kExitNumerical = 4;

void write_text(const fs::path& path, const std::string& text) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot open " + path.string() + " for writing");
    f << text;
    if (text.empty() || text.back() != '\n') f << "\n";
}

// `gen` and `sim` share sample generation; the manifest rows carry either
// the coefficient vector or the per-path seed of each trajectory.
struct SampleSet {
    std::vector<Eigen::VectorXd> coeffs;   // grid / uniform modes
    std::vector<Signal> signals;           // wiener mode
    std::vector<std::uint64_t> path_seeds;
    std::vector<double> horizons;          // wiener mode, per signal
};

SampleSet generate_samples(const ExperimentSpec& spec, const BasisSet& basis) {
    SampleSet out;
    switch (spec.sampling.mode) {
        case SamplingMode::Grid: {
            GridCoverSpec grid;
            grid.space.u_max = spec.u_max;
            grid.space.eps_min = spec.eps_min;
            grid.space.basis = basis;
            grid.half_density_N = spec.sampling.grid_half_density;
            for (const auto& v : grid_cover(grid)) out.coeffs.push_back(v);
            break;
        }
        case SamplingMode::Uniform: {
            InputSpaceConfig space;
            space.u_max = spec.u_max;
            space.eps_min = spec.eps_min;
            space.basis = basis;
            out.coeffs = uniform_coeffs(space, spec.sampling.count, spec.seed);
            break;
        }
        case SamplingMode::Wiener: {
            if (spec.sampling.sweep) {
                WienerSpec w{spec.dt, spec.sampling.step_scale, spec.seed};
                out.signals = wiener_prefix_sweep(w, spec.sampling.t_min, spec.T, spec.sampling.dT);
                for (const auto& s : out.signals) {
                    out.path_seeds.push_back(spec.seed);
                    out.horizons.push_back(s.horizon());
                }
            } else {
                for (int i = 0; i < spec.sampling.count; ++i) {
                    WienerSpec wi{spec.dt, spec.sampling.step_scale,
                                  split_seed(spec.seed, static_cast<std::uint64_t>(i))};
                    out.signals.push_back(wiener_path(wi, spec.T));
                    out.path_seeds.push_back(wi.seed);
                    out.horizons.push_back(spec.T);
                }
            }
            break;
        }
    }
    return out;
}

void write_sample_manifest(const SampleSet& samples, const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot open " + path.string() + " for writing");
    char buf[64];
    if (!samples.coeffs.empty()) {
        f << "index";
        for (Eigen::Index j = 0; j < samples.coeffs[0].size(); ++j) f << ",c" << j + 1;
        f << "\n";
        for (size_t i = 0; i < samples.coeffs.size(); ++i) {
            f << i;
            for (Eigen::Index j = 0; j < samples.coeffs[i].size(); ++j) {
                std::snprintf(buf, sizeof buf, ",%.17g", samples.coeffs[i][j]);
                f << buf;
            }
            f << "\n";
        }
    } else {
        f << "index,path_seed,T\n";
        for (size_t i = 0; i < samples.signals.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%llu,%.17g\n", i,
                          static_cast<unsigned long long>(samples.path_seeds[i]),
                          samples.horizons[i]);
            f << buf;
        }
    }
}

json run_manifest(const ExperimentSpec& spec, const char* command, std::size_t n) {
    json m;
    m["tool"] = "dissip";
    m["version"] = kVersion;
    m["command"] = command;
    m["spec"] = json::parse(spec.to_json_string());
    m["n_trajectories"] = n;
    if (spec.sampling.mode == SamplingMode::Grid) {
        GridCoverSpec grid;
        grid.space.u_max = spec.u_max;
        grid.space.eps_min = spec.eps_min;
        grid.space.basis = make_spec_basis(spec);
        grid.half_density_N = spec.sampling.grid_half_density;
        m["derived"] = {{"K", grid.sample_count()}, {"cover_radius", grid.cover_radius()}};
    }
    return m;
}

int cmd_gen(const std::string& spec_path, const std::string& out_dir) {
    ExperimentSpec spec = ExperimentSpec::from_json_file(spec_path);
    BasisSet basis = make_spec_basis(spec);
    SampleSet samples = generate_samples(spec, basis);
    fs::create_directories(out_dir);
    write_sample_manifest(samples, fs::path(out_dir) / "samples.csv");
    const std::size_t n = samples.coeffs.empty() ? samples.signals.size() : samples.coeffs.size();
    write_text(fs::path(out_dir) / "manifest.json", run_manifest(spec, "gen", n).dump(2));
    std::printf("wrote %zu sample rows to %s\n", n, out_dir.c_str());
    return kExitOk;
}

int cmd_sim(const std::string& spec_path, const std::string& out_dir, int workers,
            int dump_trajectories) {
    ExperimentSpec spec = ExperimentSpec::from_json_file(spec_path);
    BasisSet basis = make_spec_basis(spec);
    SampleSet samples = generate_samples(spec, basis);
    PlantModel plant = make_plant(spec.plant);

    std::vector<TrajectoryRecord> records;
    std::vector<Signal> inputs;
    if (!samples.coeffs.empty()) {
        records = simulate_coeff_records(plant, basis, samples.coeffs, workers);
        for (int i = 0; i < dump_trajectories && i < static_cast<int>(samples.coeffs.size()); ++i)
            inputs.push_back(synthesize(basis, samples.coeffs[static_cast<size_t>(i)]));
    } else {
        records = simulate_signal_records(plant, samples.signals, workers);
        for (int i = 0; i < dump_trajectories && i < static_cast<int>(samples.signals.size()); ++i)
            inputs.push_back(samples.signals[static_cast<size_t>(i)]);
    }

    fs::create_directories(out_dir);
    write_sample_manifest(samples, fs::path(out_dir) / "samples.csv");
    write_records_csv(records, (fs::path(out_dir) / "records.csv").string());
    for (size_t i = 0; i < inputs.size(); ++i) {
        Signal y = simulate(plant, inputs[i]);
        write_pair_csv(inputs[i], y,
                       (fs::path(out_dir) / ("trajectory-" + std::to_string(i) + ".csv")).string());
    }
    write_text(fs::path(out_dir) / "manifest.json",
               run_manifest(spec, "sim", records.size()).dump(2));
    std::printf("wrote %zu records to %s\n", records.size(), out_dir.c_str());
    return kExitOk;
}

int cmd_estimate_cone(const std::string& records_path, double delta, double L, bool expanded,
                      const std::string& out_path) {
    auto records = read_records_csv(records_path);
    RobustMargins margins{L, delta};
    ConeBounds bounds = robust_cone(records, margins,
                                    expanded ? MarginMode::Expanded : MarginMode::AsWritten);
    double gain = robust_gain(records, margins);
    const std::string report = cone_report_json(bounds, gain);
    if (out_path.empty())
        std::printf("%s\n", report.c_str());
    else
        write_text(out_path, report);
    return kExitOk;
}

int cmd_estimate_gain(const std::string& records_path, double delta, double L,
                      const std::string& out_path) {
    auto records = read_records_csv(records_path);
    const double gain = robust_gain(records, RobustMargins{L, delta});
    json j = {{"gamma", gain}, {"delta", delta}, {"L", L}, {"n_records", records.size()}};
    if (out_path.empty())
        std::printf("%s\n", j.dump(2).c_str());
    else
        write_text(out_path, j.dump(2));
    return kExitOk;
}

int cmd_estimate_svm(const std::string& records_path, const std::string& features_path,
                     double delta_conf, double c, double gamma_override,
                     const std::string& out_path) {
    std::vector<FeaturePoint> points;
    if (!features_path.empty()) {
        points = read_features_csv(features_path);
    } else {
        for (const auto& r : read_records_csv(records_path))
            points.push_back(feature_from_record(r));
    }
    SupplyRate supply = ocsvm_hard(points);
    const double loss = empirical_loss(points, supply);

    GeneralizationBoundInput in;
    in.K = static_cast<double>(points.size());
    in.c = c;
    const double gamma = gamma_override > 0.0 ? gamma_override : supply.rho;
    in.gamma_hat = gamma / supply.frobenius_norm;
    in.delta_conf = delta_conf;
    GeneralizationBound bound = generalization_bound(in);

    json j = {{"Q", supply.Q()},
              {"S", supply.S()},
              {"R", supply.R()},
              {"rho", supply.rho},
              {"frobenius_norm", supply.frobenius_norm},
              {"empirical_loss", loss},
              {"bound", bound.bound},
              {"vacuous", bound.vacuous},
              {"gamma", gamma},
              {"duality_gap_rel", supply.duality_gap_rel},
              {"n_points", points.size()}};
    if (out_path.empty())
        std::printf("%s\n", j.dump(2).c_str());
    else
        write_text(out_path, j.dump(2));
    return kExitOk;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_ints(const std::string& csv) {
    std::vector<int> out;
    for (double v : parse_doubles(csv)) out.push_back(static_cast<int>(v));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dissip: data-driven sector and gain estimation for simulated plants"};
    app.require_subcommand(1);
    int workers = 0;
    app.add_option("--workers", workers, "worker threads (0 = all cores)");

    std::string spec_path, out_dir = "out", out_path;
    int dump_trajectories = 0;

    auto* gen = app.add_subcommand("gen", "generate a sample set from a spec file");
    gen->add_option("--spec", spec_path, "experiment spec JSON")->required();
    gen->add_option("--out", out_dir, "output directory");

    auto* sim = app.add_subcommand("sim", "generate samples and simulate the plant");
    sim->add_option("--spec", spec_path, "experiment spec JSON")->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--dump-trajectories", dump_trajectories, "write the first N t,u,y files");

    std::string records_path, features_path;
    double delta = 0.0, lipschitz = 0.0, delta_conf = 0.0, c_const = 103.0, gamma_override = 0.0;
    bool expanded = false;

    auto* est = app.add_subcommand("estimate", "estimate from a record table");
    est->require_subcommand(1);
    auto* cone = est->add_subcommand("cone", "sector bounds (empirical or robust)");
    cone->add_option("--records", records_path, "records CSV")->required();
    cone->add_option("--delta", delta, "covering radius");
    cone->add_option("--L", lipschitz, "Lipschitz bound (required when delta > 0)");
    cone->add_flag("--expanded", expanded, "use the expanded output-norm perturbation");
    cone->add_option("--out", out_path, "report path (stdout when omitted)");
    auto* gain = est->add_subcommand("gain", "worst-case L2 gain");
    gain->add_option("--records", records_path, "records CSV")->required();
    gain->add_option("--delta", delta, "covering radius");
    gain->add_option("--L", lipschitz, "Lipschitz bound");
    gain->add_option("--out", out_path, "report path");
    auto* svm = est->add_subcommand("svm", "hard one-class SVM supply rate");
    svm->add_option("--records", records_path, "records CSV (SISO features)");
    svm->add_option("--features", features_path, "feature CSV (overrides --records)");
    svm->add_option("--delta-conf", delta_conf, "confidence parameter in (0,1)")->required();
    svm->add_option("--c", c_const, "bound constant (103 as published)");
    svm->add_option("--gamma", gamma_override, "margin relaxation (default: rho)");
    svm->add_option("--out", out_path, "report path");

    std::string variant = "legendre-T10";
    double fig_dt = 0.0, fig_T = 20.0, t_min = 0.2, t_max = 50.0, sweep_dT = 0.2;
    std::uint64_t seed = 1;
    int count = 1000;
    std::string b_csv = "2,4,10,100", T_csv = "0.1,1,10,100";
    bool no_axis_extremes = false;

    auto* fig1 = app.add_subcommand("fig1", "grid-cover sector estimates on both plants");
    fig1->add_option("--variant", variant, "fourier-nonseq | legendre-T10 | legendre-T1");
    fig1->add_option("--dt", fig_dt, "sample step (default 1e-3)");
    fig1->add_option("--out", out_dir, "output directory");

    auto* fig2 = app.add_subcommand("fig2", "uniform-coefficient sampling vs basis count");
    fig2->add_option("--b", b_csv, "comma-separated basis counts");
    fig2->add_option("--count", count, "trajectories per basis count");
    fig2->add_option("--T", fig_T, "horizon");
    fig2->add_option("--dt", fig_dt, "sample step (default 0.01)");
    fig2->add_option("--seed", seed, "RNG seed");
    fig2->add_flag("--no-axis-extremes", no_axis_extremes,
                   "omit the basis-aligned extreme trajectories");
    fig2->add_option("--out", out_dir, "output directory");

    auto* fig3 = app.add_subcommand("fig3", "fixed-length random-walk inputs vs horizon");
    fig3->add_option("--T", T_csv, "comma-separated horizons");
    fig3->add_option("--count", count, "paths per horizon");
    fig3->add_option("--dt", fig_dt, "walk step (default 0.01)");
    fig3->add_option("--seed", seed, "RNG seed");
    fig3->add_option("--out", out_dir, "output directory");

    auto* fig4 = app.add_subcommand("fig4", "single-path prefix sweep on both plants");
    fig4->add_option("--t-min", t_min, "first horizon");
    fig4->add_option("--t-max", t_max, "last horizon");
    fig4->add_option("--dT", sweep_dT, "horizon increment");
    fig4->add_option("--dt", fig_dt, "walk step (default 0.01)");
    fig4->add_option("--seed", seed, "RNG seed");
    fig4->add_option("--out", out_dir, "output directory");

    std::string grid_b_csv = "2,3,4,10,20", ml_b_csv = "10,20,50,100";
    double budget = 1e5;
    int ml_count = 1000, grid_N = 3;
    auto* bench = app.add_subcommand("bench", "grid vs ML sample-complexity table");
    bench->add_option("--grid-b", grid_b_csv, "grid-mode basis counts");
    bench->add_option("--N", grid_N, "grid half-density");
    bench->add_option("--budget", budget, "grid sample budget");
    bench->add_option("--ml-b", ml_b_csv, "ML-mode basis counts");
    bench->add_option("--ml-count", ml_count, "ML-mode sample count");
    bench->add_option("--seed", seed, "RNG seed");
    bench->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);

        RunOptions opt;
        opt.seed = seed;
        opt.workers = workers;

        if (gen->parsed()) return cmd_gen(spec_path, out_dir);
        if (sim->parsed()) return cmd_sim(spec_path, out_dir, workers, dump_trajectories);
        if (est->parsed()) {
            if (cone->parsed())
                return cmd_estimate_cone(records_path, delta, lipschitz, expanded, out_path);
            if (gain->parsed()) return cmd_estimate_gain(records_path, delta, lipschitz, out_path);
            if (svm->parsed()) {
                if (records_path.empty() && features_path.empty())
                    throw ValidationError("estimate svm needs --records or --features");
                return cmd_estimate_svm(records_path, features_path, delta_conf, c_const,
                                        gamma_override, out_path);
            }
        }
        if (fig1->parsed()) {
            opt.dt = fig_dt > 0.0 ? fig_dt : 1e-3;
            FigureResult fig = run_fig1(fig1_variant_from_string(variant), opt);
            write_figure_outputs(fig, out_dir);
            for (const auto& d : fig.datasets)
                std::printf("%-12s a_R=%.4f b_I=%.4f b_L=%.4f a_I=%.4f gamma=%.4f\n",
                            d.label.c_str(), d.bounds.a_R, d.bounds.b_I, d.bounds.b_L,
                            d.bounds.a_I, d.gain);
            return kExitOk;
        }
        if (fig2->parsed()) {
            opt.dt = fig_dt > 0.0 ? fig_dt : 0.01;
            FigureResult fig = run_fig2(parse_ints(b_csv), count, fig_T, opt, !no_axis_extremes);
            write_figure_outputs(fig, out_dir);
            for (const auto& d : fig.datasets)
                std::printf("%-8s lower=%.4f upper=%.4f\n", d.label.c_str(), d.bounds.a_R,
                            d.bounds.b_L);
            return kExitOk;
        }
        if (fig3->parsed()) {
            opt.dt = fig_dt > 0.0 ? fig_dt : 0.01;
            FigureResult fig = run_fig3(parse_doubles(T_csv), count, opt);
            write_figure_outputs(fig, out_dir);
            for (const auto& d : fig.datasets)
                std::printf("%-8s lower=%.4f upper=%.4f\n", d.label.c_str(), d.bounds.a_R,
                            d.bounds.b_L);
            return kExitOk;
        }
        if (fig4->parsed()) {
            opt.dt = fig_dt > 0.0 ? fig_dt : 0.01;
            FigureResult fig = run_fig4(t_min, t_max, sweep_dT, opt);
            write_figure_outputs(fig, out_dir);
            for (const auto& d : fig.datasets)
                std::printf("%-12s lower=%.4f upper=%.4f\n", d.label.c_str(), d.bounds.a_R,
                            d.bounds.b_L);
            return kExitOk;
        }
        if (bench->parsed()) {
            BenchResult result = run_complexity_bench(parse_ints(grid_b_csv), grid_N, budget,
                                                      parse_ints(ml_b_csv), ml_count, opt);
            write_bench_outputs(result, out_dir);
            for (const auto& r : result.rows)
                std::printf("%-5s b=%-4d K=%-12.6g %s  lower_err=%.3f upper_err=%.3f\n",
                            r.mode.c_str(), r.n_basis, r.requested_samples,
                            r.budget_exceeded ? "budget-exceeded" : "ok             ",
                            r.lower_rel_err, r.upper_rel_err);
            return kExitOk;
        }
        throw ValidationError("no subcommand selected");
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "argument error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const BudgetExceededError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
