#include "dissip/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

#include <nlohmann/json.hpp>

#include "dissip/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dissip {

int hardware_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(Eigen::Index n, int workers,
                  const std::function<void(Eigen::Index, Eigen::Index)>& body) {
    if (workers <= 0) workers = hardware_workers();
    workers = static_cast<int>(std::min<Eigen::Index>(workers, std::max<Eigen::Index>(n, 1)));
    if (workers <= 1 || n <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    const Eigen::Index chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const Eigen::Index begin = static_cast<Eigen::Index>(w) * chunk;
        const Eigen::Index end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<TrajectoryRecord> simulate_coeff_records(const PlantModel& plant,
                                                     const BasisSet& basis,
                                                     const std::vector<Eigen::VectorXd>& coeffs,
                                                     int workers) {
    std::vector<TrajectoryRecord> records(coeffs.size());
    parallel_for(static_cast<Eigen::Index>(coeffs.size()), workers,
                 [&](Eigen::Index begin, Eigen::Index end) {
                     for (Eigen::Index i = begin; i < end; ++i) {
                         Signal u = synthesize(basis, coeffs[static_cast<size_t>(i)]);
                         Signal y = simulate(plant, u);
                         records[static_cast<size_t>(i)] = make_record(u, y, u.horizon());
                     }
                 });
    return records;
}

std::vector<TrajectoryRecord> simulate_signal_records(const PlantModel& plant,
                                                      const std::vector<Signal>& inputs,
                                                      int workers) {
    std::vector<TrajectoryRecord> records(inputs.size());
    parallel_for(static_cast<Eigen::Index>(inputs.size()), workers,
                 [&](Eigen::Index begin, Eigen::Index end) {
                     for (Eigen::Index i = begin; i < end; ++i) {
                         const Signal& u = inputs[static_cast<size_t>(i)];
                         Signal y = simulate(plant, u);
                         records[static_cast<size_t>(i)] = make_record(u, y, u.horizon());
                     }
                 });
    return records;
}

std::vector<TrajectoryRecord> simulate_grid_records(const PlantModel& plant,
                                                    const GridCoverSpec& spec, double budget,
                                                    int workers) {
    GridCoverRange range = grid_cover(spec, budget);
    std::vector<TrajectoryRecord> records;
    records.reserve(static_cast<size_t>(range.size()));
    constexpr std::size_t kChunk = 4096;
    std::vector<Eigen::VectorXd> block;
    block.reserve(kChunk);
    auto flush = [&] {
        auto part = simulate_coeff_records(plant, spec.space.basis, block, workers);
        records.insert(records.end(), part.begin(), part.end());
        block.clear();
    };
    for (auto it = range.begin(); it != range.end(); ++it) {
        block.push_back(*it);
        if (block.size() == kChunk) flush();
    }
    if (!block.empty()) flush();
    return records;
}

std::vector<TrajectoryRecord> staircase_prefix_records(const PlantModel& plant, const Signal& u,
                                                       const std::vector<double>& horizons,
                                                       int refine) {
    if (refine < 1) throw ValidationError("staircase records: refine must be >= 1");
    for (size_t i = 0; i + 1 < horizons.size(); ++i)
        if (!(horizons[i] < horizons[i + 1]))
            throw ValidationError("staircase records: horizons must be strictly increasing");
    const double dt_f = u.dt / refine;

    ZohStepper stepper(plant, dt_f);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.state_dim);
    double uu = 0.0, yu = 0.0, yy = 0.0;
    std::vector<TrajectoryRecord> out;
    out.reserve(horizons.size());
    size_t next = 0;

    // Streamed panel accumulation against the held input: the input terms
    // integrate the hold exactly, and both panel-end outputs use the held
    // value so the jump at the panel's right edge stays out of the panel.
    double t = 0.0;
    auto maybe_emit = [&](double t_now) {
        while (next < horizons.size() && t_now >= horizons[next] - 0.5 * dt_f) {
            TrajectoryRecord r{horizons[next], uu, yu, yy};
            r.validate();
            out.push_back(r);
            ++next;
        }
    };
    maybe_emit(0.0);
    for (Eigen::Index k = 0; k + 1 < u.size(); ++k) {
        const double uh = u.values[k];
        for (int s = 0; s < refine; ++s) {
            const double y0 = stepper.output(x, uh);
            stepper.step(x, uh);
            if (!x.allFinite())
                throw DivergenceError("state diverged (non-finite) near time index " +
                                          std::to_string(k + 1),
                                      k + 1);
            const double y1 = stepper.output(x, uh);
            uu += uh * uh * dt_f;
            yu += uh * 0.5 * (y0 + y1) * dt_f;
            yy += 0.5 * (y0 * y0 + y1 * y1) * dt_f;
            t += dt_f;
            maybe_emit(t);
        }
    }
    if (next < horizons.size())
        throw RangeError("staircase records: horizon beyond the input signal");
    return out;
}

TrajectoryRecord staircase_record(const PlantModel& plant, const Signal& u, int refine) {
    return staircase_prefix_records(plant, u, {u.horizon()}, refine)[0];
}

// -------------------------------------------------------------------------

PlantModel make_plant(const std::string& name) {
    if (name == "lti-circle") return PlantModel::LtiCircle();
    if (name == "pendulum") return PlantModel::Pendulum();
    throw ValidationError("unknown plant '" + name + "' (expected lti-circle or pendulum)");
}

static BasisKind basis_kind_from_string(const std::string& s) {
    if (s == "legendre") return BasisKind::Legendre;
    if (s == "fourier-seq") return BasisKind::FourierSequential;
    if (s == "fourier-explicit") return BasisKind::FourierExplicit;
    throw ValidationError("unknown basis kind '" + s + "'");
}

static std::string to_string(BasisKind k) {
    switch (k) {
        case BasisKind::Legendre: return "legendre";
        case BasisKind::FourierSequential: return "fourier-seq";
        case BasisKind::FourierExplicit: return "fourier-explicit";
    }
    return "";
}

BasisSet make_spec_basis(const ExperimentSpec& spec) {
    return make_basis(spec.basis_kind, spec.n_basis, spec.T, spec.dt, spec.frequencies);
}

ExperimentSpec ExperimentSpec::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("experiment spec is not valid JSON: ") + e.what());
    }
    ExperimentSpec s;
    try {
        s.name = j.value("name", s.name);
        s.plant = j.at("plant").get<std::string>();
        const auto& b = j.at("basis");
        s.basis_kind = basis_kind_from_string(b.at("kind").get<std::string>());
        s.n_basis = b.at("n_basis").get<int>();
        if (b.contains("frequencies")) s.frequencies = b.at("frequencies").get<std::vector<double>>();
        const auto& sm = j.at("sampling");
        const std::string mode = sm.at("mode").get<std::string>();
        if (mode == "grid") {
            s.sampling.mode = SamplingMode::Grid;
            s.sampling.grid_half_density = sm.at("N").get<int>();
        } else if (mode == "uniform") {
            s.sampling.mode = SamplingMode::Uniform;
            s.sampling.count = sm.at("count").get<int>();
        } else if (mode == "wiener") {
            s.sampling.mode = SamplingMode::Wiener;
            s.sampling.step_scale = sm.value("step_scale", 1.0);
            s.sampling.sweep = sm.value("sweep", false);
            if (s.sampling.sweep) {
                s.sampling.t_min = sm.at("t_min").get<double>();
                s.sampling.dT = sm.at("dT").get<double>();
            } else {
                s.sampling.count = sm.at("count").get<int>();
            }
        } else {
            throw ValidationError("unknown sampling mode '" + mode + "'");
        }
        if (j.contains("seed"))
            s.seed = j.at("seed").get<std::uint64_t>();
        else if (s.sampling.mode != SamplingMode::Grid)
            throw ValidationError("seed is mandatory for stochastic sampling modes");
        s.dt = j.at("dt").get<double>();
        s.T = j.at("T").get<double>();
        s.u_max = j.value("u_max", 1.0);
        s.eps_min = j.value("eps_min", 0.0);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("experiment spec missing field: ") + e.what());
    }
    if (!(s.T > 0.0)) throw ValidationError("experiment spec: T must be > 0");
    if (!(s.dt > 0.0)) throw ValidationError("experiment spec: dt must be > 0");
    return s;
}

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open spec file " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

std::string ExperimentSpec::to_json_string() const {
    json j;
    j["name"] = name;
    j["plant"] = plant;
    j["basis"] = {{"kind", to_string(basis_kind)}, {"n_basis", n_basis}};
    if (!frequencies.empty()) j["basis"]["frequencies"] = frequencies;
    switch (sampling.mode) {
        case SamplingMode::Grid:
            j["sampling"] = {{"mode", "grid"}, {"N", sampling.grid_half_density}};
            break;
        case SamplingMode::Uniform:
            j["sampling"] = {{"mode", "uniform"}, {"count", sampling.count}};
            break;
        case SamplingMode::Wiener:
            j["sampling"] = {{"mode", "wiener"}, {"step_scale", sampling.step_scale}};
            if (sampling.sweep) {
                j["sampling"]["sweep"] = true;
                j["sampling"]["t_min"] = sampling.t_min;
                j["sampling"]["dT"] = sampling.dT;
            } else {
                j["sampling"]["count"] = sampling.count;
            }
            break;
    }
    j["seed"] = seed;
    j["dt"] = dt;
    j["T"] = T;
    j["u_max"] = u_max;
    j["eps_min"] = eps_min;
    return j.dump(2);
}

// -------------------------------------------------------------------------

Fig1Variant fig1_variant_from_string(const std::string& s) {
    if (s == "fourier-nonseq") return Fig1Variant::FourierNonseq;
    if (s == "legendre-T10") return Fig1Variant::LegendreT10;
    if (s == "legendre-T1") return Fig1Variant::LegendreT1;
    throw ValidationError("unknown fig1 variant '" + s +
                          "' (expected fourier-nonseq, legendre-T10 or legendre-T1)");
}

std::string to_string(Fig1Variant v) {
    switch (v) {
        case Fig1Variant::FourierNonseq: return "fourier-nonseq";
        case Fig1Variant::LegendreT10: return "legendre-T10";
        case Fig1Variant::LegendreT1: return "legendre-T1";
    }
    return "";
}

static DatasetResult estimate_dataset(std::string label, std::string plant,
                                      std::vector<TrajectoryRecord> records) {
    DatasetResult d;
    d.label = std::move(label);
    d.plant = std::move(plant);
    d.bounds = empirical_cone(records);
    d.gain = robust_gain(records, RobustMargins{0.0, 0.0});
    d.records = std::move(records);
    return d;
}

FigureResult run_fig1(Fig1Variant variant, const RunOptions& opt) {
    const double T = variant == Fig1Variant::LegendreT1 ? 1.0 : 10.0;
    BasisSet basis;
    if (variant == Fig1Variant::FourierNonseq) {
        const double pi = std::numbers::pi;
        basis = make_basis(BasisKind::FourierExplicit, 4, T, opt.dt,
                           {0.0, 2.0 * pi / T, 20.0 * pi / T, 200.0 * pi / T});
    } else {
        basis = make_basis(BasisKind::Legendre, 4, T, opt.dt);
    }
    GridCoverSpec spec;
    spec.space.u_max = opt.u_max;
    spec.space.eps_min = 0.0;
    spec.space.basis = std::move(basis);
    spec.half_density_N = 3;  // K = 5^4 = 625
    if (variant != Fig1Variant::FourierNonseq) {
        // Coefficient box over the raw (unnormalized) polynomials: axis k of
        // the normalized basis spans ||P_k|| = sqrt(T/(2k+1)) times the box
        // amplitude, so scales fall off as 1/sqrt(2k+1).
        spec.axis_scales.resize(4);
        for (int k = 0; k < 4; ++k) spec.axis_scales[k] = 1.0 / std::sqrt(2.0 * k + 1.0);
    }

    // Held-input records at a substep resolution near 5e-5 s keep the
    // pendulum's sector residuals accurate to ~1e-7 relative.
    const int refine = std::max(1, static_cast<int>(std::ceil(opt.dt / 5e-5)));
    FigureResult fig;
    fig.name = "fig1-" + to_string(variant);
    for (const char* plant_name : {"lti-circle", "pendulum"}) {
        PlantModel plant = make_plant(plant_name);
        GridCoverRange range = grid_cover(spec, kDefaultGridBudget);
        std::vector<Eigen::VectorXd> coeffs;
        coeffs.reserve(range.size());
        for (const auto& alpha : range) coeffs.push_back(alpha);
        std::vector<TrajectoryRecord> records(coeffs.size());
        parallel_for(static_cast<Eigen::Index>(coeffs.size()), opt.workers,
                     [&](Eigen::Index begin, Eigen::Index end) {
                         for (Eigen::Index i = begin; i < end; ++i) {
                             Signal u = synthesize(spec.space.basis, coeffs[static_cast<size_t>(i)]);
                             records[static_cast<size_t>(i)] = staircase_record(plant, u, refine);
                         }
                     });
        fig.datasets.push_back(estimate_dataset(plant_name, plant_name, std::move(records)));
    }
    json params = {{"variant", to_string(variant)},
                   {"T", T},
                   {"dt", opt.dt},
                   {"u_max", opt.u_max},
                   {"N", spec.half_density_N},
                   {"K", spec.sample_count()},
                   {"cover_radius", spec.cover_radius()}};
    fig.params_json = params.dump();
    return fig;
}

std::vector<Eigen::VectorXd> axis_extreme_coeffs(const InputSpaceConfig& space) {
    const Eigen::Index b = space.basis.n_basis();
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<size_t>(2 * b));
    for (Eigen::Index i = 0; i < b; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(b);
        e[i] = space.u_max;
        out.push_back(e);
        out.push_back(-e);
    }
    return out;
}

FigureResult run_fig2(const std::vector<int>& b_list, int count, double T, const RunOptions& opt,
                      bool include_axis_extremes) {
    if (b_list.empty()) throw ValidationError("fig2: basis list must be nonempty");
    PlantModel plant = PlantModel::LtiCircle();
    FigureResult fig;
    fig.name = "fig2";
    for (size_t bi = 0; bi < b_list.size(); ++bi) {
        const int b = b_list[bi];
        InputSpaceConfig space;
        space.u_max = opt.u_max;
        space.eps_min = 0.0;
        space.basis = make_basis(BasisKind::FourierSequential, b, T, opt.dt);
        // The sector edges live on basis-aligned rays that iid box draws
        // essentially never hit once b is large, so the per-axis extremes
        // are sampled explicitly alongside the uniform draws.
        std::vector<Eigen::VectorXd> coeffs;
        if (include_axis_extremes) coeffs = axis_extreme_coeffs(space);
        auto draws = uniform_coeffs(space, count, split_seed(opt.seed, bi));
        coeffs.insert(coeffs.end(), draws.begin(), draws.end());
        auto records = simulate_coeff_records(plant, space.basis, coeffs, opt.workers);
        fig.datasets.push_back(
            estimate_dataset("b=" + std::to_string(b), plant.name, std::move(records)));
    }
    json params = {{"b_list", b_list}, {"count", count},         {"T", T},
                   {"dt", opt.dt},     {"u_max", opt.u_max},     {"seed", opt.seed},
                   {"basis", "fourier-seq"}, {"plant", "lti-circle"},
                   {"axis_extremes", include_axis_extremes}};
    fig.params_json = params.dump();
    return fig;
}

FigureResult run_fig3(const std::vector<double>& T_list, int count, const RunOptions& opt) {
    if (T_list.empty()) throw ValidationError("fig3: horizon list must be nonempty");
    PlantModel plant = PlantModel::LtiCircle();
    FigureResult fig;
    fig.name = "fig3";
    for (size_t ti = 0; ti < T_list.size(); ++ti) {
        const double T = T_list[ti];
        if (!(T > 0.0)) throw ValidationError("fig3: horizons must be > 0");
        std::vector<Signal> inputs(static_cast<size_t>(count));
        const std::uint64_t horizon_seed = split_seed(opt.seed, ti);
        parallel_for(count, opt.workers, [&](Eigen::Index begin, Eigen::Index end) {
            for (Eigen::Index i = begin; i < end; ++i) {
                WienerSpec w{opt.dt, 1.0, split_seed(horizon_seed, static_cast<std::uint64_t>(i))};
                inputs[static_cast<size_t>(i)] = wiener_path(w, T);
            }
        });
        auto records = simulate_signal_records(plant, inputs, opt.workers);
        char label[32];
        std::snprintf(label, sizeof label, "T=%g", T);
        fig.datasets.push_back(estimate_dataset(label, plant.name, std::move(records)));
    }
    json params = {{"T_list", T_list}, {"count", count},     {"dt", opt.dt},
                   {"seed", opt.seed}, {"step_scale", 1.0},  {"plant", "lti-circle"}};
    fig.params_json = params.dump();
    return fig;
}

FigureResult run_fig4(double t_min, double t_max, double dT, const RunOptions& opt) {
    // Step scale 0.05 keeps the shared path small enough that the pendulum
    // stays resolved at dt = 0.01 over a 50 s walk; the LTI sector
    // estimates are amplitude-invariant, so only accuracy is affected.
    WienerSpec w{opt.dt, 0.05, opt.seed};
    std::vector<double> horizons;
    for (double t = t_min; t <= t_max * (1.0 + 1e-12); t += dT) horizons.push_back(t);
    if (horizons.empty()) throw ValidationError("fig4: empty sweep");

    Signal path = wiener_path(w, t_max);
    FigureResult fig;
    fig.name = "fig4";
    for (const char* plant_name : {"lti-circle", "pendulum"}) {
        PlantModel plant = make_plant(plant_name);
        auto records = staircase_prefix_records(plant, path, horizons, 40);
        fig.datasets.push_back(estimate_dataset(plant_name, plant_name, std::move(records)));
    }
    json params = {{"t_min", t_min}, {"t_max", t_max},   {"dT", dT},
                   {"dt", opt.dt},   {"seed", opt.seed}, {"step_scale", 1.0}};
    fig.params_json = params.dump();
    return fig;
}

// -------------------------------------------------------------------------

BenchResult run_complexity_bench(const std::vector<int>& grid_b_list, int grid_half_density,
                                 double budget, const std::vector<int>& ml_b_list, int ml_count,
                                 const RunOptions& opt) {
    const double T = 20.0;
    PlantModel plant = PlantModel::LtiCircle();
    BenchResult out;
    using clock = std::chrono::steady_clock;

    for (int b : grid_b_list) {
        BenchRow row;
        row.mode = "grid";
        row.n_basis = b;
        GridCoverSpec spec;
        spec.space.u_max = opt.u_max;
        spec.space.basis = make_basis(BasisKind::FourierSequential, b, T, opt.dt);
        spec.half_density_N = grid_half_density;
        try {
            row.requested_samples = static_cast<double>(spec.sample_count_exact());
        } catch (const BudgetExceededError&) {
            row.requested_samples = spec.sample_count();  // beyond 64-bit range
        }
        try {
            const auto t0 = clock::now();
            auto records = simulate_grid_records(plant, spec, budget, opt.workers);
            ConeBounds bounds = empirical_cone(records);
            row.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
            row.lower_rel_err = std::abs(bounds.a_R - 0.25) / 0.25;
            row.upper_rel_err = std::abs(bounds.b_L - 1.25) / 1.25;
        } catch (const BudgetExceededError&) {
            row.budget_exceeded = true;
        }
        out.rows.push_back(row);
    }

    for (size_t bi = 0; bi < ml_b_list.size(); ++bi) {
        const int b = ml_b_list[bi];
        BenchRow row;
        row.mode = "ml";
        row.n_basis = b;
        row.requested_samples = ml_count;
        InputSpaceConfig space;
        space.u_max = opt.u_max;
        space.basis = make_basis(BasisKind::FourierSequential, b, T, opt.dt);
        const auto t0 = clock::now();
        auto coeffs = axis_extreme_coeffs(space);
        auto draws = uniform_coeffs(space, ml_count, split_seed(opt.seed, 1000 + bi));
        coeffs.insert(coeffs.end(), draws.begin(), draws.end());
        auto records = simulate_coeff_records(plant, space.basis, coeffs, opt.workers);
        ConeBounds bounds = empirical_cone(records);
        row.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        row.lower_rel_err = std::abs(bounds.a_R - 0.25) / 0.25;
        row.upper_rel_err = std::abs(bounds.b_L - 1.25) / 1.25;
        out.rows.push_back(row);
    }

    json params = {{"grid_b_list", grid_b_list},
                   {"N", grid_half_density},
                   {"budget", budget},
                   {"ml_b_list", ml_b_list},
                   {"ml_count", ml_count},
                   {"T", T},
                   {"dt", opt.dt},
                   {"seed", opt.seed}};
    out.params_json = params.dump();
    return out;
}

// -------------------------------------------------------------------------

static json json_extended(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return json(v);
}

static json bounds_json(const ConeBounds& b, double gain) {
    return json{{"a_R", json_extended(b.a_R)},
                {"b_I", json_extended(b.b_I)},
                {"b_L", json_extended(b.b_L)},
                {"a_I", json_extended(b.a_I)},
                {"gamma", json_extended(gain)},
                {"delta", b.delta},
                {"L", b.L},
                {"n_records", b.n_records},
                {"n_excluded", b.n_excluded},
                {"mode", b.method},
                {"degenerate", b.degenerate}};
}

std::string cone_report_json(const ConeBounds& bounds, double gain) {
    return bounds_json(bounds, gain).dump(2);
}

void write_figure_outputs(const FigureResult& result, const std::string& out_dir) {
    fs::create_directories(out_dir);
    json report = json::array();
    std::vector<std::string> csv_paths, labels;
    std::vector<SectorLine> lines;
    lines.push_back({0.25, "true a=0.25", "#000000", false});
    lines.push_back({1.25, "true b=1.25", "#000000", false});
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    for (size_t i = 0; i < result.datasets.size(); ++i) {
        const auto& d = result.datasets[i];
        std::string csv = (fs::path(out_dir) / ("records-" + d.label + ".csv")).string();
        // labels may carry '=' etc.; keep file names plain
        std::replace(csv.begin(), csv.end(), '=', '-');
        write_records_csv(d.records, csv);
        csv_paths.push_back(csv);
        labels.push_back(d.label);
        const char* color = palette[i % 8];
        if (std::isfinite(d.bounds.a_R))
            lines.push_back({d.bounds.a_R, d.label + " a_R", color, true});
        if (std::isfinite(d.bounds.b_L))
            lines.push_back({d.bounds.b_L, d.label + " b_L", color, true});
        json entry = bounds_json(d.bounds, d.gain);
        entry["label"] = d.label;
        entry["plant"] = d.plant;
        entry["records_csv"] = fs::path(csv).filename().string();
        report.push_back(entry);
    }

    json manifest;
    manifest["tool"] = "dissip";
    manifest["version"] = kVersion;
    manifest["figure"] = result.name;
    manifest["params"] = json::parse(result.params_json);
    manifest["outputs"] = {{"report", "report.json"}, {"figure", "figure.svg"}};
    {
        std::ofstream f(fs::path(out_dir) / "manifest.json");
        f << manifest.dump(2) << "\n";
    }
    {
        std::ofstream f(fs::path(out_dir) / "report.json");
        f << report.dump(2) << "\n";
    }
    render_records_svg(csv_paths, labels, lines, (fs::path(out_dir) / "figure.svg").string());
}

void write_bench_outputs(const BenchResult& result, const std::string& out_dir) {
    fs::create_directories(out_dir);
    {
        std::ofstream f(fs::path(out_dir) / "bench.csv");
        f << "mode,b,requested_samples,outcome,wall_seconds,lower_rel_err,upper_rel_err\n";
        char buf[200];
        for (const auto& r : result.rows) {
            std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%s,%.6f,%.6g,%.6g\n", r.mode.c_str(),
                          r.n_basis, r.requested_samples,
                          r.budget_exceeded ? "budget-exceeded" : "ok", r.wall_seconds,
                          r.lower_rel_err, r.upper_rel_err);
            f << buf;
        }
    }
    json manifest;
    manifest["tool"] = "dissip";
    manifest["version"] = kVersion;
    manifest["bench"] = json::parse(result.params_json);
    manifest["outputs"] = {{"table", "bench.csv"}};
    std::ofstream f(fs::path(out_dir) / "manifest.json");
    f << manifest.dump(2) << "\n";
}

// -------------------------------------------------------------------------
// SVG rendering

namespace {

struct Pt {
    double x, y;
    size_t series;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void render_records_svg(const std::vector<std::string>& record_csv_paths,
                        const std::vector<std::string>& labels,
                        const std::vector<SectorLine>& lines, const std::string& svg_path) {
    if (record_csv_paths.size() != labels.size())
        throw DimensionError("render_records_svg: one label per CSV required");
    std::vector<Pt> pts;
    double max_x = 0.0, max_y = 0.0;
    for (size_t s = 0; s < record_csv_paths.size(); ++s) {
        for (const auto& r : read_records_csv(record_csv_paths[s])) {
            Pt p{std::sqrt(r.norm_u_sq), std::sqrt(r.norm_y_sq), s};
            max_x = std::max(max_x, p.x);
            max_y = std::max(max_y, p.y);
            pts.push_back(p);
        }
    }
    if (max_x <= 0.0) max_x = 1.0;
    if (max_y <= 0.0) max_y = 1.0;
    max_x *= 1.05;
    max_y *= 1.05;

    const double W = 720, H = 540, ml = 70, mr = 230, mt = 40, mb = 60;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto X = [&](double x) { return ml + x / max_x * pw; };
    auto Y = [&](double y) { return H - mb - y / max_y * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::ofstream f(svg_path);
    if (!f) throw ValidationError("cannot open " + svg_path + " for writing");
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

    // axes and ticks
    f << "<g stroke=\"black\" stroke-width=\"1\">\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\"/>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\"/>\n";
    f << "</g>\n";
    f << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double vx = max_x * k / 5.0, vy = max_y * k / 5.0;
        f << "<line x1=\"" << fmt(X(vx)) << "\" y1=\"" << H - mb << "\" x2=\"" << fmt(X(vx))
          << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << fmt(X(vx)) << "\" y=\"" << H - mb + 18
          << "\" text-anchor=\"middle\">" << fmt(vx) << "</text>\n";
        f << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(Y(vy)) << "\" x2=\"" << ml << "\" y2=\""
          << fmt(Y(vy)) << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(Y(vy) + 4)
          << "\" text-anchor=\"end\">" << fmt(vy) << "</text>\n";
    }
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 15
      << "\" text-anchor=\"middle\">||u||_T</text>\n";
    f << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << mt + ph / 2
      << ")\">||y||_T</text>\n";
    f << "</g>\n";

    // data points
    for (const auto& p : pts) {
        f << "<circle cx=\"" << fmt(X(p.x)) << "\" cy=\"" << fmt(Y(p.y))
          << "\" r=\"2\" fill=\"" << palette[p.series % 8] << "\" fill-opacity=\"0.55\"/>\n";
    }

    // sector lines y = slope * x, clipped to the plot box
    for (const auto& ln : lines) {
        double x_end = max_x, y_end = ln.slope * max_x;
        if (ln.slope > 0 && y_end > max_y) {
            y_end = max_y;
            x_end = max_y / ln.slope;
        }
        if (ln.slope < 0) continue;  // sector plots show nonnegative slopes only
        f << "<line x1=\"" << fmt(X(0)) << "\" y1=\"" << fmt(Y(0)) << "\" x2=\""
          << fmt(X(x_end)) << "\" y2=\"" << fmt(Y(y_end)) << "\" stroke=\"" << ln.color
          << "\" stroke-width=\"1.5\"" << (ln.dashed ? " stroke-dasharray=\"6 4\"" : "")
          << "/>\n";
    }

    // legend: series labels then line labels
    double ly = mt + 10;
    f << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (size_t s = 0; s < labels.size(); ++s) {
        f << "<circle cx=\"" << W - mr + 16 << "\" cy=\"" << fmt(ly - 4) << "\" r=\"3\" fill=\""
          << palette[s % 8] << "\"/>\n";
        f << "<text x=\"" << W - mr + 26 << "\" y=\"" << fmt(ly) << "\">" << labels[s]
          << "</text>\n";
        ly += 18;
    }
    for (const auto& ln : lines) {
        f << "<line x1=\"" << W - mr + 8 << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << W - mr + 22
          << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << ln.color << "\" stroke-width=\"1.5\""
          << (ln.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        f << "<text x=\"" << W - mr + 26 << "\" y=\"" << fmt(ly) << "\">" << ln.label << " ("
          << fmt(ln.slope) << ")</text>\n";
        ly += 18;
    }
    f << "</g>\n</svg>\n";
}

}  // namespace dissip
