#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dissip/cone.hpp"
#include "dissip/plant.hpp"
#include "dissip/sampling.hpp"
#include "dissip/signal.hpp"
#include "dissip/svm.hpp"

namespace dissip {

inline constexpr const char* kVersion = "0.1.0";

int hardware_workers();

/// Runs body(begin, end) over a partition of [0, n) on `workers` threads.
/// Exceptions from workers are rethrown on the caller.
void parallel_for(Eigen::Index n, int workers,
                  const std::function<void(Eigen::Index, Eigen::Index)>& body);

/// Simulates one plant over a set of coefficient vectors at full horizon,
/// in parallel by index partition; records keep input order.
std::vector<TrajectoryRecord> simulate_coeff_records(const PlantModel& plant,
                                                     const BasisSet& basis,
                                                     const std::vector<Eigen::VectorXd>& coeffs,
                                                     int workers);

std::vector<TrajectoryRecord> simulate_signal_records(const PlantModel& plant,
                                                      const std::vector<Signal>& inputs,
                                                      int workers);

/// Chunked lazy traversal of a coefficient grid; at no point are all K
/// vectors resident.
std::vector<TrajectoryRecord> simulate_grid_records(const PlantModel& plant,
                                                    const GridCoverSpec& spec, double budget,
                                                    int workers);

/// Prefix records of a staircase (zero-order-held) input such as a random
/// walk, simulated on a grid refined `refine`-fold. The input-squared terms
/// integrate the hold exactly; the output terms use the fine trapezoid.
/// Keeps sector residuals of near-boundary plants accurate to ~1e-6
/// relative, where the coarse trapezoid loses ~1e-3 at the hold jumps.
std::vector<TrajectoryRecord> staircase_prefix_records(const PlantModel& plant, const Signal& u,
                                                       const std::vector<double>& horizons,
                                                       int refine = 20);

/// Full-horizon staircase record of one input.
TrajectoryRecord staircase_record(const PlantModel& plant, const Signal& u, int refine = 20);

// -------------------------------------------------------------------------
// Experiment specification (JSON file contract for `gen` and `sim`)

enum class SamplingMode { Grid, Uniform, Wiener };

struct SamplingSpec {
    SamplingMode mode = SamplingMode::Grid;
    int grid_half_density = 3;   // grid: N
    int count = 1000;            // uniform / wiener path count
    double step_scale = 1.0;     // wiener
    bool sweep = false;          // wiener: single-path prefix sweep
    double t_min = 0.2;
    double dT = 0.2;
};

struct ExperimentSpec {
    std::string name = "experiment";
    std::string plant = "lti-circle";
    BasisKind basis_kind = BasisKind::Legendre;
    int n_basis = 4;
    std::vector<double> frequencies;  // fourier-explicit only
    SamplingSpec sampling;
    std::uint64_t seed = 1;
    double dt = 0.01;
    double T = 10.0;
    double u_max = 1.0;
    double eps_min = 0.0;

    static ExperimentSpec from_json_file(const std::string& path);
    static ExperimentSpec from_json_string(const std::string& text);
    std::string to_json_string() const;
};

PlantModel make_plant(const std::string& name);
BasisSet make_spec_basis(const ExperimentSpec& spec);

// -------------------------------------------------------------------------
// Figure experiments

struct RunOptions {
    double dt = 0.01;
    std::uint64_t seed = 1;
    int workers = 0;  // 0 -> hardware_workers()
    double u_max = 1.0;
};

/// One estimated dataset inside a figure run.
struct DatasetResult {
    std::string label;
    std::string plant;
    std::vector<TrajectoryRecord> records;
    ConeBounds bounds;
    double gain = 0.0;
};

struct FigureResult {
    std::string name;
    std::vector<DatasetResult> datasets;
    std::string params_json;  // manifest fragment describing the run
};

enum class Fig1Variant { FourierNonseq, LegendreT10, LegendreT1 };

Fig1Variant fig1_variant_from_string(const std::string& s);
std::string to_string(Fig1Variant v);

/// Grid-cover dataset (N = 3, K = 625) on both plants.
FigureResult run_fig1(Fig1Variant variant, const RunOptions& opt);

/// The 2b basis-aligned extreme coefficient vectors (+/- u_max * e_i).
std::vector<Eigen::VectorXd> axis_extreme_coeffs(const InputSpaceConfig& space);

/// Uniform coefficient sampling on the LTI plant for each basis count,
/// optionally augmented with the basis-aligned extremes that carry the
/// sector edges.
FigureResult run_fig2(const std::vector<int>& b_list, int count, double T, const RunOptions& opt,
                      bool include_axis_extremes = true);

/// Fixed-length random-walk inputs on the LTI plant for each horizon.
FigureResult run_fig3(const std::vector<double>& T_list, int count, const RunOptions& opt);

/// Single-path prefix sweep on both plants.
FigureResult run_fig4(double t_min, double t_max, double dT, const RunOptions& opt);

// -------------------------------------------------------------------------
// Sample-complexity bench

struct BenchRow {
    std::string mode;  // "grid" or "ml"
    int n_basis = 0;
    double requested_samples = 0.0;  // K or ml sample count
    bool budget_exceeded = false;
    double wall_seconds = 0.0;
    double lower_rel_err = 0.0;  // vs 0.25
    double upper_rel_err = 0.0;  // vs 1.25
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::string params_json;
};

BenchResult run_complexity_bench(const std::vector<int>& grid_b_list, int grid_half_density,
                                 double budget, const std::vector<int>& ml_b_list, int ml_count,
                                 const RunOptions& opt);

// -------------------------------------------------------------------------
// Output artifacts

std::string cone_report_json(const ConeBounds& bounds, double gain);

/// Writes manifest.json, one records CSV per dataset, report.json and
/// figure.svg under out_dir. The SVG is rendered from the CSV files it
/// names, never from in-memory state.
void write_figure_outputs(const FigureResult& result, const std::string& out_dir);

void write_bench_outputs(const BenchResult& result, const std::string& out_dir);

/// Renders a scatter-plus-sector-lines SVG from record CSVs. Deterministic:
/// identical inputs give identical bytes.
struct SectorLine {
    double slope;
    std::string label;
    std::string color;
    bool dashed = false;
};

void render_records_svg(const std::vector<std::string>& record_csv_paths,
                        const std::vector<std::string>& labels,
                        const std::vector<SectorLine>& lines, const std::string& svg_path);

}  // namespace dissip
