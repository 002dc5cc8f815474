#pragma once

// Monte Carlo comparison of PAKF, EKF and the particle filter on simulated
// trajectories: per-run RMSE, aggregate statistics, per-time ARMSE traces and
// RMSE distributions, written out as CSV.

#include "pakf/filters.hpp"
#include "pakf/pwass_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pakf {

enum class FilterKind { Pakf, Ekf, Pf };

std::string filter_name(FilterKind kind);
FilterKind parse_filter(const std::string& name);
/// Comma-separated list such as "pakf,ekf"; order and duplicates are
/// normalized to pakf, ekf, pf.
std::vector<FilterKind> parse_filter_list(const std::string& list);

struct ExperimentConfig {
    std::string model = "sdofs";  // builtin name or model file path
    int runs = 500;
    int steps = 400;
    std::uint64_t seed = 1;
    int particles = 5000;
    double input_std = 5.0;
    Vector<double> prior_mean;  // empty: zeros
    Matrix<double> prior_cov;   // empty: identity
    std::vector<FilterKind> filters{FilterKind::Pakf, FilterKind::Ekf, FilterKind::Pf};
    int threads = 0;  // 0: hardware concurrency

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

GaussianBelief<double> prior_belief(const ExperimentConfig& cfg, Eigen::Index nx);

/// Runs one filter over a trajectory. Entry t of the result is the belief
/// after y_{t+1} (0-based), starting from a measurement-only update of the
/// prior with the first measurement.
std::vector<GaussianBelief<double>> run_filter(FilterKind kind, const PwassModel<double>& model,
                                               const GaussianBelief<double>& prior,
                                               const Trajectory<double>& traj, int particles,
                                               std::uint64_t pf_seed);

/// sqrt(Σ_t |x_t − m_t|² / (n_x T)).
double rmse(const Trajectory<double>& truth, const std::vector<GaussianBelief<double>>& estimates);

/// Squared state error |x_t − m_t|² per time step.
std::vector<double> squared_errors(const Trajectory<double>& truth,
                                   const std::vector<GaussianBelief<double>>& estimates);

struct FilterRun {
    FilterKind filter{};
    double rmse = 0;
    double wall_seconds = 0;
    std::vector<double> squared_errors;
};

struct RunResult {
    int run = 0;
    bool failed = false;
    std::string error;
    std::vector<FilterRun> filters;
};

/// One row of runs.csv.
struct RunRow {
    int run = 0;
    std::string filter;
    double rmse = 0;
    double wall_seconds = 0;
};

struct FilterStats {
    std::string filter;
    double armse = 0;
    double std = 0;  // sample standard deviation; 0 for a single run
    double min_rmse = 0;
    double max_rmse = 0;
    double mean_wall_seconds = 0;
    int count = 0;
};

struct FilterSummary {
    FilterStats stats;
    std::vector<double> armse_trace;   // per time step, average over runs of sqrt(err²/n_x)
    std::vector<double> sorted_rmse;   // ascending; CDF level of entry k is (k+1)/count
};

struct Summary {
    std::vector<FilterSummary> filters;
    std::vector<RunResult> runs;  // ordered by run index, failed runs included
    int failed_runs = 0;

    const FilterSummary& get(FilterKind kind) const;
};

/// Trajectory of run `run`: x_1 from the prior, inputs u_t ~ N(0, σ_u² I), then
/// simulate() with a seed derived from (cfg.seed, run).
Trajectory<double> generate_trajectory(const PwassModel<double>& model,
                                       const ExperimentConfig& cfg, int run);

/// Simulates run `run` of the experiment and applies every selected filter
/// to the same data. Filter failures mark the run as failed.
RunResult run_single(const PwassModel<double>& model, const ExperimentConfig& cfg, int run);

Summary run_experiment(const PwassModel<double>& model, const ExperimentConfig& cfg);
Summary run_experiment(const ExperimentConfig& cfg);

std::vector<RunRow> run_rows(const Summary& summary);
/// Table statistics per filter from runs.csv rows, in first-appearance order.
std::vector<FilterStats> stats_from_rows(const std::vector<RunRow>& rows);

void write_runs_csv(const Summary& summary, const std::filesystem::path& path);
void write_trace_csv(const Summary& summary, const std::filesystem::path& path);
void write_cdf_csv(const Summary& summary, const std::filesystem::path& path);
void write_summary_csv(const Summary& summary, const std::filesystem::path& path);
/// Writes runs.csv, armse_trace.csv, rmse_cdf.csv and summary.csv into dir.
void write_bench_outputs(const Summary& summary, const std::filesystem::path& dir);

std::vector<RunRow> read_runs_csv(const std::filesystem::path& path);
std::vector<FilterStats> read_summary_csv(const std::filesystem::path& path);

std::string format_summary_table(const Summary& summary);

}  // namespace pakf
