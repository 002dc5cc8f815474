#include "pakf/bench.hpp"

#include "pakf/csv.hpp"
#include "pakf/model_io.hpp"
#include "pakf/particle_filter.hpp"
#include "pakf/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pakf {

std::string filter_name(FilterKind kind) {
    switch (kind) {
    case FilterKind::Pakf: return "pakf";
    case FilterKind::Ekf: return "ekf";
    case FilterKind::Pf: return "pf";
    }
    return "unknown";
}

FilterKind parse_filter(const std::string& name) {
    if (name == "pakf") return FilterKind::Pakf;
    if (name == "ekf") return FilterKind::Ekf;
    if (name == "pf") return FilterKind::Pf;
    throw std::invalid_argument("unknown filter '" + name + "' (expected pakf, ekf or pf)");
}

std::vector<FilterKind> parse_filter_list(const std::string& list) {
    bool wanted[3] = {false, false, false};
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        wanted[static_cast<int>(parse_filter(item))] = true;
    }
    std::vector<FilterKind> out;
    for (const auto kind : {FilterKind::Pakf, FilterKind::Ekf, FilterKind::Pf}) {
        if (wanted[static_cast<int>(kind)]) {
            out.push_back(kind);
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("filter list is empty");
    }
    return out;
}

void ExperimentConfig::validate() const {
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (steps < 2) throw std::invalid_argument("steps must be >= 2");
    if (particles < 1) throw std::invalid_argument("particles must be >= 1");
    if (!(input_std >= 0) || !std::isfinite(input_std)) {
        throw std::invalid_argument("input std must be finite and >= 0");
    }
    if (filters.empty()) throw std::invalid_argument("no filters selected");
    if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

GaussianBelief<double> prior_belief(const ExperimentConfig& cfg, Eigen::Index nx) {
    GaussianBelief<double> prior{
        cfg.prior_mean.size() == 0 ? Vector<double>::Zero(nx) : cfg.prior_mean,
        cfg.prior_cov.size() == 0 ? Matrix<double>::Identity(nx, nx) : cfg.prior_cov};
    if (prior.mean.size() != nx || prior.cov.rows() != nx || prior.cov.cols() != nx) {
        throw std::invalid_argument("prior dimensions do not match the model state");
    }
    return prior;
}

std::vector<GaussianBelief<double>> run_filter(FilterKind kind, const PwassModel<double>& model,
                                               const GaussianBelief<double>& prior,
                                               const Trajectory<double>& traj, int particles,
                                               std::uint64_t pf_seed) {
    const std::size_t T = traj.measurements.size();
    if (T == 0 || traj.inputs.size() + 1 != T) {
        throw Error(ErrorCode::LengthMismatch, "trajectory needs T measurements and T-1 inputs");
    }
    std::vector<GaussianBelief<double>> out;
    out.reserve(T);
    if (kind == FilterKind::Pf) {
        auto ens = make_ensemble(prior, particles, pf_seed);
        pf_measurement_update(model, ens, traj.measurements[0]);
        out.push_back(estimate(ens));
        for (std::size_t t = 1; t < T; ++t) {
            ens = pf_step(model, std::move(ens), traj.inputs[t - 1], traj.measurements[t]);
            out.push_back(estimate(ens));
        }
        return out;
    }
    out.push_back(measurement_update(prior, model.C(), model.R(), traj.measurements[0]));
    for (std::size_t t = 1; t < T; ++t) {
        const auto& u = traj.inputs[t - 1];
        const auto& y = traj.measurements[t];
        if (kind == FilterKind::Pakf) {
            out.push_back(pakf_step(model, out.back(), u, y).belief);
        } else {
            out.push_back(ekf_step(model, out.back(), u, y));
        }
    }
    return out;
}

std::vector<double> squared_errors(const Trajectory<double>& truth,
                                   const std::vector<GaussianBelief<double>>& estimates) {
    if (truth.states.size() != estimates.size()) {
        throw Error(ErrorCode::LengthMismatch, "rmse: " + std::to_string(truth.states.size()) +
                                                   " states vs " +
                                                   std::to_string(estimates.size()) + " estimates");
    }
    std::vector<double> out(estimates.size());
    for (std::size_t t = 0; t < estimates.size(); ++t) {
        if (truth.states[t].size() != estimates[t].mean.size()) {
            throw Error(ErrorCode::DimensionMismatch, "rmse: state dimension");
        }
        out[t] = (truth.states[t] - estimates[t].mean).squaredNorm();
    }
    return out;
}

double rmse(const Trajectory<double>& truth, const std::vector<GaussianBelief<double>>& estimates) {
    const auto errs = squared_errors(truth, estimates);
    if (errs.empty()) {
        throw Error(ErrorCode::LengthMismatch, "rmse of an empty trajectory");
    }
    double sum = 0;
    for (const double e : errs) {
        sum += e;
    }
    const auto nx = static_cast<double>(truth.states.front().size());
    return std::sqrt(sum / (nx * static_cast<double>(errs.size())));
}

Trajectory<double> generate_trajectory(const PwassModel<double>& model,
                                       const ExperimentConfig& cfg, int run) {
    const std::uint64_t run_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(run));
    Rng rng(run_seed);
    const auto prior = prior_belief(cfg, model.nx());
    const Vector<double> x1 =
        prior.mean + noise_factor(prior.cov) * standard_normal_vector<double>(model.nx(), rng);
    std::vector<Vector<double>> inputs;
    inputs.reserve(static_cast<std::size_t>(cfg.steps - 1));
    for (int t = 0; t + 1 < cfg.steps; ++t) {
        inputs.push_back(cfg.input_std * standard_normal_vector<double>(model.nu(), rng));
    }
    return simulate(model, x1, inputs, derive_seed(run_seed, 1));
}

RunResult run_single(const PwassModel<double>& model, const ExperimentConfig& cfg, int run) {
    RunResult result;
    result.run = run;
    try {
        const std::uint64_t run_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(run));
        const auto prior = prior_belief(cfg, model.nx());
        const auto traj = generate_trajectory(model, cfg, run);

        for (const auto kind : cfg.filters) {
            const auto start = std::chrono::steady_clock::now();
            const auto estimates =
                run_filter(kind, model, prior, traj, cfg.particles, derive_seed(run_seed, 2));
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            FilterRun fr;
            fr.filter = kind;
            fr.squared_errors = squared_errors(traj, estimates);
            fr.rmse = rmse(traj, estimates);
            fr.wall_seconds = elapsed.count();
            result.filters.push_back(std::move(fr));
        }
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = e.what();
        result.filters.clear();
    }
    return result;
}

namespace {

FilterStats stats_of(const std::string& name, const std::vector<double>& rmses,
                     const std::vector<double>& walls) {
    FilterStats s;
    s.filter = name;
    s.count = static_cast<int>(rmses.size());
    if (rmses.empty()) {
        return s;
    }
    const double n = static_cast<double>(rmses.size());
    double sum = 0;
    double wall = 0;
    s.min_rmse = rmses.front();
    s.max_rmse = rmses.front();
    for (std::size_t k = 0; k < rmses.size(); ++k) {
        sum += rmses[k];
        wall += walls[k];
        s.min_rmse = std::min(s.min_rmse, rmses[k]);
        s.max_rmse = std::max(s.max_rmse, rmses[k]);
    }
    s.armse = sum / n;
    s.mean_wall_seconds = wall / n;
    if (rmses.size() > 1) {
        double ss = 0;
        for (const double r : rmses) {
            ss += (r - s.armse) * (r - s.armse);
        }
        s.std = std::sqrt(ss / (n - 1));
    }
    return s;
}

}  // namespace

std::vector<FilterStats> stats_from_rows(const std::vector<RunRow>& rows) {
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> grouped;
    for (const auto& r : rows) {
        auto [it, inserted] = grouped.try_emplace(r.filter);
        if (inserted) {
            order.push_back(r.filter);
        }
        it->second.first.push_back(r.rmse);
        it->second.second.push_back(r.wall_seconds);
    }
    std::vector<FilterStats> out;
    for (const auto& name : order) {
        const auto& [rmses, walls] = grouped.at(name);
        out.push_back(stats_of(name, rmses, walls));
    }
    return out;
}

std::vector<RunRow> run_rows(const Summary& summary) {
    std::vector<RunRow> rows;
    for (const auto& run : summary.runs) {
        if (run.failed) {
            continue;
        }
        for (const auto& fr : run.filters) {
            rows.push_back({run.run, filter_name(fr.filter), fr.rmse, fr.wall_seconds});
        }
    }
    return rows;
}

const FilterSummary& Summary::get(FilterKind kind) const {
    const std::string name = filter_name(kind);
    for (const auto& f : filters) {
        if (f.stats.filter == name) {
            return f;
        }
    }
    throw std::out_of_range("filter " + name + " is not part of this summary");
}

Summary run_experiment(const PwassModel<double>& model, const ExperimentConfig& cfg) {
    cfg.validate();
    prior_belief(cfg, model.nx());

    Summary summary;
    summary.runs.resize(static_cast<std::size_t>(cfg.runs));
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int j = next.fetch_add(1); j < cfg.runs; j = next.fetch_add(1)) {
            summary.runs[static_cast<std::size_t>(j)] = run_single(model, cfg, j);
        }
    };
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const int n_threads = std::min(cfg.threads > 0 ? cfg.threads : hw, cfg.runs);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int k = 0; k < n_threads; ++k) {
            pool.emplace_back(worker);
        }
    }

    for (const auto& run : summary.runs) {
        summary.failed_runs += run.failed ? 1 : 0;
    }
    const auto stats = stats_from_rows(run_rows(summary));
    const auto nx = static_cast<double>(model.nx());
    for (std::size_t f = 0; f < cfg.filters.size(); ++f) {
        FilterSummary fs;
        fs.stats = f < stats.size() ? stats[f] : FilterStats{filter_name(cfg.filters[f])};
        fs.armse_trace.assign(static_cast<std::size_t>(cfg.steps), 0.0);
        for (const auto& run : summary.runs) {
            if (run.failed) {
                continue;
            }
            const auto& fr = run.filters[f];
            fs.sorted_rmse.push_back(fr.rmse);
            for (std::size_t t = 0; t < fr.squared_errors.size(); ++t) {
                fs.armse_trace[t] += std::sqrt(fr.squared_errors[t] / nx);
            }
        }
        const auto completed = static_cast<double>(fs.sorted_rmse.size());
        if (completed > 0) {
            for (double& v : fs.armse_trace) {
                v /= completed;
            }
        }
        std::sort(fs.sorted_rmse.begin(), fs.sorted_rmse.end());
        summary.filters.push_back(std::move(fs));
    }
    return summary;
}

Summary run_experiment(const ExperimentConfig& cfg) {
    return run_experiment(resolve_model(cfg.model), cfg);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

}  // namespace

void write_runs_csv(const Summary& summary, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "run,filter,rmse,wall_seconds\n";
    for (const auto& r : run_rows(summary)) {
        out << r.run << ',' << r.filter << ',' << csv::number(r.rmse) << ','
            << csv::number(r.wall_seconds) << '\n';
    }
}

void write_trace_csv(const Summary& summary, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << 't';
    for (const auto& f : summary.filters) {
        out << ',' << f.stats.filter;
    }
    out << '\n';
    const std::size_t T = summary.filters.empty() ? 0 : summary.filters.front().armse_trace.size();
    for (std::size_t t = 0; t < T; ++t) {
        out << t + 1;
        for (const auto& f : summary.filters) {
            out << ',' << csv::number(f.armse_trace[t]);
        }
        out << '\n';
    }
}

void write_cdf_csv(const Summary& summary, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "filter,rmse,cdf\n";
    for (const auto& f : summary.filters) {
        const auto n = static_cast<double>(f.sorted_rmse.size());
        for (std::size_t k = 0; k < f.sorted_rmse.size(); ++k) {
            out << f.stats.filter << ',' << csv::number(f.sorted_rmse[k]) << ','
                << csv::number(static_cast<double>(k + 1) / n) << '\n';
        }
    }
}

void write_summary_csv(const Summary& summary, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "filter,armse,std,min_rmse,max_rmse\n";
    for (const auto& f : summary.filters) {
        const auto& s = f.stats;
        out << s.filter << ',' << csv::number(s.armse) << ',' << csv::number(s.std) << ','
            << csv::number(s.min_rmse) << ',' << csv::number(s.max_rmse) << '\n';
    }
}

void write_bench_outputs(const Summary& summary, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_runs_csv(summary, dir / "runs.csv");
    write_trace_csv(summary, dir / "armse_trace.csv");
    write_cdf_csv(summary, dir / "rmse_cdf.csv");
    write_summary_csv(summary, dir / "summary.csv");
}

std::vector<RunRow> read_runs_csv(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    const int run = table.column("run");
    const int filter = table.column("filter");
    const int err = table.column("rmse");
    const int wall = table.column("wall_seconds");
    if (run < 0 || filter < 0 || err < 0 || wall < 0) {
        throw std::runtime_error(path.string() + ": unexpected header");
    }
    std::vector<RunRow> rows;
    for (const auto& r : table.rows) {
        rows.push_back({std::stoi(r[static_cast<std::size_t>(run)]),
                        r[static_cast<std::size_t>(filter)],
                        csv::parse_double(r[static_cast<std::size_t>(err)]),
                        csv::parse_double(r[static_cast<std::size_t>(wall)])});
    }
    return rows;
}

std::vector<FilterStats> read_summary_csv(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    if (table.header != std::vector<std::string>{"filter", "armse", "std", "min_rmse", "max_rmse"}) {
        throw std::runtime_error(path.string() + ": unexpected header");
    }
    std::vector<FilterStats> out;
    for (const auto& r : table.rows) {
        FilterStats s;
        s.filter = r[0];
        s.armse = csv::parse_double(r[1]);
        s.std = csv::parse_double(r[2]);
        s.min_rmse = csv::parse_double(r[3]);
        s.max_rmse = csv::parse_double(r[4]);
        out.push_back(s);
    }
    return out;
}

std::string format_summary_table(const Summary& summary) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %10s %12s\n", "Filter", "ARMSE", "STD",
                  "min RMSE", "max RMSE", "time/run [s]");
    out += line;
    for (const auto& f : summary.filters) {
        const auto& s = f.stats;
        std::snprintf(line, sizeof line, "%-8s %10.5f %10.5f %10.5f %10.5f %12.5f\n",
                      s.filter.c_str(), s.armse, s.std, s.min_rmse, s.max_rmse,
                      s.mean_wall_seconds);
        out += line;
    }
    std::snprintf(line, sizeof line, "runs: %zu completed, %d failed\n",
                  summary.runs.size() - static_cast<std::size_t>(summary.failed_runs),
                  summary.failed_runs);
    out += line;
    return out;
}

}  // namespace pakf
