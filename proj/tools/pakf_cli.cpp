// pakf: simulate piecewise affine models, run filters over recorded
// trajectories, and run the Monte Carlo filter comparison.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.

#include "pakf/bench.hpp"
#include "pakf/model_io.hpp"
#include "pakf/trajectory_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

namespace {

using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::string model = "sdofs";
    std::string out = ".";
    std::string filters = "pakf,ekf,pf";
    std::string filter = "pakf";
    std::string trajectory;
    int steps = 400;
    int runs = 500;
    int particles = 5000;
    int threads = 0;
    std::uint64_t seed = 1;
    double input_std = 5.0;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path);
    }
    try {
        json doc = json::parse(in);
        if (!doc.is_object()) {
            throw ConfigError("config file must hold a JSON object");
        }
        return doc;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
}

// Copies config values into options the user did not set on the command line.
void apply_config(const CLI::App& cmd, const json& doc, Options& o, pakf::ExperimentConfig& cfg) {
    const auto take = [&](const char* key, const char* flag, auto& target) {
        if (!doc.contains(key)) {
            return;
        }
        const auto* opt = cmd.get_option_no_throw(flag);
        if (opt != nullptr && opt->count() > 0) {
            return;
        }
        try {
            doc.at(key).get_to(target);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    };
    take("model", "--model", o.model);
    take("out", "--out", o.out);
    take("steps", "--steps", o.steps);
    take("runs", "--runs", o.runs);
    take("particles", "--particles", o.particles);
    take("threads", "--threads", o.threads);
    take("seed", "--seed", o.seed);
    take("input_std", "--input-std", o.input_std);
    take("filter", "--filter", o.filter);
    take("trajectory", "--trajectory", o.trajectory);
    if (doc.contains("filters")) {
        const auto* opt = cmd.get_option_no_throw("--filters");
        if (opt == nullptr || opt->count() == 0) {
            const json& f = doc.at("filters");
            if (f.is_string()) {
                o.filters = f.get<std::string>();
            } else if (f.is_array()) {
                o.filters.clear();
                for (const auto& item : f) {
                    o.filters += (o.filters.empty() ? "" : ",") + item.get<std::string>();
                }
            } else {
                throw ConfigError("config key 'filters' must be a string or array");
            }
        }
    }
    try {
        if (doc.contains("prior_mean")) {
            const auto v = doc.at("prior_mean").get<std::vector<double>>();
            cfg.prior_mean = Eigen::Map<const pakf::Vector<double>>(v.data(),
                                                                    static_cast<Eigen::Index>(v.size()));
        }
        if (doc.contains("prior_cov")) {
            const auto rows = doc.at("prior_cov").get<std::vector<std::vector<double>>>();
            cfg.prior_cov.resize(static_cast<Eigen::Index>(rows.size()),
                                 static_cast<Eigen::Index>(rows.size()));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != rows.size()) {
                    throw ConfigError("config key 'prior_cov' must be square");
                }
                for (std::size_t j = 0; j < rows.size(); ++j) {
                    cfg.prior_cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        rows[i][j];
                }
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config prior: ") + e.what());
    }
}

pakf::ExperimentConfig make_config(const CLI::App& cmd, Options& o) {
    pakf::ExperimentConfig cfg;
    if (!o.config.empty()) {
        apply_config(cmd, load_config(o.config), o, cfg);
    }
    cfg.model = o.model;
    cfg.steps = o.steps;
    cfg.runs = o.runs;
    cfg.seed = o.seed;
    cfg.particles = o.particles;
    cfg.threads = o.threads;
    cfg.input_std = o.input_std;
    try {
        cfg.filters = pakf::parse_filter_list(o.filters);
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

pakf::PwassModel<double> load_model_or_config_error(const std::string& name) {
    try {
        return pakf::resolve_model(name);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model '") + name + "': " + e.what());
    }
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
    }
    return dir;
}

int cmd_simulate(const CLI::App& cmd, Options& o) {
    auto cfg = make_config(cmd, o);
    const auto model = load_model_or_config_error(cfg.model);
    try {
        pakf::prior_belief(cfg, model.nx());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto dir = prepare_out_dir(o.out);
    const auto traj = pakf::generate_trajectory(model, cfg, 0);
    pakf::write_trajectory_csv(traj, dir / "trajectory.csv");
    std::cout << "wrote " << traj.length() << " steps to " << (dir / "trajectory.csv").string()
              << "\n";
    return 0;
}

int cmd_filter(const CLI::App& cmd, Options& o) {
    auto cfg = make_config(cmd, o);
    if (o.trajectory.empty()) {
        throw ConfigError("--trajectory is required");
    }
    pakf::FilterKind kind{};
    try {
        kind = pakf::parse_filter(o.filter);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto model = load_model_or_config_error(cfg.model);
    pakf::Trajectory<double> traj;
    pakf::GaussianBelief<double> prior;
    try {
        traj = pakf::read_trajectory_csv(o.trajectory, model);
        prior = pakf::prior_belief(cfg, model.nx());
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    const auto dir = prepare_out_dir(o.out);

    const auto estimates = pakf::run_filter(kind, model, prior, traj, cfg.particles,
                                            pakf::derive_seed(cfg.seed, 2));
    pakf::write_estimates_csv(estimates, dir / "estimates.csv");
    std::cout << "filter " << o.filter << ": " << estimates.size() << " estimates written to "
              << (dir / "estimates.csv").string() << "\n";
    if (!traj.states.empty()) {
        std::cout.precision(12);
        std::cout << "RMSE " << pakf::rmse(traj, estimates) << "\n";
    }
    return 0;
}

int cmd_bench(const CLI::App& cmd, Options& o) {
    auto cfg = make_config(cmd, o);
    const auto model = load_model_or_config_error(cfg.model);
    try {
        pakf::prior_belief(cfg, model.nx());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto dir = prepare_out_dir(o.out);
    const auto summary = pakf::run_experiment(model, cfg);
    pakf::write_bench_outputs(summary, dir);
    std::cout << pakf::format_summary_table(summary);
    for (const auto& run : summary.runs) {
        if (run.failed) {
            std::cerr << "run " << run.run << " failed: " << run.error << "\n";
        }
    }
    return summary.failed_runs == 0 ? 0 : kExitRuntime;
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config,
                    "JSON file with option values; explicit flags take precedence");
    cmd->add_option("--model", o.model, "Builtin model name (sdofs) or model JSON path")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Base random seed")->capture_default_str();
    cmd->add_option("--out", o.out, "Output directory (created if absent)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piecewise affine Kalman filtering: simulation, filtering and benchmarks"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "Simulate one trajectory to trajectory.csv");
    add_common(simulate, o);
    simulate->add_option("--steps", o.steps, "Number of time steps T (>= 2)")->capture_default_str();
    simulate->add_option("--input-std", o.input_std, "Std of the random input u_t")
        ->capture_default_str();

    auto* filter = app.add_subcommand("filter", "Run one filter over a trajectory.csv");
    add_common(filter, o);
    filter->add_option("--trajectory", o.trajectory, "Trajectory CSV produced by simulate");
    filter->add_option("--filter", o.filter, "Filter to run: pakf, ekf or pf")
        ->capture_default_str();
    filter->add_option("--particles", o.particles, "Particle count for pf")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "Monte Carlo comparison of the filters");
    add_common(bench, o);
    bench->add_option("--steps", o.steps, "Time steps per run (>= 2)")->capture_default_str();
    bench->add_option("--runs", o.runs, "Monte Carlo runs (>= 1)")->capture_default_str();
    bench->add_option("--particles", o.particles, "Particle count for pf")->capture_default_str();
    bench->add_option("--filters", o.filters, "Comma list of filters: pakf,ekf,pf")
        ->capture_default_str();
    bench->add_option("--input-std", o.input_std, "Std of the random input u_t")
        ->capture_default_str();
    bench->add_option("--threads", o.threads, "Worker threads (0: all cores)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(*simulate, o);
        if (filter->parsed()) return cmd_filter(*filter, o);
        return cmd_bench(*bench, o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
