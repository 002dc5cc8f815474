#include "pakf/trajectory_io.hpp"

#include "pakf/csv.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace pakf {

namespace {

std::vector<int> columns_with_prefix(const csv::Table& table, char prefix) {
    std::vector<int> cols;
    for (int k = 1;; ++k) {
        const int c = table.column(std::string(1, prefix) + std::to_string(k));
        if (c < 0) {
            break;
        }
        cols.push_back(c);
    }
    return cols;
}

Vector<double> read_fields(const std::vector<std::string>& row, const std::vector<int>& cols) {
    Vector<double> v(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        v(static_cast<Eigen::Index>(k)) = csv::parse_double(row[static_cast<std::size_t>(cols[k])]);
    }
    return v;
}

}  // namespace

void write_trajectory_csv(const Trajectory<double>& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    const std::size_t T = traj.measurements.size();
    const Eigen::Index nx = traj.states.empty() ? 0 : traj.states.front().size();
    const Eigen::Index nu = traj.inputs.empty() ? 0 : traj.inputs.front().size();
    const Eigen::Index ny = T == 0 ? 0 : traj.measurements.front().size();

    out << 't';
    for (Eigen::Index i = 0; i < nx; ++i) out << ",x" << i + 1;
    for (Eigen::Index i = 0; i < nu; ++i) out << ",u" << i + 1;
    for (Eigen::Index i = 0; i < ny; ++i) out << ",y" << i + 1;
    out << '\n';
    for (std::size_t t = 0; t < T; ++t) {
        out << t + 1;
        for (Eigen::Index i = 0; i < nx; ++i) out << ',' << csv::number(traj.states[t](i));
        for (Eigen::Index i = 0; i < nu; ++i) {
            out << ',';
            if (t < traj.inputs.size()) {
                out << csv::number(traj.inputs[t](i));
            }
        }
        for (Eigen::Index i = 0; i < ny; ++i) out << ',' << csv::number(traj.measurements[t](i));
        out << '\n';
    }
}

Trajectory<double> read_trajectory_csv(const std::filesystem::path& path,
                                       const PwassModel<double>& model) {
    const auto table = csv::read(path);
    const auto x_cols = columns_with_prefix(table, 'x');
    const auto u_cols = columns_with_prefix(table, 'u');
    const auto y_cols = columns_with_prefix(table, 'y');
    if (table.column("t") != 0) {
        throw Error(ErrorCode::DimensionMismatch, path.string() + ": first column must be t");
    }
    if ((!x_cols.empty() && static_cast<Eigen::Index>(x_cols.size()) != model.nx()) ||
        static_cast<Eigen::Index>(u_cols.size()) != model.nu() ||
        static_cast<Eigen::Index>(y_cols.size()) != model.ny()) {
        throw Error(ErrorCode::DimensionMismatch,
                    path.string() + ": column counts do not match the model (n_x=" +
                        std::to_string(model.nx()) + ", n_u=" + std::to_string(model.nu()) +
                        ", n_y=" + std::to_string(model.ny()) + ")");
    }
    if (table.rows.size() < 2) {
        throw Error(ErrorCode::LengthMismatch, path.string() + ": need at least 2 time steps");
    }

    Trajectory<double> traj;
    const std::size_t T = table.rows.size();
    for (std::size_t t = 0; t < T; ++t) {
        const auto& row = table.rows[t];
        if (!x_cols.empty()) {
            traj.states.push_back(read_fields(row, x_cols));
        }
        traj.measurements.push_back(read_fields(row, y_cols));
        if (t + 1 < T) {
            traj.inputs.push_back(read_fields(row, u_cols));
        }
    }
    return traj;
}

void write_estimates_csv(const std::vector<GaussianBelief<double>>& estimates,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    const Eigen::Index nx = estimates.empty() ? 0 : estimates.front().mean.size();
    out << 't';
    for (Eigen::Index i = 0; i < nx; ++i) out << ",m" << i + 1;
    for (Eigen::Index i = 0; i < nx; ++i) {
        for (Eigen::Index j = 0; j < nx; ++j) out << ",P" << i + 1 << '_' << j + 1;
    }
    out << '\n';
    for (std::size_t t = 0; t < estimates.size(); ++t) {
        out << t + 1;
        for (Eigen::Index i = 0; i < nx; ++i) out << ',' << csv::number(estimates[t].mean(i));
        for (Eigen::Index i = 0; i < nx; ++i) {
            for (Eigen::Index j = 0; j < nx; ++j) out << ',' << csv::number(estimates[t].cov(i, j));
        }
        out << '\n';
    }
}

}  // namespace pakf
