#include "pakf/model_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pakf {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix<double>& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vector<double>& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

double number_from_json(const json& j, const std::string& key) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
    }
    throw Error(ErrorCode::InvalidModel, "'" + key + "' holds a non-numeric entry");
}

const json& field(const json& doc, const std::string& key) {
    if (!doc.contains(key)) {
        throw Error(ErrorCode::InvalidModel, "missing field '" + key + "'");
    }
    return doc.at(key);
}

Vector<double> vector_from_json(const json& doc, const std::string& key) {
    const json& arr = field(doc, key);
    if (!arr.is_array()) {
        throw Error(ErrorCode::InvalidModel, "'" + key + "' must be an array");
    }
    Vector<double> v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = number_from_json(arr[i], key);
    }
    return v;
}

Matrix<double> matrix_from_json(const json& doc, const std::string& key, Eigen::Index rows,
                                Eigen::Index cols) {
    const json& arr = field(doc, key);
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows) {
        throw Error(ErrorCode::InvalidModel,
                    "'" + key + "' must have " + std::to_string(rows) + " rows");
    }
    Matrix<double> m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = arr[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(ErrorCode::InvalidModel,
                        "'" + key + "' rows must have " + std::to_string(cols) + " entries");
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = number_from_json(row[static_cast<std::size_t>(j)], key);
        }
    }
    return m;
}

std::vector<double> list_from_json(const json& doc, const std::string& key) {
    const Vector<double> v = vector_from_json(doc, key);
    return {v.data(), v.data() + v.size()};
}

}  // namespace

std::string model_to_json(const PwassModel<double>& model) {
    json breakpoints = json::array();
    for (const double l : model.f().breakpoints()) {
        if (std::isinf(l)) {
            breakpoints.push_back(l < 0 ? "-inf" : "inf");
        } else {
            breakpoints.push_back(l);
        }
    }
    json doc;
    doc["n_x"] = model.nx();
    doc["n_y"] = model.ny();
    doc["n_u"] = model.nu();
    doc["Phi"] = vector_to_json(model.Phi());
    doc["phi"] = vector_to_json(model.phi());
    doc["F"] = matrix_to_json(model.F());
    doc["B"] = matrix_to_json(model.B());
    doc["C"] = matrix_to_json(model.C());
    doc["Q"] = matrix_to_json(model.Q());
    doc["R"] = matrix_to_json(model.R());
    doc["breakpoints"] = std::move(breakpoints);
    doc["slopes"] = model.f().slopes();
    doc["intercepts"] = model.f().intercepts();
    return doc.dump(2) + "\n";
}

PwassModel<double> model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidModel, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error(ErrorCode::InvalidModel, "model document must be a JSON object");
    }
    const auto dim = [&](const std::string& key) {
        const json& v = field(doc, key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw Error(ErrorCode::InvalidModel, "'" + key + "' must be a nonnegative integer");
        }
        return static_cast<Eigen::Index>(v.get<long long>());
    };
    const Eigen::Index nx = dim("n_x");
    const Eigen::Index ny = dim("n_y");
    const Eigen::Index nu = dim("n_u");
    if (nx < 2) {
        throw Error(ErrorCode::InvalidModel, "n_x must be at least 2");
    }

    PwaFunction<double> f(list_from_json(doc, "breakpoints"), list_from_json(doc, "slopes"),
                          list_from_json(doc, "intercepts"));
    Vector<double> Phi = vector_from_json(doc, "Phi");
    Vector<double> phi = vector_from_json(doc, "phi");
    if (Phi.size() != nx || phi.size() != nx - 1) {
        throw Error(ErrorCode::InvalidModel, "Phi/phi lengths disagree with n_x");
    }
    return PwassModel<double>(std::move(Phi), std::move(phi),
                              matrix_from_json(doc, "F", nx - 2, nx),
                              matrix_from_json(doc, "B", nx, nu),
                              matrix_from_json(doc, "C", ny, nx),
                              matrix_from_json(doc, "Q", nx, nx),
                              matrix_from_json(doc, "R", ny, ny), std::move(f));
}

void save_model(const PwassModel<double>& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << model_to_json(model);
}

PwassModel<double> load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidModel, "cannot read model file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

PwassModel<double> resolve_model(const std::string& name_or_path) {
    if (name_or_path == "sdofs") {
        return sdofs_model<double>();
    }
    return load_model(name_or_path);
}

}  // namespace pakf
