#pragma once

#include "pakf/pwass_model.hpp"

#include <filesystem>
#include <string>

namespace pakf {

/// JSON model document. Matrices are arrays of rows; breakpoints use the
/// strings "-inf" and "inf" for the outer limits. Doubles are written with
/// shortest round-trip precision so load(save(m)) is bit-identical.
std::string model_to_json(const PwassModel<double>& model);
PwassModel<double> model_from_json(const std::string& text);

void save_model(const PwassModel<double>& model, const std::filesystem::path& path);
PwassModel<double> load_model(const std::filesystem::path& path);

/// "sdofs" resolves to the builtin benchmark model, anything else is a path.
PwassModel<double> resolve_model(const std::string& name_or_path);

}  // namespace pakf
