#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtlen/params.hpp"

namespace mtlen {

/// Flat `key = value` parameter file. `#` starts a comment; blank lines are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in, const std::string& source = "<stream>");
KeyValues read_key_values(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, const std::string& key);

/// Input keys (observed + prescribed) and the implied keys written for frozen sets.
const std::vector<std::string>& input_keys();
const std::vector<std::string>& implied_keys();

/// A parameter file: inputs, plus optionally a frozen set of implied parameters.
struct ParameterFile {
  ObservedQuantities observed;
  PrescribedParams prescribed;
  std::optional<ModelParams> frozen;  // present iff every implied key was given
};

/// Applies `kv` on top of the defaults. Unknown keys and partial implied sets are errors.
ParameterFile parameter_file_from(const KeyValues& kv);

/// Applies a single `key=value` override (CLI `--set`).
void apply_override(ParameterFile& file, const std::string& key, const std::string& value);

/// Uses the frozen implied set if present, otherwise calibrates.
ModelParams resolve(const ParameterFile& file);

/// Writes every key (inputs and implied) with units in trailing comments.
void write_model_params(std::ostream& out, const ModelParams& p);
void write_model_params(const std::filesystem::path& path, const ModelParams& p);

KeyValues to_key_values(const ModelParams& p);

}  // namespace mtlen
