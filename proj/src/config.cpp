#include "mtlen/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "mtlen/errors.hpp"

namespace mtlen {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

struct KeyInfo {
  const char* key;
  const char* unit;
  const char* note;
};

// Order is the order keys are written.
constexpr KeyInfo kInputKeys[] = {
    {"v_g_max_plus", "um/min", "max plus-end growth speed"},
    {"v_g_max_minus", "um/min", "max minus-end growth speed"},
    {"v_g_bar_plus", "um/min", "average plus-end growth speed"},
    {"v_g_bar_minus", "um/min", "average minus-end growth speed"},
    {"tau_g_bar_plus", "min", "average plus-end growth duration"},
    {"tau_g_bar_minus", "min", "average minus-end growth duration"},
    {"v_s_bar_plus", "um/min", "average plus-end shrinking speed"},
    {"v_s_bar_minus", "um/min", "average minus-end shrinking speed"},
    {"T_tot", "um", "total tubulin"},
    {"N", "count", "MTs sharing the pool"},
    {"L_bar", "um", "target average MT length"},
    {"L0", "um", "characteristic MT length"},
    {"gamma", "1/(um min)", "length dependence of the catastrophe rate"},
    {"lambda_min", "1/min", "catastrophe rate floor"},
    {"tau_tub", "min", "unavailable -> free tubulin timescale"},
    {"dt_seconds", "s", "stochastic time step"},
    {"t_end", "min", "simulated horizon"},
};

constexpr KeyInfo kImpliedKeys[] = {
    {"v_g_plus", "um/min", "plus-end polymerization speed"},
    {"v_g_minus", "um/min", "minus-end polymerization speed"},
    {"v_s_plus", "um/min", "plus-end depolymerization speed"},
    {"v_s_minus", "um/min", "minus-end depolymerization speed"},
    {"lambda_gs_plus", "1/min", "plus-end catastrophe rate at L0"},
    {"lambda_gs_minus", "1/min", "minus-end catastrophe rate at L0"},
    {"lambda_sg_plus", "1/min", "plus-end rescue rate"},
    {"lambda_sg_minus", "1/min", "minus-end rescue rate"},
    {"F_half", "um", "Michaelis-Menten constant"},
    {"alpha", "1", "MT length distribution shape"},
    {"L_crit", "um", "critical near-zero MT length"},
};

double* input_slot(ParameterFile& f, const std::string& key) {
  auto& o = f.observed;
  auto& p = f.prescribed;
  static const std::pair<const char*, double ObservedQuantities::*> obs_fields[] = {
      {"v_g_max_plus", &ObservedQuantities::v_g_max_plus},
      {"v_g_max_minus", &ObservedQuantities::v_g_max_minus},
      {"v_g_bar_plus", &ObservedQuantities::v_g_bar_plus},
      {"v_g_bar_minus", &ObservedQuantities::v_g_bar_minus},
      {"tau_g_bar_plus", &ObservedQuantities::tau_g_bar_plus},
      {"tau_g_bar_minus", &ObservedQuantities::tau_g_bar_minus},
      {"v_s_bar_plus", &ObservedQuantities::v_s_bar_plus},
      {"v_s_bar_minus", &ObservedQuantities::v_s_bar_minus},
  };
  static const std::pair<const char*, double PrescribedParams::*> pre_fields[] = {
      {"T_tot", &PrescribedParams::T_tot},       {"L_bar", &PrescribedParams::L_bar},
      {"L0", &PrescribedParams::L0},             {"gamma", &PrescribedParams::gamma},
      {"lambda_min", &PrescribedParams::lambda_min}, {"tau_tub", &PrescribedParams::tau_tub},
      {"dt_seconds", &PrescribedParams::dt_seconds}, {"t_end", &PrescribedParams::t_end},
  };
  for (const auto& [name, member] : obs_fields)
    if (key == name) return &(o.*member);
  for (const auto& [name, member] : pre_fields)
    if (key == name) return &(p.*member);
  return nullptr;
}

double* implied_slot(ModelParams& m, const std::string& key) {
  static const std::pair<const char*, double ModelParams::*> fields[] = {
      {"v_g_plus", &ModelParams::v_g_plus},
      {"v_g_minus", &ModelParams::v_g_minus},
      {"v_s_plus", &ModelParams::v_s_plus},
      {"v_s_minus", &ModelParams::v_s_minus},
      {"lambda_gs_plus", &ModelParams::lambda_gs_plus},
      {"lambda_gs_minus", &ModelParams::lambda_gs_minus},
      {"lambda_sg_plus", &ModelParams::lambda_sg_plus},
      {"lambda_sg_minus", &ModelParams::lambda_sg_minus},
      {"F_half", &ModelParams::F_half},
      {"alpha", &ModelParams::alpha},
      {"L_crit", &ModelParams::L_crit},
  };
  for (const auto& [name, member] : fields)
    if (key == name) return &(m.*member);
  return nullptr;
}

int parse_count(const std::string& text, const std::string& key) {
  int value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorKind::Config, "key '" + key + "': expected an integer, got '" + text + "'");
  return value;
}

bool is_implied_key(const std::string& key) {
  return std::any_of(std::begin(kImpliedKeys), std::end(kImpliedKeys),
                     [&](const KeyInfo& k) { return key == k.key; });
}

}  // namespace

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config,
                  source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorKind::Config, source + ":" + std::to_string(line_no) + ": empty key or value");
    }
    if (!kv.emplace(key, value).second) {
      throw Error(ErrorKind::Config,
                  source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path.string());
  return parse_key_values(in, path.string());
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, const std::string& key) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::Config,
                "key '" + key + "': expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

const std::vector<std::string>& input_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& info : kInputKeys) k.emplace_back(info.key);
    return k;
  }();
  return keys;
}

const std::vector<std::string>& implied_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& info : kImpliedKeys) k.emplace_back(info.key);
    return k;
  }();
  return keys;
}

void apply_override(ParameterFile& file, const std::string& key, const std::string& value) {
  if (key == "N") {
    file.prescribed.N = parse_count(value, key);
    if (file.frozen) file.frozen->prescribed.N = file.prescribed.N;
    return;
  }
  if (double* slot = input_slot(file, key)) {
    *slot = parse_double(value, key);
    if (file.frozen) {
      file.frozen->observed = file.observed;
      file.frozen->prescribed = file.prescribed;
    }
    return;
  }
  if (is_implied_key(key)) {
    if (!file.frozen) {
      throw Error(ErrorKind::Config,
                  "implied key '" + key + "' can only be overridden in a frozen parameter set");
    }
    *implied_slot(*file.frozen, key) = parse_double(value, key);
    return;
  }
  throw Error(ErrorKind::Config, "unknown parameter key '" + key + "'");
}

ParameterFile parameter_file_from(const KeyValues& kv) {
  ParameterFile file;
  ModelParams implied;
  std::size_t implied_count = 0;
  for (const auto& [key, value] : kv) {
    if (is_implied_key(key)) {
      *implied_slot(implied, key) = parse_double(value, key);
      ++implied_count;
    } else {
      apply_override(file, key, value);
    }
  }
  if (implied_count != 0 && implied_count != std::size(kImpliedKeys)) {
    throw Error(ErrorKind::Config,
                "parameter file gives some but not all implied parameters; give all or none");
  }
  if (implied_count != 0) {
    implied.observed = file.observed;
    implied.prescribed = file.prescribed;
    file.frozen = implied;
  }
  return file;
}

ModelParams resolve(const ParameterFile& file) {
  if (file.frozen) {
    file.frozen->validate();
    return *file.frozen;
  }
  return calibrate(file.observed, file.prescribed);
}

KeyValues to_key_values(const ModelParams& p) {
  KeyValues kv;
  ParameterFile f{p.observed, p.prescribed, std::nullopt};
  for (const auto& info : kInputKeys) {
    const std::string key = info.key;
    kv[key] = key == "N" ? std::to_string(p.prescribed.N) : format_double(*input_slot(f, key));
  }
  ModelParams copy = p;
  for (const auto& info : kImpliedKeys) kv[info.key] = format_double(*implied_slot(copy, info.key));
  return kv;
}

void write_model_params(std::ostream& out, const ModelParams& p) {
  const KeyValues kv = to_key_values(p);
  auto emit = [&](const KeyInfo& info) {
    out << info.key << " = " << kv.at(info.key) << "  # " << info.unit << ", " << info.note << '\n';
  };
  out << "# experimentally informed and prescribed inputs\n";
  for (const auto& info : kInputKeys) emit(info);
  out << "# implied parameters\n";
  for (const auto& info : kImpliedKeys) emit(info);
}

void write_model_params(const std::filesystem::path& path, const ModelParams& p) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_model_params(out, p);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace mtlen
