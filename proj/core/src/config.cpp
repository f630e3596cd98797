#include "lsbd/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "lsbd/verification.hpp"

namespace lsbd {

namespace {

using json = nlohmann::json;

struct Field {
  const char* key;
  const char* type;
  const char* range;
  const char* doc;
  std::function<void(RunConfig&, const json&)> read;
  std::function<json(const RunConfig&)> write;
};

double as_number(const json& v, const char* key) {
  if (!v.is_number()) throw ConfigError(std::string(key) + ": expected a number");
  return v.get<double>();
}

long long as_integer(const json& v, const char* key) {
  if (!v.is_number_integer()) throw ConfigError(std::string(key) + ": expected an integer");
  return v.get<long long>();
}

bool as_bool(const json& v, const char* key) {
  if (!v.is_boolean()) throw ConfigError(std::string(key) + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const char* key) {
  if (!v.is_string()) throw ConfigError(std::string(key) + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> as_numbers(const json& v, const char* key) {
  if (!v.is_array()) throw ConfigError(std::string(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& x : v) out.push_back(as_number(x, key));
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"lattice.d", "integer", "1..3", "spatial dimension",
       [](RunConfig& c, const json& v) { c.lattice.d = static_cast<int>(as_integer(v, "lattice.d")); },
       [](const RunConfig& c) { return json(c.lattice.d); }},
      {"lattice.N", "integer", "2..16", "sites per side",
       [](RunConfig& c, const json& v) { c.lattice.N = static_cast<int>(as_integer(v, "lattice.N")); },
       [](const RunConfig& c) { return json(c.lattice.N); }},
      {"model.kind", "string", "harmonic_phi4 | custom_diagonal", "on-site model",
       [](RunConfig& c, const json& v) {
         try {
           c.model.kind = model_kind_from_string(as_string(v, "model.kind"));
         } catch (const OperatorError& e) {
           throw ConfigError(std::string("model.kind: ") + e.what());
         }
       },
       [](const RunConfig& c) { return json(to_string(c.model.kind)); }},
      {"model.n_s", "integer", "2..16", "kept levels per site",
       [](RunConfig& c, const json& v) { c.model.n_s = static_cast<int>(as_integer(v, "model.n_s")); },
       [](const RunConfig& c) { return json(c.model.n_s); }},
      {"model.oscillator_basis_size", "integer", "n_s+2..400",
       "oscillator levels used to diagonalize the anharmonic site",
       [](RunConfig& c, const json& v) {
         c.model.oscillator_basis_size =
             static_cast<int>(as_integer(v, "model.oscillator_basis_size"));
       },
       [](const RunConfig& c) { return json(c.model.oscillator_basis_size); }},
      {"model.coupling_normalization", "number", "(0, 1]", "weighted norm of each bond potential",
       [](RunConfig& c, const json& v) {
         c.model.coupling_normalization = as_number(v, "model.coupling_normalization");
       },
       [](const RunConfig& c) { return json(c.model.coupling_normalization); }},
      {"model.levels", "array of numbers", "n_s entries, levels[0]=0, gap >= 1",
       "custom_diagonal site spectrum",
       [](RunConfig& c, const json& v) { c.model.levels = as_numbers(v, "model.levels"); },
       [](const RunConfig& c) { return json(c.model.levels); }},
      {"model.site_operator", "array of numbers", "n_s*n_s entries, row-major, symmetric",
       "custom_diagonal coupling operator",
       [](RunConfig& c, const json& v) {
         c.model.site_operator = as_numbers(v, "model.site_operator");
       },
       [](const RunConfig& c) { return json(c.model.site_operator); }},
      {"t", "number", "[-1, 1]", "coupling constant for run",
       [](RunConfig& c, const json& v) { c.t = as_number(v, "t"); },
       [](const RunConfig& c) { return json(c.t); }},
      {"t_grid", "array of numbers", "each in [-1, 1]", "coupling grid for scan",
       [](RunConfig& c, const json& v) { c.t_grid = as_numbers(v, "t_grid"); },
       [](const RunConfig& c) { return json(c.t_grid); }},
      {"series.j_max", "integer", "1..200", "maximal Lie-Schwinger order",
       [](RunConfig& c, const json& v) {
         c.series.j_max = static_cast<int>(as_integer(v, "series.j_max"));
       },
       [](const RunConfig& c) { return json(c.series.j_max); }},
      {"series.tail_tol", "number", "(0, 1e-3]", "truncation threshold on |t|^j ||S_j||",
       [](RunConfig& c, const json& v) { c.series.tail_tol = as_number(v, "series.tail_tol"); },
       [](const RunConfig& c) { return json(c.series.tail_tol); }},
      {"series.gap_floor", "number", "(0, 1]", "abort when a step gap falls below this",
       [](RunConfig& c, const json& v) { c.series.gap_floor = as_number(v, "series.gap_floor"); },
       [](const RunConfig& c) { return json(c.series.gap_floor); }},
      {"series.adjoint_n_max", "integer", "1..500", "terms of exp(ad S) series",
       [](RunConfig& c, const json& v) {
         c.series.adjoint_n_max = static_cast<int>(as_integer(v, "series.adjoint_n_max"));
       },
       [](const RunConfig& c) { return json(c.series.adjoint_n_max); }},
      {"checks.suites", "array of strings",
       "subset of main, block, lemmas, appendix, gap_lemma, norm_decay, trees",
       "check suites to evaluate; empty selects all",
       [](RunConfig& c, const json& v) {
         if (!v.is_array()) throw ConfigError("checks.suites: expected an array of strings");
         c.suites.clear();
         for (const json& s : v) c.suites.insert(as_string(s, "checks.suites"));
       },
       [](const RunConfig& c) { return json(c.suites); }},
      {"checks.theorem_t_max", "number", ">= 0", "largest |t| at which gap bounds are asserted",
       [](RunConfig& c, const json& v) {
         c.theorem_t_max = as_number(v, "checks.theorem_t_max");
       },
       [](const RunConfig& c) { return json(c.theorem_t_max); }},
      {"checks.x_d", "number or null", "> 0", "decay exponent; null means 20 d",
       [](RunConfig& c, const json& v) {
         if (v.is_null()) c.x_d.reset();
         else c.x_d = as_number(v, "checks.x_d");
       },
       [](const RunConfig& c) { return optional_number(c.x_d); }},
      {"trees.max_rectangles", "integer", "1..12", "branch enumeration cap on |R_b|",
       [](RunConfig& c, const json& v) {
         c.trees_max_rectangles = static_cast<int>(as_integer(v, "trees.max_rectangles"));
       },
       [](const RunConfig& c) { return json(c.trees_max_rectangles); }},
      {"trees.c", "number or null", ">= 0", "path-weight constant; null means measured",
       [](RunConfig& c, const json& v) {
         if (v.is_null()) c.trees_c.reset();
         else c.trees_c = as_number(v, "trees.c");
       },
       [](const RunConfig& c) { return optional_number(c.trees_c); }},
      {"output.directory", "string", "non-empty", "artifact directory (env LSBD_OUT_DIR overrides)",
       [](RunConfig& c, const json& v) { c.output_directory = as_string(v, "output.directory"); },
       [](const RunConfig& c) { return json(c.output_directory); }},
      {"output.debug_dump", "boolean", "", "write every intermediate table in binary form",
       [](RunConfig& c, const json& v) { c.debug_dump = as_bool(v, "output.debug_dump"); },
       [](const RunConfig& c) { return json(c.debug_dump); }},
      {"output.keep_tables", "boolean", "", "write the final table in binary form",
       [](RunConfig& c, const json& v) { c.keep_tables = as_bool(v, "output.keep_tables"); },
       [](const RunConfig& c) { return json(c.keep_tables); }},
      {"seed", "integer", ">= 0", "seed for randomized vector tests",
       [](RunConfig& c, const json& v) {
         if (!v.is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
         c.seed = v.get<std::uint64_t>();
       },
       [](const RunConfig& c) { return json(c.seed); }},
      {"limits.max_dimension", "integer", "1..65536", "hard cap on the total Hilbert dimension",
       [](RunConfig& c, const json& v) {
         const long long m = as_integer(v, "limits.max_dimension");
         if (m < 1) throw ConfigError("limits.max_dimension: must be positive");
         c.max_dimension = static_cast<std::size_t>(m);
       },
       [](const RunConfig& c) { return json(c.max_dimension); }},
      {"operators.dense_threshold", "integer", "1..4096",
       "largest dimension stored densely; above it sparse storage and Lanczos are used",
       [](RunConfig& c, const json& v) {
         c.dense_threshold = static_cast<Eigen::Index>(as_integer(v, "operators.dense_threshold"));
       },
       [](const RunConfig& c) { return json(c.dense_threshold); }},
      {"scan.workers", "integer", "1..64", "parallel runs during scan",
       [](RunConfig& c, const json& v) {
         c.scan_workers = static_cast<int>(as_integer(v, "scan.workers"));
       },
       [](const RunConfig& c) { return json(c.scan_workers); }},
  };
  return table;
}

json to_json(const RunConfig& c) {
  json out = json::object();
  for (const Field& f : fields()) out[f.key] = f.write(c);
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::set<std::string> RunConfig::effective_suites() const {
  if (!suites.empty()) return suites;
  return {kAllSuites.begin(), kAllSuites.end()};
}

std::size_t RunConfig::hilbert_dimension() const {
  double dim = 1.0;
  const double sites = std::pow(static_cast<double>(lattice.N), lattice.d);
  dim = std::pow(static_cast<double>(model.n_s), sites);
  return dim > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(std::llround(dim));
}

void RunConfig::validate() const {
  require(lattice.d >= 1 && lattice.d <= 3, "lattice.d must be in 1..3, got " +
                                                 std::to_string(lattice.d));
  require(lattice.N >= 2 && lattice.N <= 16,
          "lattice.N must be in 2..16 (a lattice side needs at least two sites), got " +
              std::to_string(lattice.N));
  require(model.n_s >= 2 && model.n_s <= 16, "model.n_s must be in 2..16");
  require(model.coupling_normalization > 0.0 && model.coupling_normalization <= 1.0,
          "model.coupling_normalization must be in (0, 1]");
  if (model.kind == ModelKind::harmonic_phi4) {
    require(model.oscillator_basis_size >= model.n_s + 2 && model.oscillator_basis_size <= 400,
            "model.oscillator_basis_size must be in n_s+2..400");
  }
  try {
    model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  require(std::isfinite(t) && std::abs(t) <= 1.0, "t must be in [-1, 1]");
  for (double x : t_grid) require(std::isfinite(x) && std::abs(x) <= 1.0, "t_grid entries must be in [-1, 1]");
  require(series.j_max >= 1 && series.j_max <= 200, "series.j_max must be in 1..200");
  require(series.tail_tol > 0.0 && series.tail_tol <= 1e-3, "series.tail_tol must be in (0, 1e-3]");
  require(series.gap_floor > 0.0 && series.gap_floor <= 1.0, "series.gap_floor must be in (0, 1]");
  require(series.adjoint_n_max >= 1 && series.adjoint_n_max <= 500,
          "series.adjoint_n_max must be in 1..500");
  for (const std::string& s : suites) {
    require(std::find(kAllSuites.begin(), kAllSuites.end(), s) != kAllSuites.end(),
            "checks.suites: unknown suite '" + s + "'");
  }
  require(theorem_t_max >= 0.0, "checks.theorem_t_max must be >= 0");
  require(!x_d || *x_d > 0.0, "checks.x_d must be positive");
  require(trees_max_rectangles >= 1 && trees_max_rectangles <= 12,
          "trees.max_rectangles must be in 1..12");
  require(!trees_c || *trees_c >= 0.0, "trees.c must be >= 0");
  require(!output_directory.empty(), "output.directory must not be empty");
  require(max_dimension >= 1 && max_dimension <= 65536, "limits.max_dimension must be in 1..65536");
  require(dense_threshold >= 1 && dense_threshold <= 4096,
          "operators.dense_threshold must be in 1..4096");
  require(scan_workers >= 1 && scan_workers <= 64, "scan.workers must be in 1..64");
  const std::size_t dim = hilbert_dimension();
  require(dim <= max_dimension, "Hilbert dimension " + std::to_string(dim) +
                                    " exceeds limits.max_dimension " +
                                    std::to_string(max_dimension));
  // The top step diagonalizes a dense operator on the whole lattice.
  require(dim <= 4096, "Hilbert dimension " + std::to_string(dim) +
                           " exceeds 4096, the largest top rectangle the block diagonalizer "
                           "handles densely");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object with flat keys");
  RunConfig c;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const auto& table = fields();
    auto f = std::find_if(table.begin(), table.end(),
                          [&](const Field& x) { return it.key() == x.key; });
    if (f == table.end()) throw ConfigError("unknown config key '" + it.key() + "'");
    f->read(c, it.value());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_hash(const RunConfig& config) {
  json doc = to_json(config);
  doc.erase("output.directory");  // where artifacts land is not part of the experiment
  const std::string text = doc.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string config_schema() {
  const RunConfig defaults;
  json keys = json::array();
  for (const Field& f : fields()) {
    keys.push_back({{"key", f.key},
                    {"type", f.type},
                    {"range", f.range},
                    {"description", f.doc},
                    {"default", f.write(defaults)}});
  }
  json schema = {{"format", "flat JSON object; keys are dotted paths; unknown keys are rejected"},
                 {"keys", keys}};
  return schema.dump(2) + "\n";
}

}  // namespace lsbd
