#include "lsbd/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <sstream>

namespace lsbd {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::json;

// Non-finite values have no JSON literal; keep them as strings.
json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double get_num(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ArtifactError("bad number '" + s + "'");
  }
  return v.get<double>();
}

json rect_json(const Rectangle& r) { return json::array({r.k, r.q}); }

Rectangle get_rect(const json& v) {
  return Rectangle{v.at(0).get<std::vector<int>>(), v.at(1).get<std::vector<int>>()};
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ArtifactError(std::string("malformed artifact: ") + e.what());
  }
}

void check_schema(const json& j) {
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ArtifactError("unsupported artifact schema version");
  }
}

json norms_json(const std::vector<KeyNorms>& norms) {
  json out = json::array();
  for (const KeyNorms& n : norms) {
    out.push_back({{"key", rect_json(n.key)},
                   {"circumference", n.key.circumference()},
                   {"weighted", num(n.weighted)},
                   {"aux", {num(n.aux[0]), num(n.aux[1]), num(n.aux[2]), num(n.aux[3])}},
                   {"off_diagonal", num(n.off_diagonal)}});
  }
  return out;
}

std::vector<KeyNorms> get_norms(const json& v) {
  std::vector<KeyNorms> out;
  for (const json& n : v) {
    KeyNorms k;
    k.key = get_rect(n.at("key"));
    k.weighted = get_num(n.at("weighted"));
    for (int i = 0; i < 4; ++i) k.aux[i] = get_num(n.at("aux").at(i));
    k.off_diagonal = get_num(n.at("off_diagonal"));
    out.push_back(std::move(k));
  }
  return out;
}

std::string csv_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string csv_quote(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArtifactError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ArtifactError("short write on " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string step_record_line(const StepRecord& r) {
  json terms = json::array();
  for (const TermDiagnostics& td : r.terms) {
    terms.push_back({{"j", td.j},
                     {"s_norm", num(td.s_norm)},
                     {"s_weighted_norm", num(td.s_weighted_norm)},
                     {"v_weighted_norm", num(td.v_weighted_norm)},
                     {"scaled_s_norm", num(td.scaled_s_norm)}});
  }
  json j = {{"schema_version", kSchemaVersion},
            {"index", r.index},
            {"order_index", r.index - 1},
            {"step", rect_json(r.step)},
            {"E", num(r.E)},
            {"gap", num(r.gap)},
            {"theorem_regime", r.theorem_regime},
            {"series_converged", r.series_converged},
            {"terms_used", r.terms_used},
            {"tail_estimate", num(r.tail_estimate)},
            {"terms", terms},
            {"v_old_weighted", num(r.v_old_weighted)},
            {"v_new_weighted", num(r.v_new_weighted)},
            {"bound_g_min", num(r.bound_g_min)},
            {"resolvent_sqrt_norm", num(r.resolvent_sqrt_norm)},
            {"resolvent_norm", num(r.resolvent_norm)},
            {"gap_lemma_coefficient", num(r.gap_lemma_coefficient)},
            {"gap_lemma_min", num(r.gap_lemma_min)},
            {"vsquare_ratio", num(r.vsquare_ratio)},
            {"inductive_aux_ratio", num(r.inductive_aux_ratio)},
            {"unitary_chain_residual", num(r.unitary_chain_residual)},
            {"max_processed_off_diagonal", num(r.max_processed_off_diagonal)},
            {"max_inherited_off_diagonal", num(r.max_inherited_off_diagonal)},
            {"immutability_violations", r.immutability_violations},
            {"norms", norms_json(r.norms)}};
  return j.dump();
}

StepRecord parse_step_record(const std::string& line) {
  const json j = parse(line);
  check_schema(j);
  StepRecord r;
  r.index = j.at("index").get<int>();
  r.step = get_rect(j.at("step"));
  r.E = get_num(j.at("E"));
  r.gap = get_num(j.at("gap"));
  r.theorem_regime = j.at("theorem_regime").get<bool>();
  r.series_converged = j.at("series_converged").get<bool>();
  r.terms_used = j.at("terms_used").get<int>();
  r.tail_estimate = get_num(j.at("tail_estimate"));
  for (const json& t : j.at("terms")) {
    r.terms.push_back(TermDiagnostics{t.at("j").get<int>(), get_num(t.at("s_norm")),
                                      get_num(t.at("s_weighted_norm")),
                                      get_num(t.at("v_weighted_norm")),
                                      get_num(t.at("scaled_s_norm"))});
  }
  r.v_old_weighted = get_num(j.at("v_old_weighted"));
  r.v_new_weighted = get_num(j.at("v_new_weighted"));
  r.bound_g_min = get_num(j.at("bound_g_min"));
  r.resolvent_sqrt_norm = get_num(j.at("resolvent_sqrt_norm"));
  r.resolvent_norm = get_num(j.at("resolvent_norm"));
  r.gap_lemma_coefficient = get_num(j.at("gap_lemma_coefficient"));
  r.gap_lemma_min = get_num(j.at("gap_lemma_min"));
  r.vsquare_ratio = get_num(j.at("vsquare_ratio"));
  r.inductive_aux_ratio = get_num(j.at("inductive_aux_ratio"));
  r.unitary_chain_residual = get_num(j.at("unitary_chain_residual"));
  r.max_processed_off_diagonal = get_num(j.at("max_processed_off_diagonal"));
  r.max_inherited_off_diagonal = get_num(j.at("max_inherited_off_diagonal"));
  r.immutability_violations = j.at("immutability_violations").get<int>();
  r.norms = get_norms(j.at("norms"));
  return r;
}

std::vector<StepRecord> parse_step_records(const std::string& text) {
  std::vector<StepRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_step_record(line));
  }
  return out;
}

std::string initial_json(const Evidence& ev, const NormalizationReport& normalization) {
  json j = {{"schema_version", kSchemaVersion},
            {"lattice", {{"d", ev.lattice.d}, {"N", ev.lattice.N}}},
            {"t", num(ev.t)},
            {"theorem_t_max", num(ev.theorem_t_max)},
            {"x_d", num(ev.x_d)},
            {"seed", ev.seed},
            {"normalization",
             {{"raw_weighted_norm", num(normalization.raw_weighted_norm)},
              {"scale", num(normalization.scale)},
              {"achieved", num(normalization.achieved)}}},
            {"initial_norms", norms_json(ev.initial_norms)}};
  return j.dump(2) + "\n";
}

void parse_initial_json(const std::string& text, Evidence& ev) {
  const json j = parse(text);
  check_schema(j);
  ev.lattice.d = j.at("lattice").at("d").get<int>();
  ev.lattice.N = j.at("lattice").at("N").get<int>();
  ev.t = get_num(j.at("t"));
  ev.theorem_t_max = get_num(j.at("theorem_t_max"));
  ev.x_d = get_num(j.at("x_d"));
  ev.seed = j.at("seed").get<std::uint64_t>();
  ev.initial_norms = get_norms(j.at("initial_norms"));
}

std::string outcome_json(bool completed, const std::string& error) {
  json j = {{"schema_version", kSchemaVersion}, {"completed", completed}, {"error", error}};
  return j.dump(2) + "\n";
}

void parse_outcome_json(const std::string& text, Evidence& ev) {
  const json j = parse(text);
  check_schema(j);
  ev.completed = j.at("completed").get<bool>();
  ev.error = j.at("error").get<std::string>();
}

std::string oracle_json(const OracleReport& o) {
  json so = json::array(), sf = json::array();
  for (double x : o.spectrum_original) so.push_back(num(x));
  for (double x : o.spectrum_final) sf.push_back(num(x));
  json j = {{"schema_version", kSchemaVersion},
            {"spectrum_original", so},
            {"spectrum_final", sf},
            {"max_abs_dev", num(o.max_abs_dev)},
            {"gap_original", num(o.gap_original)},
            {"gap_final", num(o.gap_final)},
            {"ground_vector_residual", num(o.ground_vector_residual)},
            {"vacuum_energy", num(o.vacuum_energy)},
            {"norm_k", num(o.norm_k)},
            {"iterative", o.iterative}};
  return j.dump(2) + "\n";
}

OracleReport parse_oracle_json(const std::string& text) {
  const json j = parse(text);
  check_schema(j);
  OracleReport o;
  for (const json& x : j.at("spectrum_original")) o.spectrum_original.push_back(get_num(x));
  for (const json& x : j.at("spectrum_final")) o.spectrum_final.push_back(get_num(x));
  o.max_abs_dev = get_num(j.at("max_abs_dev"));
  o.gap_original = get_num(j.at("gap_original"));
  o.gap_final = get_num(j.at("gap_final"));
  o.ground_vector_residual = get_num(j.at("ground_vector_residual"));
  o.vacuum_energy = get_num(j.at("vacuum_energy"));
  o.norm_k = get_num(j.at("norm_k"));
  o.iterative = j.at("iterative").get<bool>();
  return o;
}

std::string tree_audit_json(const TreeAudit& a) {
  json branches = json::array();
  for (const BranchAudit& b : a.branches) {
    json rects = json::array();
    for (const Rectangle& r : b.rectangles) rects.push_back(rect_json(r));
    branches.push_back({{"rectangles", rects},
                        {"leaf_level", b.leaf_level},
                        {"norm", num(b.norm)},
                        {"bound", num(b.bound)},
                        {"path_length", b.path_length},
                        {"connected", b.connected},
                        {"minimal", b.minimal},
                        {"path_rhs", num(b.path_rhs)},
                        {"path_checked", b.path_checked},
                        {"path_note", b.path_note}});
  }
  json completeness = json::array();
  for (const EquivalenceAudit& e : a.completeness) {
    completeness.push_back({{"level", e.level},
                            {"key", rect_json(e.key)},
                            {"branches", e.branches},
                            {"truncated", e.truncated},
                            {"deviation", num(e.deviation)}});
  }
  json j = {{"schema_version", kSchemaVersion},
            {"target", rect_json(a.target)},
            {"root_level", a.root_level},
            {"truncated", a.truncated},
            {"deviation", num(a.deviation)},
            {"reference_norm", num(a.reference_norm)},
            {"distinct_sets", a.distinct_sets},
            {"c", num(a.c)},
            {"c_measured", a.c_measured},
            {"x_d", num(a.x_d)},
            {"branches", branches},
            {"completeness", completeness}};
  return j.dump(2) + "\n";
}

TreeAudit parse_tree_audit_json(const std::string& text) {
  const json j = parse(text);
  check_schema(j);
  TreeAudit a;
  a.target = get_rect(j.at("target"));
  a.root_level = j.at("root_level").get<int>();
  a.truncated = j.at("truncated").get<bool>();
  a.deviation = get_num(j.at("deviation"));
  a.reference_norm = get_num(j.at("reference_norm"));
  a.distinct_sets = j.at("distinct_sets").get<bool>();
  a.c = get_num(j.at("c"));
  a.c_measured = j.at("c_measured").get<bool>();
  a.x_d = get_num(j.at("x_d"));
  for (const json& b : j.at("branches")) {
    BranchAudit ba;
    for (const json& r : b.at("rectangles")) ba.rectangles.push_back(get_rect(r));
    ba.leaf_level = b.at("leaf_level").get<int>();
    ba.norm = get_num(b.at("norm"));
    ba.bound = get_num(b.at("bound"));
    ba.path_length = b.at("path_length").get<int>();
    ba.connected = b.at("connected").get<bool>();
    ba.minimal = b.at("minimal").get<bool>();
    ba.path_rhs = get_num(b.at("path_rhs"));
    ba.path_checked = b.at("path_checked").get<bool>();
    ba.path_note = b.at("path_note").get<std::string>();
    a.branches.push_back(std::move(ba));
  }
  for (const json& e : j.at("completeness")) {
    a.completeness.push_back(EquivalenceAudit{e.at("level").get<int>(), get_rect(e.at("key")),
                                              e.at("branches").get<int>(),
                                              e.at("truncated").get<bool>(),
                                              get_num(e.at("deviation"))});
  }
  return a;
}

std::string verification_json(const VerificationReport& report) {
  json checks = json::array();
  for (const BoundCheck& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"lhs", num(c.lhs)},
                      {"rhs", num(c.rhs)},
                      {"passed", c.passed},
                      {"anchor", c.anchor}});
  }
  json diagnostics = json::array();
  for (const Diagnostic& d : report.diagnostics) {
    diagnostics.push_back({{"name", d.name}, {"value", num(d.value)}});
  }
  const std::size_t passed = report.passed_count();
  json j = {{"schema_version", kSchemaVersion},
            {"summary",
             {{"checks", report.checks.size()},
              {"passed", passed},
              {"failed", report.checks.size() - passed},
              {"all_passed", report.all_passed()}}},
            {"checks", checks},
            {"diagnostics", diagnostics},
            {"skipped", report.skipped}};
  return j.dump(2) + "\n";
}

std::string scan_json(const ScanReport& scan) {
  json points = json::array();
  for (const ScanPoint& p : scan.points) {
    points.push_back({{"t", num(p.t)},
                      {"passed", p.passed},
                      {"completed", p.completed},
                      {"checks", p.checks},
                      {"failures", p.failures},
                      {"failed_families", p.failed_families}});
  }
  json frontier = json::object();
  for (const auto& [family, t] : scan.failure_frontier) frontier[family] = num(t);
  json j = {{"schema_version", kSchemaVersion},
            {"points", points},
            {"largest_passing", scan.largest_passing ? num(*scan.largest_passing) : json(nullptr)},
            {"failure_frontier", frontier},
            {"monotone", scan.monotone}};
  return j.dump(2) + "\n";
}

std::string gap_vs_step_csv(const std::vector<StepRecord>& records) {
  std::ostringstream os;
  os << "step_index,step,circumference,E,gap,terms_used,tail_estimate\n";
  for (const StepRecord& r : records) {
    os << r.index << "," << csv_quote(r.step.to_string()) << "," << r.step.circumference() << ","
       << csv_double(r.E) << "," << csv_double(r.gap) << "," << r.terms_used << ","
       << csv_double(r.tail_estimate) << "\n";
  }
  return os.str();
}

std::string norm_vs_circumference_csv(const std::vector<KeyNorms>& initial,
                                      const std::vector<StepRecord>& records) {
  std::ostringstream os;
  os << "step_index,key,circumference,weighted_norm,off_diagonal_norm\n";
  auto rows = [&](int index, const std::vector<KeyNorms>& norms) {
    for (const KeyNorms& n : norms) {
      os << index << "," << csv_quote(n.key.to_string()) << "," << n.key.circumference() << ","
         << csv_double(n.weighted) << "," << csv_double(n.off_diagonal) << "\n";
    }
  };
  rows(0, initial);
  for (const StepRecord& r : records) rows(r.index, r.norms);
  return os.str();
}

std::string summary_csv(const std::vector<StepRecord>& records, const VerificationReport& report) {
  // A check belongs to step i when its bracket carries "step=i".
  std::map<int, std::pair<int, int>> per_step;  // index -> (passed, total)
  for (const BoundCheck& c : report.checks) {
    const auto pos = c.name.find("[step=");
    if (pos == std::string::npos) continue;
    const int index = std::stoi(c.name.substr(pos + 6));
    auto& slot = per_step[index];
    slot.first += c.passed ? 1 : 0;
    slot.second += 1;
  }
  std::ostringstream os;
  os << "step_index,gap,max_weighted_norm,pass_count,check_count\n";
  for (const StepRecord& r : records) {
    double max_norm = 0.0;
    for (const KeyNorms& n : r.norms) max_norm = std::max(max_norm, n.weighted);
    const auto slot = per_step[r.index];
    os << r.index << "," << csv_double(r.gap) << "," << csv_double(max_norm) << "," << slot.first
       << "," << slot.second << "\n";
  }
  return os.str();
}

std::string t_scan_frontier_csv(const ScanReport& scan) {
  std::ostringstream os;
  os << "t,passed,completed,checks,failures,failed_families\n";
  for (const ScanPoint& p : scan.points) {
    std::string families;
    for (const std::string& f : p.failed_families) families += (families.empty() ? "" : ";") + f;
    os << csv_double(p.t) << "," << (p.passed ? 1 : 0) << "," << (p.completed ? 1 : 0) << ","
       << p.checks << "," << p.failures << "," << csv_quote(families) << "\n";
  }
  return os.str();
}

void write_table_dump(const fs::path& path, const PotentialTable& table) {
  std::ostringstream os;
  os << "lsbd-table " << kSchemaVersion << " step=" << table.step.to_string()
     << " t=" << csv_double(table.t) << " site_dim=" << table.site_dim
     << " entries=" << table.entries.size() << "\n";
  for (const auto& [key, op] : table.entries) {
    os << key.to_string() << " " << op.matrix.rows() << " " << (op.hermitian ? 1 : 0) << "\n";
    os.write(reinterpret_cast<const char*>(op.matrix.data()),
             static_cast<std::streamsize>(op.matrix.size() * sizeof(Complex)));
    os << "\n";
  }
  write_atomic(path, os.str());
}

namespace {

Rectangle parse_rect_text(const std::string& s) {
  // "[[k...],[q...]]"
  std::vector<int> values;
  std::vector<std::size_t> split;
  std::string digits;
  int depth = 0;
  for (char ch : s) {
    if (ch == '[') {
      ++depth;
    } else if (ch == ']') {
      if (!digits.empty()) values.push_back(std::stoi(digits));
      digits.clear();
      if (depth == 2) split.push_back(values.size());
      --depth;
    } else if (ch == ',') {
      if (!digits.empty()) values.push_back(std::stoi(digits));
      digits.clear();
    } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '-') {
      digits += ch;
    }
  }
  if (split.size() != 2) throw ArtifactError("bad rectangle '" + s + "'");
  return Rectangle{std::vector<int>(values.begin(), values.begin() + split[0]),
                   std::vector<int>(values.begin() + split[0], values.end())};
}

}  // namespace

PotentialTable read_table_dump(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, step, t, site_dim, entries;
  int version = 0;
  hs >> magic >> version >> step >> t >> site_dim >> entries;
  if (magic != "lsbd-table" || version != kSchemaVersion) {
    throw ArtifactError("not a table dump: " + path.string());
  }
  PotentialTable table;
  table.t = std::stod(t.substr(2));
  table.site_dim = std::stoi(site_dim.substr(9));
  const std::string step_text = step.substr(5);
  if (step_text != "(0,N)") table.step = StepIndex::of(parse_rect_text(step_text));
  const int count = std::stoi(entries.substr(8));
  for (int e = 0; e < count; ++e) {
    std::string line;
    std::getline(in, line);
    std::istringstream ls(line);
    std::string rect;
    Eigen::Index dim = 0;
    int herm = 0;
    ls >> rect >> dim >> herm;
    LocalOperator op{parse_rect_text(rect), Matrix(dim, dim), herm != 0};
    in.read(reinterpret_cast<char*>(op.matrix.data()),
            static_cast<std::streamsize>(op.matrix.size() * sizeof(Complex)));
    in.ignore(1);
    if (!in) throw ArtifactError("truncated table dump: " + path.string());
    table.set(std::move(op));
  }
  return table;
}

}  // namespace lsbd
