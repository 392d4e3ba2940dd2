#include "skt/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "skt/csv.hpp"
#include "skt/errors.hpp"

namespace skt {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& what) { throw InputError("config: " + what); }

double parse_double(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s.empty()) fail("empty value for '" + key + "'");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) fail("cannot parse number '" + s + "' for '" + key + "'");
  return v;
}

long long parse_int(const std::string& raw, const std::string& key) {
  const double v = parse_double(raw, key);
  const long long i = static_cast<long long>(std::llround(v));
  if (static_cast<double>(i) != v) fail("'" + key + "' must be an integer, got " + trim(raw));
  return i;
}

// Splits "a, b, c" at top-level commas (commas inside brackets stay put).
std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  const std::string last = trim(cur);
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

std::string strip_brackets(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    fail("'" + key + "' must be a bracketed list");
  return trim(s.substr(1, s.size() - 2));
}

std::vector<double> parse_vector(const std::string& raw, const std::string& key) {
  const std::string inner = strip_brackets(raw, key);
  std::vector<double> out;
  if (inner.empty()) return out;
  for (const auto& tok : split_top(inner)) out.push_back(parse_double(tok, key));
  return out;
}

std::vector<int> parse_int_vector(const std::string& raw, const std::string& key) {
  const std::string inner = strip_brackets(raw, key);
  std::vector<int> out;
  if (inner.empty()) return out;
  for (const auto& tok : split_top(inner))
    out.push_back(static_cast<int>(parse_int(tok, key)));
  return out;
}

// Row-major flattening of [[...], [...]]; all rows must have equal length.
std::vector<double> parse_matrix(const std::string& raw, const std::string& key, int& rows,
                                 int& cols) {
  const std::string inner = strip_brackets(raw, key);
  std::vector<double> out;
  rows = 0;
  cols = -1;
  if (inner.empty()) return out;
  for (const auto& tok : split_top(inner)) {
    std::vector<double> row = parse_vector(tok, key);
    if (cols < 0)
      cols = static_cast<int>(row.size());
    else if (cols != static_cast<int>(row.size()))
      fail("ragged matrix for '" + key + "'");
    out.insert(out.end(), row.begin(), row.end());
    ++rows;
  }
  return out;
}

std::string parse_word(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s.empty()) fail("empty value for '" + key + "'");
  for (char ch : s)
    if (std::isspace(static_cast<unsigned char>(ch)))
      fail("'" + key + "' must be a single token, got '" + s + "'");
  return s;
}

const std::set<std::string>& sweepable_keys() {
  static const std::set<std::string> keys = {
      "time.T",      "time.dt",          "time.newton_tol",
      "cutoff.K",    "cutoff.L",         "cutoff.M",
      "cutoff.eps",  "probe.refinement", "probe.perturbation"};
  return keys;
}

std::string render_vector(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt17(v[i]);
  }
  return s + "]";
}

std::string render_int_vector(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

std::string render_matrix(const std::vector<double>& m, int rows, int cols) {
  std::string s = "[";
  for (int r = 0; r < rows; ++r) {
    if (r) s += ", ";
    s += "[";
    for (int c = 0; c < cols; ++c) {
      if (c) s += ", ";
      s += fmt17(m[r * cols + c]);
    }
    s += "]";
  }
  return s + "]";
}

}  // namespace

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig cfg;

  // Collected raw key/value pairs per section (top level uses "").
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  {
    std::istringstream in(text);
    std::string line, section;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::string t = trim(line);
      if (t.empty()) continue;
      if (t.front() == '[' && t.back() == ']' && t.find('=') == std::string::npos) {
        section = trim(t.substr(1, t.size() - 2));
        if (section.empty()) fail("empty section header");
        continue;
      }
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos) fail("expected 'key = value', got '" + t + "'");
      const std::string key = trim(t.substr(0, eq));
      std::string value = trim(t.substr(eq + 1));
      if (key.empty()) fail("missing key before '=' in '" + t + "'");
      // Bracketed values may continue on following lines until balanced.
      long depth = 0;
      for (char ch : value) depth += (ch == '[') - (ch == ']');
      while (depth > 0 && std::getline(in, line)) {
        const std::size_t h2 = line.find('#');
        if (h2 != std::string::npos) line = line.substr(0, h2);
        const std::string more = trim(line);
        value += " " + more;
        for (char ch : more) depth += (ch == '[') - (ch == ']');
      }
      if (depth != 0) fail("unbalanced brackets in value of '" + key + "'");
      const std::string full = section + "." + key;
      if (!seen.insert(full).second) fail("duplicate key '" + key + "' in [" + section + "]");
      sections[section].emplace_back(key, value);
    }
  }

  const std::set<std::string> known = {"",        "model", "grid",   "time",  "cutoff",
                                       "initial", "probe", "audit", "output", "sweep"};
  for (const auto& [name, kv] : sections) {
    (void)kv;
    if (!known.count(name)) fail("unknown section [" + name + "]");
  }

  auto kv_of = [&](const std::string& s) {
    return sections.count(s) ? sections.at(s) : std::vector<std::pair<std::string, std::string>>{};
  };

  for (const auto& [key, value] : kv_of("")) {
    if (key == "seed") {
      const std::string s = trim(value);
      char* end = nullptr;
      const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
      if (s.empty() || s[0] == '-' || end != s.c_str() + s.size())
        fail("seed must be a nonnegative integer");
      cfg.seed = v;
    } else {
      fail("unknown top-level key '" + key + "'");
    }
  }

  // ----- [model] -----
  ModelSpec& m = cfg.model;
  bool have_n = false, have_a0 = false, have_a = false;
  std::vector<double> beta, gamma;
  int gamma_rows = 0, gamma_cols = 0;
  std::string reaction_name = "zero";
  for (const auto& [key, value] : kv_of("model")) {
    if (key == "n") {
      m.n = static_cast<int>(parse_int(value, key));
      have_n = true;
    } else if (key == "d") {
      m.d = static_cast<int>(parse_int(value, key));
    } else if (key == "a0") {
      m.a0 = parse_vector(value, key);
      have_a0 = true;
    } else if (key == "a") {
      int r, c;
      m.a = parse_matrix(value, key, r, c);
      if (r != c) fail("'a' must be square");
      have_a = true;
    } else if (key == "pi") {
      m.pi = parse_vector(value, key);
    } else if (key == "lambda") {
      m.lambda = parse_vector(value, key);
    } else if (key == "b") {
      int r, c;
      m.b = parse_matrix(value, key, r, c);
      if (c != 1 && c != 2) fail("'b' rows must have 1 or 2 components");
    } else if (key == "reaction") {
      reaction_name = parse_word(value, key);
    } else if (key == "beta") {
      beta = parse_vector(value, key);
    } else if (key == "gamma") {
      gamma = parse_matrix(value, key, gamma_rows, gamma_cols);
    } else {
      fail("unknown key '" + key + "' in [model]");
    }
  }
  if (!have_n) fail("[model] needs 'n'");
  if (!have_a0) fail("[model] needs 'a0'");
  if (!have_a) fail("[model] needs 'a'");
  if (m.n < 1) fail("'n' must be >= 1");
  if (m.d != 1 && m.d != 2) fail("'d' must be 1 or 2");
  const int n = m.n;
  if (m.pi.empty()) m.pi.assign(n, 1.0);
  if (m.lambda.empty()) m.lambda.assign(n, 1.0);
  if (m.b.empty()) m.b.assign(static_cast<std::size_t>(n) * m.d, 0.0);
  if (reaction_name == "zero") {
    m.reaction.kind = ReactionKind::zero;
  } else if (reaction_name == "logistic_competition") {
    m.reaction.kind = ReactionKind::logistic_competition;
    m.reaction.beta = beta;
    m.reaction.gamma = gamma;
    if (gamma_rows && gamma_rows != gamma_cols) fail("'gamma' must be square");
  } else if (reaction_name == "linear_relaxation") {
    m.reaction.kind = ReactionKind::linear_relaxation;
  } else {
    fail("unknown reaction '" + reaction_name + "' (zero | logistic_competition | linear_relaxation)");
  }
  if (m.reaction.kind != ReactionKind::logistic_competition && (!beta.empty() || !gamma.empty()))
    fail("'beta'/'gamma' only apply to the logistic_competition reaction");

  // ----- [grid] -----
  cfg.grid.dim = 1;
  cfg.grid.cells = {64, 1};
  cfg.grid.extent = {1.0, 1.0};
  std::vector<int> cells_in;
  std::vector<double> extent_in;
  for (const auto& [key, value] : kv_of("grid")) {
    if (key == "dim") {
      cfg.grid.dim = static_cast<int>(parse_int(value, key));
    } else if (key == "cells") {
      cells_in = parse_int_vector(value, key);
    } else if (key == "extent") {
      extent_in = parse_vector(value, key);
    } else {
      fail("unknown key '" + key + "' in [grid]");
    }
  }
  if (cfg.grid.dim != 1 && cfg.grid.dim != 2) fail("'dim' must be 1 or 2");
  if (cells_in.empty()) fail("[grid] is missing the required key 'cells'");
  if (static_cast<int>(cells_in.size()) != cfg.grid.dim)
    fail("'cells' needs one entry per axis");
  cfg.grid.cells[0] = cells_in[0];
  cfg.grid.cells[1] = cfg.grid.dim == 2 ? cells_in[1] : 1;
  if (!extent_in.empty()) {
    if (static_cast<int>(extent_in.size()) != cfg.grid.dim)
      fail("'extent' needs one entry per axis");
    cfg.grid.extent[0] = extent_in[0];
    cfg.grid.extent[1] = cfg.grid.dim == 2 ? extent_in[1] : 1.0;
  }

  // ----- [time] -----
  for (const auto& [key, value] : kv_of("time")) {
    if (key == "T")
      cfg.time.T = parse_double(value, key);
    else if (key == "dt")
      cfg.time.dt = parse_double(value, key);
    else if (key == "newton_tol")
      cfg.time.newton_tol = parse_double(value, key);
    else if (key == "newton_max_iters")
      cfg.time.newton_max_iters = static_cast<int>(parse_int(value, key));
    else
      fail("unknown key '" + key + "' in [time]");
  }

  // ----- [cutoff] -----
  for (const auto& [key, value] : kv_of("cutoff")) {
    if (key == "K")
      cfg.cutoff.K = static_cast<int>(parse_int(value, key));
    else if (key == "L")
      cfg.cutoff.L = parse_double(value, key);
    else if (key == "M")
      cfg.cutoff.M = parse_double(value, key);
    else if (key == "eps")
      cfg.cutoff.eps = parse_double(value, key);
    else if (key == "profile") {
      const std::string w = parse_word(value, key);
      if (w == "smooth")
        cfg.cutoff.profile = CutoffProfile::make(CutoffKind::smooth);
      else if (w == "smoothstep")
        cfg.cutoff.profile = CutoffProfile::make(CutoffKind::smoothstep);
      else
        fail("unknown cutoff profile '" + w + "' (smooth | smoothstep)");
    } else
      fail("unknown key '" + key + "' in [cutoff]");
  }

  // ----- [initial] -----
  for (const auto& [key, value] : kv_of("initial")) {
    if (key == "mode")
      cfg.initial.mode = parse_word(value, key);
    else if (key == "values")
      cfg.initial.values = parse_vector(value, key);
    else
      fail("unknown key '" + key + "' in [initial]");
  }
  if (cfg.initial.mode == "constant" && cfg.initial.values.empty())
    cfg.initial.values.assign(n, 1.0);

  // ----- [probe] -----
  for (const auto& [key, value] : kv_of("probe")) {
    if (key == "mode")
      cfg.probe.mode = parse_word(value, key);
    else if (key == "refinement")
      cfg.probe.refinement = static_cast<int>(parse_int(value, key));
    else if (key == "perturbation")
      cfg.probe.perturbation = parse_double(value, key);
    else if (key == "m")
      cfg.probe.m = parse_vector(value, key);
    else if (key == "amp")
      cfg.probe.amp = parse_vector(value, key);
    else if (key == "tolerance")
      cfg.probe.tolerance = parse_double(value, key);
    else
      fail("unknown key '" + key + "' in [probe]");
  }

  // ----- [audit] -----
  for (const auto& [key, value] : kv_of("audit")) {
    if (key == "window")
      cfg.audit.window = parse_double(value, key);
    else if (key == "levels")
      cfg.audit.levels = parse_int_vector(value, key);
    else
      fail("unknown key '" + key + "' in [audit]");
  }

  // ----- [output] -----
  for (const auto& [key, value] : kv_of("output")) {
    if (key == "dir")
      cfg.output.dir = parse_word(value, key);
    else if (key == "snapshot_every")
      cfg.output.snapshot_every = static_cast<int>(parse_int(value, key));
    else
      fail("unknown key '" + key + "' in [output]");
  }

  // Convenience default: a constant-data config probes against the constant
  // reference with the same levels unless m/amp are given explicitly.
  if (cfg.probe.m.empty() && cfg.probe.amp.empty() && cfg.initial.mode == "constant" &&
      (cfg.probe.mode == "manufactured")) {
    cfg.probe.m = cfg.initial.values;
    cfg.probe.amp.assign(cfg.probe.m.size(), 0.0);
  }

  // ----- [sweep] -----
  for (const auto& [key, value] : kv_of("sweep")) {
    std::vector<double> vals = parse_vector(value, key);
    if (vals.empty()) fail("sweep axis '" + key + "' has no values");
    cfg.sweep.params.emplace_back(key, std::move(vals));
  }

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

void RunConfig::validate() const {
  model.validate();
  grid.validate();
  if (grid.dim != model.d)
    throw InputError("config: grid dim " + std::to_string(grid.dim) +
                     " does not match model d " + std::to_string(model.d));
  if (!(time.T >= 0) || !std::isfinite(time.T)) throw InputError("config: T must be >= 0");
  if (!(time.dt > 0)) throw InputError("config: dt must be > 0");
  if (!(time.newton_tol > 0)) throw InputError("config: newton_tol must be > 0");
  if (time.newton_max_iters < 1) throw InputError("config: newton_max_iters must be >= 1");
  cutoff.validate();

  if (initial.mode != "constant" && initial.mode != "manufactured")
    throw InputError("config: initial mode must be constant or manufactured");
  if (initial.mode == "constant") {
    if (static_cast<int>(initial.values.size()) != model.n)
      throw InputError("config: initial values need one entry per species");
    for (double v : initial.values)
      if (!(v > 0) || !std::isfinite(v))
        throw InputError("config: initial values must be strictly positive");
  }

  if (probe.mode != "manufactured" && probe.mode != "fine_proxy")
    throw InputError("config: probe mode must be manufactured or fine_proxy");
  if (probe.refinement < 1) throw InputError("config: probe refinement must be >= 1");
  const bool needs_ms = probe.mode == "manufactured" || initial.mode == "manufactured";
  if (needs_ms) {
    if (static_cast<int>(probe.m.size()) != model.n ||
        static_cast<int>(probe.amp.size()) != model.n)
      throw InputError("config: probe m and amp need one entry per species");
    double lo = 1e300;
    for (int i = 0; i < model.n; ++i) lo = std::min(lo, probe.m[i] - std::abs(probe.amp[i]));
    if (!(lo > 0))
      throw InputError("config: reference profile must stay positive (min m - |amp| > 0)");
  }
  if (probe.tolerance && !(*probe.tolerance >= 0))
    throw InputError("config: probe tolerance must be >= 0");

  if (audit.window) {
    if (!(*audit.window >= 0) || *audit.window > time.T)
      throw InputError("config: audit window must lie in [0, T]");
  }
  for (int lv : audit.levels)
    if (lv < 2) throw InputError("config: audit levels must be >= 2 cells per axis");

  if (output.dir.empty()) throw InputError("config: output dir must not be empty");
  if (output.snapshot_every < 1) throw InputError("config: snapshot_every must be >= 1");

  std::set<std::string> seen;
  for (const auto& [key, vals] : sweep.params) {
    if (!sweepable_keys().count(key))
      throw InputError("config: '" + key + "' is not a sweepable parameter");
    if (!seen.insert(key).second)
      throw InputError("config: duplicate sweep axis '" + key + "'");
    if (vals.empty()) throw InputError("config: sweep axis '" + key + "' has no values");
  }
}

NewtonOptions RunConfig::newton_options() const {
  NewtonOptions o;
  o.tol = time.newton_tol;
  o.max_iters = time.newton_max_iters;
  return o;
}

SimOptions RunConfig::sim_options() const { return {time.T, time.dt, newton_options()}; }

ProbeOptions RunConfig::probe_options() const {
  ProbeOptions o;
  o.mode = probe.mode == "manufactured" ? ProbeMode::manufactured : ProbeMode::fine_proxy;
  o.refinement = probe.refinement;
  o.perturbation = probe.perturbation;
  o.m = probe.m;
  o.amp = probe.amp;
  o.tolerance = probe.tolerance;
  o.hyp_sampling.seed = seed ? seed : 1;
  return o;
}

Field RunConfig::initial_field() const {
  if (initial.mode == "constant") {
    Field f(model.n, grid);
    for (int i = 0; i < model.n; ++i)
      for (int c = 0; c < grid.ncells(); ++c) f.at(i, c) = initial.values[i];
    return f;
  }
  return manufactured_strong(model, grid, probe.m, probe.amp).sample(0.0);
}

std::string RunConfig::render() const {
  std::ostringstream out;
  out << "seed = " << seed << "\n\n";

  out << "[model]\n";
  out << "n = " << model.n << "\n";
  out << "d = " << model.d << "\n";
  out << "a0 = " << render_vector(model.a0) << "\n";
  out << "a = " << render_matrix(model.a, model.n, model.n) << "\n";
  out << "pi = " << render_vector(model.pi) << "\n";
  out << "lambda = " << render_vector(model.lambda) << "\n";
  out << "b = " << render_matrix(model.b, model.n, model.d) << "\n";
  switch (model.reaction.kind) {
    case ReactionKind::zero:
      out << "reaction = zero\n";
      break;
    case ReactionKind::logistic_competition:
      out << "reaction = logistic_competition\n";
      out << "beta = " << render_vector(model.reaction.beta) << "\n";
      out << "gamma = " << render_matrix(model.reaction.gamma, model.n, model.n) << "\n";
      break;
    case ReactionKind::linear_relaxation:
      out << "reaction = linear_relaxation\n";
      break;
    case ReactionKind::user_table:
      throw InputError("config: callback reactions have no text form");
  }

  out << "\n[grid]\n";
  out << "dim = " << grid.dim << "\n";
  out << "cells = "
      << (grid.dim == 2 ? render_int_vector({grid.cells[0], grid.cells[1]})
                        : render_int_vector({grid.cells[0]}))
      << "\n";
  out << "extent = "
      << (grid.dim == 2 ? render_vector({grid.extent[0], grid.extent[1]})
                        : render_vector({grid.extent[0]}))
      << "\n";

  out << "\n[time]\n";
  out << "T = " << fmt17(time.T) << "\n";
  out << "dt = " << fmt17(time.dt) << "\n";
  out << "newton_tol = " << fmt17(time.newton_tol) << "\n";
  out << "newton_max_iters = " << time.newton_max_iters << "\n";

  out << "\n[cutoff]\n";
  out << "K = " << cutoff.K << "\n";
  out << "L = " << fmt17(cutoff.L) << "\n";
  out << "M = " << fmt17(cutoff.M) << "\n";
  out << "eps = " << fmt17(cutoff.eps) << "\n";
  out << "profile = " << (cutoff.profile.kind == CutoffKind::smooth ? "smooth" : "smoothstep")
      << "\n";

  out << "\n[initial]\n";
  out << "mode = " << initial.mode << "\n";
  out << "values = " << render_vector(initial.values) << "\n";

  out << "\n[probe]\n";
  out << "mode = " << probe.mode << "\n";
  out << "refinement = " << probe.refinement << "\n";
  out << "perturbation = " << fmt17(probe.perturbation) << "\n";
  out << "m = " << render_vector(probe.m) << "\n";
  out << "amp = " << render_vector(probe.amp) << "\n";
  if (probe.tolerance) out << "tolerance = " << fmt17(*probe.tolerance) << "\n";

  if (audit.window || !audit.levels.empty()) {
    out << "\n[audit]\n";
    if (audit.window) out << "window = " << fmt17(*audit.window) << "\n";
    if (!audit.levels.empty()) out << "levels = " << render_int_vector(audit.levels) << "\n";
  }

  out << "\n[output]\n";
  out << "dir = " << output.dir << "\n";
  out << "snapshot_every = " << output.snapshot_every << "\n";

  if (!sweep.params.empty()) {
    out << "\n[sweep]\n";
    for (const auto& [key, vals] : sweep.params)
      out << key << " = " << render_vector(vals) << "\n";
  }
  return out.str();
}

}  // namespace skt
