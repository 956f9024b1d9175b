#include "contactnh/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace contactnh {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

double to_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("'" + key + "' expects a number, got '" + s + "'");
  }
  return v;
}

template <class Int>
Int to_int(const std::string& s, const std::string& key) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("'" + key + "' expects an integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("'" + key + "' expects true or false");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Splits "<prefix><index>[.<field>]" and returns the 1-based index, or 0.
int indexed_key(const std::string& key, std::string_view prefix, std::string& field) {
  if (key.rfind(prefix, 0) != 0) return 0;
  const std::string rest = key.substr(prefix.size());
  const auto dot = rest.find('.');
  const std::string digits = rest.substr(0, dot);
  field = dot == std::string::npos ? std::string() : rest.substr(dot + 1);
  if (digits.empty() || digits[0] == '0') return 0;
  int idx = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return 0;
  return idx;
}

template <class T>
std::vector<T> dense(std::map<int, T>& items, const char* what) {
  std::vector<T> out;
  int expected = 1;
  for (auto& [idx, v] : items) {
    if (idx != expected) throw ConfigError(std::string(what) + " indices must be 1, 2, ... without gaps");
    out.push_back(std::move(v));
    ++expected;
  }
  return out;
}

using Section = std::map<std::string, std::string>;

}  // namespace

SystemConfig parse_config(std::string_view text) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      if (sections.count(current)) throw ConfigError("duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (current.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside of a section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!sections[current].emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
  }

  for (const auto& [name, _] : sections) {
    if (name != "system" && name != "hamiltonian" && name != "lagrangian" && name != "integrator" && name != "run") {
      throw ConfigError("unknown section [" + name + "]");
    }
  }

  SystemConfig c;
  auto take = [](Section& s, const std::string& key) -> std::optional<std::string> {
    auto it = s.find(key);
    if (it == s.end()) return std::nullopt;
    std::string v = it->second;
    s.erase(it);
    return v;
  };
  auto reject_rest = [](const Section& s, const std::string& name) {
    if (!s.empty()) throw ConfigError("unknown key '" + s.begin()->first + "' in [" + name + "]");
  };

  Section system = sections["system"];
  const auto mode = take(system, "mode");
  if (!mode) throw ConfigError("[system] needs mode = hamiltonian | lagrangian");
  if (*mode == "hamiltonian") {
    c.mode = SystemConfig::Mode::Hamiltonian;
  } else if (*mode == "lagrangian") {
    c.mode = SystemConfig::Mode::Lagrangian;
  } else {
    throw ConfigError("unknown mode '" + *mode + "'");
  }
  const auto n = take(system, "n");
  if (!n) throw ConfigError("[system] needs n");
  c.n = to_int<int>(*n, "n");
  if (c.n < 1) throw ConfigError("n must be >= 1");
  reject_rest(system, "system");

  const bool ham = c.mode == SystemConfig::Mode::Hamiltonian;
  if (sections.count(ham ? "lagrangian" : "hamiltonian")) {
    throw ConfigError(std::string("section [") + (ham ? "lagrangian" : "hamiltonian") + "] does not match mode");
  }
  if (!sections.count(ham ? "hamiltonian" : "lagrangian")) {
    throw ConfigError(std::string("missing section [") + (ham ? "hamiltonian" : "lagrangian") + "]");
  }

  auto components = [&c](const std::string& v, const std::string& key) {
    auto parts = split(v, ',');
    if (static_cast<int>(parts.size()) != c.n) throw ConfigError("'" + key + "' needs n comma-separated entries");
    return parts;
  };

  if (ham) {
    Section s = sections["hamiltonian"];
    const auto H = take(s, "H");
    if (!H) throw ConfigError("[hamiltonian] needs H");
    c.hamiltonian = *H;
    std::map<int, std::string> constraints;
    std::map<int, ForceConfig> forces;
    for (const auto& [key, value] : s) {
      std::string field;
      if (int i = indexed_key(key, "constraint", field); i > 0 && field.empty()) {
        constraints[i] = value;
      } else if (int j = indexed_key(key, "force", field); j > 0) {
        ForceConfig& f = forces[j];
        if (field == "dq") {
          f.dq = components(value, key);
        } else if (field == "dp") {
          f.dp = components(value, key);
        } else if (field == "dz") {
          f.dz = value;
        } else {
          throw ConfigError("unknown key '" + key + "'");
        }
      } else {
        throw ConfigError("unknown key '" + key + "' in [hamiltonian]");
      }
    }
    c.constraints = dense(constraints, "constraint");
    c.forces = dense(forces, "force");
    for (auto& f : c.forces) {
      if (f.dq.empty()) f.dq.assign(static_cast<std::size_t>(c.n), "0");
      if (f.dp.empty()) f.dp.assign(static_cast<std::size_t>(c.n), "0");
      if (f.dz.empty()) f.dz = "0";
    }
  } else {
    Section s = sections["lagrangian"];
    const auto metric = take(s, "metric");
    if (!metric) throw ConfigError("[lagrangian] needs metric");
    for (const auto& row : split(*metric, ';')) c.metric.push_back(components(row, "metric"));
    if (static_cast<int>(c.metric.size()) != c.n) throw ConfigError("metric needs n rows separated by ';'");
    c.potential = take(s, "potential").value_or("0");
    std::map<int, std::vector<std::string>> forms;
    for (const auto& [key, value] : s) {
      std::string field;
      if (int i = indexed_key(key, "form", field); i > 0 && field.empty()) {
        forms[i] = components(value, key);
      } else {
        throw ConfigError("unknown key '" + key + "' in [lagrangian]");
      }
    }
    c.forms = dense(forms, "form");
  }

  Section integ = sections["integrator"];
  if (auto v = take(integ, "h")) c.h = to_double(*v, "h");
  if (auto v = take(integ, "t_end")) c.t_end = to_double(*v, "t_end");
  if (auto v = take(integ, "project")) c.project = to_bool(*v, "project");
  reject_rest(integ, "integrator");
  if (!(c.h > 0.0)) throw ConfigError("h must be positive");
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be non-negative");

  Section run = sections["run"];
  if (auto v = take(run, "seed")) c.seed = to_int<std::uint64_t>(*v, "seed");
  if (auto v = take(run, "sample_count")) c.sample_count = to_int<int>(*v, "sample_count");
  reject_rest(run, "run");
  if (c.sample_count < 1) throw ConfigError("sample_count must be >= 1");
  return c;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_text(const SystemConfig& c) {
  auto join = [](const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
  };
  std::ostringstream o;
  const bool ham = c.mode == SystemConfig::Mode::Hamiltonian;
  o << "[system]\nmode = " << (ham ? "hamiltonian" : "lagrangian") << "\nn = " << c.n << "\n\n";
  if (ham) {
    o << "[hamiltonian]\nH = " << c.hamiltonian << "\n";
    for (std::size_t a = 0; a < c.constraints.size(); ++a) o << "constraint" << a + 1 << " = " << c.constraints[a] << "\n";
    for (std::size_t a = 0; a < c.forces.size(); ++a) {
      o << "force" << a + 1 << ".dq = " << join(c.forces[a].dq, ", ") << "\n";
      o << "force" << a + 1 << ".dp = " << join(c.forces[a].dp, ", ") << "\n";
      o << "force" << a + 1 << ".dz = " << c.forces[a].dz << "\n";
    }
  } else {
    std::vector<std::string> rows;
    for (const auto& r : c.metric) rows.push_back(join(r, ", "));
    o << "[lagrangian]\nmetric = " << join(rows, "; ") << "\npotential = " << c.potential << "\n";
    for (std::size_t a = 0; a < c.forms.size(); ++a) o << "form" << a + 1 << " = " << join(c.forms[a], ", ") << "\n";
  }
  o << "\n[integrator]\nh = " << format_double(c.h) << "\nt_end = " << format_double(c.t_end)
    << "\nproject = " << (c.project ? "true" : "false") << "\n\n[run]\nseed = " << c.seed
    << "\nsample_count = " << c.sample_count << "\n";
  return o.str();
}

std::optional<MechanicalSystem> build_mechanical(const SystemConfig& c) {
  if (c.mode != SystemConfig::Mode::Lagrangian) return std::nullopt;
  auto parse_matrix = [&c](const std::vector<std::vector<std::string>>& rows) {
    MechanicalSystem::ExprMatrix out;
    for (const auto& row : rows) {
      std::vector<expr::Expr> r;
      for (const auto& s : row) r.push_back(expr::parse(s, c.n));
      out.push_back(std::move(r));
    }
    return out;
  };
  return MechanicalSystem(c.n, parse_matrix(c.metric), expr::parse(c.potential, c.n), parse_matrix(c.forms));
}

ConstrainedSystem build_system(const SystemConfig& c) {
  if (auto mech = build_mechanical(c)) return induced_hamiltonian_system(*mech);
  std::vector<expr::Expr> constraints;
  for (const auto& s : c.constraints) constraints.push_back(expr::parse(s, c.n));
  std::vector<ForceForm> forces;
  for (const auto& f : c.forces) {
    ForceForm form;
    for (const auto& s : f.dq) form.dq.push_back(expr::parse(s, c.n));
    for (const auto& s : f.dp) form.dp.push_back(expr::parse(s, c.n));
    form.dz = expr::parse(f.dz, c.n);
    forces.push_back(std::move(form));
  }
  return ConstrainedSystem(c.n, expr::parse(c.hamiltonian, c.n), std::move(constraints), std::move(forces));
}

Vec parse_vector(std::string_view text) {
  const auto parts = split(text, ',');
  Vec v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_double(parts[i], "vector entry");
  return v;
}

}  // namespace contactnh
