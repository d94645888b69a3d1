#include "sceneforge/scene/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sceneforge/util/error.hpp"

namespace sceneforge {

void RunConfig::validate() const {
  auto need = [](bool ok, const char* field) {
    if (!ok) fail(ErrorCode::precondition, std::string("config: invalid ") + field);
  };
  for (auto [v, name] : {std::pair{lambda_mask, "lambda_mask"}, {lambda_depth, "lambda_depth"},
                         {lambda_normal, "lambda_normal"}, {lambda_pene, "lambda_pene"},
                         {lambda_touch, "lambda_touch"}, {lambda_stable, "lambda_stable"}})
    need(std::isfinite(v) && v >= 0, name);
  need(samples_per_instance >= 1, "samples_per_instance");
  need(!sampler_kinds.empty(), "sampler_kinds");
  need(stable_translation > 0, "stable_translation");
  need(stable_rotation > 0, "stable_rotation");
  need(sim_duration > 0, "sim_duration");
  need(sim_dt > 0 && sim_dt <= 5e-3, "sim_dt");
  need(grid_resolution >= 8, "grid_resolution");
  need(views >= 1, "views");
  need(virtual_views >= 0, "virtual_views");
  need(fscore_tau > 0, "fscore_tau");
  need(eval_samples >= 1, "eval_samples");
  need(density > 0, "density");
}

namespace {

using Scalar = std::variant<bool, std::int64_t, double, std::string>;

struct LineParser {
  std::string_view s;
  std::size_t pos = 0;
  const std::string& where;

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::parse, where + ": " + what);
  }
  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos >= s.size() || s[pos] == '#';
  }

  Scalar scalar() {
    skip_ws();
    if (pos >= s.size()) error("missing value");
    if (s[pos] == '"') {
      std::string out;
      for (++pos; pos < s.size() && s[pos] != '"'; ++pos) {
        if (s[pos] == '\\' && pos + 1 < s.size()) {
          const char c = s[++pos];
          out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
        } else {
          out += s[pos];
        }
      }
      if (pos >= s.size()) error("unterminated string");
      ++pos;
      return out;
    }
    std::size_t end = pos;
    while (end < s.size() && s[end] != ',' && s[end] != ']' && s[end] != '#' && s[end] != ' ' &&
           s[end] != '\t')
      ++end;
    std::string tok(s.substr(pos, end - pos));
    pos = end;
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::erase(tok, '_');
    std::int64_t iv = 0;
    auto [p1, e1] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
    if (e1 == std::errc() && p1 == tok.data() + tok.size()) return iv;
    double dv = 0;
    auto [p2, e2] = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
    if (e2 == std::errc() && p2 == tok.data() + tok.size()) return dv;
    error("cannot parse value '" + tok + "'");
  }

  TomlValue value() {
    skip_ws();
    if (pos < s.size() && s[pos] == '[') {
      ++pos;
      std::vector<Scalar> items;
      skip_ws();
      if (pos < s.size() && s[pos] == ']') {
        ++pos;
        return items;
      }
      while (true) {
        items.push_back(scalar());
        skip_ws();
        if (pos >= s.size()) error("unterminated array");
        if (s[pos] == ']') {
          ++pos;
          break;
        }
        if (s[pos] != ',') error("expected ',' in array");
        ++pos;
      }
      return items;
    }
    return std::visit([](auto&& v) -> TomlValue { return v; }, scalar());
  }
};

double as_double(const TomlValue& v, const std::string& key) {
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  fail(ErrorCode::parse, "config key '" + key + "': expected a number");
}

std::int64_t as_int(const TomlValue& v, const std::string& key) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  fail(ErrorCode::parse, "config key '" + key + "': expected an integer");
}

}  // namespace

std::map<std::string, TomlValue> parse_toml_subset(const std::string& text,
                                                  const std::string& name) {
  std::map<std::string, TomlValue> out;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string where = name + ":" + std::to_string(lineno);
    LineParser p{line, 0, where};
    if (p.at_end_or_comment()) continue;
    if (line[p.pos] == '[') {
      if (line.find(']', p.pos) == std::string::npos) p.error("unterminated table header");
      continue;
    }
    const auto eq = line.find('=', p.pos);
    if (eq == std::string::npos) p.error("expected key = value");
    std::string key = line.substr(p.pos, eq - p.pos);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (key.empty()) p.error("empty key");
    p.pos = eq + 1;
    TomlValue v = p.value();
    if (!p.at_end_or_comment()) p.error("trailing characters after value");
    if (!out.emplace(key, std::move(v)).second) p.error("duplicate key '" + key + "'");
  }
  return out;
}

RunConfig config_from_toml(const std::string& text, const std::string& name) {
  RunConfig c;
  const std::map<std::string, double*> reals{
      {"lambda_mask", &c.lambda_mask},     {"lambda_depth", &c.lambda_depth},
      {"lambda_normal", &c.lambda_normal}, {"lambda_pene", &c.lambda_pene},
      {"lambda_touch", &c.lambda_touch},   {"lambda_stable", &c.lambda_stable},
      {"stable_translation", &c.stable_translation},
      {"stable_rotation", &c.stable_rotation},
      {"sim_duration", &c.sim_duration},   {"sim_dt", &c.sim_dt},
      {"fscore_tau", &c.fscore_tau},       {"density", &c.density},
  };
  const std::map<std::string, int*> ints{
      {"samples_per_instance", &c.samples_per_instance},
      {"grid_resolution", &c.grid_resolution},
      {"views", &c.views},
      {"virtual_views", &c.virtual_views},
      {"eval_samples", &c.eval_samples},
  };
  for (const auto& [key, v] : parse_toml_subset(text, name)) {
    if (auto it = reals.find(key); it != reals.end()) {
      *it->second = as_double(v, key);
    } else if (auto jt = ints.find(key); jt != ints.end()) {
      *jt->second = static_cast<int>(as_int(v, key));
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(as_int(v, key));
    } else if (key == "sampler_kinds") {
      const auto* arr = std::get_if<std::vector<Scalar>>(&v);
      if (!arr) fail(ErrorCode::parse, "config key 'sampler_kinds': expected an array");
      c.sampler_kinds.clear();
      for (const auto& item : *arr) {
        const auto* s = std::get_if<std::string>(&item);
        if (!s) fail(ErrorCode::parse, "config key 'sampler_kinds': expected strings");
        c.sampler_kinds.push_back(*s);
      }
    } else {
      fail(ErrorCode::parse, name + ": unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return config_from_toml(ss.str(), path.string());
}

}  // namespace sceneforge
