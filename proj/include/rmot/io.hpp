#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmot/duality.hpp"
#include "rmot/measures.hpp"
#include "rmot/packing.hpp"

// File formats for the command-line front end.
namespace rmot::io {

using nlohmann::json;
using measures::CostSpec;
using measures::DiscreteMeasure;
using measures::GroundGrid;
using measures::Point;

// Malformed input: message carries the file path and, when known, the line.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline json load_json(const std::string& path) {
  std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path + ":" + std::to_string(line_of(text, e.byte)) + ": malformed JSON (" + e.what() + ")");
  }
}

namespace detail {

inline const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  return j.at(key);
}

template <class T>
T as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
}

}  // namespace detail

// {"dim": d, "points": [[...], ...], "masses": [...]}
inline DiscreteMeasure measure_from_json(const json& j, const std::string& where = "measure") {
  int dim = detail::as<int>(detail::need(j, "dim", where), where + ".dim");
  auto pts = detail::as<std::vector<Point>>(detail::need(j, "points", where), where + ".points");
  auto ms = detail::as<std::vector<double>>(detail::need(j, "masses", where), where + ".masses");
  try {
    return DiscreteMeasure(dim, pts, ms, 1e-9);
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  }
}

inline json measure_to_json(const DiscreteMeasure& m) {
  return {{"dim", m.dim()}, {"points", m.points()}, {"masses", m.masses()}};
}

// Costs as JSON objects {"kind": ..., ...} or short strings: coulomb, riesz:p, exp:a, const:c, hard_sphere,
// and any of these followed by @h for truncation at height h.
inline CostSpec cost_from_json(const json& j, const std::string& where = "cost");

inline CostSpec cost_from_string(const std::string& s) {
  auto at = s.find('@');
  if (at != std::string::npos) return CostSpec::truncated(cost_from_string(s.substr(0, at)), std::stod(s.substr(at + 1)));
  auto colon = s.find(':');
  std::string name = s.substr(0, colon);
  double param = colon == std::string::npos ? std::nan("") : std::stod(s.substr(colon + 1));
  auto need_param = [&] {
    if (std::isnan(param)) throw InputError("cost '" + s + "' needs a parameter (name:value)");
    return param;
  };
  if (name == "coulomb") return CostSpec::coulomb();
  if (name == "riesz") return CostSpec::riesz(need_param());
  if (name == "exp" || name == "exponential") return CostSpec::exponential(need_param());
  if (name == "const" || name == "constant") return CostSpec::constant(need_param());
  if (name == "hard_sphere") return CostSpec::hard_sphere();
  throw InputError("unknown cost '" + s + "'");
}

inline CostSpec cost_from_json(const json& j, const std::string& where) {
  if (j.is_string()) return cost_from_string(j.get<std::string>());
  auto kind = detail::as<std::string>(detail::need(j, "kind", where), where + ".kind");
  try {
    if (kind == "table" || kind == "custom_sampled") {
      auto rs = detail::as<std::vector<double>>(detail::need(j, "radii", where), where + ".radii");
      auto vs = detail::as<std::vector<double>>(detail::need(j, "values", where), where + ".values");
      if (kind == "table") return CostSpec::table(rs, vs, j.value("cutoff", kInf));
      return CostSpec::custom_sampled(rs, vs, j.value("tail_bound", std::numeric_limits<double>::quiet_NaN()));
    }
    if (kind == "truncated")
      return CostSpec::truncated(cost_from_json(detail::need(j, "base", where), where + ".base"),
                                 detail::as<double>(detail::need(j, "h", where), where + ".h"));
    std::string s = kind;
    if (j.contains("param")) s += ":" + std::to_string(detail::as<double>(j.at("param"), where + ".param"));
    return cost_from_string(s);
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  }
}

// --cost accepts a path to a JSON file or a short string
inline CostSpec load_cost(const std::string& arg) {
  if (arg.size() > 5 && arg.substr(arg.size() - 5) == ".json") return cost_from_json(load_json(arg), arg);
  return cost_from_string(arg);
}

inline DiscreteMeasure load_measure(const std::string& path) { return measure_from_json(load_json(path), path); }

// {"dim": d, "nodes": [[...], ...], "v": [...]}
struct GridInput {
  GroundGrid grid{1, {}};
  std::vector<double> v;
};

inline GridInput load_grid(const std::string& path) {
  json j = load_json(path);
  GridInput g;
  int dim = detail::as<int>(detail::need(j, "dim", path), path + ".dim");
  auto nodes = detail::as<std::vector<Point>>(detail::need(j, "nodes", path), path + ".nodes");
  g.v = detail::as<std::vector<double>>(detail::need(j, "v", path), path + ".v");
  if (g.v.size() != nodes.size()) throw InputError(path + ": 'v' and 'nodes' differ in length");
  try {
    g.grid = GroundGrid(dim, nodes);
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ": " + e.what());
  }
  return g;
}

// 1-D measure for W2: {"pieces": [[a, b, mass], ...]}, a == b for atoms
inline packing::Measure1D load_measure1d(const std::string& path) {
  json j = load_json(path);
  auto ps = detail::as<std::vector<std::vector<double>>>(detail::need(j, "pieces", path), path + ".pieces");
  packing::Measure1D m;
  for (const auto& p : ps) {
    if (p.size() != 3 || p[1] < p[0] || p[2] < 0) throw InputError(path + ": each piece is [a, b, mass] with a <= b");
    m.pieces.push_back({p[0], p[1], p[2]});
  }
  try {
    m.normalize();
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ": " + e.what());
  }
  return m;
}

// "a,b,c" or "lo:hi:n" (n evenly spaced values including both ends)
inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  try {
    if (std::count(s.begin(), s.end(), ':') == 2) {
      auto p1 = s.find(':'), p2 = s.find(':', p1 + 1);
      double lo = std::stod(s.substr(0, p1)), hi = std::stod(s.substr(p1 + 1, p2 - p1 - 1));
      int n = std::stoi(s.substr(p2 + 1));
      if (n < 1) throw InputError("range '" + s + "' needs n >= 1");
      if (n == 1) return {lo};
      return linspace(lo, hi, n);
    }
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  } catch (const std::logic_error&) {
    throw InputError("cannot parse number list '" + s + "'");
  }
  return out;
}

// locale-independent number formatting, 15 significant digits
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

inline json jnum(double x) {
  if (std::isfinite(x)) return x;
  return num(x);
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) throw std::logic_error("csv row has the wrong width");
    rows_.push_back(cells);
  }
  std::string str() const {
    std::string s;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
      s += "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return s;
  }
  json to_json() const {
    json a = json::array();
    for (const auto& r : rows_) {
      json o;
      for (std::size_t i = 0; i < r.size(); ++i) o[header_[i]] = r[i];
      a.push_back(o);
    }
    return a;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace rmot::io
