#pragma once

// CSV tables, cocycle directories (header + one knot file per window) and
// disintegration dumps.  Numbers are printed with 17 significant digits so
// files round-trip exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "cocycle.hpp"
#include "disintegration.hpp"

namespace pinchlab {

inline std::string formatNumber(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  template <class... Cells>
  void add(const Cells&... cells) {
    std::vector<std::string> row;
    (row.push_back(cell(cells)), ...);
    if (row.size() != header_.size()) throw DomainError("csv row width does not match the header");
    rows_.push_back(std::move(row));
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += quote(r[i]);
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  void write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot write " + path.string());
    f << str();
  }

 private:
  static std::string cell(double v) { return formatNumber(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "true" : "false"; }
  template <class T>
  static std::string cell(const T& v) requires std::is_integral_v<T> {
    return std::to_string(v);
  }

  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline void writeText(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write " + path.string());
  f << text;
}

inline std::string readText(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Knot list "t,v" per line after a header line.
inline std::string circleMapCsv(const CircleMap& f) {
  CsvTable t({"t", "lift"});
  for (const Knot& k : f.knots()) t.add(k.t, k.v);
  return t.str();
}

inline CircleMap circleMapFromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<Knot> ks;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("bad knot line '" + line + "'");
    ks.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return makePwl(ks);
}

inline nlohmann::json sftToJson(const Sft& sft) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& row : sft.transitions()) {
    nlohmann::json r = nlohmann::json::array();
    for (bool b : row) r.push_back(b ? 1 : 0);
    a.push_back(r);
  }
  return {{"alphabet", sft.alphabetSize()}, {"transitions", a}};
}

inline Sft sftFromJson(const nlohmann::json& j) {
  const int k = j.at("alphabet").get<int>();
  std::vector<std::vector<bool>> t;
  for (const auto& row : j.at("transitions")) {
    std::vector<bool> r;
    for (const auto& v : row) r.push_back(v.get<int>() != 0);
    t.push_back(r);
  }
  return Sft(k, t);
}

// dir/cocycle.json holds (k, A, window, alpha, beta); dir/maps/<word>.csv the knots.
inline void writeCocycle(const std::filesystem::path& dir, const Cocycle& F) {
  std::filesystem::create_directories(dir / "maps");
  nlohmann::json h = {{"shift", sftToJson(F.base())},
                      {"range", F.range()},
                      {"windowStart", F.windowStart()},
                      {"windowLength", F.windowLength()},
                      {"alpha", F.alpha()},
                      {"beta", F.beta()},
                      {"windows", F.windows().size()}};
  writeText(dir / "cocycle.json", h.dump(2) + "\n");
  for (const Word& w : F.windows()) writeText(dir / "maps" / (wordToString(w) + ".csv"), circleMapCsv(F.entry(w)));
}

inline Cocycle readCocycle(const std::filesystem::path& dir) {
  const auto h = nlohmann::json::parse(readText(dir / "cocycle.json"));
  return Cocycle(
      sftFromJson(h.at("shift")), h.at("windowStart").get<long>(), h.at("windowLength").get<std::size_t>(),
      [&](const Word& w) { return circleMapFromCsv(readText(dir / "maps" / (wordToString(w) + ".csv"))); },
      h.at("alpha").get<double>(), h.at("beta").get<double>());
}

// One row per atom (or CDF knot) keyed by the serialized point.
inline CsvTable disintegrationCsv(const Disintegration& D) {
  CsvTable t({"point", "kind", "index", "position", "weight"});
  for (std::size_t i = 0; i < D.size(); ++i) {
    const auto& m = D.measures()[i];
    const std::string key = D.points()[i].str();
    if (m.isAtomic()) {
      for (std::size_t a = 0; a < m.atomList().size(); ++a)
        t.add(key, "atom", a, m.atomList()[a].position, m.atomList()[a].weight);
    } else {
      for (std::size_t a = 0; a < m.cdfKnots().size(); ++a)
        t.add(key, "cdf", a, m.cdfKnots()[a].x, m.cdfKnots()[a].c);
    }
  }
  return t;
}

}  // namespace pinchlab
