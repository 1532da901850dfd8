#pragma once

// Experiment configuration: JSON in, validated struct out.  Every validation
// error names the offending field.

#include <algorithm>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "io.hpp"
#include "markov.hpp"
#include "presets.hpp"

namespace pinchlab {

class ConfigError : public DomainError {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : DomainError("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline const std::vector<std::string>& knownStages() {
  static const std::vector<std::string> s{"check-domination", "find-pinching", "holonomy-audit", "estimate-measure",
                                          "exponent",         "su-defect",     "perturb",        "re-evaluate"};
  return s;
}

struct Tolerances {
  double holonomy = 1e-8;
  double defect = 1e-10;
  double margin = 0.01;
  double epsilon = 0.1;
  double domination = 1.0;  // c in the domination check
  double support = 1e-3;    // neighbourhood radius for the fiber support report
};

struct Sampling {
  std::size_t points = 100;
  long coreLength = 100;
  long depth = 200;
  std::size_t atomCount = 256;
  std::size_t pairCount = 100;
  std::size_t exponentSamples = 100;
  long nMax = 150;
  std::vector<double> ladder{1e-2, 1e-4, 1e-6, 1e-8};
  long maxPeriod = 3;
};

struct PerturbationSpec {
  long M = 2;
  long Mp = 4;
  Word bridgeOut{1};
  Word bridgeIn{};
};

struct ExperimentConfig {
  std::string name = "experiment";
  Sft sft = Sft::fullShift(2);
  Matrix markov{{0.5, 0.5}, {0.5, 0.5}};
  double metricBase = 2.0;
  nlohmann::json cocycle = {{"preset", "rotation"}};
  std::vector<std::string> stages = knownStages();
  Tolerances tol;
  Sampling sampling;
  PerturbationSpec perturbation;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";
  std::filesystem::path baseDir = ".";  // relative cocycle directories resolve here
};

namespace detail {

template <class T>
T field(const nlohmann::json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + key, e.what());
  }
}

inline void positive(double v, const std::string& name) {
  if (!(v > 0.0)) throw ConfigError(name, "must be positive, got " + formatNumber(v));
}

inline void knownKeys(const nlohmann::json& j, const std::string& path, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) throw ConfigError(path + k, "unknown key");
  }
}

inline Word wordField(const nlohmann::json& j, const std::string& key, const std::string& path, Word fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return wordFromString(j.at(key).get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(path + key, e.what());
  }
}

inline Sft parseShift(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "full2") return Sft::fullShift(2);
    if (s == "golden") return Sft::goldenMean();
    throw ConfigError("shift", "unknown shift '" + s + "' (use full2, golden or an object)");
  }
  if (j.contains("full")) return Sft::fullShift(field<int>(j, "full", "shift.", 2));
  try {
    return sftFromJson(j);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("shift", e.what());
  }
}

inline CircleMap parseMap(const nlohmann::json& j, const std::string& path) {
  const auto kind = field<std::string>(j, "kind", path + ".", "");
  if (kind == "rotation") return CircleMap::rotation(field<double>(j, "angle", path + ".", 0.0));
  if (kind == "pwl") {
    std::vector<Knot> ks;
    for (const auto& k : j.at("knots")) ks.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
    return makePwl(ks);
  }
  if (kind == "mobius") {
    const auto m = j.at("matrix");
    return makeMobius(m.at(0).at(0).get<double>(), m.at(0).at(1).get<double>(), m.at(1).at(0).get<double>(),
                      m.at(1).at(1).get<double>(), field<std::size_t>(j, "grid", path + ".", 1024));
  }
  if (kind == "pinched") return pinchedMap(field<double>(j, "attractorSlope", path + ".", 0.84));
  throw ConfigError(path + ".kind", "unknown map kind '" + kind + "'");
}

}  // namespace detail

// Builds the cocycle named by the config's cocycle block.
inline Cocycle buildCocycle(const ExperimentConfig& cfg) {
  const auto& j = cfg.cocycle;
  try {
    if (j.contains("preset")) {
      const auto name = j.at("preset").get<std::string>();
      if (name == "mixed") return mixedPreset(cfg.sft, detail::field<double>(j, "attractorSlope", "cocycle.", 0.84));
      if (name == "mobius")
        return mobiusPreset(cfg.sft, detail::field<double>(j, "lambda", "cocycle.", 2.0),
                            detail::field<std::size_t>(j, "grid", "cocycle.", 1024));
      if (name == "rotation" || name == "isometric") return presetByName(name, cfg.sft);
      throw ConfigError("cocycle.preset", "unknown preset '" + name + "'");
    }
    if (j.contains("directory")) {
      std::filesystem::path dir = j.at("directory").get<std::string>();
      if (dir.is_relative()) dir = cfg.baseDir / dir;
      return readCocycle(dir);
    }
    if (j.contains("table")) {
      const int r = detail::field<int>(j, "range", "cocycle.", 0);
      const auto& table = j.at("table");
      return Cocycle::centered(cfg.sft, r, [&](const Word& w) {
        const std::string key = wordToString(w);
        if (!table.contains(key)) throw ConfigError("cocycle.table", "missing window " + key);
        return detail::parseMap(table.at(key), "cocycle.table." + key);
      });
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cocycle", e.what());
  }
  throw ConfigError("cocycle", "needs one of preset, table or directory");
}

inline ExperimentConfig parseConfig(const nlohmann::json& j) {
  using detail::field;
  using detail::positive;
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  detail::knownKeys(j, "", {"name", "shift", "markov", "metricBase", "cocycle", "stages", "tolerances", "sampling",
                            "perturbation", "seed", "output"});
  ExperimentConfig c;
  c.name = field<std::string>(j, "name", "", c.name);
  if (j.contains("shift")) c.sft = detail::parseShift(j.at("shift"));
  if (j.contains("markov")) {
    c.markov = field<Matrix>(j, "markov", "", c.markov);
  } else {
    // Uniform over allowed transitions.
    const int k = c.sft.alphabetSize();
    c.markov.assign(k, std::vector<double>(k, 0.0));
    for (int a = 0; a < k; ++a) {
      int n = 0;
      for (int b = 0; b < k; ++b) n += c.sft.transitions()[a][b];
      for (int b = 0; b < k; ++b) c.markov[a][b] = c.sft.transitions()[a][b] ? 1.0 / n : 0.0;
    }
  }
  c.metricBase = field<double>(j, "metricBase", "", c.metricBase);
  if (!(c.metricBase > 1.0)) throw ConfigError("metricBase", "must exceed 1");
  if (j.contains("cocycle")) c.cocycle = j.at("cocycle");
  if (j.contains("stages")) {
    c.stages = field<std::vector<std::string>>(j, "stages", "", {});
    for (const auto& s : c.stages)
      if (std::find(knownStages().begin(), knownStages().end(), s) == knownStages().end())
        throw ConfigError("stages", "unknown stage '" + s + "'");
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    detail::knownKeys(t, "tolerances.", {"holonomy", "defect", "margin", "epsilon", "domination", "support"});
    c.tol.holonomy = field<double>(t, "holonomy", "tolerances.", c.tol.holonomy);
    c.tol.defect = field<double>(t, "defect", "tolerances.", c.tol.defect);
    c.tol.margin = field<double>(t, "margin", "tolerances.", c.tol.margin);
    c.tol.epsilon = field<double>(t, "epsilon", "tolerances.", c.tol.epsilon);
    c.tol.domination = field<double>(t, "domination", "tolerances.", c.tol.domination);
    c.tol.support = field<double>(t, "support", "tolerances.", c.tol.support);
  }
  positive(c.tol.holonomy, "tolerances.holonomy");
  positive(c.tol.defect, "tolerances.defect");
  positive(c.tol.margin, "tolerances.margin");
  positive(c.tol.epsilon, "tolerances.epsilon");
  positive(c.tol.domination, "tolerances.domination");
  positive(c.tol.support, "tolerances.support");
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    detail::knownKeys(s, "sampling.", {"points", "coreLength", "depth", "atomCount", "pairCount", "exponentSamples",
                                       "nMax", "ladder", "maxPeriod"});
    auto& o = c.sampling;
    o.points = field<std::size_t>(s, "points", "sampling.", o.points);
    o.coreLength = field<long>(s, "coreLength", "sampling.", o.coreLength);
    o.depth = field<long>(s, "depth", "sampling.", o.depth);
    o.atomCount = field<std::size_t>(s, "atomCount", "sampling.", o.atomCount);
    o.pairCount = field<std::size_t>(s, "pairCount", "sampling.", o.pairCount);
    o.exponentSamples = field<std::size_t>(s, "exponentSamples", "sampling.", o.exponentSamples);
    o.nMax = field<long>(s, "nMax", "sampling.", o.nMax);
    o.ladder = field<std::vector<double>>(s, "ladder", "sampling.", o.ladder);
    o.maxPeriod = field<long>(s, "maxPeriod", "sampling.", o.maxPeriod);
  }
  const auto& o = c.sampling;
  if (o.points == 0) throw ConfigError("sampling.points", "must be positive");
  if (o.coreLength < 1) throw ConfigError("sampling.coreLength", "must be positive");
  if (o.depth < 1) throw ConfigError("sampling.depth", "must be at least 1");
  if (o.atomCount == 0) throw ConfigError("sampling.atomCount", "must be positive");
  if (o.pairCount == 0) throw ConfigError("sampling.pairCount", "must be positive");
  if (o.exponentSamples == 0) throw ConfigError("sampling.exponentSamples", "must be positive");
  if (o.nMax < 50) throw ConfigError("sampling.nMax", "must be at least 50");
  if (o.ladder.empty()) throw ConfigError("sampling.ladder", "must not be empty");
  for (std::size_t i = 0; i < o.ladder.size(); ++i)
    if (!(o.ladder[i] > 0.0) || (i && !(o.ladder[i] < o.ladder[i - 1])))
      throw ConfigError("sampling.ladder", "must be positive and strictly decreasing");
  if (o.maxPeriod < 1) throw ConfigError("sampling.maxPeriod", "must be at least 1");
  if (j.contains("perturbation")) {
    const auto& p = j.at("perturbation");
    detail::knownKeys(p, "perturbation.", {"M", "Mprime", "bridgeOut", "bridgeIn"});
    c.perturbation.M = field<long>(p, "M", "perturbation.", c.perturbation.M);
    c.perturbation.Mp = field<long>(p, "Mprime", "perturbation.", c.perturbation.Mp);
    c.perturbation.bridgeOut = detail::wordField(p, "bridgeOut", "perturbation.", c.perturbation.bridgeOut);
    c.perturbation.bridgeIn = detail::wordField(p, "bridgeIn", "perturbation.", c.perturbation.bridgeIn);
  }
  if (c.perturbation.M < 0) throw ConfigError("perturbation.M", "must be nonnegative");
  if (c.perturbation.Mp <= c.perturbation.M) throw ConfigError("perturbation.Mprime", "must exceed M");
  c.seed = field<std::uint64_t>(j, "seed", "", c.seed);
  c.output = field<std::string>(j, "output", "", c.output.string());
  return c;
}

inline ExperimentConfig loadConfig(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(readText(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error in ") + path.string() + ": " + e.what());
  }
  ExperimentConfig c = parseConfig(j);
  c.baseDir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return c;
}

}  // namespace pinchlab
