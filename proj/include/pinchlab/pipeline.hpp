#pragma once

// Config-driven experiment stages.  Each stage writes its CSV tables into the
// output directory and appends a record to summary.json; wall-clock data goes
// to metadata.json only, so reruns with the same config reproduce every other
// file byte for byte.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "exponent.hpp"
#include "holonomy.hpp"
#include "io.hpp"
#include "pinch.hpp"
#include "states.hpp"

namespace pinchlab {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitPrecondition = 2, kExitNonConvergence = 3 };

// FNV-1a, used to tag outputs with the config they came from.
inline std::string configHash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct PerturbationOutcome {
  HomoclinicPoint homoclinic;
  EtaMaps eta;
  BumpFunction bump;
  DeltaChoice delta;
  Cocycle perturbed;
  PerturbationReport report;
  EtaMaps etaPerturbed;
  double eq1Twisted = 0.0;  // eta1_g vs f_z^{-1} o R_{-delta} o f_z o eta1_f
  double eq1Literal = 0.0;  // eta1_g vs R_delta o eta1_f
  double eq2 = 0.0;         // eta2_g vs eta2_f
};

// Objects shared between stages, built on first use.
class PipelineContext {
 public:
  explicit PipelineContext(ExperimentConfig cfg) : cfg_(std::move(cfg)) {}

  const ExperimentConfig& config() const { return cfg_; }

  const MarkovMeasure& measure() {
    if (!mu_) {
      try {
        mu_ = markovMeasure(cfg_.sft, cfg_.markov, cfg_.metricBase);
      } catch (const DomainError& e) {
        throw ConfigError("markov", e.what());
      }
    }
    return *mu_;
  }

  const Cocycle& cocycle() {
    if (!F_) F_ = buildCocycle(cfg_);
    return *F_;
  }

  const std::optional<PinchingWitness>& witness() {
    if (!witnessDone_) {
      witness_ = detectPinching(cocycle(), cfg_.sampling.maxPeriod);
      witnessDone_ = true;
    }
    return witness_;
  }

  // Sampled base points, plus the pinching orbit point when there is one.
  const std::vector<SymbolicPoint>& points() {
    if (!points_) {
      auto pts = sampleBasePoints(measure(), cfg_.sampling.points, cfg_.sampling.coreLength, cfg_.seed);
      if (witness()) pts.push_back(witness()->x0);
      points_ = std::move(pts);
    }
    return *points_;
  }

  const Disintegration& disintegration() {
    if (!D_) D_ = estimate(cocycle());
    return *D_;
  }

  Disintegration estimate(const Cocycle& F) {
    return estimateInvariantDisintegration(F, measure(), cfg_.sampling.depth, cfg_.sampling.atomCount, points(),
                                           cfg_.seed, cfg_.name);
  }

  ExponentOptions exponentOptions() const {
    ExponentOptions o;
    o.nMax = cfg_.sampling.nMax;
    o.ladder = cfg_.sampling.ladder;
    return o;
  }

  DefectOptions defectOptions() const {
    DefectOptions o;
    o.pairCount = cfg_.sampling.pairCount;
    o.tol = cfg_.tol.defect;
    o.seed = cfg_.seed;
    return o;
  }

  const PerturbationOutcome& perturbation() {
    if (!pert_) pert_ = buildPerturbation();
    return *pert_;
  }

 private:
  PerturbationOutcome buildPerturbation() {
    const auto& w = witness();
    if (!w)
      throw DomainError("no pinching witness up to period " + std::to_string(cfg_.sampling.maxPeriod));
    const Cocycle& F = cocycle();
    const auto& p = cfg_.perturbation;
    const double tol = cfg_.tol.holonomy;
    const HomoclinicPoint hp = homoclinicPoint(cfg_.sft, w->x0, p.bridgeOut, p.bridgeIn);
    const EtaMaps eta = etaMaps(F, *w, hp, tol);
    const BumpFunction bump = bumpFunction(hp.z, p.M, p.Mp, cfg_.metricBase, w->x0);
    const CircleMap& fz = F.at(hp.z);
    const DeltaChoice dc = chooseDelta(cfg_.tol.epsilon, bump, eta.eta1, eta.eta2, w->attractor, w->repeller,
                                       cfg_.tol.margin, &fz);
    Cocycle G = perturb(F, bump, dc.delta);
    const PerturbationReport rep = perturbationReport(F, G, bump, dc.delta, cfg_.tol.epsilon, cfg_.metricBase, w->x0);
    const EtaMaps etaG = etaMaps(G, *w, hp, tol);
    const CircleMap twisted =
        composeMaps(invertMap(fz), composeMaps(CircleMap::rotation(-dc.delta), composeMaps(fz, eta.eta1)));
    PerturbationOutcome out{hp, eta, bump, dc, std::move(G), rep, etaG, 0.0, 0.0, 0.0};
    out.eq1Twisted = supDistance(etaG.eta1, twisted);
    out.eq1Literal = supDistance(etaG.eta1, composeMaps(CircleMap::rotation(dc.delta), eta.eta1));
    out.eq2 = supDistance(etaG.eta2, eta.eta2);
    return out;
  }

  ExperimentConfig cfg_;
  std::optional<MarkovMeasure> mu_;
  std::optional<Cocycle> F_;
  std::optional<PinchingWitness> witness_;
  bool witnessDone_ = false;
  std::optional<std::vector<SymbolicPoint>> points_;
  std::optional<Disintegration> D_;
  std::optional<PerturbationOutcome> pert_;
};

struct StageResult {
  nlohmann::json outputs = nlohmann::json::object();
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  bool nonConvergent = false;
};

namespace stages {

inline nlohmann::json witnessJson(const std::optional<PinchingWitness>& w) {
  if (!w) return nullptr;
  return {{"x0", w->x0.str()}, {"period", w->period}, {"attractor", w->attractor}, {"repeller", w->repeller}};
}

inline nlohmann::json exponentJson(const ExponentSample& s) {
  return {{"mean", s.mean}, {"stdError", s.stdError}, {"samples", s.values.size()}, {"saturated", s.saturated}};
}

inline nlohmann::json defectJson(const DefectReport& r) {
  return {{"mean", r.mean},           {"max", r.max},         {"stableMean", r.stableMean},
          {"stableMax", r.stableMax}, {"unstableMean", r.unstableMean}, {"unstableMax", r.unstableMax},
          {"skipped", r.skipped},     {"pairs", r.pairs.size()}};
}

inline CsvTable defectCsv(const DefectReport& r) {
  CsvTable t({"id", "side", "x", "y", "defect", "skipped", "error"});
  for (const auto& p : r.pairs) t.add(p.id, toString(p.side), p.x, p.y, p.defect, p.skipped, p.error);
  return t;
}

inline CsvTable exponentCsv(const ExponentSample& fwd, const ExponentSample& bwd) {
  CsvTable t({"sample", "direction", "value"});
  for (std::size_t i = 0; i < fwd.values.size(); ++i) t.add(i, "forward", fwd.values[i]);
  for (std::size_t i = 0; i < bwd.values.size(); ++i) t.add(i, "backward", bwd.values[i]);
  return t;
}

inline StageResult checkDomination(PipelineContext& ctx, const std::filesystem::path& out) {
  const Cocycle& F = ctx.cocycle();
  const double rho = ctx.config().metricBase;
  const auto rep = dominationCheck(F, rho, ctx.config().tol.domination);
  const double factor = std::pow(rho, -F.alpha() * F.beta());
  CsvTable t({"window", "holder", "holder_inverse", "scaled"});
  for (const Word& w : F.windows()) {
    const double hf = holderConstant(F.entry(w), F.beta()), hi = holderConstant(F.inverseEntry(w), F.beta());
    t.add(wordToString(w), hf, hi, std::max(hf, hi) * factor);
  }
  t.write(out / "domination.csv");
  StageResult r;
  r.outputs = {{"worst", rep.worst},
               {"dominated", rep.dominated},
               {"c", ctx.config().tol.domination},
               {"worstWindow", wordToString(rep.worstWindow)},
               {"worstIsInverse", rep.worstIsInverse},
               {"windows", F.windows().size()}};
  r.files = {"domination.csv"};
  return r;
}

inline StageResult findPinching(PipelineContext& ctx, const std::filesystem::path& out) {
  const auto& w = ctx.witness();
  CsvTable t({"x0", "period", "attractor", "repeller"});
  if (w) t.add(w->x0.str(), w->period, w->attractor, w->repeller);
  t.write(out / "pinching.csv");
  StageResult r;
  r.outputs = {{"maxPeriod", ctx.config().sampling.maxPeriod}, {"witness", witnessJson(w)}};
  r.files = {"pinching.csv"};
  return r;
}

inline StageResult holonomyAudit(PipelineContext& ctx, const std::filesystem::path& out) {
  const Cocycle& F = ctx.cocycle();
  StageResult r;
  const auto dom = dominationCheck(F, ctx.config().metricBase, ctx.config().tol.domination);
  if (!dom.dominated)
    r.warnings.push_back("cocycle is not dominated (worst " + formatNumber(dom.worst) +
                         "); holonomy convergence is not guaranteed");
  AuditOptions opt;
  opt.pairCount = ctx.config().sampling.pairCount;
  opt.tol = ctx.config().tol.holonomy;
  opt.seed = ctx.config().seed;
  CsvTable t({"id", "side", "truncation", "residual", "axiom_a", "axiom_b", "inverse", "failed", "error"});
  CsvTable c({"side", "base_distance", "map_distance"});
  for (Side side : {Side::Stable, Side::Unstable}) {
    const auto a = holonomyAxiomResiduals(F, ctx.measure(), side, opt);
    for (const auto& p : a.pairs)
      t.add(p.id, toString(side), p.truncation, p.residual, p.axiomA, p.axiomB, p.inverse, p.failed, p.error);
    for (const auto& s : a.continuity) c.add(toString(side), s.baseDistance, s.mapDistance);
    double worstRatio = 0.0;
    for (const auto& p : a.pairs) worstRatio = std::max(worstRatio, p.failed ? 0.0 : p.residual);
    r.outputs[toString(side)] = {{"maxAxiomA", a.maxAxiomA},     {"maxAxiomB", a.maxAxiomB},
                                 {"maxInverse", a.maxInverse},   {"failures", a.failures},
                                 {"nonConvergent", a.nonConvergent}, {"maxFinalResidual", worstRatio}};
    r.nonConvergent = r.nonConvergent || a.nonConvergent > 0;
  }
  t.write(out / "holonomy.csv");
  c.write(out / "holonomy_continuity.csv");
  r.files = {"holonomy.csv", "holonomy_continuity.csv"};
  return r;
}

inline StageResult estimateMeasure(PipelineContext& ctx, const std::filesystem::path& out) {
  const Disintegration& D = ctx.disintegration();
  disintegrationCsv(D).write(out / "measure.csv");
  const auto res = estimatorInvarianceResidual(ctx.cocycle(), D);
  StageResult r;
  r.outputs = {{"points", D.size()},
               {"depth", D.meta().depth},
               {"atomCount", D.meta().atomCount},
               {"invarianceMean", res.mean},
               {"invarianceMax", res.max}};
  if (const auto& w = ctx.witness()) {
    const auto s = periodicFiberSupport(ctx.cocycle(), D, *w, ctx.config().tol.support);
    r.outputs["fiberSupport"] = {{"invarianceResidual", s.invarianceResidual},
                                 {"massNearAttractor", s.massNearAttractor},
                                 {"massNearRepeller", s.massNearRepeller},
                                 {"outsideMass", s.outsideMass}};
  }
  r.files = {"measure.csv"};
  return r;
}

inline StageResult exponent(PipelineContext& ctx, const std::filesystem::path& out) {
  const auto& cfg = ctx.config();
  const auto opt = ctx.exponentOptions();
  const auto fwd = measureExponent(ctx.cocycle(), ctx.disintegration(), ctx.measure(), cfg.sampling.exponentSamples,
                                   cfg.seed, opt, false);
  const auto bwd = measureExponent(ctx.cocycle(), ctx.disintegration(), ctx.measure(), cfg.sampling.exponentSamples,
                                   cfg.seed, opt, true);
  exponentCsv(fwd, bwd).write(out / "exponent.csv");
  StageResult r;
  r.outputs = {{"forward", exponentJson(fwd)}, {"backward", exponentJson(bwd)}};
  if (const auto& w = ctx.witness()) {
    const auto a = contractionExponent(ctx.cocycle(), w->x0, w->attractor, opt);
    r.outputs["atAttractor"] = {{"value", a.value}, {"allSaturated", a.allSaturated}};
  }
  r.files = {"exponent.csv"};
  return r;
}

inline StageResult suDefect(PipelineContext& ctx, const std::filesystem::path& out) {
  const auto rep = stateDefect(ctx.cocycle(), ctx.disintegration(), ctx.measure(), DefectSide::Both,
                               ctx.defectOptions());
  defectCsv(rep).write(out / "defect.csv");
  StageResult r;
  r.outputs = defectJson(rep);
  r.nonConvergent = rep.nonConvergent > 0;
  r.files = {"defect.csv"};
  return r;
}

inline StageResult perturbStage(PipelineContext& ctx, const std::filesystem::path& out) {
  const auto& p = ctx.perturbation();
  const auto& cfg = ctx.config();
  const auto& rep = p.report;
  // Manifest as key = value lines.
  std::string m;
  auto kv = [&](const std::string& k, const std::string& v) { m += k + " = " + v + "\n"; };
  kv("z", p.homoclinic.z.str());
  kv("k1", std::to_string(p.homoclinic.k1));
  kv("k2", std::to_string(p.homoclinic.k2));
  kv("M", std::to_string(cfg.perturbation.M));
  kv("Mprime", std::to_string(cfg.perturbation.Mp));
  kv("lipschitz_bump", formatNumber(p.bump.lipschitz()));
  kv("delta", formatNumber(p.delta.delta));
  kv("halvings", std::to_string(p.delta.halvings));
  kv("epsilon", formatNumber(cfg.tol.epsilon));
  kv("margin", formatNumber(cfg.tol.margin));
  kv("separation", formatNumber(p.delta.separation));
  kv("max_sup_distance", formatNumber(rep.maxSupDistance));
  kv("max_inverse_sup_distance", formatNumber(rep.maxInverseSup));
  kv("cocycle_distance", formatNumber(rep.distance.total));
  kv("cocycle_distance_sup_term", formatNumber(rep.distance.supTerm));
  kv("cocycle_distance_holder_term", formatNumber(rep.distance.holderTerm));
  kv("holder_term_bound", formatNumber(rep.holderBound));
  kv("lipschitz_preserved", rep.lipschitzPreserved ? "true" : "false");
  kv("x0_window_unchanged", rep.periodicWindowUnchanged ? "true" : "false");
  kv("eta1_twisted_residual", formatNumber(p.eq1Twisted));
  kv("eta1_literal_residual", formatNumber(p.eq1Literal));
  kv("eta2_residual", formatNumber(p.eq2));
  writeText(out / "perturbation.txt", m);
  writeCocycle(out / "perturbed", p.perturbed);
  StageResult r;
  r.outputs = {{"z", p.homoclinic.z.str()},
               {"k1", p.homoclinic.k1},
               {"k2", p.homoclinic.k2},
               {"delta", p.delta.delta},
               {"separation", p.delta.separation},
               {"distance", rep.distance.total},
               {"distanceBelowEpsilon", rep.distance.total < cfg.tol.epsilon},
               {"lipschitzPreserved", rep.lipschitzPreserved},
               {"x0WindowUnchanged", rep.periodicWindowUnchanged},
               {"eta1TwistedResidual", p.eq1Twisted},
               {"eta1LiteralResidual", p.eq1Literal},
               {"eta2Residual", p.eq2},
               {"perturbedRange", p.perturbed.range()}};
  r.files = {"perturbation.txt", "perturbed/cocycle.json"};
  return r;
}

inline StageResult reEvaluate(PipelineContext& ctx, const std::filesystem::path& out) {
  const auto& cfg = ctx.config();
  const Cocycle& G = ctx.perturbation().perturbed;
  const auto dom = dominationCheck(G, cfg.metricBase, cfg.tol.domination);
  const Disintegration D = ctx.estimate(G);
  const auto opt = ctx.exponentOptions();
  const auto fwd = measureExponent(G, D, ctx.measure(), cfg.sampling.exponentSamples, cfg.seed, opt, false);
  const auto bwd = measureExponent(G, D, ctx.measure(), cfg.sampling.exponentSamples, cfg.seed, opt, true);
  const auto def = stateDefect(G, D, ctx.measure(), DefectSide::Both, ctx.defectOptions());
  exponentCsv(fwd, bwd).write(out / "exponent_perturbed.csv");
  defectCsv(def).write(out / "defect_perturbed.csv");
  StageResult r;
  r.outputs = {{"worst", dom.worst},
               {"dominated", dom.dominated},
               {"forward", exponentJson(fwd)},
               {"backward", exponentJson(bwd)},
               {"defect", defectJson(def)}};
  r.nonConvergent = def.nonConvergent > 0;
  r.files = {"exponent_perturbed.csv", "defect_perturbed.csv"};
  return r;
}

}  // namespace stages

inline StageResult runStage(const std::string& name, PipelineContext& ctx, const std::filesystem::path& out) {
  static const std::map<std::string, std::function<StageResult(PipelineContext&, const std::filesystem::path&)>> table{
      {"check-domination", stages::checkDomination}, {"find-pinching", stages::findPinching},
      {"holonomy-audit", stages::holonomyAudit},     {"estimate-measure", stages::estimateMeasure},
      {"exponent", stages::exponent},                {"su-defect", stages::suDefect},
      {"perturb", stages::perturbStage},             {"re-evaluate", stages::reEvaluate}};
  const auto it = table.find(name);
  if (it == table.end()) throw DomainError("unknown stage '" + name + "'");
  return it->second(ctx, out);
}

struct PipelineRun {
  int exitCode = kExitOk;
  nlohmann::json summary;
};

// The config echo used for hashing and reporting (output directory excluded,
// so moving outputs does not change the hash).
inline nlohmann::json configEcho(const ExperimentConfig& c) {
  nlohmann::json markov = c.markov;
  return {{"name", c.name},
          {"shift", sftToJson(c.sft)},
          {"markov", markov},
          {"metricBase", c.metricBase},
          {"cocycle", c.cocycle},
          {"stages", c.stages},
          {"tolerances",
           {{"holonomy", c.tol.holonomy},
            {"defect", c.tol.defect},
            {"margin", c.tol.margin},
            {"epsilon", c.tol.epsilon},
            {"domination", c.tol.domination},
            {"support", c.tol.support}}},
          {"sampling",
           {{"points", c.sampling.points},
            {"coreLength", c.sampling.coreLength},
            {"depth", c.sampling.depth},
            {"atomCount", c.sampling.atomCount},
            {"pairCount", c.sampling.pairCount},
            {"exponentSamples", c.sampling.exponentSamples},
            {"nMax", c.sampling.nMax},
            {"ladder", c.sampling.ladder},
            {"maxPeriod", c.sampling.maxPeriod}}},
          {"perturbation",
           {{"M", c.perturbation.M},
            {"Mprime", c.perturbation.Mp},
            {"bridgeOut", wordToString(c.perturbation.bridgeOut)},
            {"bridgeIn", wordToString(c.perturbation.bridgeIn)}}},
          {"seed", c.seed}};
}

inline std::string isoTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string humanSummary(const nlohmann::json& s) {
  std::string out = "experiment " + s.value("name", std::string()) + " (config " + s.value("configHash", std::string()) + ")\n";
  for (const auto& st : s.at("stages")) {
    out += "  " + st.at("stage").get<std::string>() + ": " + st.at("status").get<std::string>() + "\n";
    for (const auto& w : st.value("warnings", nlohmann::json::array())) out += "    warning: " + w.get<std::string>() + "\n";
    if (st.contains("outputs")) out += "    " + st.at("outputs").dump() + "\n";
    if (st.contains("error")) out += "    error: " + st.at("error").at("message").get<std::string>() + "\n";
  }
  return out;
}

// Runs the given stages in order.  With resume = true, stages recorded as
// completed in an existing summary.json for the same config are not rerun.
inline PipelineRun runPipeline(const ExperimentConfig& cfg, const std::vector<std::string>& stageList,
                               const std::filesystem::path& out, bool resume = false) {
  std::filesystem::create_directories(out);
  const nlohmann::json echo = configEcho(cfg);
  const std::string hash = configHash(echo.dump());
  std::map<std::string, nlohmann::json> previous;
  if (resume && std::filesystem::exists(out / "summary.json")) {
    const auto old = nlohmann::json::parse(readText(out / "summary.json"));
    if (old.value("configHash", std::string()) == hash)
      for (const auto& st : old.at("stages"))
        if (st.at("status") == "ok") previous[st.at("stage").get<std::string>()] = st;
  }

  PipelineContext ctx(cfg);
  PipelineRun run;
  nlohmann::json summary = {{"name", cfg.name}, {"configHash", hash}, {"config", echo}, {"stages", nlohmann::json::array()}};
  nlohmann::json meta = {{"started", isoTimestamp()}, {"stages", nlohmann::json::array()}};

  auto flush = [&] {
    writeText(out / "summary.json", summary.dump(2) + "\n");
    writeText(out / "summary.txt", humanSummary(summary));
    writeText(out / "metadata.json", meta.dump(2) + "\n");
  };

  for (const auto& name : stageList) {
    if (auto it = previous.find(name); it != previous.end()) {
      summary["stages"].push_back(it->second);
      meta["stages"].push_back({{"stage", name}, {"resumed", true}});
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    nlohmann::json rec = {{"stage", name}};
    try {
      const StageResult r = runStage(name, ctx, out);
      rec["status"] = r.nonConvergent ? "non-convergence" : "ok";
      rec["outputs"] = r.outputs;
      rec["files"] = r.files;
      if (!r.warnings.empty()) rec["warnings"] = r.warnings;
      if (r.nonConvergent) {
        rec["error"] = {{"type", "non-convergence"}, {"message", "holonomy iteration hit its cap on some pairs"}};
        run.exitCode = kExitNonConvergence;
      }
    } catch (const ConfigError& e) {
      rec["status"] = "failed";
      rec["error"] = {{"type", "config"}, {"field", e.field()}, {"message", e.what()}};
      run.exitCode = kExitPrecondition;
    } catch (const DomainError& e) {
      rec["status"] = "failed";
      rec["error"] = {{"type", "precondition"}, {"message", e.what()}};
      run.exitCode = kExitPrecondition;
    } catch (const ConvergenceError& e) {
      rec["status"] = "failed";
      rec["error"] = {{"type", "non-convergence"},
                      {"message", e.what()},
                      {"residual", e.residual()},
                      {"iterations", e.iterations()}};
      run.exitCode = kExitNonConvergence;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    meta["stages"].push_back({{"stage", name}, {"seconds", secs}, {"finished", isoTimestamp()}});
    summary["stages"].push_back(rec);
    if (rec.contains("error")) {
      writeText(out / "error.json", nlohmann::json{{"stage", name}, {"error", rec["error"]}}.dump(2) + "\n");
      flush();
      run.summary = summary;
      return run;
    }
    flush();
  }
  meta["finished"] = isoTimestamp();
  if (std::filesystem::exists(out / "error.json")) std::filesystem::remove(out / "error.json");
  flush();
  run.summary = summary;
  return run;
}

}  // namespace pinchlab
