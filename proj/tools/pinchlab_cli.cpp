// pinchlab: run experiment stages from a JSON config.
//
//   pinchlab pipeline --config configs/mixed.json --out out/mixed
//   pinchlab exponent --config configs/mobius.json --seed 7
//
// Exit codes: 0 success, 2 precondition failure, 3 non-convergence.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <pinchlab/config.hpp>
#include <pinchlab/pipeline.hpp>

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tol;
  bool resume = false;
  bool quiet = false;
};

pinchlab::ExperimentConfig resolveConfig(const GlobalFlags& g) {
  pinchlab::ExperimentConfig cfg = g.config.empty() ? pinchlab::parseConfig(nlohmann::json::object())
                                                    : pinchlab::loadConfig(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.output = *g.out;
  if (g.tol) {
    if (!(*g.tol > 0.0)) throw pinchlab::ConfigError("--tol", "must be positive");
    cfg.tol.holonomy = *g.tol;
  }
  return cfg;
}

int run(const GlobalFlags& g, const std::optional<std::string>& stage) {
  try {
    const auto cfg = resolveConfig(g);
    const std::vector<std::string> list = stage ? std::vector<std::string>{*stage} : cfg.stages;
    const auto r = pinchlab::runPipeline(cfg, list, cfg.output, g.resume && !stage);
    if (!g.quiet) std::cout << pinchlab::humanSummary(r.summary);
    for (const auto& st : r.summary.at("stages"))
      if (st.contains("error"))
        std::cerr << "pinchlab: stage " << st.at("stage").get<std::string>() << ": "
                  << st.at("error").at("message").get<std::string>() << "\n";
    return r.exitCode;
  } catch (const pinchlab::DomainError& e) {
    std::cerr << "pinchlab: " << e.what() << "\n";
    return pinchlab::kExitPrecondition;
  } catch (const pinchlab::ConvergenceError& e) {
    std::cerr << "pinchlab: " << e.what() << " (residual " << e.residual() << ")\n";
    return pinchlab::kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "pinchlab: " << e.what() << "\n";
    return pinchlab::kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skew-product experiments: domination, pinching, holonomies, exponents, su-defects"};
  app.fallthrough();
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--tol", g.tol, "holonomy tolerance");
  app.add_flag("-q,--quiet", g.quiet, "do not print the summary");

  const std::vector<std::pair<std::string, std::string>> single{
      {"check-domination", "max Hoelder constant over the table against c"},
      {"find-pinching", "search periodic orbits for an attractor/repeller pair"},
      {"exponent", "fiber exponent averaged over the estimated disintegration"},
      {"holonomy-audit", "axiom residuals of the stable and unstable holonomies"},
      {"perturb", "bump perturbation at a homoclinic point of the pinching orbit"},
      {"su-defect", "Wasserstein defect of the estimated disintegration under holonomies"}};
  std::optional<std::string> chosen;
  for (const auto& [name, help] : single)
    app.add_subcommand(name, help)->callback([&chosen, n = name] { chosen = n; });
  auto* pipe = app.add_subcommand("pipeline", "run the config's stage list");
  pipe->add_flag("--resume", g.resume, "skip stages already completed for this config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pinchlab::kExitPrecondition;
  }
  return run(g, chosen);
}
