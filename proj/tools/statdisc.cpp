// Command-line harness: `run` executes the analyses listed in the config,
// the other subcommands run a single analysis.

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "statdisc/scenario.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> nf, grid;
  std::optional<double> alpha, tol, t, tdil;
};

void add_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "scenario JSON file")->required();
  cmd->add_option("--out", o.out, "output directory for report.json and CSV files");
  cmd->add_option("--seed", o.seed, "random seed for witness searches");
  cmd->add_option("--nf", o.nf, "Fourier truncation");
  cmd->add_option("--grid", o.grid, "boundary grid size");
  cmd->add_option("--alpha", o.alpha, "Hoelder exponent");
  cmd->add_option("--tol", o.tol, "stationarity tolerance");
  cmd->add_option("--t", o.t, "perturbation scale");
  cmd->add_option("--tdil", o.tdil, "dilation parameter of the determination experiment");
}

int execute(const Overrides& o, const std::optional<std::string>& only) {
  using namespace statdisc;
  Scenario s;
  try {
    nlohmann::json j;
    {
      std::ifstream in(o.config);
      if (!in) throw ConfigError("cannot read config " + o.config);
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
      }
    }
    if (o.seed) j["seed"] = *o.seed;
    if (o.nf) j["solver"]["nf"] = *o.nf;
    if (o.grid) j["solver"]["grid"] = *o.grid;
    if (o.alpha) j["alpha"] = *o.alpha;
    if (o.tol) j["tol"] = *o.tol;
    if (o.t) j["t"] = *o.t;
    if (o.tdil) j["t_dil"] = *o.tdil;
    if (only) j["analyses"] = nlohmann::json::array({*only});
    s = parse_scenario(j);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  std::optional<std::filesystem::path> out;
  if (!o.out.empty()) out = o.out;
  try {
    const RunResult r = run_scenario(s, out);
    for (const auto& line : r.summary) std::cout << line << '\n';
    for (const auto& a : r.report.at("assertions")) {
      if (!a.at("passed").get<bool>()) {
        std::cerr << "FAILED " << a.at("name").get<std::string>() << ": " << a.at("detail").get<std::string>()
                  << '\n';
      }
    }
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary discs of generic real submanifolds"};
  app.require_subcommand(1);
  Overrides o;
  std::optional<std::string> only;
  CLI::App* run = app.add_subcommand("run", "run the analyses listed in the config");
  add_flags(run, o);
  for (const auto& name : statdisc::kAnalysisOrder) {
    CLI::App* cmd = app.add_subcommand(name, "run the '" + name + "' analysis only");
    add_flags(cmd, o);
    cmd->callback([&only, name] { only = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return execute(o, only);
}
