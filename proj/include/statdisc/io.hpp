#pragma once

// Scenario configuration (JSON in), report fragments (JSON out) and CSV traces.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "statdisc/analysis.hpp"

namespace statdisc {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0";
inline const std::vector<std::string> kAnalysisOrder = {"check",   "disc",    "indices", "kernel",
                                                        "solve",   "centers", "jets",    "determine"};

// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name = "scenario";
  HermitianPencil pencil{{MatrixXcd::Identity(1, 1)}};
  PerturbationPolynomial perturbation;
  double t = 0.0;  // perturbation scale
  std::optional<VectorXcd> V;
  std::optional<VectorXd> c;
  std::optional<VectorXcd> W;  // optional explicit quadric lift data for `disc`
  std::optional<VectorXd> y;
  SolverConfig solver;
  double alpha = kDefaultAlpha;
  double tol = 1e-10;  // stationarity verification tolerance
  double t_dil = 0.1;
  std::uint64_t seed = kDefaultSeed;
  int witness_trials = kDefaultWitnessTrials;

  int jet_samples = 3;
  int recovery_restarts = 8;

  std::vector<std::string> automorphisms;  // empty: the whole corpus
  int experiment_grid = 5;
  int experiment_nf = 16;
  int experiment_restarts = 2;

  std::vector<std::string> analyses;

  int n() const { return pencil.n(); }
  int d() const { return pencil.d(); }
  DefiningFunction defining_function() const { return DefiningFunction(pencil, perturbation, t); }
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

// Inputs echoed into reports.
ojson scenario_to_json(const Scenario& s);

ojson complex_to_json(cplx z);
ojson vector_to_json(const VectorXcd& v);
ojson vector_to_json(const VectorXd& v);
ojson matrix_to_json(const MatrixXcd& m);

ojson to_json(const NonDegeneracyReport& r);
ojson to_json(const StationaryReport& r);
ojson to_json(const RankReport& r);
ojson to_json(const ExperimentReport& r);

// Doubles are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);

 private:
  std::FILE* file_ = nullptr;
  std::size_t columns_ = 0;
};

const char* error_code_name(ErrorCode code);

}  // namespace statdisc
