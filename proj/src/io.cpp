#include "statdisc/io.hpp"

#include <algorithm>
#include <fstream>

namespace statdisc {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

cplx parse_complex(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  fail(where + ": expected a number or a [re, im] pair");
}

VectorXcd parse_cvector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where + ": expected a non-empty array");
  VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_complex(j[i], where);
  return v;
}

VectorXd parse_rvector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where + ": expected a non-empty array of numbers");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(where + ": expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

MatrixXcd parse_cmatrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) fail(where + ": expected a list of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  MatrixXcd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(where + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_complex(j[r][c], where);
    }
  }
  return m;
}

std::vector<int> parse_exponents(const json& j, const char* key, int len, const std::string& where) {
  if (!j.contains(key)) return std::vector<int>(static_cast<std::size_t>(len), 0);
  const json& a = j.at(key);
  if (!a.is_array() || static_cast<int>(a.size()) != len) {
    fail(where + "." + key + ": expected " + std::to_string(len) + " exponents");
  }
  std::vector<int> out;
  for (const auto& e : a) {
    if (!e.is_number_integer()) fail(where + "." + key + ": exponents must be integers");
    out.push_back(e.get<int>());
  }
  return out;
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) fail("scenario must be a JSON object");
  Scenario s;
  try {
    read_opt(j, "name", s.name);
    if (!j.contains("pencil")) fail("missing field 'pencil'");
    const json& p = j.at("pencil");
    if (p.is_string()) {
      if (p.get<std::string>() != "c8_example") fail("unknown pencil preset '" + p.get<std::string>() + "'");
      s.pencil = HermitianPencil::c8_example();
    } else {
      if (!p.is_array() || p.empty()) fail("pencil: expected a non-empty list of matrices");
      std::vector<MatrixXcd> mats;
      for (std::size_t k = 0; k < p.size(); ++k) mats.push_back(parse_cmatrix(p[k], "pencil[" + std::to_string(k) + "]"));
      s.pencil = HermitianPencil(std::move(mats));
    }
    const int n = s.n();
    const int d = s.d();
    if (j.contains("n") && j.at("n") != n) fail("field 'n' disagrees with the pencil");
    if (j.contains("d") && j.at("d") != d) fail("field 'd' disagrees with the pencil");

    std::vector<Monomial> terms;
    int max_degree = 6;
    if (j.contains("perturbation")) {
      const json& pj = j.at("perturbation");
      read_opt(pj, "max_degree", max_degree);
      if (pj.contains("terms")) {
        for (std::size_t k = 0; k < pj.at("terms").size(); ++k) {
          const json& tj = pj.at("terms")[k];
          const std::string where = "perturbation.terms[" + std::to_string(k) + "]";
          Monomial m;
          read_opt(tj, "component", m.component);
          if (!tj.contains("coefficient")) fail(where + ": missing coefficient");
          read_opt(tj, "coefficient", m.coefficient);
          const json ex = tj.contains("exponents") ? tj.at("exponents") : json::object();
          m.re_z = parse_exponents(ex, "reZ", n, where);
          m.im_z = parse_exponents(ex, "imZ", n, where);
          m.im_w = parse_exponents(ex, "imW", d, where);
          terms.push_back(std::move(m));
        }
      }
    }
    s.perturbation = PerturbationPolynomial(n, d, std::move(terms), max_degree);
    read_opt(j, "t", s.t);
    if (s.t < 0.0) fail("t must be >= 0");

    if (j.contains("witnesses")) {
      const json& w = j.at("witnesses");
      if (w.contains("V")) s.V = parse_cvector(w.at("V"), "witnesses.V");
      if (w.contains("c")) s.c = parse_rvector(w.at("c"), "witnesses.c");
    }
    if (s.V && s.V->size() != n) fail("witnesses.V must have length n");
    if (s.c && s.c->size() != d) fail("witnesses.c must have length d");
    if (j.contains("disc")) {
      const json& dj = j.at("disc");
      if (dj.contains("W")) s.W = parse_cvector(dj.at("W"), "disc.W");
      if (dj.contains("y")) s.y = parse_rvector(dj.at("y"), "disc.y");
      if (s.W && s.W->size() != n) fail("disc.W must have length n");
      if (s.y && s.y->size() != d) fail("disc.y must have length d");
    }
    if (j.contains("solver")) {
      const json& sj = j.at("solver");
      read_opt(sj, "nf", s.solver.nf);
      read_opt(sj, "grid", s.solver.grid);
      read_opt(sj, "newton_tol", s.solver.newton_tol);
      read_opt(sj, "max_iter", s.solver.max_iter);
      read_opt(sj, "continuation_steps", s.solver.continuation_steps);
      read_opt(sj, "max_condition", s.solver.max_condition);
    }
    read_opt(j, "alpha", s.alpha);
    read_opt(j, "tol", s.tol);
    read_opt(j, "t_dil", s.t_dil);
    read_opt(j, "seed", s.seed);
    read_opt(j, "witness_trials", s.witness_trials);
    if (j.contains("jets")) {
      read_opt(j.at("jets"), "samples", s.jet_samples);
      read_opt(j.at("jets"), "restarts", s.recovery_restarts);
    }
    if (j.contains("determine")) {
      const json& dj = j.at("determine");
      read_opt(dj, "automorphisms", s.automorphisms);
      read_opt(dj, "grid_points", s.experiment_grid);
      read_opt(dj, "nf", s.experiment_nf);
      read_opt(dj, "restarts", s.experiment_restarts);
    }
    read_opt(j, "analyses", s.analyses);
  } catch (const Error& e) {
    fail(e.what());
  } catch (const json::exception& e) {
    fail(e.what());
  }

  for (const auto& a : s.analyses) {
    if (std::find(kAnalysisOrder.begin(), kAnalysisOrder.end(), a) == kAnalysisOrder.end()) {
      fail("unknown analysis '" + a + "'");
    }
  }
  const auto corpus = automorphism_corpus(s.n(), s.d());
  for (const auto& name : s.automorphisms) {
    if (std::none_of(corpus.begin(), corpus.end(), [&](const auto& F) { return F.name() == name; })) {
      fail("unknown automorphism '" + name + "'");
    }
  }
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (!(s.tol > 0.0)) fail("tol must be positive");
  if (!(s.t_dil > 0.0)) fail("t_dil must be positive");
  if (s.jet_samples < 0 || s.recovery_restarts < 0 || s.experiment_restarts < 0) fail("counts must be >= 0");
  if (s.experiment_grid < 1 || s.experiment_nf < 1) fail("determine.grid_points and determine.nf must be >= 1");
  if (s.witness_trials < 1) fail("witness_trials must be >= 1");
  try {
    s.solver.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(std::string("config parse error: ") + e.what());
  }
  return parse_scenario(j);
}

ojson complex_to_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

ojson vector_to_json(const VectorXcd& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_to_json(v(i)));
  return a;
}

ojson vector_to_json(const VectorXd& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ojson matrix_to_json(const MatrixXcd& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(VectorXcd(m.row(r).transpose())));
  return rows;
}

ojson scenario_to_json(const Scenario& s) {
  ojson j;
  j["name"] = s.name;
  j["n"] = s.n();
  j["d"] = s.d();
  ojson pencil = ojson::array();
  for (const auto& A : s.pencil.matrices()) pencil.push_back(matrix_to_json(A));
  j["pencil"] = pencil;
  ojson terms = ojson::array();
  for (const auto& m : s.perturbation.terms()) {
    terms.push_back({{"component", m.component},
                     {"coefficient", m.coefficient},
                     {"exponents", {{"reZ", m.re_z}, {"imZ", m.im_z}, {"imW", m.im_w}}},
                     {"weighted_degree", m.weighted_degree()}});
  }
  j["perturbation"] = {{"max_degree", s.perturbation.max_degree()}, {"terms", terms}};
  j["t"] = s.t;
  j["solver"] = {{"nf", s.solver.nf},
                 {"grid", s.solver.grid},
                 {"newton_tol", s.solver.newton_tol},
                 {"max_iter", s.solver.max_iter},
                 {"continuation_steps", s.solver.continuation_steps},
                 {"max_condition", s.solver.max_condition}};
  j["alpha"] = s.alpha;
  j["tol"] = s.tol;
  j["t_dil"] = s.t_dil;
  j["witness_trials"] = s.witness_trials;
  j["jets"] = {{"samples", s.jet_samples}, {"restarts", s.recovery_restarts}};
  j["determine"] = {{"automorphisms", s.automorphisms},
                    {"grid_points", s.experiment_grid},
                    {"nf", s.experiment_nf},
                    {"restarts", s.experiment_restarts}};
  j["analyses"] = s.analyses;
  return j;
}

ojson to_json(const NonDegeneracyReport& r) {
  ojson j;
  j["cond_a"] = r.cond_a;
  j["pencil_rank"] = r.pencil_rank;
  j["cond_b"] = r.cond_b;
  j["common_kernel_dim"] = r.common_kernel_dim;
  j["cond_f"] = r.cond_f;
  j["full_witness"] = r.full_witness ? vector_to_json(*r.full_witness) : ojson(nullptr);
  j["cond_t"] = r.cond_t;
  j["invertible_combination"] = r.invertible_combination ? vector_to_json(*r.invertible_combination) : ojson(nullptr);
  j["cond_t_exact"] = r.cond_t_exact ? ojson(*r.cond_t_exact) : ojson(nullptr);
  j["beloshapka"] = r.beloshapka;
  j["fully"] = r.fully;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  return j;
}

ojson to_json(const StationaryReport& r) {
  return {{"attachment_sup", r.attachment_sup}, {"lift_defect", r.lift_defect},
          {"realness_defect", r.realness_defect}, {"min_abs_c", r.min_abs_c},
          {"nonvanishing", r.nonvanishing},       {"stationary", r.stationary}};
}

ojson to_json(const RankReport& r) {
  return {{"rank", r.rank},
          {"expected", r.expected},
          {"full", r.full},
          {"tolerance", r.tolerance},
          {"rows", r.jacobian.rows()},
          {"cols", r.jacobian.cols()},
          {"singular_values", vector_to_json(r.singular_values)}};
}

ojson to_json(const ExperimentReport& r) {
  ojson j;
  j["automorphism"] = r.automorphism;
  j["trivial_2jet"] = r.trivial_2jet;
  j["preservation_residual"] = r.preservation_residual;
  j["accepted"] = r.accepted;
  j["rejection"] = r.rejection.empty() ? ojson(nullptr) : ojson(r.rejection);
  ojson recs = ojson::array();
  for (const auto& rec : r.records) {
    recs.push_back({{"s", vector_to_json(rec.s)},
                    {"center", vector_to_json(rec.center)},
                    {"jet_defect", rec.jet_defect},
                    {"fixed_point_defect", rec.fixed_point_defect},
                    {"recovery_distance", rec.recovery_distance},
                    {"status", rec.status}});
  }
  j["records"] = recs;
  j["summary"] = {{"records", r.records.size()},
                  {"max_fixed_point_defect", r.max_fixed_point_defect},
                  {"max_jet_defect", r.max_jet_defect}};
  j["note"] = r.note;
  return j;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : columns_(header.size()) {
  file_ = std::fopen(path.string().c_str(), "w");
  if (!file_) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) std::fprintf(file_, "%s%s", i ? "," : "", header[i].c_str());
  std::fputc('\n', file_);
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::logic_error("CSV row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) std::fprintf(file_, "%s%.17g", i ? "," : "", values[i]);
  std::fputc('\n', file_);
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::degenerate_elimination: return "degenerate_elimination";
    case ErrorCode::winding_unresolved: return "winding_unresolved";
    case ErrorCode::unstructured: return "unstructured";
    case ErrorCode::kernel_ambiguous: return "kernel_ambiguous";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::linearization_singular: return "linearization_singular";
    case ErrorCode::singular_jacobian: return "singular_jacobian";
    case ErrorCode::ambiguous_recovery: return "ambiguous_recovery";
  }
  return "unknown";
}

}  // namespace statdisc
