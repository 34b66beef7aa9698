// gsturm: forward | inverse | roundtrip | stability | validate --config <path> [--out <dir>]

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gsturm/asymptotics.hpp"
#include "gsturm/forward.hpp"
#include "gsturm/inverse.hpp"
#include "gsturm/io.hpp"

namespace fs = std::filesystem;
using namespace gsturm;

namespace {

enum Exit : int {
  kOk = 0,
  kInvalid = 2,
  kSolver = 3,
  kSd = 4,
  kConditioning = 5,
  kDiagonality = 6,
  kGroupingExit = 7,
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::kParse:
    case ErrorCode::kIo:
    case ErrorCode::kInvalidDimension:
    case ErrorCode::kNotHermitian:
    case ErrorCode::kNotProjector:
    case ErrorCode::kBoundaryMismatch:
      return kInvalid;
    case ErrorCode::kSdViolation:
    case ErrorCode::kInconsistentCoefficients:
    case ErrorCode::kCoefficientConditions:
      return kSd;
    case ErrorCode::kIllConditioned:
      return kConditioning;
    case ErrorCode::kDiagonalityViolation:
      return kDiagonality;
    case ErrorCode::kGrouping:
      return kGroupingExit;
    default:
      return kSolver;
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

/// Everything a run reads from its config file.
struct RunConfig {
  fs::path base;  // directory of the config file; relative paths resolve against it
  json raw;
  int N = 10;
  int mesh_points = 257;
  std::string mode;  // "graph", "general" or empty (taken from the data)
  ForwardOptions forward;
  InverseOptions inverse;
  double separation = 0.1;
  int seed = 0;

  const json* section(const char* name) const {
    return raw.contains(name) ? &raw.at(name) : nullptr;
  }
  fs::path resolve(const std::string& p) const {
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
  }
};

double positive(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number() || !(j.at(key).get<double>() > 0)) {
    throw Error(ErrorCode::kParse, std::string("config: '") + key + "' must be a positive number");
  }
  return j.at(key).get<double>();
}

int positive_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer() || j.at(key).get<int>() < 1) {
    throw Error(ErrorCode::kParse, std::string("config: '") + key + "' must be a positive integer");
  }
  return j.at(key).get<int>();
}

RunConfig load_config(const std::string& path) {
  RunConfig c;
  c.raw = read_json_file(path);
  if (!c.raw.is_object()) throw Error(ErrorCode::kParse, "config: expected an object");
  c.base = fs::absolute(path).parent_path();
  c.N = positive_int(c.raw, "N", c.N);
  c.mesh_points = positive_int(c.raw, "mesh_points", c.mesh_points);
  c.seed = c.raw.value("seed", 0);
  if (c.raw.contains("mode")) {
    c.mode = c.raw.at("mode").get<std::string>();
    if (c.mode != "graph" && c.mode != "general") {
      throw Error(ErrorCode::kParse, "config: mode must be 'graph' or 'general'");
    }
  }
  if (const json* f = c.section("forward")) {
    c.forward.merge_tol = positive(*f, "merge_tol", c.forward.merge_tol);
    c.forward.contour_nodes = positive_int(*f, "contour_nodes", c.forward.contour_nodes);
    c.forward.contour_tol = positive(*f, "contour_tol", c.forward.contour_tol);
    c.forward.rank_tol = positive(*f, "rank_tol", c.forward.rank_tol);
    c.forward.window_radius = positive(*f, "window_radius", c.forward.window_radius);
  }
  c.inverse.mesh_points = c.mesh_points;
  if (const json* inv = c.section("inverse")) {
    c.inverse.max_condition = positive(*inv, "max_condition", c.inverse.max_condition);
    c.inverse.offdiag_tol = positive(*inv, "offdiag_tol", c.inverse.offdiag_tol);
    c.inverse.enforce_diagonal = inv->value("enforce_diagonal", true);
    c.separation = positive(*inv, "separation", c.separation);
  }
  if (c.mesh_points < 2) throw Error(ErrorCode::kParse, "config: mesh_points must be >= 2");
  return c;
}

MatrixProblem load_problem(const RunConfig& c) {
  if (!c.raw.contains("problem")) throw Error(ErrorCode::kParse, "config: missing 'problem'");
  const json& p = c.raw.at("problem");
  if (p.is_string()) return problem_from_json(read_json_file(c.resolve(p.get<std::string>())));
  return problem_from_json(p);
}

SpectralDataSet load_data(const RunConfig& c) {
  if (!c.raw.contains("data") || !c.raw.at("data").is_string()) {
    throw Error(ErrorCode::kParse, "config: missing 'data' path");
  }
  return spectral_data_from_json(read_json_file(c.resolve(c.raw.at("data").get<std::string>())));
}

std::vector<CheckResult> failed(const std::vector<CheckResult>& checks) {
  std::vector<CheckResult> out;
  for (const auto& r : checks) {
    if (!r.pass) out.push_back(r);
  }
  return out;
}

/// check_SD gate of the inverse pipeline, then alpha' from the heads of equal-lambda groups.
SpectralDataSet admit(SpectralDataSet data) {
  const auto bad = failed(check_SD(data));
  if (!bad.empty()) {
    std::string msg = "spectral data violate";
    for (const auto& r : bad) msg += " " + r.name + " (" + r.detail + ")";
    throw Error(ErrorCode::kSdViolation, msg);
  }
  return dedup_alpha(std::move(data));
}

ProblemKind kind_of(const RunConfig& c, const SpectralDataSet& data) {
  if (!c.mode.empty()) return c.mode == "graph" ? ProblemKind::kGraph : ProblemKind::kGeneral;
  return data.coefficients ? data.coefficients->kind : ProblemKind::kGeneral;
}

/// Coefficients for the model: config "coefficients" (inline object, file
/// path or "fit"), else those carried by the data, else fitted from the data tail.
AsymptoticCoefficients model_coefficients(const RunConfig& c, const SpectralDataSet& data,
                                          ProblemKind kind) {
  std::optional<AsymptoticCoefficients> coeffs;
  bool fit = false;
  if (c.raw.contains("coefficients")) {
    const json& j = c.raw.at("coefficients");
    if (j.is_string() && j.get<std::string>() == "fit") {
      fit = true;
    } else if (j.is_string()) {
      coeffs = coefficients_from_json(read_json_file(c.resolve(j.get<std::string>())));
    } else {
      coeffs = coefficients_from_json(j);
    }
  } else if (data.coefficients) {
    coeffs = data.coefficients;
  } else {
    fit = true;
  }
  if (fit) coeffs = fit_coefficients(data, kind);
  if (coeffs->m != data.m) {
    throw Error(ErrorCode::kInconsistentCoefficients, "coefficients and data differ in m");
  }
  if (kind == ProblemKind::kGraph && !coeffs->omega) {
    coeffs = fit_coefficients(data, ProblemKind::kGraph);
  }
  if (kind == ProblemKind::kGeneral) {
    coeffs->kind = ProblemKind::kGeneral;
    coeffs->omega.reset();
  }
  return *coeffs;
}

fs::path out_file(const fs::path& dir, const std::string& name) { return dir / name; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// ||q_j - q~_j||_{L2} per edge (diagonal entries).
std::vector<double> edge_errors(const std::vector<double>& mesh, const std::vector<CMatrix>& a,
                                const std::vector<CMatrix>& b) {
  const int m = static_cast<int>(a.front().rows());
  std::vector<double> out;
  for (int j = 0; j < m; ++j) {
    std::vector<CMatrix> aj, bj;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      aj.push_back(CMatrix::Constant(1, 1, a[i](j, j)));
      bj.push_back(CMatrix::Constant(1, 1, b[i](j, j)));
    }
    out.push_back(l2_distance(mesh, aj, bj));
  }
  return out;
}

// ---------------------------------------------------------------- forward

int cmd_forward(const RunConfig& c, const fs::path& out) {
  const MatrixProblem problem = load_problem(c);
  const SpectralDataSet data = forward_spectral(problem, c.N, c.forward);
  write_json_file(out_file(out, "spectral_data.json"), to_json(data));

  json report;
  report["format_version"] = kFormatVersion;
  report["kind"] = "residual_report";
  if (problem.rank() >= 1 && problem.rank() <= problem.dim() - 1) {
    const ResidualReport r = residuals(data, *data.coefficients);
    report["residuals"] = to_json(r);
    json checks = json::array();
    for (const auto& ch : check_asymptotics(r)) checks.push_back(to_json(ch));
    report["checks"] = std::move(checks);
  } else {
    report["residuals"] = nullptr;
    report["checks"] = json::array();
  }
  write_json_file(out_file(out, "residual_report.json"), report);

  std::cout << "forward: m=" << data.m << " N=" << data.N << " lambda_11=" << fmt(data.entries[0].lambda)
            << " lambda_N" << data.m << "=" << fmt(data.entries.back().lambda) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- inverse

int cmd_inverse(const RunConfig& c, const fs::path& out) {
  const SpectralDataSet data = admit(load_data(c));
  const ProblemKind kind = kind_of(c, data);
  const AsymptoticCoefficients coeffs = model_coefficients(c, data, kind);
  const ModelProblem model = build_model(coeffs, data.N, c.forward);
  const GroupPartition part = build_groups(data, model.data, coeffs, c.separation);
  const Reconstruction rec = reconstruct(data, model, c.inverse);

  json j = to_json(rec);
  j["Xi"] = part.Xi;
  j["n0"] = part.n0;
  write_json_file(out_file(out, "reconstruction.json"), j);
  std::ostringstream csv;
  write_potential_csv(csv, rec);
  write_text(out_file(out, "reconstruction.csv"), csv.str());

  std::cout << "inverse: Xi=" << fmt(part.Xi) << " condition_max=" << fmt(rec.condition_max)
            << " residual_max=" << fmt(rec.residual_max) << " herm_residual=" << fmt(rec.herm_residual);
  if (rec.kind == ProblemKind::kGraph) {
    std::cout << " offdiag_residual=" << fmt(rec.offdiag_residual) << " h=" << fmt(rec.h);
  }
  std::cout << '\n';
  return kOk;
}

// ---------------------------------------------------------------- roundtrip

struct RoundtripRun {
  int N = 0;
  Reconstruction rec;
  double error_Q = 0.0;
  std::vector<double> error_q;
  double error_H = 0.0;
  double error_h = 0.0;
  bool diagonal_ok = true;
};

int cmd_roundtrip(const RunConfig& c, const fs::path& out) {
  const MatrixProblem problem = load_problem(c);
  problem.require_regular();
  const bool graph = problem.kind() == ProblemKind::kGraph;
  const SpectralDataSet full = forward_spectral(problem, 2 * c.N, c.forward);
  const AsymptoticCoefficients coeffs = *full.coefficients;
  const std::vector<double> mesh = uniform_mesh(c.mesh_points);
  const std::vector<CMatrix> truth = sample_potential(problem, mesh);

  // The diagonality gate is reported, not enforced: truncated genuine data
  // leave an off-diagonal boundary layer that the reconstruction error absorbs.
  InverseOptions inv = c.inverse;
  inv.enforce_diagonal = false;

  std::vector<RoundtripRun> runs;
  for (int N : {c.N, 2 * c.N}) {
    RoundtripRun r;
    r.N = N;
    const SpectralDataSet data = admit(N == full.N ? full : full.truncated(N));
    const ModelProblem model = build_model(coeffs, N, c.forward);
    r.rec = reconstruct(data, model, inv);
    r.error_Q = l2_distance(mesh, r.rec.Q, truth);
    r.error_H = opnorm(r.rec.H - problem.H());
    if (graph) {
      r.error_q = edge_errors(mesh, r.rec.Q, truth);
      r.error_h = std::abs(r.rec.h - problem.graph_h());
      r.diagonal_ok = r.rec.offdiag_residual <= c.inverse.offdiag_tol;
    }
    runs.push_back(std::move(r));
  }

  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "roundtrip";
  j["problem_kind"] = graph ? "graph" : "general";
  j["mesh_points"] = c.mesh_points;
  json rows = json::array();
  for (const auto& r : runs) {
    json row = {{"N", r.N},
                {"error_Q", r.error_Q},
                {"error_H", r.error_H},
                {"herm_residual", r.rec.herm_residual},
                {"condition_max", r.rec.condition_max},
                {"residual_max", r.rec.residual_max}};
    if (graph) {
      row["error_q"] = r.error_q;
      row["error_h"] = r.error_h;
      row["h"] = r.rec.h;
      row["offdiag_residual"] = r.rec.offdiag_residual;
      row["diagonality_pass"] = r.diagonal_ok;
    }
    rows.push_back(std::move(row));
  }
  j["runs"] = std::move(rows);
  j["ratio_Q"] = nullable(runs[1].error_Q / runs[0].error_Q);
  j["converging"] = runs[1].error_Q < runs[0].error_Q;
  write_json_file(out_file(out, "roundtrip.json"), j);

  std::ostringstream csv;
  csv << std::setprecision(17);
  const int m = problem.dim();
  csv << "x";
  for (int r = 1; r <= m; ++r) {
    for (int s = 1; s <= m; ++s) {
      if (graph && r != s) continue;
      const std::string e = graph ? "q_" + std::to_string(r) : "Q" + std::to_string(r) + std::to_string(s);
      for (const char* tag : {"true", "rec_N", "rec_2N"}) {
        if (graph) {
          csv << ',' << e << '_' << tag;
        } else {
          csv << ",re_" << e << '_' << tag << ",im_" << e << '_' << tag;
        }
      }
    }
  }
  csv << '\n';
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    csv << mesh[i];
    for (int r = 0; r < m; ++r) {
      for (int s = 0; s < m; ++s) {
        if (graph && r != s) continue;
        for (const CMatrix* q : std::initializer_list<const CMatrix*>{&truth[i], &runs[0].rec.Q[i], &runs[1].rec.Q[i]}) {
          csv << ',' << (*q)(r, s).real();
          if (!graph) csv << ',' << (*q)(r, s).imag();
        }
      }
    }
    csv << '\n';
  }
  write_text(out_file(out, "roundtrip.csv"), csv.str());

  for (const auto& r : runs) {
    std::cout << "roundtrip: N=" << r.N << " error_Q=" << fmt(r.error_Q) << " error_H=" << fmt(r.error_H)
              << " herm_residual=" << fmt(r.rec.herm_residual);
    if (graph) {
      std::cout << " error_q=";
      for (std::size_t k = 0; k < r.error_q.size(); ++k) std::cout << (k ? "," : "") << fmt(r.error_q[k]);
      std::cout << " offdiag_residual=" << fmt(r.rec.offdiag_residual)
                << (r.diagonal_ok ? " diagonality=ok" : " diagonality=VIOLATED");
    }
    std::cout << '\n';
  }
  std::cout << "roundtrip: ratio error(2N)/error(N)=" << fmt(runs[1].error_Q / runs[0].error_Q) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- stability

int cmd_stability(const RunConfig& c, const fs::path& out) {
  const MatrixProblem problem = load_problem(c);
  problem.require_regular();
  const json* st = c.section("stability");
  if (!st) throw Error(ErrorCode::kParse, "config: missing 'stability' section");
  const int n = positive_int(*st, "n", 1);
  const int k = positive_int(*st, "k", 1);
  if (n > c.N || k > problem.dim()) throw Error(ErrorCode::kParse, "stability: (n, k) outside the data");
  if (!st->contains("deltas") || !st->at("deltas").is_array()) {
    throw Error(ErrorCode::kParse, "stability: 'deltas' must be an array");
  }
  std::vector<double> deltas{0.0};
  for (const auto& d : st->at("deltas")) {
    if (!d.is_number()) throw Error(ErrorCode::kParse, "stability: deltas must be numbers");
    if (d.get<double>() != 0.0) deltas.push_back(d.get<double>());
  }
  const std::string base_kind = st->value("base", std::string("model"));
  if (base_kind != "model" && base_kind != "problem") {
    throw Error(ErrorCode::kParse, "stability: base must be 'model' or 'problem'");
  }

  const AsymptoticCoefficients coeffs = coefficients_from_problem(problem);
  const ModelProblem model = build_model(coeffs, c.N, c.forward);
  InverseOptions inv = c.inverse;
  inv.enforce_diagonal = false;

  // Base data and their reconstruction: the model itself, or the problem's own data.
  const SpectralDataSet base =
      base_kind == "model" ? model.data : admit(forward_spectral(problem, c.N, c.forward));
  const Reconstruction base_rec = reconstruct(base, model, inv);

  json rows = json::array();
  std::ostringstream csv;
  csv << "delta,Xi,error_Q,error_H,ratio_Q,ratio_H\n";
  for (double delta : deltas) {
    const SpectralDataSet data = delta == 0.0 ? base : perturb_rho(base, n, k, delta);
    const GroupPartition part = build_groups(data, base, coeffs, c.separation);
    const Reconstruction rec = reconstruct(data, model, inv);
    const double eq = l2_distance(rec.mesh, rec.Q, base_rec.Q);
    const double eh = opnorm(rec.H - base_rec.H);
    const double rq = part.Xi > 0 ? eq / part.Xi : std::numeric_limits<double>::quiet_NaN();
    const double rh = part.Xi > 0 ? eh / part.Xi : std::numeric_limits<double>::quiet_NaN();
    rows.push_back({{"delta", delta},
                    {"Xi", part.Xi},
                    {"n0", part.n0},
                    {"error_Q", eq},
                    {"error_H", eh},
                    {"ratio_Q", nullable(rq)},
                    {"ratio_H", nullable(rh)}});
    csv << csv_number(delta) << ',' << csv_number(part.Xi) << ',' << csv_number(eq) << ','
        << csv_number(eh) << ',' << csv_number(rq) << ',' << csv_number(rh) << '\n';
    std::cout << "stability: delta=" << fmt(delta) << " Xi=" << fmt(part.Xi) << " error_Q=" << fmt(eq)
              << " error_H=" << fmt(eh) << " ratio_Q=" << fmt(rq) << '\n';
  }

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rows) {
    if (r.at("ratio_Q").is_null()) continue;
    lo = std::min(lo, r.at("ratio_Q").get<double>());
    hi = std::max(hi, r.at("ratio_Q").get<double>());
  }
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "stability";
  j["base"] = base_kind;
  j["n"] = n;
  j["k"] = k;
  j["N"] = c.N;
  j["rows"] = std::move(rows);
  j["ratio_spread"] = hi > 0 ? nullable(hi / lo) : json(nullptr);
  write_json_file(out_file(out, "stability.json"), j);
  write_text(out_file(out, "stability.csv"), csv.str());
  if (hi > 0) std::cout << "stability: ratio spread=" << fmt(hi / lo) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- validate

json failed_step(const std::string& name, const Error& e) {
  CheckResult r;
  r.name = name;
  r.pass = false;
  r.detail = std::string(error_tag(e.code())) + ": " + one_line(e.what());
  return to_json(r);
}

int cmd_validate(const RunConfig& c, const fs::path& out) {
  const SpectralDataSet raw = load_data(c);
  const ProblemKind kind = kind_of(c, raw);
  json checks = json::array();
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "validation";
  j["problem_kind"] = kind == ProblemKind::kGraph ? "graph" : "general";

  for (const auto& r : check_SD(raw)) checks.push_back(to_json(r));

  std::optional<SpectralDataSet> data;
  try {
    data = dedup_alpha(raw);
  } catch (const Error& e) {
    checks.push_back(failed_step("sd_equal_alpha", e));
  }
  if (data) {
    try {
      const AsymptoticCoefficients fitted = fit_coefficients(*data, kind);
      j["coefficients"] = to_json(fitted);
      const ResidualReport rep = residuals(*data, fitted);
      j["residual_report"] = to_json(rep);
      for (const auto& r : check_asymptotics(rep)) checks.push_back(to_json(r));
      const double tol = c.section("validate") ? positive(*c.section("validate"), "coefficient_tol", 1e-8)
                                               : 1e-8;
      for (const auto& r : check_coefficient_conditions(fitted, tol)) checks.push_back(to_json(r));
    } catch (const Error& e) {
      checks.push_back(failed_step("coefficient_fit", e));
    }
    int mesh_t = 8 * data->N * data->m;
    double threshold = 1e-6;
    if (const json* v = c.section("validate")) {
      mesh_t = positive_int(*v, "mesh_t", mesh_t);
      threshold = positive(*v, "surrogate_threshold", threshold);
    }
    const SurrogateReport s = completeness_surrogate(*data, mesh_t, threshold);
    j["surrogate"] = to_json(s);
    CheckResult r;
    r.name = "completeness_surrogate";
    r.pass = s.pass;
    r.value = s.smallest_singular_value;
    r.detail = s.label;
    checks.push_back(to_json(r));
  }

  bool pass = true;
  for (const auto& r : checks) pass = pass && r.at("pass").get<bool>();
  j["pass"] = pass;
  j["checks"] = checks;
  write_json_file(out_file(out, "validation.json"), j);

  for (const auto& r : checks) {
    std::cout << (r.at("pass").get<bool>() ? "PASS " : "FAIL ") << r.at("name").get<std::string>();
    if (!r.at("pass").get<bool>()) std::cout << "  " << r.at("detail").get<std::string>();
    std::cout << '\n';
  }
  std::cout << "validate: " << (pass ? "all checks pass" : "violations found") << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward and inverse spectral problems for matrix Sturm-Liouville operators"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, const fs::path&);
  };
  const std::vector<Command> commands = {
      {"forward", "eigenvalues and weight matrices of a problem", cmd_forward},
      {"inverse", "reconstruct Q and H from spectral data", cmd_inverse},
      {"roundtrip", "forward at N and 2N, inverse on both, L2 errors", cmd_roundtrip},
      {"stability", "one-eigenvalue perturbations: error against Xi", cmd_stability},
      {"validate", "necessary conditions on spectral data", cmd_validate},
  };
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--quiet", quiet, "suppress warnings");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR PARSE " << one_line(e.what()) << '\n';
    return kInvalid;
  }

  const Command* chosen = nullptr;
  for (const auto& cmd : commands) {
    if (app.got_subcommand(cmd.name)) chosen = &cmd;
  }
  set_warnings_muted(quiet);
  try {
    const RunConfig config = load_config(config_path);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir + ": " + ec.message());
    return chosen->run(config, fs::path(out_dir));
  } catch (const Error& e) {
    std::cerr << "ERROR " << error_tag(e.code()) << ' ' << one_line(e.what()) << '\n';
    return exit_code(e.code());
  } catch (const json::exception& e) {
    std::cerr << "ERROR PARSE " << one_line(e.what()) << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "ERROR INTERNAL " << one_line(e.what()) << '\n';
    return kSolver;
  }
}
