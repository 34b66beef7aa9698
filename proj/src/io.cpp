#include "gsturm/io.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace gsturm {

namespace {

[[noreturn]] void parse_error(const std::string& what) {
  throw Error(ErrorCode::kParse, what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) parse_error(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) parse_error(what + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) parse_error(what + ": expected an integer");
  return j.get<int>();
}

json real_vector(const RVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

RVector real_vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) parse_error(what + ": expected an array");
  RVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

cplx complex_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  parse_error(what + ": expected a number or [re, im]");
}

using ScalarFunction = std::function<double(double)>;

ScalarFunction named_function(const std::string& name, const std::string& what) {
  if (name == "0" || name == "zero") return [](double) { return 0.0; };
  if (name == "sin") return [](double x) { return std::sin(x); };
  if (name == "cos") return [](double x) { return std::cos(x); };
  if (name == "sin2x") return [](double x) { return std::sin(2 * x); };
  if (name == "cos2x") return [](double x) { return std::cos(2 * x); };
  if (name == "x-pi/2") return [](double x) { return x - kPi / 2; };
  if (name.rfind("const:", 0) == 0) {
    try {
      const double c = std::stod(name.substr(6));
      return [c](double) { return c; };
    } catch (const std::exception&) {
      parse_error(what + ": bad constant '" + name + "'");
    }
  }
  parse_error(what + ": unknown function '" + name + "'");
}

// Demo set used by the "trig" builtin: entry j of the diagonal.
ScalarFunction trig_entry(int j) {
  static const char* names[] = {"sin", "cos", "x-pi/2", "sin2x", "cos2x"};
  return named_function(names[j % 5], "trig");
}

PotentialGrid potential_from_json(const json& p, int m, int nodes) {
  const std::string where = "potential";
  if (!p.is_object()) parse_error(where + ": expected an object");
  if (p.contains("builtin")) {
    const std::string b = p.at("builtin").is_string() ? p.at("builtin").get<std::string>() : "";
    if (b == "zero") return PotentialGrid::zero(m);
    if (b == "const") {
      const double c = number(field(p, "c", where), "potential.c");
      return PotentialGrid::constant(c * CMatrix::Identity(m, m));
    }
    if (b == "trig") {
      return PotentialGrid::from_function(
          m,
          [m](double x) {
            CMatrix q = CMatrix::Zero(m, m);
            for (int j = 0; j < m; ++j) q(j, j) = trig_entry(j)(x);
            return q;
          },
          nodes);
    }
    parse_error(where + ": unknown builtin '" + b + "'");
  }
  if (p.contains("matrix")) {
    const json& rows = p.at("matrix");
    if (!rows.is_array() || static_cast<int>(rows.size()) != m) {
      parse_error(where + ".matrix: expected " + std::to_string(m) + " rows");
    }
    struct Term {
      cplx constant{0.0, 0.0};
      ScalarFunction f;
    };
    std::vector<Term> terms(static_cast<std::size_t>(m * m));
    bool constant = true;
    for (int r = 0; r < m; ++r) {
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != m) {
        parse_error(where + ".matrix: row " + std::to_string(r) + " must have m entries");
      }
      for (int c = 0; c < m; ++c) {
        const json& t = rows[r][c];
        auto& term = terms[static_cast<std::size_t>(r * m + c)];
        if (t.is_string()) {
          term.f = named_function(t.get<std::string>(), where + ".matrix");
          constant = false;
        } else {
          term.constant = complex_from_json(t, where + ".matrix");
        }
      }
    }
    auto eval = [terms, m](double x) {
      CMatrix q(m, m);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          const auto& t = terms[static_cast<std::size_t>(r * m + c)];
          q(r, c) = t.f ? cplx(t.f(x), 0.0) : t.constant;
        }
      }
      return q;
    };
    if (constant) return PotentialGrid::constant(eval(0.0));
    return PotentialGrid::from_function(m, eval, nodes);
  }
  if (p.contains("mesh")) {
    const RVector mesh = real_vector_from_json(p.at("mesh"), where + ".mesh");
    const json& vals = field(p, "values", where);
    if (!vals.is_array() || vals.size() != static_cast<std::size_t>(mesh.size())) {
      parse_error(where + ".values: one matrix per mesh point expected");
    }
    std::vector<double> x(mesh.data(), mesh.data() + mesh.size());
    std::vector<CMatrix> v;
    for (const auto& e : vals) v.push_back(matrix_from_json(e, where + ".values"));
    return PotentialGrid(std::move(x), std::move(v));
  }
  parse_error(where + ": expected 'builtin', 'matrix' or 'mesh'");
}

}  // namespace

json to_json(const CMatrix& a) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back({a(r, c).real(), a(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) parse_error(what + ": expected a square matrix");
  const auto n = static_cast<Eigen::Index>(j.size());
  CMatrix a(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      parse_error(what + ": expected a square matrix");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      a(r, c) = complex_from_json(row[static_cast<std::size_t>(c)], what);
    }
  }
  return a;
}

json to_json(const AsymptoticCoefficients& c) {
  json j;
  j["kind"] = c.kind == ProblemKind::kGraph ? "graph" : "general";
  j["m"] = c.m;
  j["p"] = c.p;
  j["T"] = to_json(c.T);
  j["Theta"] = to_json(c.Theta);
  j["z"] = real_vector(c.z);
  json a = json::array();
  for (const auto& m : c.A) a.push_back(to_json(m));
  j["A"] = std::move(a);
  if (c.omega) j["omega"] = real_vector(*c.omega);
  if (c.Omega) j["Omega"] = to_json(*c.Omega);
  if (c.H) j["H"] = to_json(*c.H);
  return j;
}

AsymptoticCoefficients coefficients_from_json(const json& j) {
  const std::string where = "coefficients";
  AsymptoticCoefficients c;
  const std::string kind = field(j, "kind", where).get<std::string>();
  if (kind != "graph" && kind != "general") parse_error(where + ".kind: graph or general");
  c.kind = kind == "graph" ? ProblemKind::kGraph : ProblemKind::kGeneral;
  c.m = integer(field(j, "m", where), where + ".m");
  c.p = integer(field(j, "p", where), where + ".p");
  c.T = matrix_from_json(field(j, "T", where), where + ".T");
  c.Tperp = CMatrix::Identity(c.m, c.m) - c.T;
  c.Theta = matrix_from_json(field(j, "Theta", where), where + ".Theta");
  c.z = real_vector_from_json(field(j, "z", where), where + ".z");
  for (const auto& a : field(j, "A", where)) c.A.push_back(matrix_from_json(a, where + ".A"));
  if (j.contains("omega")) c.omega = real_vector_from_json(j.at("omega"), where + ".omega");
  if (j.contains("Omega")) c.Omega = matrix_from_json(j.at("Omega"), where + ".Omega");
  if (j.contains("H")) c.H = matrix_from_json(j.at("H"), where + ".H");
  if (c.T.rows() != c.m || c.z.size() != c.m || static_cast<int>(c.A.size()) != c.m) {
    parse_error(where + ": sizes disagree with m");
  }
  return c;
}

json to_json(const SpectralDataSet& data) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "spectral_data";
  j["m"] = data.m;
  j["N"] = data.N;
  j["shift"] = data.shift;
  j["provenance"] = data.provenance;
  json entries = json::array();
  for (const auto& e : data.entries) {
    json je;
    je["n"] = e.n;
    je["k"] = e.k;
    je["lambda"] = e.lambda;
    je["alpha"] = to_json(e.alpha);
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  if (data.coefficients) j["coefficients"] = to_json(*data.coefficients);
  return j;
}

SpectralDataSet spectral_data_from_json(const json& j) {
  const std::string where = "spectral data";
  if (!j.is_object()) parse_error(where + ": expected an object");
  if (j.contains("format_version") && j.at("format_version") != kFormatVersion) {
    parse_error(where + ": unsupported format_version");
  }
  SpectralDataSet data;
  data.m = integer(field(j, "m", where), "m");
  data.N = integer(field(j, "N", where), "N");
  if (data.m < 1 || data.N < 1) parse_error(where + ": m and N must be positive");
  data.shift = j.contains("shift") ? number(j.at("shift"), "shift") : 0.0;
  data.provenance = "loaded";
  const json& entries = field(j, "entries", where);
  if (!entries.is_array() || entries.size() != static_cast<std::size_t>(data.m * data.N)) {
    parse_error(where + ": expected m * N entries");
  }
  for (const auto& je : entries) {
    SpectralEntry e;
    e.n = integer(field(je, "n", "entry"), "entry.n");
    e.k = integer(field(je, "k", "entry"), "entry.k");
    e.lambda = number(field(je, "lambda", "entry"), "entry.lambda");
    e.alpha = matrix_from_json(field(je, "alpha", "entry"), "entry.alpha");
    if (e.alpha.rows() != data.m) parse_error("entry.alpha: expected an m x m matrix");
    data.entries.push_back(std::move(e));
  }
  for (int n = 1; n <= data.N; ++n) {
    for (int k = 1; k <= data.m; ++k) {
      const auto& e = data.at(n, k);
      if (e.n != n || e.k != k) parse_error(where + ": entries must be ordered by (n, k)");
    }
  }
  if (j.contains("coefficients")) data.coefficients = coefficients_from_json(j.at("coefficients"));
  return data;
}

MatrixProblem problem_from_json(const json& j) {
  const std::string where = "problem";
  if (!j.is_object()) parse_error(where + ": expected an object");
  const std::string kind = field(j, "kind", where).is_string()
                               ? j.at("kind").get<std::string>()
                               : std::string();
  const int m = integer(field(j, "m", where), "problem.m");
  if (m < 1) parse_error("problem.m must be positive");
  const int nodes =
      j.contains("nodes") ? integer(j.at("nodes"), "problem.nodes") : PotentialGrid::kDefaultNodes;
  PotentialGrid q = potential_from_json(field(j, "potential", where), m, nodes);
  if (q.dim() != m) parse_error("potential dimension differs from m");

  if (kind == "graph") {
    const double h = j.contains("h") ? number(j.at("h"), "problem.h") : 0.0;
    return MatrixProblem::graph(std::move(q), h);
  }
  if (kind != "general") parse_error("problem.kind: expected 'graph' or 'general'");
  CMatrix t;
  if (j.contains("T")) {
    t = matrix_from_json(j.at("T"), "problem.T");
  } else if (j.contains("T_vector")) {
    const json& v = j.at("T_vector");
    if (!v.is_array() || static_cast<int>(v.size()) != m) parse_error("problem.T_vector: m entries");
    CVector u(m);
    for (int i = 0; i < m; ++i) u(i) = complex_from_json(v[i], "problem.T_vector");
    if (u.norm() == 0.0) parse_error("problem.T_vector must be nonzero");
    u.normalize();
    t = u * u.adjoint();
  } else {
    parse_error("problem: general problems need 'T' or 'T_vector'");
  }
  if (t.rows() != m) parse_error("problem.T: expected an m x m matrix");
  CMatrix h = CMatrix::Zero(m, m);
  if (j.contains("H")) {
    h = matrix_from_json(j.at("H"), "problem.H");
  } else if (j.contains("h")) {
    h = number(j.at("h"), "problem.h") * t;
  }
  if (h.rows() != m) parse_error("problem.H: expected an m x m matrix");
  return MatrixProblem::general(std::move(q), t, h);
}

json to_json(const Reconstruction& rec) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "reconstruction";
  j["problem_kind"] = rec.kind == ProblemKind::kGraph ? "graph" : "general";
  j["N"] = rec.N;
  j["mesh"] = rec.mesh;
  json q = json::array();
  for (const auto& v : rec.Q) q.push_back(to_json(v));
  j["Q"] = std::move(q);
  j["H"] = to_json(rec.H);
  j["epsilon0_pi"] = to_json(rec.eps0_pi);
  if (rec.kind == ProblemKind::kGraph) {
    j["graph"] = {{"q", rec.q}, {"h", rec.h}, {"h_boundary", rec.h_boundary}};
  }
  j["diagnostics"] = {{"condition_max", rec.condition_max},
                      {"residual_max", rec.residual_max},
                      {"herm_residual", rec.herm_residual},
                      {"offdiag_residual", rec.offdiag_residual},
                      {"eps0_origin", rec.eps0_origin},
                      {"mean_eps", rec.omega_smoke}};
  return j;
}

json to_json(const ResidualReport& r) {
  json j;
  j["N"] = r.N;
  j["kappa"] = r.kappa;
  j["K_I"] = r.K_I;
  j["K_II"] = r.K_II;
  j["K_s"] = r.K_s;
  j["alpha_I_deviation"] = r.alpha_I_deviation;
  j["alpha_II_deviation"] = r.alpha_II_deviation;
  j["kappa_partial_l2"] = r.kappa_partial_l2;
  j["kappa_tail_max"] = r.kappa_tail_max;
  j["K_tail_max"] = r.K_tail_max;
  j["alpha_tail_deviation"] = r.alpha_tail_deviation;
  j["z_fit"] = real_vector(r.z_fit);
  return j;
}

json to_json(const CheckResult& c) {
  json off = json::array();
  for (const auto& [n, k] : c.offenders) off.push_back({n, k});
  return {{"name", c.name},
          {"pass", c.pass},
          {"detail", c.detail},
          {"value", c.value},
          {"offenders", std::move(off)}};
}

json to_json(const SurrogateReport& s) {
  return {{"mesh_t", s.mesh_t},
          {"size", s.size},
          {"smallest_singular_value", s.smallest_singular_value},
          {"threshold", s.threshold},
          {"pass", s.pass},
          {"label", s.label}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void write_potential_csv(std::ostream& os, const Reconstruction& rec) {
  const int m = rec.Q.empty() ? 0 : static_cast<int>(rec.Q.front().rows());
  os << std::setprecision(17);
  os << "x";
  if (rec.kind == ProblemKind::kGraph) {
    for (int j = 1; j <= m; ++j) os << ",q_" << j;
  } else {
    for (int r = 1; r <= m; ++r) {
      for (int c = 1; c <= m; ++c) os << ",re_Q" << r << c << ",im_Q" << r << c;
    }
  }
  os << '\n';
  for (std::size_t i = 0; i < rec.mesh.size(); ++i) {
    os << rec.mesh[i];
    if (rec.kind == ProblemKind::kGraph) {
      for (int j = 0; j < m; ++j) os << ',' << rec.q[j][i];
    } else {
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) os << ',' << rec.Q[i](r, c).real() << ',' << rec.Q[i](r, c).imag();
      }
    }
    os << '\n';
  }
}

}  // namespace gsturm
