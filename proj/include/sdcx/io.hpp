// io.hpp - JSON and CSV serialization of instances, families, certificates,
// reformulations and benchmark reports.
//
// Matrices are arrays of rows.  Doubles are written in the shortest form that
// parses back to the identical value (at most 17 significant digits), so a
// parse → serialize cycle is bitwise stable.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "obstruct.hpp"
#include "qcqp.hpp"

namespace sdcx {

SDCX_DEFINE_ERROR(MalformedInput)

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

inline json to_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json to_json(const Mat& M) {
  json a = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

inline json to_json(const std::vector<double>& v) { return json(v); }

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw MalformedInput(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number_from_json(const json& j, const char* what) {
  if (!j.is_number()) throw MalformedInput(std::string(what) + " must be a number");
  return j.get<double>();
}

inline Index count_from_json(const json& j, const char* what) {
  if (!j.is_number_integer()) throw MalformedInput(std::string(what) + " must be an integer");
  return j.get<Index>();
}

inline Vec vec_from_json(const json& j, const char* what = "vector") {
  if (!j.is_array()) throw MalformedInput(std::string(what) + " must be an array");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(Index(i)) = number_from_json(j[i], what);
  return v;
}

/// Dense matrix from an array of equal-length rows; an empty array is 0×0.
inline Mat mat_from_json(const json& j, const char* what = "matrix") {
  if (!j.is_array()) throw MalformedInput(std::string(what) + " must be an array of rows");
  const Index r = static_cast<Index>(j.size());
  const Index c = r == 0 ? 0 : static_cast<Index>(j[0].is_array() ? j[0].size() : 0);
  Mat M(r, c);
  for (Index i = 0; i < r; ++i) {
    const json& row = j[std::size_t(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != c)
      throw MalformedInput(std::string(what) + " rows must be arrays of equal length");
    for (Index k = 0; k < c; ++k) M(i, k) = number_from_json(row[std::size_t(k)], what);
  }
  return M;
}

inline Mat square_from_json(const json& j, Index n, const char* what) {
  Mat M = mat_from_json(j, what);
  if (M.rows() != n || M.cols() != n) throw MalformedInput(std::string(what) + " must be n×n");
  return M;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw MalformedInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// Instances and families
// ---------------------------------------------------------------------------

inline json instance_to_json(const QcqpInstance& inst) {
  json j;
  j["n"] = inst.n;
  j["k"] = inst.k;
  j["m"] = inst.m;
  j["seed"] = inst.seed;
  j["A1"] = to_json(inst.A1);
  j["A2"] = to_json(inst.A2);
  j["b1"] = to_json(inst.b1);
  j["b2"] = to_json(inst.b2);
  j["L"] = to_json(inst.L);
  return j;
}

inline QcqpInstance instance_from_json(const json& j) {
  QcqpInstance inst;
  inst.n = count_from_json(field(j, "n"), "n");
  inst.k = count_from_json(field(j, "k"), "k");
  inst.m = count_from_json(field(j, "m"), "m");
  if (!field(j, "seed").is_number_unsigned() && !field(j, "seed").is_number_integer())
    throw MalformedInput("seed must be an integer");
  inst.seed = j.at("seed").get<std::uint64_t>();
  if (inst.n < 1 || inst.k < 0 || 2 * inst.k > inst.n || inst.m < 1) throw MalformedInput("inconsistent n, k, m");
  inst.A1 = square_from_json(field(j, "A1"), inst.n, "A1");
  inst.A2 = square_from_json(field(j, "A2"), inst.n, "A2");
  inst.b1 = vec_from_json(field(j, "b1"), "b1");
  inst.b2 = vec_from_json(field(j, "b2"), "b2");
  inst.L = mat_from_json(field(j, "L"), "L");
  if (inst.b1.size() != inst.n || inst.b2.size() != inst.n) throw MalformedInput("b1, b2 must have length n");
  if (inst.L.rows() != inst.m || inst.L.cols() != inst.n) throw MalformedInput("L must be m×n");
  return inst;
}

inline json family_to_json(const Family& fam) {
  json a = json::array();
  for (const auto& A : fam) a.push_back(to_json(A));
  return a;
}

/// The family in a file: its "family" array, or {A1, A2} of an instance.
inline Family family_from_json(const json& j) {
  Family fam;
  if (j.is_object() && j.contains("family")) {
    const json& f = j.at("family");
    if (!f.is_array() || f.empty()) throw MalformedInput("family must be a non-empty array of matrices");
    for (const auto& M : f) fam.push_back(mat_from_json(M, "family member"));
  } else if (j.is_object() && j.contains("A1") && j.contains("A2")) {
    fam.push_back(mat_from_json(j.at("A1"), "A1"));
    fam.push_back(mat_from_json(j.at("A2"), "A2"));
  } else {
    throw MalformedInput("expected a 'family' array or an instance with A1 and A2");
  }
  const Index n = fam.front().rows();
  for (const auto& A : fam)
    if (A.rows() != n || A.cols() != n) throw MalformedInput("family members must share one square order");
  return fam;
}

inline json report_to_json(const ObstructionReport& r) {
  json j;
  j["commutator_checked"] = r.commutator_checked;
  j["commutator_rank"] = r.commutator_rank;
  j["rsdc_lower_bound"] = r.rsdc_lower_bound;
  j["algebra_dim"] = r.algebra_dim;
  j["algebra_bound_violated"] = r.algebra_bound_violated;
  return j;
}

// ---------------------------------------------------------------------------
// Canonical forms and certificates
// ---------------------------------------------------------------------------

inline json pencil_to_json(const PencilForm& form) {
  json j;
  j["n"] = form.n();
  j["r"] = form.r();
  j["k"] = form.k();
  json real = json::array();
  for (const auto& b : form.real_blocks) real.push_back({{"sigma", b.sigma}, {"mu", b.mu}});
  j["real_blocks"] = real;
  json cx = json::array();
  for (const auto& l : form.complex_blocks) cx.push_back({{"re", l.real()}, {"im", l.imag()}});
  j["complex_blocks"] = cx;
  j["kappa"] = form.P.kappa();
  j["P"] = to_json(form.P.P());
  return j;
}

inline json certificate_to_json(const RsdcCertificate& c) {
  json j;
  j["order_added"] = c.order_added;
  j["xi"] = c.xi;
  j["kappa"] = c.kappa;
  j["interp_cond"] = c.interp_cond;
  j["eig_residual"] = c.eig_residual;
  j["warnings"] = c.warnings;
  if (c.order_added == 1) {
    j["x"] = to_json(c.x);
    j["y"] = to_json(c.y);
    j["z"] = c.z;
    j["alpha"] = to_json(c.alpha);
    j["beta"] = to_json(c.beta);
  } else {
    j["a"] = to_json(c.a);
    j["b"] = to_json(c.b);
  }
  j["gamma"] = to_json(c.gamma);
  j["A_tilde"] = to_json(c.A_tilde);
  j["B_tilde"] = to_json(c.B_tilde);
  j["P"] = to_json(c.congruence.P());
  return j;
}

// ---------------------------------------------------------------------------
// Reformulations
// ---------------------------------------------------------------------------

inline json reformulation_to_json(const Reformulation& r) {
  json j;
  j["method"] = method_name(r.method);
  j["n"] = r.n;
  j["dim"] = r.dim;
  j["kappa"] = r.kappa;
  j["eig_residual"] = r.eig_residual;
  j["quad_obj"] = to_json(r.quad_obj);
  j["quad_con"] = to_json(r.quad_con);
  j["lin_obj"] = to_json(r.lin_obj);
  j["lin_con"] = to_json(r.lin_con);
  j["poly"] = to_json(r.poly);
  j["equalities"] = to_json(r.equalities);
  j["P"] = to_json(r.P.P());
  if (r.method == QcqpMethod::Eig) j["P1"] = to_json(r.P1);
  return j;
}

inline Reformulation reformulation_from_json(const json& j) {
  Reformulation r;
  if (!field(j, "method").is_string()) throw MalformedInput("method must be a string");
  try {
    r.method = parse_method(j.at("method").get<std::string>());
  } catch (const InvalidArgument& e) {
    throw MalformedInput(e.what());
  }
  r.n = count_from_json(field(j, "n"), "n");
  r.dim = count_from_json(field(j, "dim"), "dim");
  r.kappa = number_from_json(field(j, "kappa"), "kappa");
  r.eig_residual = number_from_json(field(j, "eig_residual"), "eig_residual");
  r.quad_obj = vec_from_json(field(j, "quad_obj"), "quad_obj");
  r.quad_con = vec_from_json(field(j, "quad_con"), "quad_con");
  r.lin_obj = vec_from_json(field(j, "lin_obj"), "lin_obj");
  r.lin_con = vec_from_json(field(j, "lin_con"), "lin_con");
  r.poly = mat_from_json(field(j, "poly"), "poly");
  r.equalities = mat_from_json(field(j, "equalities"), "equalities");
  if (r.equalities.rows() == 0) r.equalities = Mat(0, r.dim);
  const Index pn = r.method == QcqpMethod::Eig ? r.n : r.dim;
  try {
    r.P = Congruence(square_from_json(field(j, "P"), pn, "P"));
  } catch (const SingularMatrix& e) {
    throw MalformedInput(std::string("P: ") + e.what());
  }
  if (r.method == QcqpMethod::Eig) r.P1 = square_from_json(field(j, "P1"), r.n, "P1");
  for (const Vec* v : {&r.quad_obj, &r.quad_con, &r.lin_obj, &r.lin_con})
    if (v->size() != r.dim) throw MalformedInput("diagonal and linear terms must have length dim");
  if (r.poly.cols() != r.dim || r.equalities.cols() != r.dim)
    throw MalformedInput("poly and equalities must have dim columns");
  return r;
}

// ---------------------------------------------------------------------------
// Benchmark reports
// ---------------------------------------------------------------------------

/// %.17g, or an empty field for non-finite values.
inline std::string csv_number(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string bench_csv(const BenchReport& rep) {
  std::ostringstream os;
  os << "n,k,seed,method,dim,kappa,deviation,eig_residual,gen_ms,reform_ms,status\n";
  for (const auto& r : rep.rows)
    os << r.n << ',' << r.k << ',' << r.seed << ',' << method_name(r.method) << ',' << r.dim << ','
       << csv_number(r.kappa) << ',' << csv_number(r.deviation) << ',' << csv_number(r.eig_residual) << ','
       << csv_number(r.gen_ms) << ',' << csv_number(r.reform_ms) << ',' << r.status << '\n';
  return os.str();
}

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json bench_json(const BenchReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    json j;
    j["n"] = r.n;
    j["k"] = r.k;
    j["seed"] = r.seed;
    j["instance_seed"] = r.instance_seed;
    j["method"] = method_name(r.method);
    j["dim"] = r.dim;
    j["kappa"] = finite_or_null(r.kappa);
    j["deviation"] = finite_or_null(r.deviation);
    j["eig_residual"] = finite_or_null(r.eig_residual);
    j["gen_ms"] = r.gen_ms;
    j["reform_ms"] = r.reform_ms;
    j["status"] = r.status;
    if (!r.message.empty()) j["message"] = r.message;
    rows.push_back(std::move(j));
  }
  json summary = json::array();
  for (const auto& s : rep.summary)
    summary.push_back({{"n", s.n},
                       {"k", s.k},
                       {"method", method_name(s.method)},
                       {"rows", s.rows},
                       {"failures", s.failures},
                       {"median_kappa", finite_or_null(s.median_kappa)},
                       {"median_deviation", finite_or_null(s.median_deviation)}});
  return {{"rows", rows}, {"summary", summary}};
}

}  // namespace sdcx
