// sdcx - command-line front end: instance generation, SDC/ASDC checks,
// canonical forms, restricted-SDC certificates, QCQP reformulations,
// benchmarks and the built-in counterexample families.
//
// Exit codes: 0 success, 1 malformed input or usage, 2 precondition failure
// (error name on stderr), 10 computed negative verdict.
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sdcx/sdcx.hpp"

using namespace sdcx;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMalformed = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitNegative = 10;

struct Options {
  Tolerances tol;
  std::uint64_t seed = 0;
  std::string input, output, reference, strategy = "chebyshev", method, grid = "n=10;k=1", json_output;
  Index n = 0, k = 0, m = 0, samples = 100, seeds = 5, counter_n = 2;
  unsigned threads = 0;
  bool no_timing = false;
};

/// Writes to `path`, or to stdout when the path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

std::vector<Index> parse_counts(const std::string& list, const std::string& key) {
  std::vector<Index> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw MalformedInput("grid entry '" + key + "=" + list + "' is not a list of nonnegative integers");
    }
  }
  if (out.empty()) throw MalformedInput("grid key '" + key + "' has no values");
  return out;
}

/// "n=10,15,20;k=1,2,3" → n values and k values.
void parse_grid(const std::string& grid, BenchConfig& cfg) {
  std::stringstream ss(grid);
  for (std::string part; std::getline(ss, part, ';');) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw MalformedInput("grid part '" + part + "' lacks '='");
    const std::string key = part.substr(0, eq), vals = part.substr(eq + 1);
    if (key == "n")
      cfg.ns = parse_counts(vals, key);
    else if (key == "k")
      cfg.ks = parse_counts(vals, key);
    else
      throw MalformedInput("unknown grid key '" + key + "' (expected n or k)");
  }
}

XiStrategy parse_strategy(const std::string& s, std::uint64_t seed) {
  XiStrategy st;
  st.seed = seed;
  if (s == "chebyshev")
    st.kind = XiKind::Chebyshev;
  else if (s == "spread")
    st.kind = XiKind::Spread;
  else if (s == "random")
    st.kind = XiKind::Random;
  else
    throw MalformedInput("unknown strategy '" + s + "' (expected chebyshev, spread or random)");
  return st;
}

QcqpInstance read_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_gen(const Options& o) {
  const Index m = o.m > 0 ? o.m : 10 * o.n;
  emit(o.output, dump(instance_to_json(generate_instance(o.n, o.k, m, o.seed))));
  return kExitOk;
}

int cmd_check_sdc(const Options& o) {
  const Family fam = family_from_json(read_json_file(o.input));
  const auto res = sdc_check(fam, o.tol, o.seed);
  json j;
  j["verdict"] = res.is_sdc() ? "SDC" : "NotSDC";
  if (res.is_sdc()) {
    j["kappa"] = res.congruence->kappa();
    j["residual"] = diagonal_residual(fam, res.congruence->P());
    j["P"] = to_json(res.congruence->P());
  } else {
    j["witness"] = res.witness->describe();
  }
  std::cout << (res.is_sdc() ? "SDC" : "NotSDC " + res.witness->describe()) << "\n";
  if (!o.output.empty()) write_text_file(o.output, dump(j));
  return res.is_sdc() ? kExitOk : kExitNegative;
}

int cmd_check_asdc(const Options& o) {
  const Family fam = family_from_json(read_json_file(o.input));
  json j;
  j["members"] = fam.size();
  std::string verdict;
  if (fam.size() == 2) {
    const auto v = asdc_pair_check(fam[0], fam[1], o.tol);
    verdict = asdc_status_name(v.status);
    j["reason"] = v.reason;
  } else if (fam.size() == 3) {
    try {
      const auto v = asdc_triple_check(fam[0], fam[1], fam[2], o.tol);
      verdict = asdc_status_name(v.status);
      j["reason"] = v.reason;
      j["report"] = report_to_json(not_asdc_certificate(fam, o.tol, o.seed));
    } catch (const SingularTriple&) {
      // No invertible element: only the padding obstruction of (B, C) applies.
      const auto c = commutator_obstruction(fam[1], fam[2], o.tol);
      j["commutator_rank"] = c.rank;
      j["d_threshold"] = c.d_threshold;
      verdict = "Inconclusive";
      j["reason"] = "no invertible element in the span";
    }
  } else if (sdc_check(fam, o.tol, o.seed).is_sdc()) {
    verdict = "SDC";
  } else {
    const auto rep = not_asdc_certificate(fam, o.tol, o.seed);
    j["report"] = report_to_json(rep);
    verdict = rep.algebra_bound_violated ? "NotASDC" : "Inconclusive";
    j["reason"] = rep.algebra_bound_violated ? "algebra dimension exceeds the order"
                                             : "necessary conditions hold; ASDC not decided";
  }
  j["verdict"] = verdict;
  std::cout << dump(j);
  if (!o.output.empty()) write_text_file(o.output, dump(j));
  return verdict == "NotASDC" ? kExitNegative : kExitOk;
}

int cmd_canon(const Options& o) {
  const Family fam = family_from_json(read_json_file(o.input));
  if (fam.size() != 2) throw MalformedInput("canon expects a pencil (two matrices)");
  emit(o.output, dump(pencil_to_json(pencil_canonical(fam[0], fam[1], o.tol))));
  return kExitOk;
}

int cmd_rsdc(const Options& o, int order) {
  const Family fam = family_from_json(read_json_file(o.input));
  if (fam.size() != 2) throw MalformedInput("rsdc expects a pencil (two matrices)");
  const XiStrategy st = parse_strategy(o.strategy, o.seed);
  const auto cert = order == 1 ? rsdc1_construct(fam[0], fam[1], st, o.tol) : rsdc2_construct(fam[0], fam[1], st, o.tol);
  for (const auto& w : cert.warnings) std::cerr << "warning: " << w << "\n";
  emit(o.output, dump(certificate_to_json(cert)));
  return kExitOk;
}

int cmd_reformulate(const Options& o) {
  const auto inst = read_instance(o.input);
  QcqpMethod method;
  try {
    method = parse_method(o.method);
  } catch (const InvalidArgument& e) {
    throw MalformedInput(e.what());
  }
  emit(o.output, dump(reformulation_to_json(reformulate(inst, method, o.tol, parse_strategy(o.strategy, o.seed)))));
  return kExitOk;
}

int cmd_verify(const Options& o) {
  const auto inst = read_instance(o.input);
  const auto ref = reformulation_from_json(read_json_file(o.reference));
  if (ref.n != inst.n || ref.poly.rows() != inst.L.rows())
    throw MalformedInput("reformulation does not match the instance dimensions");
  const auto v = verify_reformulation(inst, ref, o.samples, o.seed);
  json j;
  j["method"] = method_name(ref.method);
  j["samples"] = v.samples;
  j["max_deviation"] = v.max_deviation;
  j["relative_deviation"] = v.relative_deviation;
  j["value_scale"] = v.value_scale;
  j["passed"] = v.passed();
  std::cout << dump(j);
  return v.passed() ? kExitOk : kExitNegative;
}

int cmd_bench(const Options& o) {
  BenchConfig cfg;
  parse_grid(o.grid, cfg);
  cfg.seeds = o.seeds;
  cfg.samples = o.samples;
  cfg.master_seed = o.seed;
  cfg.threads = o.threads;
  cfg.timing = !o.no_timing;
  if (!o.method.empty()) {
    cfg.methods.clear();
    std::stringstream ss(o.method);
    for (std::string s; std::getline(ss, s, ',');) {
      try {
        cfg.methods.push_back(parse_method(s));
      } catch (const InvalidArgument& e) {
        throw MalformedInput(e.what());
      }
    }
  }
  const auto rep = bench(cfg);
  emit(o.output, bench_csv(rep));
  if (!o.json_output.empty()) write_text_file(o.json_output, dump(bench_json(rep)));
  for (const auto& s : rep.summary) {
    std::fprintf(stderr, "n=%lld k=%lld %-5s rows=%lld failures=%lld median_kappa=%s median_deviation=%s\n",
                 static_cast<long long>(s.n), static_cast<long long>(s.k), method_name(s.method),
                 static_cast<long long>(s.rows), static_cast<long long>(s.failures),
                 csv_number(s.median_kappa).c_str(), csv_number(s.median_deviation).c_str());
  }
  return kExitOk;
}

int cmd_counterexamples(const Options& o) {
  namespace fs = std::filesystem;
  const fs::path dir = o.output.empty() ? fs::path(".") : fs::path(o.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidArgument("cannot create '" + dir.string() + "': " + ec.message());
  for (const auto& ce : builtin_counterexamples(o.counter_n)) {
    json j;
    j["name"] = ce.name;
    j["expected"] = ce.expected;
    j["family"] = family_to_json(ce.family);
    j["report"] = report_to_json(not_asdc_certificate(ce.family, o.tol, o.seed));
    if (ce.family.size() == 3) {
      const auto c = commutator_obstruction(ce.family[1], ce.family[2], o.tol);
      j["commutator_rank"] = c.rank;
      j["d_threshold"] = c.d_threshold;
    }
    const fs::path p = dir / (ce.name + ".json");
    write_text_file(p.string(), dump(j));
    std::cout << p.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"sdcx: simultaneous diagonalization by congruence toolkit"};
  app.require_subcommand(1, 1);
  app.fallthrough();  // global options may follow the subcommand
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  app.add_option("--rank-tol", o.tol.rank_tol, "Relative SVD rank cutoff")->capture_default_str();
  app.add_option("--eig-real-tol", o.tol.eig_real_tol, "Imaginary-part threshold")->capture_default_str();
  app.add_option("--resid-tol", o.tol.resid_tol, "Relative off-diagonal residual")->capture_default_str();
  app.add_option("--cluster-tol", o.tol.cluster_tol, "Eigenvalue clustering threshold")->capture_default_str();

  std::function<int()> run;
  auto sub = [&](const char* name, const char* help, std::function<int()> f) {
    auto* s = app.add_subcommand(name, help);
    s->callback([&run, f] { run = f; });
    return s;
  };
  auto input = [&](CLI::App* s) { s->add_option("-i,--input", o.input, "Input JSON")->required(); };

  auto* gen = sub("gen", "Generate a random QCQP instance", [&] { return cmd_gen(o); });
  gen->add_option("--n", o.n, "Variable count")->required();
  gen->add_option("--k", o.k, "Complex eigenvalue pairs (2k <= n)")->required();
  gen->add_option("--m", o.m, "Polytope rows (default 10n)");
  gen->add_option("-o,--output", o.output, "Output JSON (default stdout)");

  auto* csdc = sub("check-sdc", "Decide SDC of a family or instance pencil", [&] { return cmd_check_sdc(o); });
  input(csdc);
  csdc->add_option("-o,--output", o.output, "Write the certificate JSON");

  auto* casdc = sub("check-asdc", "Decide ASDC (pairs, triples) or report obstructions", [&] { return cmd_check_asdc(o); });
  input(casdc);
  casdc->add_option("-o,--output", o.output, "Write the report JSON");

  auto* canon = sub("canon", "Canonical form of a nonsingular pencil", [&] { return cmd_canon(o); });
  input(canon);
  canon->add_option("-o,--output", o.output, "Output JSON (default stdout)");

  for (int order : {1, 2}) {
    auto* r = sub(order == 1 ? "rsdc1" : "rsdc2", order == 1 ? "One-row restricted SDC certificate"
                                                             : "Two-row restricted SDC certificate",
                  [&, order] { return cmd_rsdc(o, order); });
    input(r);
    r->add_option("-o,--output", o.output, "Certificate JSON (default stdout)");
    r->add_option("--strategy", o.strategy, "Interpolation points: chebyshev, spread or random")->capture_default_str();
  }

  auto* refo = sub("reformulate", "Diagonal QCQP reformulation", [&] { return cmd_reformulate(o); });
  input(refo);
  refo->add_option("--method", o.method, "sdc, rsdc1, rsdc2 or eig")->required();
  refo->add_option("-o,--output", o.output, "Reformulation JSON (default stdout)");
  refo->add_option("--strategy", o.strategy, "Interpolation points for rsdc methods")->capture_default_str();

  auto* ver = sub("verify", "Pointwise check of a reformulation", [&] { return cmd_verify(o); });
  input(ver);
  ver->add_option("-r,--reformulation", o.reference, "Reformulation JSON")->required();
  ver->add_option("--samples", o.samples, "Sample points")->capture_default_str();

  auto* be = sub("bench", "Reformulation benchmark over an (n, k) grid", [&] { return cmd_bench(o); });
  be->add_option("--grid", o.grid, "Grid, e.g. \"n=10,15,20;k=1,2,3\"")->capture_default_str();
  be->add_option("--seeds", o.seeds, "Seeds per cell")->capture_default_str();
  be->add_option("--samples", o.samples, "Verification samples per row")->capture_default_str();
  be->add_option("--methods", o.method, "Comma-separated methods (default all)");
  be->add_option("--threads", o.threads, "Worker threads (0: hardware)")->capture_default_str();
  be->add_flag("--no-timing", o.no_timing, "Write zero timings for reproducible reports");
  be->add_option("-o,--output", o.output, "CSV report (default stdout)");
  be->add_option("--json", o.json_output, "JSON report with per-cell medians");

  auto* ce = sub("counterexamples", "Write the built-in counterexample families", [&] { return cmd_counterexamples(o); });
  ce->add_option("-o,--output", o.output, "Output directory")->capture_default_str();
  ce->add_option("--n", o.counter_n, "Half-order of the commutator triple")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitMalformed;
  }
  try {
    return run();
  } catch (const MalformedInput& e) {
    std::cerr << e.what() << "\n";
    return kExitMalformed;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
}
