#include "qsfunm/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "qsfunm/bounds.hpp"
#include "qsfunm/contour.hpp"
#include "qsfunm/experiments.hpp"
#include "qsfunm/functions.hpp"
#include "qsfunm/hodlr.hpp"
#include "qsfunm/matrix_io.hpp"

namespace qsfunm {

namespace {

/// Writes to --out when given, else to the CLI's stdout stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InvalidInput("cannot open '" + path + "' for writing");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("HODLR_FUNM_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidArgument(std::string("HODLR_FUNM_SEED is not an unsigned integer: '") + env + "'");
  }
  return 1;
}

Enclosure parse_enclosure(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw InvalidArgument("enclosure must be interval:a, disc:ratio or hull:re,im:radius");
  }
  const std::string kind = text.substr(0, colon), rest = text.substr(colon + 1);
  if (kind == "interval") return enclosure_interval(parse_complex(rest).real());
  if (kind == "disc") return enclosure_disc(parse_complex(rest).real());
  if (kind == "hull") {
    const auto c2 = rest.rfind(':');
    if (c2 == std::string::npos) throw InvalidArgument("hull enclosure needs hull:re,im:radius");
    return enclosure_hull_disc(parse_complex(rest.substr(0, c2)),
                               parse_complex(rest.substr(c2 + 1)).real());
  }
  throw InvalidArgument("unknown enclosure kind '" + kind + "'");
}

struct FunmOptions {
  std::string input, function = "exp", center = "0", polesFile, out, report;
  double radius = 1.0, tol = std::sqrt(kUnitRoundoff), eps = kUnitRoundoff;
  long mmin = 64;
  bool hodlr = false, dense = false, autoPoles = false, assume = false;
};

int cmd_funm(const FunmOptions& o, std::ostream& out) {
  const auto& fn = lookup_function(o.function);
  ContourSpec spec;
  spec.center = parse_complex(o.center);
  spec.radius = o.radius;
  spec.tolerance = o.tol;
  spec.assumeSpectrumInside = o.assume;
  std::vector<PoleSpec> poles;
  if (!o.polesFile.empty()) poles = load_poles(o.polesFile);
  if (o.autoPoles) {
    for (auto& p : fn.polesWithin(spec.center, spec.radius)) poles.push_back(std::move(p));
  }
  const DenseMatrix a = load_matrix(o.input);
  DenseMatrix result;
  std::vector<double> diffs;
  std::vector<long> counts;
  if (o.hodlr) {
    HodlrConfig cfg;
    cfg.epsilon = o.eps;
    cfg.mMin = o.mmin;
    const HodlrMatrixC h = hodlr_from_dense(a, cfg);
    const auto r = funm_with_poles(fn.value, poles, h, spec, cfg);
    result = hodlr_to_dense(r.result);
    diffs = r.integral.successiveDiffs;
    counts = r.integral.nodeCounts;
  } else {
    const auto r = funm_with_poles(fn.value, poles, a, spec);
    result = r.result;
    diffs = r.integral.successiveDiffs;
    counts = r.integral.nodeCounts;
  }
  Sink sink(o.out, out);
  write_matrix(sink.stream(), result);
  if (!o.report.empty()) {
    Sink rs(o.report, out);
    rs.stream() << "N,diff\n";
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      rs.stream() << counts[i] << ',' << format_real(diffs[i]) << '\n';
    }
  }
  return 0;
}

struct BoundOptions {
  std::string enclosure = "interval:0.75", function = "exp", out;
  long k = 1, t = 0, lmax = 20, jordanShift = 0;
  double kappa = 1.0, innerRadius = 1.0, center = 0.0;
  std::optional<double> norm, crouzeix;
};

int cmd_bound(const BoundOptions& o, std::ostream& out) {
  if (o.lmax < 1) throw InvalidArgument("--lmax must be >= 1");
  DecayBoundParams p;
  p.enclosure = parse_enclosure(o.enclosure);
  p.function = function_meta(lookup_function(o.function), Complex(o.center), o.innerRadius);
  p.k = o.k;
  p.t = o.t;
  p.kappaMax = o.kappa;
  p.jordanShift = o.jordanShift;
  p.crouzeixC = o.crouzeix;
  // Without a measured norm, the enclosure's own extent bounds ||A - z0 I|| for normal A.
  p.normShifted = o.norm ? *o.norm : p.enclosure.deltaOf(p.enclosure.rho) * o.innerRadius;
  const BoundCurve curve(p);
  Sink sink(o.out, out);
  write_bound_csv(sink.stream(), curve, o.lmax);
  return 0;
}

struct ExperimentOptions {
  std::string kind = "tridiag", function = "exp", out, crossCheck = "hodlr";
  long m = 256, trials = 10, lmax = 20;
  std::optional<std::uint64_t> seed;
};

int cmd_experiment(const ExperimentOptions& o, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  cfg.kind = parse_matrix_kind(o.kind);
  cfg.functionName = o.function;
  cfg.m = o.m;
  cfg.trials = o.trials;
  cfg.lmax = o.lmax;
  cfg.seed = resolve_seed(o.seed);
  if (o.crossCheck == "dense") {
    cfg.crossCheck = CrossCheckBackend::Dense;
  } else if (o.crossCheck != "hodlr") {
    throw InvalidArgument("--cross-check must be dense or hodlr");
  }
  const auto res = run_decay_experiment(cfg);
  Sink sink(o.out, out);
  res.write_csv(sink.stream());
  const long bad = res.violations();
  if (bad > 0) {
    err << "bound violated in " << bad << " of " << res.rows.size() << " rows\n";
    return 1;
  }
  return 0;
}

struct BenchOptions {
  std::vector<long> sizes{128, 256};
  int repeats = 5;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  ExpSinConfig cfg;
  cfg.sizes.assign(o.sizes.begin(), o.sizes.end());
  cfg.repeats = o.repeats;
  cfg.seed = resolve_seed(o.seed);
  const auto rows = run_expsin_benchmark(cfg);
  Sink sink(o.out, out);
  write_expsin_csv(sink.stream(), rows);
  return 0;
}

/// Quick invariant checks, one line per check.
int cmd_selftest(std::ostream& out) {
  int failures = 0;
  const auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << detail << ")\n";
    if (!ok) ++failures;
  };

  const DenseMatrix a = gen_hermitian_tridiagonal(128, 7);
  {
    const HodlrMatrixC h = hodlr_from_dense(a);
    const double err = norm2(hodlr_to_dense(h) - a) / norm2(a);
    check("hodlr roundtrip", err <= 1e-14 && hodlr_qsrank(h) <= 1, "rel err " + format_real(err));
  }
  {
    ContourSpec spec;
    spec.radius = 2.0;
    const auto rep = contour_adaptive([](Complex z) { return std::exp(z); }, a, spec);
    const DenseMatrix oracle = funm_dense_oracle(a, [](Complex z) { return std::exp(z); });
    const double err = norm2(rep.result - oracle) / norm2(oracle);
    check("contour exp vs oracle", err <= 1e-10, "rel err " + format_real(err));
  }
  {
    ContourSpec spec;
    const DenseMatrix s = DenseMatrix::Constant(1, 1, Complex(0.5));
    const auto& f = lookup_function("exp_over_sin");
    const auto r = funm_with_poles(f.value, f.polesWithin(0.0, 1.0), s, spec);
    const double want = std::exp(0.5) / std::sin(0.5);
    const double err = std::abs(r.result(0, 0) - want) / want;
    check("scalar pole correction", err <= 1e-10, "rel err " + format_real(err));
  }
  {
    const HodlrMatrixC h = hodlr_from_dense(a);
    const HodlrMatrixC shifted = hodlr_scale_shift(h, Complex(1.0), Complex(4.0));
    const DenseMatrix inv = hodlr_to_dense(hodlr_inverse(shifted));
    DenseMatrix dense = a;
    dense.diagonal().array() += 4.0;
    const double err = norm2(inv * dense - DenseMatrix::Identity(a.rows(), a.cols()));
    check("hodlr inverse residual", err <= 1e-12, "residual " + format_real(err));
  }
  {
    ExperimentConfig cfg;
    cfg.m = 64;
    cfg.trials = 1;
    const auto res = run_decay_experiment(cfg);
    check("decay bound dominance", res.violations() == 0,
          std::to_string(res.violations()) + " violations");
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Functions of quasiseparable matrices by HODLR contour integration"};
  app.require_subcommand(1);

  FunmOptions fo;
  auto* funm = app.add_subcommand("funm", "evaluate f(A) for a matrix file");
  funm->add_option("input", fo.input, "matrix file")->required();
  funm->add_option("--function", fo.function, "registered function name");
  funm->add_option("--center", fo.center, "contour center re,im");
  funm->add_option("--radius", fo.radius, "contour radius");
  funm->add_option("--tol", fo.tol, "stopping tolerance on successive differences");
  funm->add_option("--poles", fo.polesFile, "poles file enclosed by the contour");
  funm->add_flag("--auto-poles", fo.autoPoles, "add the registered poles inside the contour");
  auto* hflag = funm->add_flag("--hodlr", fo.hodlr, "use HODLR arithmetic");
  funm->add_flag("--dense", fo.dense, "use dense arithmetic (default)")->excludes(hflag);
  funm->add_flag("--assume-inside", fo.assume, "skip the spectrum-inside-contour check");
  funm->add_option("--eps", fo.eps, "HODLR truncation threshold");
  funm->add_option("--mmin", fo.mmin, "HODLR leaf size");
  funm->add_option("--out", fo.out, "output matrix file (default stdout)");
  funm->add_option("--report", fo.report, "write the N,diff convergence history here");

  BoundOptions bo;
  auto* bound = app.add_subcommand("bound", "emit an off-diagonal decay bound curve");
  bound->add_option("--enclosure", bo.enclosure, "interval:a, disc:ratio or hull:re,im:radius");
  bound->add_option("--function", bo.function, "registered function name");
  bound->add_option("--k", bo.k, "quasiseparable rank");
  bound->add_option("--t", bo.t, "number of enclosed simple poles");
  bound->add_option("--lmax", bo.lmax, "largest singular value index");
  bound->add_option("--kappa", bo.kappa, "spectral condition bound");
  bound->add_option("--norm", bo.norm, "||A - z0 I||_2");
  bound->add_option("--inner-radius", bo.innerRadius, "R'");
  bound->add_option("--center", bo.center, "real center z0");
  bound->add_option("--jordan-shift", bo.jordanShift, "largest Jordan block size minus one");
  bound->add_option("--crouzeix", bo.crouzeix, "use constant C instead of kappa (e.g. 11.08)");
  bound->add_option("--out", bo.out, "output CSV (default stdout)");

  ExperimentOptions eo;
  auto* exper = app.add_subcommand("experiment", "singular values versus bound, per trial");
  exper->add_option("--kind", eo.kind, "tridiag or hessenberg");
  exper->add_option("--function", eo.function, "exp, log_shift4 or sqrt_shift4");
  exper->add_option("--m", eo.m, "matrix size (even)");
  exper->add_option("--trials", eo.trials, "number of trials");
  exper->add_option("--lmax", eo.lmax, "singular values per trial");
  exper->add_option("--seed", eo.seed, "base seed (else HODLR_FUNM_SEED, else 1)");
  exper->add_option("--cross-check", eo.crossCheck, "contour backend: hodlr or dense");
  exper->add_option("--out", eo.out, "output CSV (default stdout)");

  BenchOptions be;
  auto* bench = app.add_subcommand("bench-expsin", "e^A (sin A)^{-1}: inv versus sum");
  bench->add_option("--sizes", be.sizes, "matrix sizes")->delimiter(',');
  bench->add_option("--repeats", be.repeats, "timing repeats (median reported)");
  bench->add_option("--seed", be.seed, "seed (else HODLR_FUNM_SEED, else 1)");
  bench->add_option("--out", be.out, "output CSV (default stdout)");

  auto* self = app.add_subcommand("selftest", "run quick invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*funm) return cmd_funm(fo, out);
    if (*bound) return cmd_bound(bo, out);
    if (*exper) return cmd_experiment(eo, out, err);
    if (*bench) return cmd_bench(be, out);
    if (*self) return cmd_selftest(out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace qsfunm
