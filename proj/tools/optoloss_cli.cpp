#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "optoloss/cat.hpp"
#include "optoloss/csv.hpp"
#include "optoloss/error.hpp"
#include "optoloss/fock.hpp"
#include "optoloss/observables.hpp"
#include "optoloss/oracle.hpp"
#include "optoloss/wigner.hpp"

using namespace optoloss;
using std::numbers::pi;

namespace {

constexpr int kOk = 0, kTolerance = 1, kUsage = 2;

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results are stored by
// index so output order never depends on scheduling.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int jobs, F fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> err(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  const int t = std::clamp<int>(jobs, 1, int(std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<double> grid(double tau_max, int steps) {
  if (tau_max == 0.0) return {0.0};
  std::vector<double> t(steps + 1);
  for (int i = 0; i <= steps; ++i) t[i] = tau_max * i / steps;
  return t;
}

// Output sink: a file when a path is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw DomainError("cannot open " + path + " for writing");
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// Flat `key = value` file; '#' starts a comment. Keys name long flags
// without the leading dashes; list values are comma separated.
void apply_config(CLI::App& cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    CLI::Option* opt = cmd.get_option_no_throw("--" + key);
    if (!opt || key == "config") {
      throw CLI::ExtrasError(path + ": unknown key '" + key + "'", CLI::ExitCodes::ExtrasError);
    }
    if (opt->count() > 0) continue;  // the command line wins
    std::vector<std::string> parts;
    if (opt->get_type_size_max() == 0) {
      parts.push_back(value);
    } else {
      for (auto& p : csv::split(value)) parts.push_back(trim(p));
    }
    opt->add_result(parts);
    opt->run_callback();
  }
}

struct Common {
  std::string out;
  std::string config;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-o,--out", c.out, "Output file (default stdout)");
  cmd->add_option("--config", c.config, "key = value file; flags given on the command line win")
      ->check(CLI::ExistingFile);
  cmd->add_option("--jobs", c.jobs, "Worker threads for sweep points")
      ->check(CLI::PositiveNumber)
      ->envname("OPTOLOSS_JOBS");
}

CLI::Option* kappa_list(CLI::App* cmd, std::vector<double>& k, const std::string& help) {
  return cmd->add_option("--kappa", k, help)->delimiter(',')->check(CLI::NonNegativeNumber);
}

OracleTolerance field_tolerance(double leak, const std::string& tail) {
  return OracleTolerance::uniform(
      leak, tail == "population" ? TailNorm::population : TailNorm::amplitude);
}

// ---- fcoeffs

struct FcoeffsArgs {
  Common c;
  double g0 = 1.0;
  std::string profile;
  double tau_max = 2 * pi;
  int steps = 100;
};

int run_fcoeffs(const FcoeffsArgs& a) {
  const CouplingProfile g =
      a.profile.empty() ? CouplingProfile::constant(a.g0) : read_profile_csv(a.profile);
  g.require_window(a.tau_max);
  const auto taus = grid(a.tau_max, a.steps);
  const KernelTable table(g, a.tau_max);
  Sink sink(a.c.out);
  auto& os = sink.os();
  os << "tau,F_a,F_plus,F_minus,A,G_re,G_im\n";
  for (double t : taus) {
    const FCoeffs f = table.at(t);
    const cplx G = displacement_G(f);
    os << csv::num(t) << ',' << csv::num(f.f_a) << ',' << csv::num(f.f_plus) << ','
       << csv::num(f.f_minus) << ',' << csv::num(phase_A(f)) << ',' << csv::num(G.real()) << ','
       << csv::num(G.imag()) << '\n';
  }
  return kOk;
}

// ---- photon

struct PhotonArgs {
  Common c;
  double alpha = 1.0;
  double g0 = 0.5;
  std::vector<double> kappa{0.1, 0.5};
  double tau_max = 2 * pi;
  int steps = 15;
  bool oracle = false;
  double leak = 1e-6;
  double tol = 1e-6;
};

int run_photon(const PhotonArgs& a) {
  const auto taus = grid(a.tau_max, a.steps);
  const InitialState init{a.alpha, CoherentMech{}};
  const auto oracle =
      parallel_map<OracleSeries>(a.oracle ? a.kappa.size() : 0, a.c.jobs, [&](std::size_t i) {
        return oracle_series(init, a.g0, a.kappa[i], taus, OracleTolerance::uniform(a.leak), false);
      });
  Sink sink(a.c.out);
  auto& os = sink.os();
  os << "kappa,tau,N" << (a.oracle ? ",N_oracle,rel_err" : "") << '\n';
  double worst = 0.0;
  for (std::size_t k = 0; k < a.kappa.size(); ++k)
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const double n = photon_number(a.alpha, a.kappa[k], taus[i]);
      os << csv::num(a.kappa[k]) << ',' << csv::num(taus[i]) << ',' << csv::num(n);
      if (a.oracle) {
        const double rel = std::abs(oracle[k].n[i] - n) / n;
        worst = std::max(worst, rel);
        os << ',' << csv::num(oracle[k].n[i]) << ',' << csv::num(rel);
      }
      os << '\n';
    }
  if (a.oracle && worst > a.tol) {
    std::cerr << "photon: oracle relative error " << worst << " exceeds " << a.tol << '\n';
    return kTolerance;
  }
  return kOk;
}

// ---- quadratures

struct QuadArgs {
  Common c;
  double alpha = 1.0;
  double beta = 0.0;
  double nbar = 0.0;
  double g0 = 1.0;
  std::vector<double> kappa{0.2, 0.5};
  double tau_max = 2 * pi;
  int steps = 64;
  bool oracle = false;
  double leak = 1e-6;
  std::string tail = "amplitude";
  double tol = 1e-5;
};

int run_quadratures(QuadArgs a) {
  if (std::find(a.kappa.begin(), a.kappa.end(), 0.0) == a.kappa.end()) {
    a.kappa.insert(a.kappa.begin(), 0.0);
  }
  const auto taus = grid(a.tau_max, a.steps);
  InitialState init{a.alpha, CoherentMech{a.beta}};
  if (a.nbar > 0.0) init.mech = ThermalMech{a.nbar};
  init.validate();
  struct Row {
    std::vector<cplx> analytic;
    OracleSeries oracle;
  };
  const auto rows = parallel_map<Row>(a.kappa.size(), a.c.jobs, [&](std::size_t k) {
    Row r;
    r.analytic = expect_a_trace(init, {CouplingProfile::constant(a.g0), a.kappa[k]}, taus).values;
    if (a.oracle)
      r.oracle = oracle_series(init, a.g0, a.kappa[k], taus, field_tolerance(a.leak, a.tail));
    return r;
  });
  Sink sink(a.c.out);
  auto& os = sink.os();
  os << "kappa,tau,X,P" << (a.oracle ? ",X_oracle,P_oracle" : "") << '\n';
  const double s2 = std::numbers::sqrt2;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.kappa.size(); ++k)
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const cplx v = rows[k].analytic[i];
      os << csv::num(a.kappa[k]) << ',' << csv::num(taus[i]) << ',' << csv::num(s2 * v.real())
         << ',' << csv::num(s2 * v.imag());
      if (a.oracle) {
        const cplx o = rows[k].oracle.a[i];
        worst = std::max(worst, s2 * std::abs(o - v));
        os << ',' << csv::num(s2 * o.real()) << ',' << csv::num(s2 * o.imag());
      }
      os << '\n';
    }
  if (a.oracle && worst > a.tol) {
    std::cerr << "quadratures: oracle deviation " << worst << " exceeds " << a.tol << '\n';
    return kTolerance;
  }
  return kOk;
}

// ---- fidelity

struct FidelityArgs {
  Common c;
  std::vector<double> alpha;
  std::vector<double> alpha2;
  double g0 = 0.5;
  std::vector<double> kappa{0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1};
  bool oracle = false;
  double leak = 1e-5;
  double tol = 1e-6;
};

int run_fidelity(const FidelityArgs& a) {
  std::vector<double> amps = a.alpha;
  for (double n : a.alpha2) amps.push_back(std::sqrt(n));
  if (amps.empty()) amps = {1.0, std::sqrt(3.0)};
  struct Point {
    double f = 0, lo = 0, hi = 0, oracle = NAN;
  };
  const std::size_t nk = a.kappa.size();
  const auto pts = parallel_map<Point>(amps.size() * nk, a.c.jobs, [&](std::size_t i) {
    const double al = amps[i / nk], k = a.kappa[i % nk];
    Point p;
    p.f = cat_fidelity(al, a.g0, k, FidelityTruncation::for_alpha(al));
    const FidelityBounds b = fidelity_bounds(al, k);
    p.lo = b.lower;
    p.hi = b.upper;
    if (a.oracle) {
      p.oracle =
          oracle_cat_fidelity(al, a.g0, k, OracleTolerance::uniform(a.leak, TailNorm::amplitude));
    }
    return p;
  });
  Sink sink(a.c.out);
  auto& os = sink.os();
  os << "alpha,kappa,F,lower,upper" << (a.oracle ? ",F_oracle" : "") << '\n';
  bool ok = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    os << csv::num(amps[i / nk]) << ',' << csv::num(a.kappa[i % nk]) << ',' << csv::num(p.f) << ','
       << csv::num(p.lo) << ',' << csv::num(p.hi);
    if (a.oracle) {
      os << ',' << csv::num(p.oracle);
      ok = ok && std::abs(p.oracle - p.f) <= a.tol;
    }
    os << '\n';
    // The series is summed to a 1e-12 tail, so F(0) sits just under 1.
    ok = ok && p.lo - 1e-9 <= p.f && p.f <= p.hi + 1e-9;
  }
  if (!ok) {
    std::cerr << "fidelity: a bound or oracle check failed\n";
    return kTolerance;
  }
  return kOk;
}

// ---- wigner

struct WignerArgs {
  Common c;
  double alpha = std::sqrt(3.0);
  std::vector<double> g0{0.5, 1.0 / std::sqrt(6.0), 1.0 / (2.0 * std::numbers::sqrt2)};
  std::vector<double> kappa{0.0, 0.05, 0.3};
  double min = -5.0, max = 5.0;
  int count = 201;
  std::string dir = ".";
  std::string format = "csv";
  double leak = 1e-4;
  double norm_tol = 5e-3;
};

int run_wigner(const WignerArgs& a) {
  const GridAxis ax{a.min, a.max, a.count};
  ax.validate();
  std::filesystem::create_directories(a.dir);
  const std::size_t nk = a.kappa.size();
  struct Result {
    double negativity = 0, integral = 0;
    std::string file;
  };
  const auto res = parallel_map<Result>(a.g0.size() * nk, a.c.jobs, [&](std::size_t i) {
    const std::size_t gi = i / nk, ki = i % nk;
    const Matrix rho =
        oracle_cat_state(a.alpha, a.g0[gi], a.kappa[ki], OracleTolerance::uniform(a.leak));
    const WignerGrid w = wigner(rho, ax, ax, a.norm_tol);
    Result r{negativity_volume(w), w.integral(),
             "wigner_g" + std::to_string(gi) + "_k" + std::to_string(ki) + "." +
                 (a.format == "csv" ? "csv" : "txt")};
    std::ofstream f(std::filesystem::path(a.dir) / r.file, std::ios::binary);
    if (!f) throw DomainError("cannot write " + r.file);
    if (a.format == "csv") {
      write_wigner_csv(f, w);
    } else {
      write_wigner_matrix(f, w);
    }
    return r;
  });
  Sink sink(a.c.out);
  auto& os = sink.os();
  os << "alpha,g0,kappa,negativity,integral,file\n";
  for (std::size_t i = 0; i < res.size(); ++i) {
    os << csv::num(a.alpha) << ',' << csv::num(a.g0[i / nk]) << ',' << csv::num(a.kappa[i % nk])
       << ',' << csv::num(res[i].negativity) << ',' << csv::num(res[i].integral) << ','
       << res[i].file << '\n';
  }
  return kOk;
}

// ---- oracle-compare

struct CompareArgs {
  Common c;
  double alpha = NAN, g0 = NAN, kappa = NAN, nbar = 0.0;
  double tau_max = 2 * pi;
  int steps = 16;
  double leak = 1e-6;
  std::string tail = "amplitude";
  double tol = 1e-5;
};

struct Case {
  std::string what;
  double alpha, g0, kappa, nbar;
};

int run_compare(const CompareArgs& a) {
  std::vector<Case> cases;
  if (std::isnan(a.alpha) && std::isnan(a.g0) && std::isnan(a.kappa) && a.nbar == 0.0) {
    cases = {{"photon", 1.0, 0.5, 0.5, 0.0},
             {"a", 1.0, 0.5, 0.1, 0.0},
             {"a", 0.5, 1.0, 0.2, 0.0},
             {"a", 0.5, 0.5, 0.2, 0.5},
             {"fidelity", 1.0, 0.5, 0.05, 0.0}};
  } else {
    const double al = std::isnan(a.alpha) ? 1.0 : a.alpha;
    const double g = std::isnan(a.g0) ? 0.5 : a.g0;
    const double k = std::isnan(a.kappa) ? 0.1 : a.kappa;
    cases = {{"photon", al, g, k, a.nbar}, {"a", al, g, k, a.nbar}};
  }
  const auto taus = grid(a.tau_max, a.steps);
  const auto dev = parallel_map<double>(cases.size(), a.c.jobs, [&](std::size_t i) {
    const Case& c = cases[i];
    InitialState init{c.alpha, CoherentMech{}};
    if (c.nbar > 0.0) init.mech = ThermalMech{c.nbar};
    if (c.what == "fidelity") {
      const double f = cat_fidelity(c.alpha, c.g0, c.kappa, FidelityTruncation::for_alpha(c.alpha));
      return std::abs(f -
                      oracle_cat_fidelity(c.alpha, c.g0, c.kappa, field_tolerance(a.leak, a.tail)));
    }
    const bool need_a = c.what == "a";
    const OracleSeries o = oracle_series(
        init, c.g0, c.kappa, taus,
        need_a ? field_tolerance(a.leak, a.tail) : OracleTolerance::uniform(a.leak), need_a);
    double d = 0.0;
    if (need_a) {
      const auto ref = expect_a_trace(init, {CouplingProfile::constant(c.g0), c.kappa}, taus);
      for (std::size_t j = 0; j < taus.size(); ++j)
        d = std::max(d, std::abs(o.a[j] - ref.values[j]));
    } else {
      for (std::size_t j = 0; j < taus.size(); ++j)
        d = std::max(d, std::abs(o.n[j] - photon_number(c.alpha, c.kappa, taus[j])));
    }
    return d;
  });
  Sink sink(a.c.out);
  auto& os = sink.os();
  os << "observable,alpha,g0,kappa,nbar,max_dev,tol,pass\n";
  bool ok = true;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const bool pass = dev[i] <= a.tol;
    ok = ok && pass;
    os << c.what << ',' << csv::num(c.alpha) << ',' << csv::num(c.g0) << ',' << csv::num(c.kappa)
       << ',' << csv::num(c.nbar) << ',' << csv::num(dev[i]) << ',' << csv::num(a.tol) << ','
       << (pass ? "yes" : "no") << '\n';
  }
  return ok ? kOk : kTolerance;
}

// ---- cat

struct CatArgs {
  Common c;
  double alpha = std::sqrt(3.0);
  int components = 2;
  double g0 = NAN;
  int n = 0;
};

int run_cat(const CatArgs& a) {
  const double g = std::isnan(a.g0) ? components_to_coupling(a.components) : a.g0;
  // An explicit cutoff is taken as is; the state is renormalised on it.
  const int n = a.n > 0 ? a.n : coherent_cutoff(a.alpha, 1e-12);
  Sink sink(a.c.out);
  write_cat_csv(sink.os(), ideal_cat_state(a.alpha, g, n, a.n > 0 ? 1.0 : 1e-12));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app(
      "Closed-form observables of a lossy optomechanical cavity, checked against a "
      "truncated Fock-space Lindblad oracle.");
  app.require_subcommand(1);
  app.set_version_flag("--version", "optoloss 1.0");

  FcoeffsArgs fa;
  auto* fc = app.add_subcommand("fcoeffs", "F_a, F_+, F_-, A and G over a tau grid");
  add_common(fc, fa.c);
  fc->add_option("--g0", fa.g0, "Constant coupling")->check(CLI::Number);
  fc->add_option("--profile", fa.profile, "tau,g CSV for a tabulated coupling")
      ->check(CLI::ExistingFile);
  fc->add_option("--tau-max", fa.tau_max)->check(CLI::NonNegativeNumber);
  fc->add_option("--steps", fa.steps)->check(CLI::PositiveNumber);

  PhotonArgs pa;
  auto* ph = app.add_subcommand("photon", "Intracavity photon number");
  add_common(ph, pa.c);
  ph->add_option("--alpha", pa.alpha)->check(CLI::Number);
  ph->add_option("--g0", pa.g0, "Coupling for the oracle run")->check(CLI::Number);
  kappa_list(ph, pa.kappa, "Loss rates, comma separated");
  ph->add_option("--tau-max", pa.tau_max)->check(CLI::NonNegativeNumber);
  ph->add_option("--steps", pa.steps)->check(CLI::PositiveNumber);
  ph->add_flag("--oracle", pa.oracle, "Append Fock-space oracle columns");
  ph->add_option("--leak", pa.leak, "Oracle truncation tolerance")->check(CLI::PositiveNumber);
  ph->add_option("--tol", pa.tol, "Max relative oracle error")->check(CLI::PositiveNumber);

  QuadArgs qa;
  auto* qu =
      app.add_subcommand("quadratures", "Optical quadratures X, P; kappa = 0 is always included");
  add_common(qu, qa.c);
  qu->add_option("--alpha", qa.alpha)->check(CLI::Number);
  qu->add_option("--beta", qa.beta, "Coherent mechanical amplitude")->check(CLI::Number);
  qu->add_option("--nbar", qa.nbar, "Thermal mechanical occupation")->check(CLI::NonNegativeNumber);
  qu->add_option("--g0", qa.g0)->check(CLI::Number);
  kappa_list(qu, qa.kappa, "Loss rates besides 0, comma separated");
  qu->add_option("--tau-max", qa.tau_max)->check(CLI::NonNegativeNumber);
  qu->add_option("--steps", qa.steps)->check(CLI::PositiveNumber);
  qu->add_flag("--oracle", qa.oracle, "Append Fock-space oracle columns");
  qu->add_option("--leak", qa.leak)->check(CLI::PositiveNumber);
  qu->add_option("--tail", qa.tail, "Tail measure for the mechanical cutoffs")
      ->check(CLI::IsMember({"amplitude", "population"}));
  qu->add_option("--tol", qa.tol, "Max quadrature deviation from the oracle")
      ->check(CLI::PositiveNumber);

  FidelityArgs fi;
  auto* fd = app.add_subcommand("fidelity", "Cat-state fidelity and its bounds");
  add_common(fd, fi.c);
  fd->add_option("--alpha", fi.alpha, "Amplitudes, comma separated")->delimiter(',');
  fd->add_option("--alpha2", fi.alpha2, "Mean photon numbers |alpha|^2, comma separated")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  fd->add_option("--g0", fi.g0)->check(CLI::Number);
  kappa_list(fd, fi.kappa, "Loss rates, comma separated");
  fd->add_flag("--oracle", fi.oracle, "Append the Fock-space oracle fidelity");
  fd->add_option("--leak", fi.leak)->check(CLI::PositiveNumber);
  fd->add_option("--tol", fi.tol)->check(CLI::PositiveNumber);

  WignerArgs wa;
  auto* wg = app.add_subcommand("wigner", "Wigner grids of the cat state, one per (g0, kappa)");
  add_common(wg, wa.c);
  wg->add_option("--alpha", wa.alpha)->check(CLI::Number);
  wg->add_option("--g0", wa.g0)->delimiter(',');
  kappa_list(wg, wa.kappa, "Loss rates, comma separated");
  wg->add_option("--grid-min", wa.min);
  wg->add_option("--grid-max", wa.max);
  wg->add_option("--grid-count", wa.count)->check(CLI::Range(2, 100000));
  wg->add_option("--dir", wa.dir, "Directory for the grid files");
  wg->add_option("--format", wa.format)->check(CLI::IsMember({"csv", "matrix"}));
  wg->add_option("--leak", wa.leak)->check(CLI::PositiveNumber);
  wg->add_option("--norm-tol", wa.norm_tol)->check(CLI::PositiveNumber);

  CompareArgs ca;
  auto* oc = app.add_subcommand(
      "oracle-compare", "Max deviation between closed forms and the oracle; exit 1 above tol");
  add_common(oc, ca.c);
  oc->add_option("--alpha", ca.alpha)->check(CLI::Number);
  oc->add_option("--g0", ca.g0)->check(CLI::Number);
  oc->add_option("--kappa", ca.kappa)->check(CLI::NonNegativeNumber);
  oc->add_option("--nbar", ca.nbar)->check(CLI::NonNegativeNumber);
  oc->add_option("--tau-max", ca.tau_max)->check(CLI::PositiveNumber);
  oc->add_option("--steps", ca.steps)->check(CLI::PositiveNumber);
  oc->add_option("--leak", ca.leak)->check(CLI::PositiveNumber);
  oc->add_option("--tail", ca.tail, "Tail measure for the <a> cutoffs")
      ->check(CLI::IsMember({"amplitude", "population"}));
  oc->add_option("--tol", ca.tol)->check(CLI::PositiveNumber);

  CatArgs ta;
  auto* ct = app.add_subcommand("cat", "Number-basis amplitudes of the lossless cat state");
  add_common(ct, ta.c);
  ct->add_option("--alpha", ta.alpha)->check(CLI::Number);
  ct->add_option("--components", ta.components)->check(CLI::IsMember({2, 3, 4}));
  ct->add_option("--g0", ta.g0, "Overrides --components")->check(CLI::Number);
  ct->add_option("--levels", ta.n, "Fock cutoff (default from the Poisson tail)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
    for (auto* sub : app.get_subcommands()) {
      const CLI::Option* cfg = sub->get_option("--config");
      if (cfg->count() > 0) apply_config(*sub, cfg->as<std::string>());
    }
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*fc) return run_fcoeffs(fa);
    if (*ph) return run_photon(pa);
    if (*qu) return run_quadratures(qa);
    if (*fd) return run_fidelity(fi);
    if (*wg) return run_wigner(wa);
    if (*oc) return run_compare(ca);
    if (*ct) return run_cat(ta);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kTolerance;
  }
  return kUsage;
}
