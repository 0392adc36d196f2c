// Command-line front end: instance generation, paths, campaigns, lemma checks, bound tables.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "l1lb/bounds.hpp"
#include "l1lb/experiment.hpp"
#include "l1lb/instance.hpp"
#include "l1lb/lasso_path.hpp"
#include "l1lb/report.hpp"
#include "l1lb/risk.hpp"
#include "l1lb/verify.hpp"

using namespace l1lb;

namespace {

struct InstanceFlags {
  int theorem = 1;
  long n = 30;
  long p = 0;  // 0: 3n (at least 90 for theorem 2)
  double sigma = 0.0;
  std::string file;

  Instance build() const {
    if (!file.empty()) return load_instance(file);
    long pp = p ? p : 3 * n;
    if (!p && theorem == 2) pp = std::max(pp, 90L);
    return make_instance(theorem, n, pp, sigma);
  }
};

void add_instance_flags(CLI::App* app, InstanceFlags& f) {
  app->add_option("--theorem", f.theorem, "construction (1 or 2)")->check(CLI::IsMember({1, 2}));
  app->add_option("--n", f.n, "sample size");
  app->add_option("--p", f.p, "dimension (default 3n)");
  app->add_option("--sigma", f.sigma, "noise level");
  app->add_option("--instance", f.file, "instance JSON (overrides the flags above)");
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  return out;
}

// A destination of "-" or "" writes to stdout.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
  } else {
    auto out = open_out(path);
    write(out);
  }
}

int print_logs(const std::string& name, const std::vector<InequalityTrialLog>& logs, const std::string& out) {
  const LogSummary s = summarize(logs);
  std::cerr << name << ": " << s.count << " checks, " << s.violations << " violations, max ratio "
            << fmt(s.max_ratio) << ", min ratio " << fmt(s.min_ratio) << '\n';
  if (!out.empty()) emit(out, [&](std::ostream& os) { write_inequality_csv(logs, os); });
  return s.violations == 0 ? 0 : 1;
}

int print_frequency(const std::string& name, const FrequencyCheck& f) {
  std::cout << name << ": " << f.violations << "/" << f.trials << " violations, frequency "
            << fmt(f.frequency) << ", bound " << fmt(f.bound) << ", threshold " << fmt(f.threshold) << " -> "
            << (f.passed ? "PASS" : "FAIL") << '\n';
  return f.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l1-constrained regression lower-bound constructions and checks"};
  app.require_subcommand(1);

  // gen
  InstanceFlags gen_flags;
  std::string gen_out, gen_design, gen_response;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "write an instance file, optionally with a sampled design");
  add_instance_flags(gen, gen_flags);
  gen->add_option("--out", gen_out, "instance JSON (default stdout)");
  gen->add_option("--seed", gen_seed, "sampling seed");
  gen->add_option("--design-csv", gen_design, "write X as i,j,value");
  gen->add_option("--response-csv", gen_response, "write y and z as i,y,z");

  // path
  InstanceFlags path_flags;
  std::uint64_t path_seed = 0;
  double path_budget = INFINITY;
  std::string path_out, path_coefs, path_curve;
  auto* path = app.add_subcommand("path", "compute the full solution path for one sample");
  add_instance_flags(path, path_flags);
  path->add_option("--seed", path_seed, "sampling seed");
  path->add_option("--budget", path_budget, "stop at this l1 budget");
  path->add_option("--out", path_out, "breakpoint CSV k,B,rss,nnz (default stdout)");
  path->add_option("--coefficients", path_coefs, "per-breakpoint coefficients k,j,beta");
  path->add_option("--risk-curve", path_curve, "excess-risk curve B,excess,total");

  // experiment
  ExperimentConfig cfg;
  std::string cfg_file, exp_p = "auto", exp_report;
  std::vector<long> exp_n;
  std::vector<double> exp_sigma;
  bool no_early_stop = false;
  auto* exp = app.add_subcommand("experiment", "seeded campaign over an (n, sigma) grid");
  exp->add_option("--config", cfg_file, "key = value file; flags given here override it");
  exp->add_option("--theorem", cfg.theorem)->check(CLI::IsMember({1, 2}));
  exp->add_option("--n", exp_n, "grid of sample sizes")->delimiter(',');
  exp->add_option("--sigma", exp_sigma, "grid of noise levels")->delimiter(',');
  exp->add_option("--p", exp_p, "auto, <k>n, or an integer");
  exp->add_option("--trials", cfg.trials);
  exp->add_option("--seed", cfg.master_seed, "master seed");
  exp->add_option("--threads", cfg.threads);
  exp->add_option("--out", cfg.out, "results CSV");
  exp->add_option("--report", exp_report, "also write the summary table here");
  exp->add_flag("--timing", cfg.timing, "record wall_ms");
  exp->add_flag("--no-early-stop", no_early_stop, "trace every path to its end");

  // verify
  InstanceFlags ver_flags;
  std::string lemma, ver_out;
  std::size_t ver_trials = 1000, ver_probes = 2000;
  std::uint64_t ver_seed = 0;
  long ver_k = 2;
  auto* ver = app.add_subcommand("verify", "Monte Carlo checks of the proof inequalities");
  add_instance_flags(ver, ver_flags);
  ver->add_option("--lemma", lemma)->required()->check(CLI::IsMember({"max", "min", "chisq", "re", "spectral"}));
  ver->add_option("--trials", ver_trials);
  ver->add_option("--seed", ver_seed);
  ver->add_option("--k", ver_k, "sparsity for --lemma re");
  ver->add_option("--probes", ver_probes, "cone probes for --lemma re");
  ver->add_option("--out", ver_out, "inequality log CSV");

  // bounds
  BoundParams bp;
  bp.n = 1000;
  bp.p = 100;
  bool bounds_csv = false;
  std::string bounds_out;
  auto* bnd = app.add_subcommand("bounds", "evaluate every bound formula");
  bnd->add_option("--n", bp.n);
  bnd->add_option("--p", bp.p);
  bnd->add_option("--k", bp.k);
  bnd->add_option("--sigma", bp.sigma);
  bnd->add_option("--B", bp.budget, "l1 budget");
  bnd->add_option("--epsilon", bp.epsilon);
  bnd->add_option("--lambda1", bp.lambda1);
  bnd->add_option("--kappa", bp.kappa);
  bnd->add_option("--delta", bp.delta_2k);
  bnd->add_option("--theta", bp.theta_k2k);
  bnd->add_flag("--csv", bounds_csv, "CSV instead of a text table");
  bnd->add_option("--out", bounds_out);

  // report
  std::string rep_in, rep_out, rep_svg;
  auto* rep = app.add_subcommand("report", "aggregate a results CSV");
  rep->add_option("results", rep_in, "results CSV")->required();
  rep->add_option("--out", rep_out, "summary table (default stdout)");
  rep->add_option("--svg", rep_svg, "log-log plot of median min excess against n");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const Instance inst = gen_flags.build();
      emit(gen_out, [&](std::ostream& os) { os << instance_to_json(inst) << '\n'; });
      if (!gen_design.empty() || !gen_response.empty()) {
        const Sample s = sample_design(inst, gen_seed);
        if (!gen_design.empty()) emit(gen_design, [&](std::ostream& os) { write_design_csv(s, os); });
        if (!gen_response.empty()) emit(gen_response, [&](std::ostream& os) { write_response_csv(s, os); });
      }
      return 0;
    }

    if (*path) {
      const Instance inst = path_flags.build();
      const Sample s = sample_design(inst, path_seed);
      const LassoPath lp = compute_path(s, path_budget);
      emit(path_out, [&](std::ostream& os) { write_path_csv(lp, os); });
      if (!path_coefs.empty()) emit(path_coefs, [&](std::ostream& os) { write_path_coefficients_csv(lp, os); });
      const auto curve = risk_curve(inst, lp);
      if (!path_curve.empty()) {
        emit(path_curve, [&](std::ostream& os) { write_risk_curve_csv(curve, inst.sigma, os); });
      }
      const PathRiskMinimum m = min_excess_over_path(inst, lp);
      const LowerBound lb = theorem_lower_bound(inst.theorem_tag, inst.n, inst.sigma);
      std::cerr << lp.size() << " breakpoints, min excess " << fmt(m.excess) << " at B = " << fmt(m.budget)
                << ", fast bound " << fmt(lb.fast);
      bool ok = m.excess >= lb.fast - kBoundSlack;
      if (inst.slow_bound_applicable && lb.slow) {
        std::cerr << ", slow bound " << fmt(*lb.slow);
        ok = ok && m.excess >= *lb.slow - kBoundSlack;
      }
      std::cerr << (ok ? " (satisfied)\n" : " (VIOLATED)\n");
      return ok ? 0 : 1;
    }

    if (*exp) {
      if (!cfg_file.empty()) {
        ExperimentConfig file_cfg = load_config(cfg_file);
        // command-line values win over the file
        if (exp->count("--theorem")) file_cfg.theorem = cfg.theorem;
        if (exp->count("--trials")) file_cfg.trials = cfg.trials;
        if (exp->count("--seed")) file_cfg.master_seed = cfg.master_seed;
        if (exp->count("--threads")) file_cfg.threads = cfg.threads;
        if (exp->count("--out")) file_cfg.out = cfg.out;
        if (cfg.timing) file_cfg.timing = true;
        cfg = file_cfg;
      }
      if (!exp_n.empty()) cfg.n_grid.assign(exp_n.begin(), exp_n.end());
      if (!exp_sigma.empty()) cfg.sigma_grid = exp_sigma;
      if (exp->count("--p") || cfg_file.empty()) cfg.p_rule = PRule::parse(exp_p);
      if (no_early_stop) cfg.early_stop = false;

      const ExperimentOutcome outcome = run_experiment(cfg, [](std::size_t done, std::size_t total) {
        std::cerr << "\r" << done << "/" << total << std::flush;
        if (done == total) std::cerr << '\n';
      });
      if (cfg.out.empty()) write_results_csv(outcome.results, std::cout);
      for (const CellSummary& c : outcome.cells) {
        std::cerr << "theorem " << c.theorem << " n=" << c.n << " p=" << c.p << " sigma=" << fmt(c.sigma) << ": ";
        if (!c.skipped.empty()) {
          std::cerr << "skipped (" << c.skipped << ")\n";
          continue;
        }
        std::cerr << "fast " << c.fast_satisfied << "/" << c.trials;
        if (c.slow_applicable) {
          std::cerr << ", slow " << c.slow_satisfied << "/" << c.slow_applicable << " (need "
                    << fmt(c.slow_threshold(), "%.3f") << ")";
        }
        std::cerr << ", median min excess " << fmt(c.median_min_excess) << (c.passed() ? "" : "  FAIL") << '\n';
      }
      const Report report = build_report(outcome.results);
      if (!exp_report.empty()) emit(exp_report, [&](std::ostream& os) { write_report_table(report, os); });
      for (const SlopeFit& f : report.fits) {
        if (f.slope) {
          std::cerr << "theorem " << f.theorem << " sigma " << fmt(f.sigma) << ": slope " << fmt(*f.slope, "%.4f")
                    << '\n';
        }
      }
      return outcome.all_passed ? 0 : 1;
    }

    if (*ver) {
      if (lemma == "chisq") return print_frequency("chi-square fact", check_chi_square_fact(ver_flags.n, ver_trials, ver_seed));
      if (lemma == "spectral") {
        const long p = ver_flags.p ? ver_flags.p : 3 * ver_flags.n;
        return print_frequency("gaussian spectral bound",
                               check_gaussian_spectral_bound(ver_flags.n, p, ver_trials, ver_seed));
      }
      if (lemma == "min") {
        InstanceFlags f = ver_flags;
        if (f.sigma <= 0.0) f.sigma = 0.2;
        if (!f.p && f.file.empty()) {
          const long need = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(f.n)) / f.sigma));
          f.p = std::max(3 * f.n, need + (f.theorem == 2 ? 3 : 0));
        }
        const Instance inst = f.build();
        return print_logs("lemma min", check_lemma_min(inst, inst.n, inst.sigma, ver_trials, ver_seed), ver_out);
      }
      const Instance inst = ver_flags.build();
      if (lemma == "max") {
        const Sample s = sample_design(inst, derive_seed(ver_seed, 0, 0));
        return print_logs("lemma max", check_lemma_max(inst, s, ver_trials, ver_seed), ver_out);
      }
      // re
      const RestrictedEigenReport r =
          check_restricted_eigenvalue(inst.covariance.to_dense(), ver_k, ver_probes, ver_seed);
      std::cout << r.supports.size() << " supports of size <= " << ver_k << ", min lambda_min "
                << fmt(r.min_support_eigenvalue) << ", kappa estimate " << fmt(r.kappa_upper_estimate) << '\n';
      if (r.witness) {
        std::cout << "witness on support {";
        for (std::size_t i = 0; i < r.witness_support.size(); ++i) std::cout << (i ? "," : "") << r.witness_support[i];
        std::cout << "}: condition violated\n";
        return 1;
      }
      std::cout << "no violation found\n";
      return 0;
    }

    if (*bnd) {
      const auto rows = bound_table(bp);
      emit(bounds_out, [&](std::ostream& os) {
        if (bounds_csv) {
          os << "name,value,note\n";
          for (const auto& r : rows) {
            os << r.name << ',' << (r.value ? fmt(*r.value, "%.17g") : "") << ",\"" << r.note << "\"\n";
          }
        } else {
          for (const auto& r : rows) {
            char line[160];
            std::snprintf(line, sizeof line, "%-30s %s\n", r.name.c_str(),
                          r.value ? fmt(*r.value, "%.10g").c_str() : ("n/a: " + r.note).c_str());
            os << line;
          }
        }
      });
      return 0;
    }

    if (*rep) {
      std::ifstream in(rep_in);
      if (!in) throw std::runtime_error("cannot open " + rep_in);
      const Report report = build_report(read_results_csv(in));
      emit(rep_out, [&](std::ostream& os) { write_report_table(report, os); });
      if (!rep_svg.empty()) emit(rep_svg, [&](std::ostream& os) { write_report_svg(report, os); });
      return report.all_passed ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
