#include "l1lb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "l1lb/bounds.hpp"
#include "l1lb/risk.hpp"

namespace l1lb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

PRule PRule::parse(const std::string& text) {
  const std::string t = trim(text);
  PRule rule;
  if (t.empty() || t == "auto") return rule;
  if (t.back() == 'n') {
    rule.kind = Kind::multiple_of_n;
    rule.value = t.size() == 1 ? 1 : std::stol(t.substr(0, t.size() - 1));
  } else {
    rule.kind = Kind::fixed;
    std::size_t used = 0;
    rule.value = std::stol(t, &used);
    if (used != t.size()) throw std::invalid_argument("bad p rule: " + text);
  }
  if (rule.value < 1) throw std::invalid_argument("bad p rule: " + text);
  return rule;
}

std::string PRule::to_string() const {
  switch (kind) {
    case Kind::automatic:
      return "auto";
    case Kind::multiple_of_n:
      return std::to_string(value) + "n";
    case Kind::fixed:
      return std::to_string(value);
  }
  return "auto";
}

Index PRule::resolve(int theorem_tag, Index n, double sigma) const {
  switch (kind) {
    case Kind::multiple_of_n:
      return value * n;
    case Kind::fixed:
      return value;
    case Kind::automatic:
      break;
  }
  Index p = 3 * n;
  const Index extra = theorem_tag == 2 ? 3 : 0;
  if (sigma > 0.0) {
    const auto ratio = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n)) / sigma));
    p = std::max(p, ratio + extra);
  }
  if (theorem_tag == 2) p = std::max<Index>(p, 90);
  return p;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "theorem") {
        cfg.theorem = std::stoi(value);
      } else if (key == "n") {
        cfg.n_grid.clear();
        for (const auto& v : split(value, ',')) {
          if (!v.empty()) cfg.n_grid.push_back(std::stol(v));
        }
      } else if (key == "sigma") {
        cfg.sigma_grid.clear();
        for (const auto& v : split(value, ',')) {
          if (!v.empty()) cfg.sigma_grid.push_back(std::stod(v));
        }
      } else if (key == "p") {
        cfg.p_rule = PRule::parse(value);
      } else if (key == "trials") {
        cfg.trials = std::stoul(value);
      } else if (key == "seed") {
        cfg.master_seed = std::stoull(value);
      } else if (key == "threads") {
        cfg.threads = static_cast<unsigned>(std::stoul(value));
      } else if (key == "timing") {
        cfg.timing = parse_bool(value);
      } else if (key == "early_stop") {
        cfg.early_stop = parse_bool(value);
      } else if (key == "out") {
        cfg.out = value;
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": value out of range");
    }
  }
  if (cfg.theorem != 1 && cfg.theorem != 2) throw std::invalid_argument("config: theorem must be 1 or 2");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse_config(in);
}

// ---------------------------------------------------------------------------

double CellSummary::fast_rate() const {
  return trials ? static_cast<double>(fast_satisfied) / static_cast<double>(trials) : 0.0;
}

double CellSummary::slow_rate() const {
  return slow_applicable ? static_cast<double>(slow_satisfied) / static_cast<double>(slow_applicable)
                         : 0.0;
}

double CellSummary::slow_threshold() const {
  return slow_applicable ? 0.5 - 3.0 * std::sqrt(0.25 / static_cast<double>(slow_applicable)) : 0.0;
}

bool CellSummary::passed() const {
  if (!skipped.empty()) return true;
  if (fast_satisfied != trials) return false;
  return slow_applicable == 0 || slow_rate() >= slow_threshold();
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

TrialResult run_trial(const Instance& instance, std::uint64_t seed, bool early_stop) {
  const auto start = std::chrono::steady_clock::now();
  const Sample sample = sample_design(instance, seed);

  PathRiskTracker tracker(instance);
  PathOptions opt;
  // Along the path ||beta||_1 grows and every point is at most n-sparse, so with identity
  // covariance the excess of any later point is at least (B - ||beta*||_1)^2 / n.
  const bool can_stop = early_stop && instance.covariance.kind() == CovarianceKind::identity;
  const double star_l1 = instance.beta_star.lpNorm<1>();
  const double rows = static_cast<double>(sample.rows());
  opt.observer = [&](const Breakpoint& bp) {
    tracker.push(bp);
    if (!can_stop || bp.budget <= star_l1) return true;
    const double gap = bp.budget - star_l1;
    return gap * gap / rows <= tracker.minimum().excess;
  };
  const LassoPath path = compute_path(sample, opt);
  if (tracker.empty()) tracker.push(path.back());

  TrialResult r;
  r.theorem = instance.theorem_tag;
  r.n = instance.n;
  r.p = instance.p;
  r.sigma = instance.sigma;
  r.seed = seed;
  r.budget_at_min = tracker.minimum().budget;
  r.min_excess = tracker.minimum().excess;
  r.breakpoints = path.size();

  const LowerBound bound = theorem_lower_bound(instance.theorem_tag, instance.n, instance.sigma);
  r.fast_bound = bound.fast;
  r.satisfied_fast = r.min_excess >= r.fast_bound - kBoundSlack;
  if (instance.slow_bound_applicable && bound.slow) {
    r.slow_bound = bound.slow;
    r.satisfied_slow = r.min_excess >= *bound.slow - kBoundSlack;
  }
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  struct Job {
    std::size_t cell;
    std::size_t trial;
  };
  ExperimentOutcome outcome;
  std::vector<std::optional<Instance>> instances;
  std::vector<Job> jobs;

  for (Index n : config.n_grid) {
    for (double sigma : config.sigma_grid) {
      CellSummary cell;
      cell.cell = outcome.cells.size();
      cell.theorem = config.theorem;
      cell.n = n;
      cell.sigma = sigma;
      cell.p = config.p_rule.resolve(config.theorem, n, sigma);
      try {
        instances.emplace_back(make_instance(config.theorem, n, cell.p, sigma));
        for (std::size_t t = 0; t < config.trials; ++t) jobs.push_back({cell.cell, t});
      } catch (const HypothesisError& e) {
        cell.skipped = e.what();
        instances.emplace_back(std::nullopt);
      }
      outcome.cells.push_back(std::move(cell));
    }
  }

  std::vector<TrialResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      try {
        const Job& job = jobs[j];
        const std::uint64_t seed = derive_seed(config.master_seed, job.cell, job.trial);
        results[j] = run_trial(*instances[job.cell], seed, config.early_stop);
        if (!config.timing) results[j].wall_ms.reset();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
        return;
      }
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, jobs.size());
      }
    }
  };

  const unsigned nthreads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(jobs.size())));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::vector<double>> excess_by_cell(outcome.cells.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    CellSummary& cell = outcome.cells[jobs[j].cell];
    const TrialResult& r = results[j];
    ++cell.trials;
    if (r.satisfied_fast) ++cell.fast_satisfied;
    if (r.satisfied_slow) {
      ++cell.slow_applicable;
      if (*r.satisfied_slow) ++cell.slow_satisfied;
    }
    excess_by_cell[jobs[j].cell].push_back(r.min_excess);
  }
  for (CellSummary& cell : outcome.cells) {
    cell.median_min_excess = median(excess_by_cell[cell.cell]);
    if (!cell.passed()) outcome.all_passed = false;
  }
  outcome.results = std::move(results);
  if (!config.out.empty()) write_results_csv(outcome.results, config.out);
  return outcome;
}

// ---------------------------------------------------------------------------

void write_results_csv(const std::vector<TrialResult>& results, std::ostream& os) {
  os << kResultsHeader << '\n';
  for (const TrialResult& r : results) {
    os << r.theorem << ',' << r.n << ',' << r.p << ',' << fmt17(r.sigma) << ',' << r.seed << ','
       << fmt17(r.budget_at_min) << ',' << fmt17(r.min_excess) << ',' << fmt17(r.fast_bound) << ','
       << (r.slow_bound ? fmt17(*r.slow_bound) : "") << ',' << (r.satisfied_fast ? "true" : "false")
       << ',' << (r.satisfied_slow ? (*r.satisfied_slow ? "true" : "false") : "") << ','
       << r.breakpoints << ',' << (r.wall_ms ? fmt17(*r.wall_ms) : "") << '\n';
  }
}

void write_results_csv(const std::vector<TrialResult>& results, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_results_csv(results, out);
}

std::vector<TrialResult> read_results_csv(std::istream& in) {
  std::vector<TrialResult> out;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw std::runtime_error("line 1: missing header");
  if (trim(line) != kResultsHeader) throw std::runtime_error("line 1: unexpected header");
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("line " + std::to_string(lineno) + ": " + why);
  };
  auto to_bool = [&](const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail("expected true/false, got '" + v + "'");
    return false;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 13) fail("expected 13 fields, got " + std::to_string(f.size()));
    TrialResult r;
    try {
      std::size_t used = 0;
      auto num = [&](const std::string& v) {
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
      };
      auto integer = [&](const std::string& v) {
        const long long d = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
      };
      r.theorem = static_cast<int>(integer(f[0]));
      r.n = integer(f[1]);
      r.p = integer(f[2]);
      r.sigma = num(f[3]);
      r.seed = std::stoull(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument(f[4]);
      r.budget_at_min = num(f[5]);
      r.min_excess = num(f[6]);
      r.fast_bound = num(f[7]);
      if (!f[8].empty()) r.slow_bound = num(f[8]);
      r.satisfied_fast = to_bool(f[9]);
      if (!f[10].empty()) r.satisfied_slow = to_bool(f[10]);
      r.breakpoints = static_cast<std::size_t>(integer(f[11]));
      if (!f[12].empty()) r.wall_ms = num(f[12]);
    } catch (const std::invalid_argument& e) {
      fail(std::string("malformed field: ") + e.what());
    } catch (const std::out_of_range&) {
      fail("numeric field out of range");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace l1lb
