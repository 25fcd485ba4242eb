// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// a subset, e.g. `acceptance 1 2 9`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "olp/cli.hpp"
#include "olp/harness.hpp"
#include "olp/simplex.hpp"
#include "olp/stats_lab.hpp"

using namespace olp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

OrderTable random_orders(std::mt19937_64& g, std::size_t k, std::size_t m) {
  std::uniform_real_distribution<double> r(0.0, 5.0);
  std::normal_distribution<double> a(0.5, 1.0);
  OrderTable t(m);
  std::vector<double> row(m);
  for (std::size_t j = 0; j < k; ++j) {
    for (double& v : row) v = std::abs(a(g));
    t.push_back(r(g), row);
  }
  return t;
}

std::vector<RegretReport> ensemble(const InputSpec& input, std::vector<PolicyKind> policies,
                                   std::vector<std::size_t> grid, std::size_t seeds) {
  ExperimentPlan plan;
  plan.input = input;
  plan.policies = std::move(policies);
  plan.horizon_grid = std::move(grid);
  for (std::uint64_t s = 1; s <= seeds; ++s) plan.seeds.push_back(s);
  return run_experiment(plan).reports;
}

Verdict solver_oracle() {
  std::mt19937_64 g(2024);
  std::uniform_real_distribution<double> D(0.1, 1.0);
  double worst_excess = -1e300;
  std::size_t bad = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 1 + rep % 2, k = 1 + g() % 50;
    const OrderTable t = random_orders(g, k, m);
    std::vector<double> d(m);
    for (double& v : d) v = D(g);
    const DualProblem prob = normalized_dual(d, t.view());
    const double pitch = 1e-3;
    double lipschitz = 0.0;
    for (double v : d) lipschitz += v;
    for (std::size_t j = 0; j < k; ++j)
      for (double a : t[j].consumption) lipschitz += prob.scale * std::abs(a);
    const double solved = solve_dual(prob).objective;
    const double grid = oracle_grid_min(prob, pitch).objective;
    const double excess = std::abs(solved - grid) - (lipschitz * pitch + 1e-6);
    worst_excess = std::max(worst_excess, excess);
    if (excess > 0.0 || solved > grid + 1e-6) ++bad;
  }
  return {bad == 0, "200 instances, " + std::to_string(bad) + " outside tolerance, worst slack " + fmt(-worst_excess)};
}

Verdict strong_duality() {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> D(0.05, 0.95);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 1 + rep % 2, n = m + 1 + g() % (12 - m);
    std::vector<double> d(m);
    for (double& v : d) v = D(g);
    const Instance inst = Instance::from_per_period(random_orders(g, n, m), d);
    LinearProgram lp(m, n);
    for (std::size_t j = 0; j < n; ++j) {
      lp.c[j] = inst.orders()[j].reward;
      lp.upper[j] = 1.0;
      for (std::size_t i = 0; i < m; ++i) lp.at(i, j) = inst.orders()[j].consumption[i];
    }
    for (std::size_t i = 0; i < m; ++i) lp.b[i] = inst.capacities()[i];
    const LpSolution primal = solve_lp(lp);
    if (primal.status != LpStatus::optimal) return {false, "primal LP not optimal at rep " + std::to_string(rep)};
    worst = std::max(worst, std::abs(offline_optimum(inst).value - primal.objective));
  }
  return {worst <= 1e-6, "100 instances, max |dual - primal| = " + fmt(worst)};
}

Verdict envelope(int preset, double coef) {
  InputSpec spec = input_preset(preset);
  const std::vector<std::size_t> grid{1000, 3000, 10000};
  const auto rep = ensemble(spec, {DynamicLearning{}}, grid, 20).at(0);
  bool ok = true;
  std::string detail = "mean regret / sqrt(n):";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double ratio = rep.mean_regret[g] / std::sqrt(static_cast<double>(grid[g]));
    ok &= ratio <= coef;
    detail += " " + fmt(ratio, 3);
  }
  return {ok, detail + " (limit " + fmt(coef) + ")"};
}

Verdict ordering() {
  bool ok = true;
  std::string detail;
  for (int preset = 1; preset <= 3; ++preset) {
    const auto reps = ensemble(input_preset(preset), {DynamicLearning{}, ConservativeLearning{0.1, std::nullopt}, ActionHistory{}},
                               {10000}, 20);
    const double r2 = reps[0].mean_regret[0], r3 = reps[1].mean_regret[0], r4 = reps[2].mean_regret[0];
    ok &= r4 <= r2 && r3 >= r2;
    detail += "input" + std::to_string(preset) + " alg2=" + fmt(r2) + " alg3=" + fmt(r3) + " alg4=" + fmt(r4) + "; ";
  }
  return {ok, detail};
}

Verdict trend() {
  bool ok = true;
  std::string detail;
  for (int preset : {4, 5}) {
    const auto reps = ensemble(input_preset(preset), {ActionHistory{}, TrendAdaptive{}}, {1000, 10000}, 10);
    const double a4_small = reps[0].mean_regret[0], a4 = reps[0].mean_regret[1], a5 = reps[1].mean_regret[1];
    const double growth = a4 / a4_small;
    ok &= growth > 10.0 && a5 < 0.25 * a4;
    detail += "input" + std::to_string(preset) + " alg4 growth=" + fmt(growth) + " alg5/alg4=" + fmt(a5 / a4) + "; ";
  }
  return {ok, detail};
}

RegenSpec two_step_spec() {
  RegenSpec s;
  s.max_cycle_length = 2;
  s.cycle_length_probs = {0.4, 0.6};
  s.value_bound = 1.0;
  s.table = {{CycleVariant{0.7, {1.0}}, CycleVariant{0.3, {-1.0}}}, {CycleVariant{0.5, {0.5, -0.5}}, CycleVariant{0.5, {1.0, 0.2}}}};
  return s;
}

Verdict concentration() {
  struct Config {
    RegenSpec spec;
    double eps;
    std::size_t t;
  };
  const RegenSpec a = example_regen_spec(), b = two_step_spec();
  const std::vector<Config> configs = {{a, 0.1, 400}, {a, 0.1, 1000}, {a, 0.2, 200}, {a, 0.2, 500}, {a, 0.3, 150},
                                       {a, 0.3, 400}, {a, 0.5, 100},  {a, 0.5, 300}, {b, 0.2, 200}, {b, 0.3, 300}};
  std::size_t held = 0;
  double min_margin = 1e300;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto chk = check_concentration(configs[c].spec, configs[c].eps, configs[c].t, 10.0, 10000, 100 + c);
    if (chk.holds()) ++held;
    min_margin = std::min(min_margin, chk.choice.bound - chk.tail.lower);
  }
  return {held == configs.size(),
          std::to_string(held) + "/10 configurations hold, smallest bound - lower CI = " + fmt(min_margin)};
}

Verdict convergence() {
  const std::vector<std::size_t> grid{1000, 10000, 100000};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 30; ++s) seeds.push_back(s);
  bool ok = true;
  std::string detail;
  for (int preset : {3, 2}) {
    const InputSpec spec = input_preset(preset);
    const auto ref = reference_dual(spec, 1000000, SolverConfig{}, 99);
    const auto tab = dual_convergence_experiment(spec, grid, seeds, SolverConfig{}, ref.price);
    const bool good = ref.converged && tab.slope && *tab.slope >= -1.3 && *tab.slope <= -0.7;
    ok &= good;
    detail += "input" + std::to_string(preset) + " slope=" + (tab.slope ? fmt(*tab.slope) : std::string("undefined")) + "; ";
  }
  return {ok, detail};
}

Verdict exact_trace() {
  std::mt19937_64 g(99);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 50; ++rep) {
    InputSpec spec = input_preset(1 + rep % 5);
    spec.horizon = 50 + g() % 1500;
    spec.m = 1 + g() % 4;
    spec.capacity_fraction = std::uniform_real_distribution<double>(0.1, 0.6)(g);
    const Instance inst = gen_instance(spec, g());
    const auto a = run_alg2(inst, PolicyConfig{});
    const auto b = run_alg3(inst, PolicyConfig{}, ConservativeLearning{0.0, std::nullopt});
    if (a.decisions != b.decisions) ++mismatches;
  }
  return {mismatches == 0, "50 instances, " + std::to_string(mismatches) + " differ"};
}

int cli(std::vector<std::string> args, std::string* err = nullptr) {
  args.insert(args.begin(), "olp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, e;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, e);
  if (err) *err = e.str();
  return code;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "olp_acceptance";
  fs::remove_all(root);
  std::string detail;
  bool ok = true;
  for (const char* fig : {"1", "13", "21"}) {
    const fs::path a = root / (std::string("a") + fig), b = root / (std::string("b") + fig);
    const std::vector<std::string> base = {"run", "--figure", fig, "--n-grid", "100,300,1000", "--seeds", "3"};
    auto args = base;
    args.insert(args.end(), {"--out", a.string()});
    std::string err;
    if (cli(args, &err) != 0) return {false, "figure " + std::string(fig) + " failed: " + err};
    args = base;
    args.insert(args.end(), {"--out", b.string(), "--parallelism", "2"});
    if (cli(args, &err) != 0) return {false, "figure " + std::string(fig) + " failed: " + err};
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto name = entry.path().filename();
      if (name.extension() != ".csv") continue;
      ++files;
      if (cli::read_text(a / name) != cli::read_text(b / name)) {
        ok = false;
        detail += name.string() + " differs; ";
      }
    }
    const int code = cli({"replay", "--manifest", (a / "manifest.json").string()}, &err);
    ok &= code == 0;
    detail += "figure " + std::string(fig) + ": " + std::to_string(files) + " CSVs, replay exit " + std::to_string(code) + "; ";
  }
  fs::remove_all(root);
  return {ok, detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "solver matches grid oracle", 60, solver_oracle},
      {2, "offline optimum by strong duality", 60, strong_duality},
      {3, "input III alg2 regret within 8 sqrt(n)", 600, [] { return envelope(3, 8.0); }},
      {4, "input I alg2 regret within 50 sqrt(n)", 600, [] { return envelope(1, 50.0); }},
      {5, "alg4 <= alg2 <= alg3 at n = 10^4", 900, ordering},
      {6, "trend inputs: alg4 super-linear, alg5 far better", 900, trend},
      {7, "concentration bound dominates empirical tail", 600, concentration},
      {8, "dual convergence slope in [-1.3, -0.7]", 1200, convergence},
      {9, "alg3 with eps = 0 reproduces alg2", 60, exact_trace},
      {10, "figure presets deterministic and replayable", 300, determinism},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = v.pass && in_time;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << v.detail << " ["
              << fmt(secs, 3) << " s of " << c.limit_seconds << " s" << (in_time ? "" : ", over budget") << "]"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
