#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "olp/harness.hpp"
#include "test_util.hpp"

using namespace olp;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan plan;
  plan.input = input_preset(3, 100);
  plan.input.m = 2;
  plan.policies = {DynamicLearning{}, ActionHistory{}};
  plan.horizon_grid = {60, 120};
  plan.seeds = {1, 2, 3};
  return plan;
}

std::string runs_csv(const ExperimentResult& r, std::size_t m) {
  std::ostringstream os;
  write_runs_csv(os, r.runs, m);
  return os.str();
}

std::string summary_csv(const ExperimentResult& r) {
  std::ostringstream os;
  write_summary_csv(os, r.reports);
  return os.str();
}

}  // namespace

TEST(Decompose, Alg1AgainstItsOwnPriceHasNoDualError) {
  const InputSpec spec = input_preset(3, 300);
  const Instance inst = gen_instance(spec, 4);
  const auto res = run_alg1(inst, spec, PolicyConfig{}, 4);
  const auto rep = decompose_regret(res, inst, res.dual_trajectory.at(0).price);
  EXPECT_EQ(rep.dual_error_sum, 0.0);
  EXPECT_GE(rep.exit_gap, 0.0);
  EXPECT_GE(rep.binding_leftover, 0.0);
}

TEST(Decompose, NoDepletionMeansNoExitGap) {
  const std::size_t n = 10;
  OrderTable t(1);
  for (std::size_t j = 0; j < n; ++j) t.push_back(1.0, std::vector<double>{1.0});
  const Instance inst(std::move(t), {100.0});
  const auto res = run_alg4(inst, PolicyConfig{});
  EXPECT_EQ(res.depletion_time, n);
  const auto rep = decompose_regret(res, inst, DualPrice::zero(1));
  EXPECT_EQ(rep.exit_gap, 0.0);
  EXPECT_EQ(rep.binding_leftover, 0.0);
  EXPECT_EQ(rep.dual_error_sum, 0.0);  // alg4 keeps p = 0 here
}

TEST(Decompose, PiecewiseConstantErrorByHand) {
  const Instance inst = olp::testing::instance({100.0}, {{1, {1}}, {1, {1}}, {1, {1}}, {1, {1}}, {1, {1}}});
  RunResult res;
  res.decisions.assign(5, 0);
  res.leftover = {100.0};
  res.depletion_time = 4;
  // price 1 in force for t = 2, 3; price 3 for t = 4; t = 1 has no price
  res.dual_trajectory = {{1, DualPrice(std::vector<double>{1.0})}, {3, DualPrice(std::vector<double>{3.0})}};
  const auto rep = decompose_regret(res, inst, DualPrice(std::vector<double>{2.0}), 1e-4);
  EXPECT_DOUBLE_EQ(rep.dual_error_sum, 1.0 + 1.0 + 1.0);
  EXPECT_DOUBLE_EQ(rep.exit_gap, 1.0);
  EXPECT_DOUBLE_EQ(rep.binding_leftover, 100.0);
  EXPECT_DOUBLE_EQ(decompose_regret(res, inst, DualPrice::zero(1)).binding_leftover, 0.0);
  EXPECT_THROW(decompose_regret(res, inst, DualPrice::zero(2)), std::invalid_argument);
}

TEST(ConsumptionTrace, AllRejectIsFlatOne) {
  const Instance inst = olp::testing::instance({0.001, 2.0}, {{1, {1, 1}}, {1, {1, 1}}, {1, {1, 1}}, {1, {1, 1}}});
  const auto res = run_alg2(inst, PolicyConfig{});
  ASSERT_EQ(res.revenue, 0.0);
  const auto tr = consumption_trace(res, inst);
  ASSERT_EQ(tr.fractions.size(), 8u);
  for (double v : tr.fractions) EXPECT_EQ(v, 1.0);
}

TEST(ConsumptionTrace, LinearDepletion) {
  const std::size_t n = 16;
  OrderTable t(1);
  for (std::size_t j = 0; j < n; ++j) t.push_back(2.0, std::vector<double>{1.0});
  const Instance inst(std::move(t), {static_cast<double>(n)});
  RunResult res;
  res.decisions.assign(n, 1);
  const auto tr = consumption_trace(res, inst);
  for (std::size_t s = 1; s <= n; ++s) EXPECT_DOUBLE_EQ(tr.fractions[s - 1], 1.0 - static_cast<double>(s) / n);
}

TEST(ConsumptionTrace, MonotoneOnGeneratedInput) {
  const Instance inst = gen_instance(input_preset(2, 500), 3);
  const auto res = run_alg2(inst, PolicyConfig{});
  const auto tr = consumption_trace(res, inst);
  for (std::size_t i = 0; i < tr.m; ++i) {
    double prev = 1.0;
    for (std::size_t s = 0; s < tr.n; ++s) {
      const double v = tr.fractions[s * tr.m + i];
      EXPECT_LE(v, prev);
      EXPECT_GE(v, 0.0);
      prev = v;
    }
    EXPECT_NEAR(tr.fractions[(tr.n - 1) * tr.m + i], res.leftover[i] / inst.capacities()[i], 1e-12);
  }
}

TEST(RunExperiment, SingleCellGivesLengthOneVectors) {
  ExperimentPlan plan = small_plan();
  plan.horizon_grid = {80};
  plan.seeds = {7};
  const auto r = run_experiment(plan);
  ASSERT_EQ(r.reports.size(), 2u);
  for (const auto& rep : r.reports) {
    EXPECT_EQ(rep.horizon_grid.size(), 1u);
    EXPECT_EQ(rep.mean_regret.size(), 1u);
    EXPECT_EQ(rep.regret_std.size(), 1u);
    EXPECT_EQ(rep.regret_std[0], 0.0);
    EXPECT_EQ(rep.seeds_used, 1u);
  }
  EXPECT_EQ(r.runs.size(), 2u);
}

TEST(RunExperiment, RecordsArePairedAndAggregatedByHand) {
  const ExperimentPlan plan = small_plan();
  const auto r = run_experiment(plan);
  ASSERT_EQ(r.runs.size(), 2u * 2u * 3u);
  for (const auto& rec : r.runs) {
    EXPECT_DOUBLE_EQ(rec.regret, rec.offline - rec.online);
    EXPECT_GE(rec.regret, -1e-6);
    InputSpec spec = plan.input;
    spec.horizon = rec.n;
    const Instance inst = gen_instance(spec, rec.seed);
    EXPECT_DOUBLE_EQ(rec.offline, offline_optimum(inst).value);
  }
  for (const auto& rep : r.reports)
    for (std::size_t g = 0; g < plan.horizon_grid.size(); ++g) {
      std::vector<double> v;
      for (const auto& rec : r.runs)
        if (rec.policy == rep.policy && rec.n == plan.horizon_grid[g]) v.push_back(rec.regret);
      ASSERT_EQ(v.size(), 3u);
      const double mean = (v[0] + v[1] + v[2]) / 3.0;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      EXPECT_NEAR(rep.mean_regret[g], mean, 1e-9);
      EXPECT_NEAR(rep.regret_std[g], std::sqrt(ss / 2.0), 1e-9);
    }
}

TEST(RunExperiment, NonBindingCapacityGivesZeroRegretForAlg1) {
  ExperimentPlan plan = small_plan();
  plan.input.consumption = ConsumptionDist::uniform;
  plan.input.consumption_a = 0.1;
  plan.input.consumption_b = 0.9;
  plan.input.capacity_fraction = 0.95;
  plan.policies = {KnownDistribution{}};
  const auto r = run_experiment(plan);
  for (const auto& rep : r.reports)
    for (double v : rep.mean_regret) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(RunExperiment, ParallelismDoesNotChangeOutput) {
  ExperimentPlan plan = small_plan();
  const auto a = run_experiment(plan);
  plan.parallelism = 4;
  const auto b = run_experiment(plan);
  EXPECT_EQ(runs_csv(a, 2), runs_csv(b, 2));
  EXPECT_EQ(summary_csv(a), summary_csv(b));
}

TEST(RunExperiment, SeedOrderDoesNotChangeReports) {
  ExperimentPlan plan = small_plan();
  const auto a = run_experiment(plan);
  std::reverse(plan.seeds.begin(), plan.seeds.end());
  const auto b = run_experiment(plan);
  for (std::size_t p = 0; p < a.reports.size(); ++p)
    for (std::size_t g = 0; g < plan.horizon_grid.size(); ++g) {
      EXPECT_NEAR(a.reports[p].mean_regret[g], b.reports[p].mean_regret[g], 1e-9);
      EXPECT_NEAR(a.reports[p].regret_std[g], b.reports[p].regret_std[g], 1e-9);
    }
}

TEST(RunExperiment, TracesOnlyWhenRequested) {
  ExperimentPlan plan = small_plan();
  EXPECT_TRUE(run_experiment(plan).traces.empty());
  plan.record_consumption = true;
  const auto r = run_experiment(plan);
  ASSERT_EQ(r.traces.size(), 2u);
  for (const auto& tr : r.traces) {
    EXPECT_EQ(tr.n, 120u);
    EXPECT_EQ(tr.seed, 1u);
  }
}

TEST(RunExperiment, InvalidPlansThrow) {
  ExperimentPlan plan = small_plan();
  plan.seeds.clear();
  EXPECT_THROW(run_experiment(plan), std::invalid_argument);
  plan = small_plan();
  plan.horizon_grid = {2};
  EXPECT_THROW(run_experiment(plan), std::invalid_argument);
  plan = small_plan();
  plan.input = input_preset(4, 100);
  plan.policies = {KnownDistribution{}};
  EXPECT_THROW(run_experiment(plan), std::invalid_argument);
}

TEST(Writers, CsvHeaders) {
  ExperimentPlan plan = small_plan();
  plan.record_consumption = true;
  const auto r = run_experiment(plan);
  const std::string runs = runs_csv(r, 2);
  EXPECT_EQ(runs.substr(0, runs.find('\n')),
            "policy,n,seed,offline,online,regret,depletion_time,leftover_1,leftover_2,solver_flags");
  EXPECT_EQ(static_cast<std::size_t>(std::count(runs.begin(), runs.end(), '\n')), 1 + r.runs.size());
  std::ostringstream s;
  write_summary_csv(s, r.reports, 4.0);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')),
            "policy,n,mean_regret,std_regret,mean_exit_gap,mean_binding_leftover,bound");
  std::ostringstream c;
  write_consumption_csv(c, r.traces);
  const std::string cons = c.str();
  EXPECT_EQ(cons.substr(0, cons.find('\n')), "policy,n,seed,t,fraction_1,fraction_2");
  EXPECT_EQ(static_cast<std::size_t>(std::count(cons.begin(), cons.end(), '\n')), 1 + 2 * 120);
}

TEST(Writers, PlanJsonRoundTrip) {
  ExperimentPlan plan = small_plan();
  plan.policies = {KnownDistribution{20}, ConservativeLearning{0.3, 1.5}, TrendAdaptive{}};
  plan.config.step_solve = StepSolve::capped_subgradient;
  plan.config.solver.method = SolverMethod::projected_subgradient;
  plan.input = input_preset(1, 100);
  plan.input.walk->upper = 7.0;
  const nlohmann::json j = to_json(plan);
  const ExperimentPlan back = plan_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.seeds, plan.seeds);
  EXPECT_EQ(std::get<ConservativeLearning>(back.policies[1]).epsilon, 0.3);
  EXPECT_EQ(back.input.walk->upper, 7.0);
}

TEST(RunExperiment, ActionHistoryDepletesLaterThanGeometric) {
  ExperimentPlan plan;
  plan.input = input_preset(3, 100);
  plan.policies = {DynamicLearning{}, ActionHistory{}};
  plan.horizon_grid = {3000};
  plan.seeds = {1, 2, 3};
  const auto r = run_experiment(plan);
  const auto& a2 = r.reports[0];
  const auto& a4 = r.reports[1];
  EXPECT_LT(a4.mean_depletion_gap[0] + a4.mean_leftover_binding[0],
            a2.mean_depletion_gap[0] + a2.mean_leftover_binding[0]);
}
