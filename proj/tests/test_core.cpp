#include <gtest/gtest.h>

#include <sstream>

#include "olp/core.hpp"
#include "olp/instance_io.hpp"
#include "test_util.hpp"

using namespace olp;
using olp::testing::instance;

namespace {

bool has_clause(const std::vector<Violation>& v, const std::string& needle) {
  for (const auto& x : v)
    if (x.message.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(ValidateInstance, AllClausesHold) {
  // n = 3, m = 1, rewards within 5, d = 0.25
  const Instance inst = instance({0.75}, {{1.0, {0.5}}, {5.0, {0.2}}, {-4.0, {0.1}}});
  InstanceBounds b;
  b.capacity_lower = 0.1;
  b.capacity_upper = 1.0;
  EXPECT_TRUE(validate_instance(inst, b).empty());
}

TEST(ValidateInstance, GrowthViolated) {
  const Instance inst = instance({0.5, 0.5, 0.5}, {{1.0, {0.1, 0.1, 0.1}}, {1.0, {0.1, 0.1, 0.1}}});
  const auto v = validate_instance(inst, InstanceBounds{});
  EXPECT_TRUE(has_clause(v, "n>m violated"));
}

TEST(ValidateInstance, RewardBoundReportsIndex) {
  const Instance inst = instance({0.5}, {{1.0, {0.5}}, {7.0, {0.5}}, {1.0, {0.5}}});
  const auto v = validate_instance(inst, InstanceBounds{});
  ASSERT_TRUE(has_clause(v, "reward bound violated at index"));
  bool found = false;
  for (const auto& x : v)
    if (x.clause == "reward") {
      EXPECT_EQ(x.index, 1u);
      found = true;
    }
  EXPECT_TRUE(found);
}

TEST(ValidateInstance, CapacityAndNormClauses) {
  const Instance inst = instance({3.0, 0.0}, {{1.0, {2.0, 0.0}}, {1.0, {0.0, 0.5}}, {1.0, {0.5, 0.5}}});
  const auto v = validate_instance(inst, InstanceBounds{});
  // d_1 = 1 is not below the open upper end, d_2 = 0 is below the lower end, row 0 has norm 2 > 1
  int capacity = 0, norm = 0;
  for (const auto& x : v) {
    if (x.clause == "capacity") ++capacity;
    if (x.clause == "consumption") {
      ++norm;
      EXPECT_EQ(x.index, 0u);
    }
  }
  EXPECT_EQ(capacity, 2);
  EXPECT_EQ(norm, 1);
}

TEST(Instance, PerPeriodCapacityIsBOverN) {
  const Instance inst = instance({2.0, 1.0}, {{1, {1, 0}}, {1, {0, 1}}, {1, {1, 1}}, {1, {0, 0}}});
  EXPECT_EQ(inst.horizon(), 4u);
  EXPECT_EQ(inst.resources(), 2u);
  EXPECT_DOUBLE_EQ(inst.per_period_capacity()[0], 0.5);
  EXPECT_DOUBLE_EQ(inst.per_period_capacity()[1], 0.25);
}

TEST(Instance, FromPerPeriodBuildsNTimesD) {
  OrderTable t(1);
  for (int j = 0; j < 8; ++j) t.push_back(1.0, std::vector<double>{1.0});
  const std::vector<double> d{0.25};
  const Instance inst = Instance::from_per_period(std::move(t), d);
  EXPECT_DOUBLE_EQ(inst.capacities()[0], 2.0);
}

TEST(Instance, RejectsMalformedInput) {
  EXPECT_THROW(Instance(OrderTable(1), {1.0}), std::invalid_argument);
  EXPECT_THROW(Instance(olp::testing::table(2, {{1.0, {1.0, 1.0}}}), {1.0}), std::invalid_argument);
  EXPECT_THROW(Instance(olp::testing::table(1, {{1.0, {1.0}}}), {-1.0}), std::invalid_argument);
}

TEST(DualPrice, RejectsNegativeEntries) {
  EXPECT_THROW(DualPrice({0.5, -0.1}), std::invalid_argument);
  EXPECT_NO_THROW(DualPrice({0.0, 3.0}));
  const DualPrice p({1.0, 2.0});
  EXPECT_DOUBLE_EQ(p.sum(), 3.0);
  EXPECT_TRUE(in_price_set(p, 3.0));
  EXPECT_FALSE(in_price_set(p, 2.5));
  EXPECT_DOUBLE_EQ(squared_distance(p, DualPrice::zero(2)), 5.0);
}

TEST(InstanceIo, RoundTripIsExact) {
  const Instance inst = instance({1.0 / 3.0, 2.5}, {{0.1, {1e-17, 0.7}}, {4.999999999999999, {1.0 / 7.0, 0.0}},
                                                    {3.0, {2.0, 1.0}}});
  std::stringstream ss;
  write_instance(ss, inst);
  const std::string text = ss.str();
  const Instance back = read_instance(ss);
  ASSERT_EQ(back.horizon(), 3u);
  ASSERT_EQ(back.resources(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(back.capacities()[i], inst.capacities()[i]);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(back.orders()[j].reward, inst.orders()[j].reward);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(back.orders()[j].consumption[i], inst.orders()[j].consumption[i]);
  }
  std::stringstream again;
  write_instance(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(InstanceIo, HeaderAndCommentFormat) {
  std::stringstream ss("# two orders\n2 1 1.5\n3 1\n1 1\n");
  const Instance inst = read_instance(ss);
  EXPECT_EQ(inst.horizon(), 2u);
  EXPECT_DOUBLE_EQ(inst.capacities()[0], 1.5);
  EXPECT_DOUBLE_EQ(inst.orders()[0].reward, 3.0);
}

TEST(InstanceIo, RejectsTruncatedOrTrailingData) {
  std::stringstream truncated("2 1 1.5\n3 1\n1\n");
  EXPECT_THROW(read_instance(truncated), std::invalid_argument);
  std::stringstream trailing("1 1 1\n3 1\n9\n");
  EXPECT_THROW(read_instance(trailing), std::invalid_argument);
  std::stringstream garbage("1 1 x\n3 1\n");
  EXPECT_THROW(read_instance(garbage), std::invalid_argument);
}
