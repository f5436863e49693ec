#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nodelife/battery_models.hpp"

using namespace nodelife;

TEST(PeukertLifetime, CoinCellAtNominalExponent) {
  // 220 mAh at 0.248 mA
  EXPECT_NEAR(peukert_lifetime(220, 0.248, 1), 887.0967741935484, 1e-9);
  EXPECT_NEAR(peukert_lifetime(220, 0.248, 1), 887.1, 0.05);
}

TEST(PeukertLifetime, UnitRateIdentity) {
  for (double c : {0.5, 1.0, 220.0, 3000.0}) EXPECT_DOUBLE_EQ(peukert_lifetime(c, c, 1), 1.0);
}

TEST(PeukertLifetime, HighExponentLiteralUnits) {
  // 220 / 0.248^1.3 evaluated at 40 digits
  EXPECT_NEAR(peukert_lifetime(220, 0.248, 1.3), 1347.831170260560, 1e-9);
}

TEST(PeukertLifetime, RejectsBadArguments) {
  EXPECT_THROW(peukert_lifetime(220, 0.0, 1), DomainError);
  EXPECT_THROW(peukert_lifetime(220, -1.0, 1), DomainError);
  EXPECT_THROW(peukert_lifetime(220, 1.0, 0.99), DomainError);
  EXPECT_THROW(peukert_lifetime(0, 1.0, 1), DomainError);
}

TEST(PeukertLifetime, MonotonicityProperties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> n(1.0, 1.5);
  for (int i = 0; i < 200; ++i) {
    const double exponent = n(rng);
    EXPECT_GT(peukert_lifetime(220, 2.0, exponent), peukert_lifetime(220, 2.5, exponent));
    EXPECT_GT(peukert_lifetime(220, 0.2, exponent), peukert_lifetime(220, 0.25, exponent));
    // above 1 mA a larger exponent shortens life, below 1 mA it lengthens it
    EXPECT_GT(peukert_lifetime(220, 5.0, exponent), peukert_lifetime(220, 5.0, exponent + 0.05));
    EXPECT_LT(peukert_lifetime(220, 0.3, exponent), peukert_lifetime(220, 0.3, exponent + 0.05));
  }
}

TEST(EffectiveCapacity, ScalesByK) {
  EXPECT_EQ(effective_capacity(220, RateCapacityModel(1.0)), 220.0);
  EXPECT_DOUBLE_EQ(effective_capacity(220, RateCapacityModel(0.8)), 176.0);
  EXPECT_EQ(effective_capacity(100, RateCapacityModel(0.5)), 50.0);
  EXPECT_THROW(RateCapacityModel(0.0), DomainError);
  EXPECT_THROW(RateCapacityModel(1.01), DomainError);
}

TEST(RateFactor, NominalExponentGivesUnity) {
  for (double load : {0.01, 0.248, 1.0, 40.0}) {
    const auto rf = rate_factor_from_peukert(load, 1.0);
    EXPECT_EQ(rf.model.k(), 1.0);
    EXPECT_FALSE(rf.clamped);
  }
}

TEST(RateFactor, ClosedFormAboveOneMilliamp) {
  const auto rf = rate_factor_from_peukert(2.0, 1.3);
  EXPECT_NEAR(rf.model.k(), 0.8122523963562355, 1e-15);
  EXPECT_FALSE(rf.clamped);
}

TEST(RateFactor, ClampsBelowOneMilliamp) {
  const auto rf = rate_factor_from_peukert(0.248, 1.3);
  EXPECT_NEAR(rf.literal_k, 1.519373319202813, 1e-12);
  EXPECT_EQ(rf.model.k(), 1.0);
  EXPECT_TRUE(rf.clamped);
  EXPECT_THROW(rate_factor_from_peukert(0.0, 1.2), DomainError);
  EXPECT_THROW(rate_factor_from_peukert(1.0, 0.5), DomainError);
}

TEST(RateFactor, BridgesToPeukertLifetime) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> load(1.0, 500.0);
  std::uniform_real_distribution<double> n(1.0, 1.3);
  std::uniform_real_distribution<double> cap(10.0, 5000.0);
  for (int i = 0; i < 500; ++i) {
    const double c = cap(rng), current = load(rng), exponent = n(rng);
    const auto rf = rate_factor_from_peukert(current, exponent);
    ASSERT_FALSE(rf.clamped);
    const double via_k = effective_capacity(c, rf.model) / current;
    const double direct = peukert_lifetime(c, current, exponent);
    EXPECT_NEAR(via_k, direct, 1e-12 * direct);
  }
}

TEST(Relaxation, ClosedForm) {
  const RelaxationModel model(0.2, 10.0);
  EXPECT_EQ(relaxation_recovery(10, 0, model), 0.0);
  EXPECT_DOUBLE_EQ(relaxation_recovery(10, std::numeric_limits<double>::infinity(), model), 2.0);
  EXPECT_NEAR(relaxation_recovery(10, 10, model), 1.264241117657115, 1e-14);
}

TEST(Relaxation, MonotoneAndBounded) {
  const RelaxationModel model(0.3, 4.0);
  double prev = 0.0;
  for (double idle = 0.0; idle < 200.0; idle += 0.25) {
    const double r = relaxation_recovery(7.0, idle, model);
    EXPECT_GE(r, prev);
    EXPECT_LE(r, 0.3 * 7.0);
    prev = r;
  }
}

TEST(Relaxation, RejectsBadParameters) {
  EXPECT_THROW(RelaxationModel(-0.1, 1.0), DomainError);
  EXPECT_THROW(RelaxationModel(1.1, 1.0), DomainError);
  EXPECT_THROW(RelaxationModel(0.1, 0.0), DomainError);
  EXPECT_THROW(relaxation_recovery(-1.0, 1.0, RelaxationModel()), DomainError);
  EXPECT_THROW(relaxation_recovery(1.0, -1.0, RelaxationModel()), DomainError);
}

TEST(SelfDischarge, CompoundingYear) {
  EXPECT_EQ(self_discharge_residual(220, 0, 0.01), 220.0);
  EXPECT_NEAR(self_discharge_residual(220, 8760, 0.01), 217.8, 1e-12);
  EXPECT_NEAR(self_discharge_residual(220, 4380, 0.01), 218.8972361634564, 1e-11);
}

TEST(SelfDischarge, MultiplicativeOverIntervals) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t(0.0, 20000.0);
  std::uniform_real_distribution<double> f(0.0, 0.2);
  for (int i = 0; i < 500; ++i) {
    const double t1 = t(rng), t2 = t(rng), frac = f(rng);
    const double stepped = self_discharge_residual(self_discharge_residual(220, t1, frac), t2, frac);
    const double direct = self_discharge_residual(220, t1 + t2, frac);
    EXPECT_NEAR(stepped, direct, 1e-12 * direct);
  }
}

TEST(BatterySpec, Validation) {
  BatterySpec ok;
  EXPECT_NO_THROW(ok.validate());
  EXPECT_FALSE(ok.exponent_atypical());

  BatterySpec high = ok;
  high.peukert_exponent = 1.4;
  EXPECT_NO_THROW(high.validate());
  EXPECT_TRUE(high.exponent_atypical());

  for (auto mutate : {+[](BatterySpec& b) { b.capacity_mah = 0; },
                      +[](BatterySpec& b) { b.nominal_voltage = -3; },
                      +[](BatterySpec& b) { b.peukert_exponent = 0.9; },
                      +[](BatterySpec& b) { b.self_discharge_annual = 1.0; },
                      +[](BatterySpec& b) { b.self_discharge_annual = -0.1; }}) {
    BatterySpec bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), DomainError);
  }
}
