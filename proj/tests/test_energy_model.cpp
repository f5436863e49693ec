#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "nodelife/energy_model.hpp"

using namespace nodelife;

TEST(TotalPower, SumsTheFourStates) {
  EXPECT_DOUBLE_EQ(total_power({1.0, 1.0, 0.1, 0.1}), 2.2);
  EXPECT_EQ(total_power({0, 0, 0, 0}), 0.0);
  EXPECT_EQ(total_power({0.5, 0.25, 0.125, 0.125}), 1.0);
}

TEST(TotalPower, RejectsNegativeOrNonFiniteStates) {
  EXPECT_THROW(PowerBreakdown(-1.0, 0, 0, 0), DomainError);
  EXPECT_THROW(PowerBreakdown(0, std::nan(""), 0, 0), DomainError);
  EXPECT_THROW(PowerBreakdown(0, 0, std::numeric_limits<double>::infinity(), 0), DomainError);
}

TEST(TotalPower, PermutationInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 4> p{u(rng), u(rng), u(rng), u(rng)};
    const double ref = total_power({p[0], p[1], p[2], p[3]});
    std::sort(p.begin(), p.end());
    do {
      EXPECT_NEAR(total_power({p[0], p[1], p[2], p[3]}), ref, 1e-12 * ref);
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

TEST(EnergyConsumed, ProductOfPowerAndTime) {
  EXPECT_DOUBLE_EQ(energy_consumed(2.2, 10), 22.0);
  EXPECT_EQ(energy_consumed(5.0, 0), 0.0);
  EXPECT_NEAR(energy_consumed(0.726, 1000), 726.0, 1e-9);
  EXPECT_THROW(energy_consumed(-1.0, 1.0), DomainError);
  EXPECT_THROW(energy_consumed(1.0, -1.0), DomainError);
}

TEST(PowerFromEnergy, QuotientAndErrors) {
  EXPECT_DOUBLE_EQ(power_from_energy(22, 10), 2.2);
  EXPECT_EQ(power_from_energy(0, 5), 0.0);
  EXPECT_NEAR(power_from_energy(726, 1000), 0.726, 1e-15);
  EXPECT_THROW(power_from_energy(1.0, 0.0), DomainError);
  EXPECT_THROW(power_from_energy(-1.0, 1.0), DomainError);
}

TEST(PowerFromEnergy, InvertsEnergyConsumed) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> p(0.0, 1e3);
  std::uniform_real_distribution<double> lt(-3.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double power = p(rng);
    const double t = std::pow(10.0, lt(rng));
    EXPECT_NEAR(power_from_energy(energy_consumed(power, t), t), power, 1e-12 * power);
  }
}

TEST(ResidualEnergy, ClampsAtZero) {
  EXPECT_EQ(residual_energy({100, 22}), 78.0);
  EXPECT_EQ(residual_energy({100, 100}), 0.0);
  EXPECT_EQ(residual_energy({100, 150}), 0.0);
  EXPECT_EQ(EnergyLedger(100, 150).unclamped_residual(), -50.0);
  EXPECT_THROW(EnergyLedger(-1, 0), DomainError);
  EXPECT_THROW(EnergyLedger(1, -1), DomainError);
}

TEST(ResidualEnergy, MonotoneNonincreasingInConsumption) {
  double prev = residual_energy({50, 0});
  for (double c = 0.5; c < 80; c += 0.5) {
    const double r = residual_energy({50, c});
    EXPECT_LE(r, prev);
    EXPECT_GE(r, 0.0);
    prev = r;
  }
}
