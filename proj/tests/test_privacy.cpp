#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "fedsim/privacy.hpp"

using namespace fedsim;
namespace fs = std::filesystem;

namespace {

// Independent route to the same quantity: numerically integrate the
// order-(lambda+1) moment of the mixture/base likelihood ratio under the
// base Gaussian with Simpson's rule.
double log_moment_quadrature(double p, double z, std::size_t lambda) {
  const double z2 = z * z;
  const auto integrand = [&](double x) {
    const double density = std::exp(-x * x / (2.0 * z2)) / (z * std::sqrt(2.0 * M_PI));
    const double ratio = (1.0 - p) + p * std::exp((2.0 * x - 1.0) / (2.0 * z2));
    return density * std::pow(ratio, static_cast<double>(lambda) + 1.0);
  };
  const double lo = -1.0 - 14.0 * z - static_cast<double>(lambda);
  const double hi = 2.0 + 14.0 * z + 2.0 * static_cast<double>(lambda);
  const std::size_t intervals = 400000;  // even
  const double h = (hi - lo) / static_cast<double>(intervals);
  double sum = integrand(lo) + integrand(hi);
  for (std::size_t i = 1; i < intervals; ++i) {
    sum += integrand(lo + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  }
  return std::log(sum * h / 3.0);
}

}  // namespace

TEST_CASE("full-participation log moments take the closed form") {
  for (std::size_t lam = 1; lam <= 8; ++lam) {
    const double want = static_cast<double>(lam) * static_cast<double>(lam + 1) / 32.0;
    CHECK(round_log_moment(1.0, 4.0, lam) == doctest::Approx(want).epsilon(1e-14));
  }
  CHECK(round_log_moment(1.0, 4.0, 1) == doctest::Approx(0.0625).epsilon(1e-14));
}

TEST_CASE("subsampled log moments match numerical quadrature") {
  for (const double p : {0.02, 0.1, 0.45}) {
    for (const double z : {0.8, 1.5}) {
      for (const std::size_t lam : {std::size_t{1}, std::size_t{3}, std::size_t{8}}) {
        const double got = round_log_moment(p, z, lam);
        const double want = log_moment_quadrature(p, z, lam);
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("subsampling can only shrink the per-round moment") {
  for (std::size_t lam = 1; lam <= 16; ++lam) {
    CHECK(round_log_moment(0.3, 1.0, lam) < round_log_moment(1.0, 1.0, lam));
    CHECK(round_log_moment(0.3, 1.0, lam) >= 0.0);
  }
  CHECK(round_log_moment(1e-12, 1.0, 1) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("log moment input validation") {
  CHECK_THROWS_AS(round_log_moment(0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(round_log_moment(1.5, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(round_log_moment(0.5, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(round_log_moment(0.5, 1.0, 0), std::invalid_argument);
  CHECK(round_log_moment(0.5, 0.0, 1) == std::numeric_limits<double>::infinity());
}

TEST_CASE("composition is additive and order-independent") {
  MomentsAccountant once(32);
  once.compose_round(0.2, 1.3);
  MomentsAccountant thrice(32);
  for (int i = 0; i < 3; ++i) thrice.compose_round(0.2, 1.3);
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(thrice.log_moments()[i] ==
          doctest::Approx(3.0 * once.log_moments()[i]).epsilon(1e-12));
  }

  MomentsAccountant ab(32), ba(32);
  ab.compose_round(0.1, 1.0);
  ab.compose_round(0.7, 2.0);
  ba.compose_round(0.7, 2.0);
  ba.compose_round(0.1, 1.0);
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(ab.log_moments()[i] == doctest::Approx(ba.log_moments()[i]).epsilon(1e-13));
  }
  CHECK(ab.rounds_composed() == 2);
}

TEST_CASE("epsilon is zero before any round and infinite after a noiseless one") {
  MomentsAccountant acc;
  CHECK(acc.epsilon_at_delta(1e-5) == 0.0);
  CHECK_FALSE(acc.unbounded());

  acc.compose_round(1.0, 0.0);
  CHECK(acc.unbounded());
  CHECK(acc.epsilon_at_delta(1e-5) == std::numeric_limits<double>::infinity());
  CHECK(acc.rounds_composed() == 1);

  CHECK_THROWS_AS(acc.epsilon_at_delta(0.0), std::invalid_argument);
  CHECK_THROWS_AS(acc.epsilon_at_delta(1.0), std::invalid_argument);
  CHECK_THROWS_AS(MomentsAccountant(0), std::invalid_argument);
}

TEST_CASE("epsilon grows with rounds and shrinks with delta") {
  MomentsAccountant acc;
  double prev = 0.0;
  for (int t = 0; t < 20; ++t) {
    acc.compose_round(0.3, 1.2);
    const double eps = acc.epsilon_at_delta(1e-5);
    CHECK(eps >= prev);
    prev = eps;
  }
  CHECK(acc.epsilon_at_delta(1e-3) <= acc.epsilon_at_delta(1e-7));
}

TEST_CASE("tracked orders get within a percent of the continuous optimum") {
  // With p = 1 the total moment is T lam (lam+1) / (2 z^2), so the epsilon
  // curve has the closed continuous minimizer lam* = sqrt(2 z^2 ln(1/delta) / T).
  const double z = 10.0, delta = 1e-5;
  const std::size_t T = 10;
  MomentsAccountant acc;
  for (std::size_t t = 0; t < T; ++t) acc.compose_round(1.0, z);

  const double log_inv_delta = std::log(1.0 / delta);
  const double lam_star = std::sqrt(2.0 * z * z * log_inv_delta / static_cast<double>(T));
  REQUIRE(lam_star > 2.0);   // interior of the tracked range
  REQUIRE(lam_star < 60.0);
  const double eps_cont =
      static_cast<double>(T) * (lam_star + 1.0) / (2.0 * z * z) + log_inv_delta / lam_star;

  const double got = acc.epsilon_at_delta(delta);
  CHECK(got >= eps_cont);
  CHECK(got <= 1.01 * eps_cont);
}

TEST_CASE("rounds_until_budget sits exactly on the boundary") {
  const double p = 0.2, z = 2.0, delta = 1e-5, budget = 2.0;
  const std::uint64_t t = rounds_until_budget(p, z, delta, budget);
  REQUIRE(t > 0);

  const auto eps_of = [&](std::uint64_t rounds) {
    MomentsAccountant acc;
    for (std::uint64_t i = 0; i < rounds; ++i) acc.compose_round(p, z);
    return acc.epsilon_at_delta(delta);
  };
  CHECK(eps_of(t) <= budget);
  CHECK(eps_of(t + 1) > budget);
}

TEST_CASE("rounds_until_budget edge cases") {
  CHECK(rounds_until_budget(0.2, 2.0, 1e-5, 0.0) == 0);
  CHECK(rounds_until_budget(0.2, 0.0, 1e-5, 5.0) == 0);
  // A single round of this mechanism already costs more than the budget.
  CHECK(rounds_until_budget(1.0, 0.5, 1e-5, 0.5) == 0);
  // More noise buys more rounds.
  CHECK(rounds_until_budget(0.1, 2.0, 1e-5, 1.0) >
        rounds_until_budget(0.1, 1.0, 1e-5, 1.0));
  CHECK_THROWS_AS(rounds_until_budget(0.2, 1.0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("ledger records round-trip through disk") {
  PrivacyLedger ledger;
  ledger.record_round(0.25, 1.5);
  ledger.record_round(1.0, 0.0);
  ledger.record_round(0.5, 3.0);

  const fs::path dir = fs::temp_directory_path() / "fedsim_privacy_tests";
  fs::create_directories(dir);
  const fs::path file = dir / "ledger.json";
  ledger.save(file);
  const PrivacyLedger back = PrivacyLedger::load(file);
  REQUIRE(back.round_count() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.entries()[i].sampling_prob == ledger.entries()[i].sampling_prob);
    CHECK(back.entries()[i].noise_multiplier == ledger.entries()[i].noise_multiplier);
  }
  fs::remove_all(dir);

  CHECK_THROWS(PrivacyLedger::load(dir / "missing.json"));
}

TEST_CASE("ledger rejects malformed rounds") {
  PrivacyLedger ledger;
  CHECK_THROWS_AS(ledger.record_round(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ledger.record_round(1.0001, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ledger.record_round(0.5, -0.1), std::invalid_argument);
  CHECK(ledger.round_count() == 0);
}

TEST_CASE("composing a ledger equals composing its rounds") {
  PrivacyLedger ledger;
  ledger.record_round(0.3, 1.1);
  ledger.record_round(0.4, 2.2);

  MomentsAccountant via_ledger, direct;
  via_ledger.compose(ledger);
  direct.compose_round(0.3, 1.1);
  direct.compose_round(0.4, 2.2);
  CHECK(via_ledger.log_moments() == direct.log_moments());
  CHECK(via_ledger.rounds_composed() == 2);
}
