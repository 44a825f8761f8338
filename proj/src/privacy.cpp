#include "fedsim/privacy.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace fedsim {

namespace {

void check_round_params(double p, double z) {
  if (!(p > 0.0) || p > 1.0) {
    throw std::invalid_argument("sampling probability must be in (0,1], got " + std::to_string(p));
  }
  if (!(z >= 0.0)) {
    throw std::invalid_argument("noise multiplier must be non-negative, got " + std::to_string(z));
  }
}

double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

void PrivacyLedger::record_round(double sampling_prob, double noise_multiplier) {
  check_round_params(sampling_prob, noise_multiplier);
  entries_.push_back({sampling_prob, noise_multiplier});
}

void PrivacyLedger::save(const std::filesystem::path& file) const {
  nlohmann::json doc;
  doc["format"] = "fedsim-ledger-v1";
  doc["rounds"] = nlohmann::json::array();
  for (const LedgerEntry& e : entries_) {
    doc["rounds"].push_back({{"p", e.sampling_prob}, {"z", e.noise_multiplier}});
  }
  std::ofstream out(file);
  if (!out) throw std::runtime_error("PrivacyLedger::save: cannot open " + file.string());
  out << doc.dump(2) << "\n";
}

PrivacyLedger PrivacyLedger::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("PrivacyLedger::load: cannot open " + file.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.value("format", "") != "fedsim-ledger-v1") {
    throw std::runtime_error("PrivacyLedger::load: unrecognized ledger format in " + file.string());
  }
  PrivacyLedger ledger;
  for (const auto& r : doc.at("rounds")) {
    ledger.record_round(r.at("p").get<double>(), r.at("z").get<double>());
  }
  return ledger;
}

double round_log_moment(double sampling_prob, double noise_multiplier, std::size_t lambda) {
  check_round_params(sampling_prob, noise_multiplier);
  if (lambda == 0) throw std::invalid_argument("round_log_moment: order must be >= 1");
  if (noise_multiplier == 0.0) return std::numeric_limits<double>::infinity();
  const double z2 = noise_multiplier * noise_multiplier;
  const double lam = static_cast<double>(lambda);
  if (sampling_prob == 1.0) return lam * (lam + 1.0) / (2.0 * z2);

  // E over the mixture of (mixture/base)^lambda expands to a binomial sum of
  // pairwise Gaussian moments exp((i^2 - i) / (2 z^2)); exact for integer
  // orders, evaluated in log space.
  const double log_p = std::log(sampling_prob);
  const double log_1mp = std::log1p(-sampling_prob);
  const std::size_t terms = lambda + 2;  // i = 0 .. lambda+1
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(terms);
  for (std::size_t i = 0; i < terms; ++i) {
    const double di = static_cast<double>(i);
    logs[i] = log_choose(lambda + 1, i) + di * log_p +
              static_cast<double>(terms - 1 - i) * log_1mp + (di * di - di) / (2.0 * z2);
    peak = std::max(peak, logs[i]);
  }
  double sum = 0.0;
  for (double v : logs) sum += std::exp(v - peak);
  // The sum is >= 1 (order-lambda moment of a likelihood ratio), so the log
  // moment is non-negative up to rounding; clamp tiny negatives.
  return std::max(0.0, peak + std::log(sum));
}

MomentsAccountant::MomentsAccountant(std::size_t max_order) : log_moments_(max_order, 0.0) {
  if (max_order == 0) throw std::invalid_argument("MomentsAccountant: need at least one order");
}

void MomentsAccountant::compose_round(double sampling_prob, double noise_multiplier) {
  check_round_params(sampling_prob, noise_multiplier);
  ++rounds_;
  if (noise_multiplier == 0.0) {
    unbounded_ = true;
    return;
  }
  for (std::size_t i = 0; i < log_moments_.size(); ++i) {
    log_moments_[i] += round_log_moment(sampling_prob, noise_multiplier, i + 1);
  }
}

void MomentsAccountant::compose(const PrivacyLedger& ledger) {
  for (const LedgerEntry& e : ledger.entries()) {
    compose_round(e.sampling_prob, e.noise_multiplier);
  }
}

double MomentsAccountant::epsilon_at_delta(double delta) const {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0,1), got " + std::to_string(delta));
  }
  if (rounds_ == 0) return 0.0;
  if (unbounded_) return std::numeric_limits<double>::infinity();
  const double log_inv_delta = std::log(1.0 / delta);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log_moments_.size(); ++i) {
    const double lam = static_cast<double>(i + 1);
    best = std::min(best, (log_moments_[i] + log_inv_delta) / lam);
  }
  return best;
}

std::uint64_t rounds_until_budget(double sampling_prob, double noise_multiplier, double delta,
                                  double epsilon_budget, std::size_t max_order) {
  check_round_params(sampling_prob, noise_multiplier);
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0,1), got " + std::to_string(delta));
  }
  if (epsilon_budget <= 0.0 || noise_multiplier == 0.0) return 0;

  std::vector<double> per_round(max_order);
  for (std::size_t i = 0; i < max_order; ++i) {
    per_round[i] = round_log_moment(sampling_prob, noise_multiplier, i + 1);
  }
  const double log_inv_delta = std::log(1.0 / delta);
  auto epsilon_at = [&](std::uint64_t t) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < max_order; ++i) {
      const double lam = static_cast<double>(i + 1);
      best = std::min(best, (static_cast<double>(t) * per_round[i] + log_inv_delta) / lam);
    }
    return best;
  };

  if (epsilon_at(1) > epsilon_budget) return 0;
  constexpr std::uint64_t kCap = std::uint64_t{1} << 60;
  std::uint64_t hi = 1;
  while (hi < kCap && epsilon_at(hi * 2) <= epsilon_budget) hi *= 2;
  if (hi >= kCap) return kCap;
  // invariant: epsilon_at(lo) <= budget < epsilon_at(hi_bound)
  std::uint64_t lo = hi, hi_bound = hi * 2;
  while (hi_bound - lo > 1) {
    std::uint64_t mid = lo + (hi_bound - lo) / 2;
    if (epsilon_at(mid) <= epsilon_budget) {
      lo = mid;
    } else {
      hi_bound = mid;
    }
  }
  return lo;
}

}  // namespace fedsim
