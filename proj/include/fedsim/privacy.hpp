#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fedsim {

struct LedgerEntry {
  double sampling_prob = 1.0;
  double noise_multiplier = 0.0;
};

// Append-only record of the privacy-relevant parameters of every noised
// aggregation round. Entries with noise_multiplier == 0 are legal to record
// but make the accumulated privacy loss unbounded.
class PrivacyLedger {
 public:
  void record_round(double sampling_prob, double noise_multiplier);

  std::size_t round_count() const { return entries_.size(); }
  const std::vector<LedgerEntry>& entries() const { return entries_; }

  void save(const std::filesystem::path& file) const;
  static PrivacyLedger load(const std::filesystem::path& file);

 private:
  std::vector<LedgerEntry> entries_;
};

// Log-moment of one round of the subsampled Gaussian mechanism at integer
// order lambda >= 1. Uses the closed form lambda*(lambda+1)/(2 z^2) when
// sampling_prob == 1 and a log-sum-exp binomial expansion otherwise.
double round_log_moment(double sampling_prob, double noise_multiplier, std::size_t lambda);

// Tracks accumulated log-moments over integer orders 1..max_order and
// converts them to (epsilon, delta) guarantees. Composition is additive per
// order. A composed round with noise_multiplier == 0 makes epsilon infinite.
class MomentsAccountant {
 public:
  explicit MomentsAccountant(std::size_t max_order = 64);

  void compose_round(double sampling_prob, double noise_multiplier);
  void compose(const PrivacyLedger& ledger);

  std::size_t rounds_composed() const { return rounds_; }
  bool unbounded() const { return unbounded_; }
  std::size_t max_order() const { return log_moments_.size(); }
  // log_moments()[i] is the accumulated moment at order i+1.
  const std::vector<double>& log_moments() const { return log_moments_; }

  // min over tracked orders of (alpha(lambda) + ln(1/delta)) / lambda.
  // Zero composed rounds give 0; any unbounded round gives +infinity.
  double epsilon_at_delta(double delta) const;

 private:
  std::vector<double> log_moments_;
  std::size_t rounds_ = 0;
  bool unbounded_ = false;
};

// Largest round count T such that T identical rounds stay within the epsilon
// budget at the given delta. Returns 0 when even one round exceeds it.
std::uint64_t rounds_until_budget(double sampling_prob, double noise_multiplier, double delta,
                                  double epsilon_budget, std::size_t max_order = 64);

}  // namespace fedsim
