#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedsim/linalg.hpp"
#include "fedsim/session.hpp"

namespace fedsim {

struct LabeledVectorDataset {
  std::vector<Vector> features;
  std::vector<int> labels;
  std::size_t classes = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
};

// Balanced Gaussian blobs. Class means are mutually orthogonal directions
// scaled so any two means are sqrt(2) * separation apart; unit noise.
LabeledVectorDataset gen_classification(std::uint64_t seed, std::size_t n, std::size_t classes,
                                        std::size_t dim, double separation);

struct KeypressLog {
  std::vector<double> timestamps;    // seconds, strictly increasing
  std::vector<Vector> features;      // optional per-keypress payload
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open

  bool operator==(const IndexRange&) const = default;
};

// Splits a keypress log into sessions: a gap of `gap_seconds` or more since
// the previous keypress starts a new session (the boundary is inclusive).
std::vector<IndexRange> segment_sessions(const KeypressLog& log, double gap_seconds = 5.0);

struct SessionSignalSpec {
  std::size_t classes = 2;
  // 0 plants nothing (labels are pure noise); 1 plants clearly separable
  // class differences in typing speed, special-key mix, and accelerometer
  // correlation.
  double strength = 1.0;
};

struct SessionDataset {
  std::vector<MultiViewSession> sessions;
  std::vector<std::size_t> user_of;  // parallel to sessions
  std::size_t classes = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return sessions.size(); }
};

// Per-view feature dimensions of generated sessions: alphanumeric keypress
// quadruples, special-key one-hots, accelerometer triples.
std::vector<std::size_t> session_view_dims();

SessionDataset gen_multiview_sessions(std::uint64_t seed, std::size_t users,
                                      std::size_t sessions_per_user,
                                      const SessionSignalSpec& spec);

enum class PartitionMode { Iid, LabelShard };

PartitionMode partition_mode_from_name(const std::string& name);
std::string partition_mode_name(PartitionMode mode);

struct Partition {
  std::vector<std::vector<std::size_t>> shards;  // one per client
  PartitionMode mode = PartitionMode::Iid;
};

// Splits sample indices 0..n-1 (or the given subset) across K clients.
// IID deals a uniform shuffle; LabelShard sorts by label and deals two
// contiguous shards per client, so each client sees few distinct labels.
Partition make_partition(const std::vector<int>& labels, std::size_t clients, PartitionMode mode,
                         std::uint64_t seed);
Partition make_partition(const std::vector<int>& labels, const std::vector<std::size_t>& subset,
                         std::size_t clients, PartitionMode mode, std::uint64_t seed);

// Columnar on-disk form: one csv per view plus labels.csv and meta.json in a
// directory. Doubles are printed with 17 significant digits and round-trip
// exactly.
void save_vector_dataset(const LabeledVectorDataset& data, const std::filesystem::path& dir);
LabeledVectorDataset load_vector_dataset(const std::filesystem::path& dir);
void save_session_dataset(const SessionDataset& data, const std::filesystem::path& dir);
SessionDataset load_session_dataset(const std::filesystem::path& dir);

}  // namespace fedsim
