#include "fedsim/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

constexpr std::uint64_t kMeansStream = 0;
constexpr std::uint64_t kSampleStream = 1;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return in;
}

nlohmann::json load_meta(const std::filesystem::path& dir, const std::string& kind) {
  auto in = open_in(dir / "meta.json");
  nlohmann::json meta = nlohmann::json::parse(in);
  if (meta.value("format", "") != "fedsim-dataset-v1" || meta.value("kind", "") != kind) {
    throw std::runtime_error(dir.string() + " does not hold a " + kind + " dataset");
  }
  return meta;
}

}  // namespace

LabeledVectorDataset gen_classification(std::uint64_t seed, std::size_t n, std::size_t classes,
                                        std::size_t dim, double separation) {
  if (classes < 2) throw std::invalid_argument("gen_classification: need at least 2 classes");
  if (n < classes) throw std::invalid_argument("gen_classification: need at least one sample per class");
  if (dim < classes) {
    throw std::invalid_argument("gen_classification: dim must be >= classes for orthogonal means");
  }
  if (separation < 0.0) throw std::invalid_argument("gen_classification: negative separation");

  Rng base(seed);

  // Orthonormal mean directions via Gram-Schmidt on gaussian draws; any two
  // class means end up sqrt(2) * separation apart.
  Rng mean_rng = base.split(kMeansStream);
  std::vector<Vector> means(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    Vector v(dim);
    for (auto& x : v) x = mean_rng.gaussian();
    for (std::size_t prev = 0; prev < c; ++prev) {
      axpy(-dot(v, means[prev]), means[prev], v);
    }
    const double norm = l2_norm(v);
    if (norm < 1e-9) throw std::runtime_error("gen_classification: degenerate mean basis");
    for (auto& x : v) x /= norm;
    means[c] = std::move(v);
  }

  LabeledVectorDataset data;
  data.classes = classes;
  data.seed = seed;
  data.features.reserve(n);
  data.labels.reserve(n);
  Rng sample_base = base.split(kSampleStream);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % classes);
    Rng rng = sample_base.split(i);
    Vector x(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      x[j] = separation * means[label][j] + rng.gaussian();
    }
    data.features.push_back(std::move(x));
    data.labels.push_back(label);
  }
  return data;
}

std::vector<IndexRange> segment_sessions(const KeypressLog& log, double gap_seconds) {
  if (!(gap_seconds > 0.0)) throw std::invalid_argument("segment_sessions: gap must be positive");
  if (!log.features.empty() && log.features.size() != log.timestamps.size()) {
    throw std::invalid_argument("segment_sessions: feature rows do not match timestamps");
  }
  for (std::size_t i = 1; i < log.timestamps.size(); ++i) {
    if (!(log.timestamps[i] > log.timestamps[i - 1])) {
      throw std::invalid_argument("segment_sessions: timestamps must be strictly increasing");
    }
  }
  std::vector<IndexRange> ranges;
  if (log.timestamps.empty()) return ranges;
  std::size_t start = 0;
  for (std::size_t i = 1; i < log.timestamps.size(); ++i) {
    if (log.timestamps[i] - log.timestamps[i - 1] >= gap_seconds) {
      ranges.push_back({start, i});
      start = i;
    }
  }
  ranges.push_back({start, log.timestamps.size()});
  return ranges;
}

std::vector<std::size_t> session_view_dims() { return {4, 6, 3}; }

namespace {

// Raw per-keypress payload kept in the log: hold duration plus the key's
// grid position. Session views are derived from log slices afterwards.
struct BurstPlan {
  int label = 0;
  std::size_t key_count = 0;
};

Vector one_hot(std::size_t index, std::size_t size) {
  Vector v(size, 0.0);
  v[index] = 1.0;
  return v;
}

}  // namespace

SessionDataset gen_multiview_sessions(std::uint64_t seed, std::size_t users,
                                      std::size_t sessions_per_user,
                                      const SessionSignalSpec& spec) {
  if (users == 0 || sessions_per_user == 0) {
    throw std::invalid_argument("gen_multiview_sessions: need at least one user and session");
  }
  if (spec.classes < 2) throw std::invalid_argument("gen_multiview_sessions: need at least 2 classes");
  if (spec.strength < 0.0 || spec.strength > 1.0) {
    throw std::invalid_argument("gen_multiview_sessions: strength must be in [0,1]");
  }

  SessionDataset data;
  data.classes = spec.classes;
  data.seed = seed;
  Rng base(seed);

  for (std::size_t u = 0; u < users; ++u) {
    Rng user_rng = base.split(u);

    // Lay every burst of this user onto one timeline, then let the session
    // splitter recover the bursts; views are built from its slices.
    KeypressLog log;
    std::vector<BurstPlan> plans;
    double clock = 0.0;
    for (std::size_t s = 0; s < sessions_per_user; ++s) {
      Rng rng = user_rng.split(s);
      const int label = static_cast<int>((u + s) % spec.classes);
      // Signed class offset in [-1, 1] scaling every planted effect.
      const double offset =
          spec.strength * (2.0 * label / static_cast<double>(spec.classes - 1) - 1.0);

      const std::size_t keys = 20 + rng.uniform_index(31);
      const double gap_mean = 0.5 + 0.2 * offset;
      const double dur_mean = 0.10 + 0.02 * offset;
      for (std::size_t k = 0; k < keys; ++k) {
        if (k > 0) clock += std::clamp(gap_mean + 0.15 * rng.gaussian(), 0.10, 1.0);
        const double duration = std::max(0.02, dur_mean + 0.02 * rng.gaussian());
        const double col = static_cast<double>(rng.uniform_index(10));
        const double row = static_cast<double>(rng.uniform_index(4));
        log.timestamps.push_back(clock);
        log.features.push_back({duration, col, row});
      }
      plans.push_back({label, keys});
      clock += 6.0 + 4.0 * rng.uniform();  // inter-burst pause, always >= 5 s
    }

    const std::vector<IndexRange> ranges = segment_sessions(log);
    if (ranges.size() != plans.size()) {
      throw std::logic_error("gen_multiview_sessions: burst layout broke session segmentation");
    }

    for (std::size_t s = 0; s < ranges.size(); ++s) {
      const IndexRange r = ranges[s];
      if (r.end - r.begin != plans[s].key_count) {
        throw std::logic_error("gen_multiview_sessions: session slice has unexpected length");
      }
      Rng rng = user_rng.split(s).split(1);  // separate stream from the burst draws
      const int label = plans[s].label;
      const double offset =
          spec.strength * (2.0 * label / static_cast<double>(spec.classes - 1) - 1.0);

      std::vector<Vector> alphanumeric;
      alphanumeric.reserve(r.end - r.begin);
      for (std::size_t k = r.begin; k < r.end; ++k) {
        const double duration = log.features[k][0];
        const double gap = (k == r.begin) ? 0.0 : log.timestamps[k] - log.timestamps[k - 1];
        const double dx = (k == r.begin) ? 0.0 : log.features[k][1] - log.features[k - 1][1];
        const double dy = (k == r.begin) ? 0.0 : log.features[k][2] - log.features[k - 1][2];
        // Roughly standardized against the nominal generation parameters.
        alphanumeric.push_back({(duration - 0.10) / 0.03, (gap - 0.5) / 0.2, dx / 4.06, dy / 1.58});
      }

      const std::size_t specials = 5 + rng.uniform_index(10);
      std::vector<Vector> special;
      special.reserve(specials);
      const double tilt = 0.5 * offset;  // backspace up, space down (or vice versa)
      const Vector probs = {1.0 / 6.0,          (1.0 + tilt) / 6.0, (1.0 - tilt) / 6.0,
                            1.0 / 6.0,          1.0 / 6.0,          1.0 / 6.0};
      for (std::size_t e = 0; e < specials; ++e) {
        double u01 = rng.uniform();
        std::size_t cat = probs.size() - 1;
        double acc = 0.0;
        for (std::size_t c = 0; c < probs.size(); ++c) {
          acc += probs[c];
          if (u01 < acc) {
            cat = c;
            break;
          }
        }
        special.push_back(one_hot(cat, probs.size()));
      }

      const double duration_seconds = (log.timestamps[r.end - 1] - log.timestamps[r.begin]) +
                                      log.features[r.end - 1][0];
      const auto accel_len = static_cast<std::size_t>(std::ceil(duration_seconds / 0.060));
      const double rho = 0.6 * offset;
      std::vector<Vector> accel;
      accel.reserve(accel_len);
      for (std::size_t t = 0; t < accel_len; ++t) {
        const double a = rng.gaussian();
        const double b = rng.gaussian();
        accel.push_back({a, rho * a + std::sqrt(1.0 - rho * rho) * b,
                         0.4 * offset + rng.gaussian()});
      }

      data.sessions.push_back({{std::move(alphanumeric), std::move(special), std::move(accel)},
                               label,
                               duration_seconds});
      data.user_of.push_back(u);
    }
  }
  return data;
}

PartitionMode partition_mode_from_name(const std::string& name) {
  if (name == "iid") return PartitionMode::Iid;
  if (name == "label-shard") return PartitionMode::LabelShard;
  throw std::invalid_argument("unknown partition mode '" + name + "', expected iid or label-shard");
}

std::string partition_mode_name(PartitionMode mode) {
  return mode == PartitionMode::Iid ? "iid" : "label-shard";
}

Partition make_partition(const std::vector<int>& labels, std::size_t clients, PartitionMode mode,
                         std::uint64_t seed) {
  std::vector<std::size_t> subset(labels.size());
  std::iota(subset.begin(), subset.end(), 0);
  return make_partition(labels, subset, clients, mode, seed);
}

Partition make_partition(const std::vector<int>& labels, const std::vector<std::size_t>& subset,
                         std::size_t clients, PartitionMode mode, std::uint64_t seed) {
  const std::size_t n = subset.size();
  if (clients == 0) throw std::invalid_argument("make_partition: need at least one client");
  if (clients > n) {
    throw std::invalid_argument("make_partition: " + std::to_string(clients) +
                                " clients but only " + std::to_string(n) + " samples");
  }
  for (std::size_t i : subset) {
    if (i >= labels.size()) throw std::out_of_range("make_partition: subset index out of range");
  }

  Rng rng(seed);
  Partition part;
  part.mode = mode;
  part.shards.assign(clients, {});

  if (mode == PartitionMode::Iid) {
    std::vector<std::size_t> order = subset;
    shuffle(order, rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
      part.shards[i % clients].push_back(order[i]);
    }
    return part;
  }

  // Label shards: sort by label, cut into 2K contiguous runs, deal a random
  // pair of runs to each client.
  const std::size_t shard_count = 2 * clients;
  if (n < shard_count) {
    throw std::invalid_argument("make_partition: label-shard mode needs at least 2 samples per client");
  }
  std::vector<std::size_t> order = subset;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return labels[a] != labels[b] ? labels[a] < labels[b] : a < b;
  });
  std::vector<std::size_t> shard_ids(shard_count);
  std::iota(shard_ids.begin(), shard_ids.end(), 0);
  shuffle(shard_ids, rng);
  for (std::size_t k = 0; k < clients; ++k) {
    for (std::size_t half = 0; half < 2; ++half) {
      const std::size_t sid = shard_ids[2 * k + half];
      const std::size_t lo = sid * n / shard_count;
      const std::size_t hi = (sid + 1) * n / shard_count;
      part.shards[k].insert(part.shards[k].end(), order.begin() + lo, order.begin() + hi);
    }
  }
  return part;
}

void save_vector_dataset(const LabeledVectorDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta = {{"format", "fedsim-dataset-v1"},
                         {"kind", "vectors"},
                         {"n", data.size()},
                         {"dim", data.dim()},
                         {"classes", data.classes},
                         {"seed", data.seed}};
  open_out(dir / "meta.json") << meta.dump(2) << "\n";

  auto features = open_out(dir / "features.csv");
  for (std::size_t j = 0; j < data.dim(); ++j) features << (j ? "," : "") << "f" << j;
  features << "\n";
  for (const Vector& row : data.features) {
    for (std::size_t j = 0; j < row.size(); ++j) features << (j ? "," : "") << fmt_double(row[j]);
    features << "\n";
  }

  auto labels = open_out(dir / "labels.csv");
  labels << "label\n";
  for (int y : data.labels) labels << y << "\n";
}

LabeledVectorDataset load_vector_dataset(const std::filesystem::path& dir) {
  nlohmann::json meta = load_meta(dir, "vectors");
  LabeledVectorDataset data;
  data.classes = meta.at("classes").get<std::size_t>();
  data.seed = meta.at("seed").get<std::uint64_t>();

  auto features = open_in(dir / "features.csv");
  std::string line;
  std::getline(features, line);  // header
  while (std::getline(features, line)) {
    if (line.empty()) continue;
    Vector row;
    for (const std::string& f : split_csv(line)) row.push_back(std::stod(f));
    data.features.push_back(std::move(row));
  }

  auto labels = open_in(dir / "labels.csv");
  std::getline(labels, line);  // header
  while (std::getline(labels, line)) {
    if (!line.empty()) data.labels.push_back(std::stoi(line));
  }
  if (data.features.size() != data.labels.size() ||
      data.features.size() != meta.at("n").get<std::size_t>()) {
    throw std::runtime_error("load_vector_dataset: row counts disagree in " + dir.string());
  }
  return data;
}

namespace {

const char* kViewFiles[] = {"view_alphanumeric.csv", "view_special.csv", "view_accelerometer.csv"};

}  // namespace

void save_session_dataset(const SessionDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta = {{"format", "fedsim-dataset-v1"},
                         {"kind", "sessions"},
                         {"sessions", data.size()},
                         {"classes", data.classes},
                         {"seed", data.seed}};
  open_out(dir / "meta.json") << meta.dump(2) << "\n";

  const std::vector<std::size_t> dims = session_view_dims();
  for (std::size_t v = 0; v < dims.size(); ++v) {
    auto out = open_out(dir / kViewFiles[v]);
    out << "session,step";
    for (std::size_t j = 0; j < dims[v]; ++j) out << ",f" << j;
    out << "\n";
    for (std::size_t s = 0; s < data.sessions.size(); ++s) {
      const auto& seq = data.sessions[s].views.at(v);
      for (std::size_t k = 0; k < seq.size(); ++k) {
        out << s << "," << k;
        for (double x : seq[k]) out << "," << fmt_double(x);
        out << "\n";
      }
    }
  }

  auto labels = open_out(dir / "labels.csv");
  labels << "session,label,user,duration\n";
  for (std::size_t s = 0; s < data.sessions.size(); ++s) {
    labels << s << "," << data.sessions[s].label << "," << data.user_of[s] << ","
           << fmt_double(data.sessions[s].duration_seconds) << "\n";
  }
}

SessionDataset load_session_dataset(const std::filesystem::path& dir) {
  nlohmann::json meta = load_meta(dir, "sessions");
  const std::size_t count = meta.at("sessions").get<std::size_t>();

  SessionDataset data;
  data.classes = meta.at("classes").get<std::size_t>();
  data.seed = meta.at("seed").get<std::uint64_t>();
  data.sessions.resize(count);
  data.user_of.resize(count);
  for (auto& s : data.sessions) s.views.resize(3);

  std::string line;
  const std::vector<std::size_t> dims = session_view_dims();
  for (std::size_t v = 0; v < dims.size(); ++v) {
    auto in = open_in(dir / kViewFiles[v]);
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv(line);
      if (fields.size() != dims[v] + 2) {
        throw std::runtime_error("load_session_dataset: bad row width in " +
                                 std::string(kViewFiles[v]));
      }
      const std::size_t s = std::stoul(fields[0]);
      const std::size_t step = std::stoul(fields[1]);
      auto& seq = data.sessions.at(s).views[v];
      if (seq.size() != step) {
        throw std::runtime_error("load_session_dataset: steps out of order in " +
                                 std::string(kViewFiles[v]));
      }
      Vector row;
      for (std::size_t j = 0; j < dims[v]; ++j) row.push_back(std::stod(fields[j + 2]));
      seq.push_back(std::move(row));
    }
  }

  auto labels = open_in(dir / "labels.csv");
  std::getline(labels, line);  // header
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 4) throw std::runtime_error("load_session_dataset: bad labels.csv row");
    const std::size_t s = std::stoul(fields[0]);
    data.sessions.at(s).label = std::stoi(fields[1]);
    data.user_of.at(s) = std::stoul(fields[2]);
    data.sessions.at(s).duration_seconds = std::stod(fields[3]);
  }
  return data;
}

}  // namespace fedsim
