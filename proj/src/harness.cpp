#include "fedsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace fedsim {

namespace {

// Independent randomness streams of one experiment, all split off the
// experiment seed.
constexpr std::uint64_t kSplitStream = 101;
constexpr std::uint64_t kInitStream = 102;
constexpr std::uint64_t kPartitionStream = 103;
constexpr std::uint64_t kClientStream = 104;
constexpr std::uint64_t kServerStream = 105;
constexpr std::uint64_t kBatchStream = 106;

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

std::uint64_t derived_seed(Rng& base, std::uint64_t stream) {
  Rng r = base.split(stream);
  return r.next_u64();
}

int argmax(const Vector& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "name",           "seed",           "dataset",        "data_seed",
      "samples",        "classes",        "dim",            "separation",
      "users",          "sessions_per_user", "signal_strength", "test_fraction",
      "workload",       "mlp_hidden",     "head",           "hidden_dim",
      "head_units",     "protocol",       "clients",        "partition",
      "rounds",         "learning_rate",  "batch_size",     "local_steps",
      "clients_per_round", "upload_fraction", "download_fraction", "selection",
      "sampling_prob",  "clip_bound",     "noise_multiplier", "delta",
      "eval_every",     "target_accuracy"};
  return keys;
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a json object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_config_keys().count(key)) {
      throw std::invalid_argument("unknown config field '" + key + "'");
    }
  }
  ExperimentConfig cfg;
  cfg.name = doc.value("name", cfg.name);
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.dataset = doc.value("dataset", cfg.dataset);
  cfg.data_seed = doc.value("data_seed", cfg.data_seed);
  cfg.samples = doc.value("samples", cfg.samples);
  cfg.classes = doc.value("classes", cfg.classes);
  cfg.dim = doc.value("dim", cfg.dim);
  cfg.separation = doc.value("separation", cfg.separation);
  cfg.users = doc.value("users", cfg.users);
  cfg.sessions_per_user = doc.value("sessions_per_user", cfg.sessions_per_user);
  cfg.signal_strength = doc.value("signal_strength", cfg.signal_strength);
  cfg.test_fraction = doc.value("test_fraction", cfg.test_fraction);
  cfg.workload = doc.value("workload", cfg.workload);
  cfg.mlp_hidden = doc.value("mlp_hidden", cfg.mlp_hidden);
  cfg.head = doc.value("head", cfg.head);
  cfg.hidden_dim = doc.value("hidden_dim", cfg.hidden_dim);
  cfg.head_units = doc.value("head_units", cfg.head_units);
  cfg.protocol = doc.value("protocol", cfg.protocol);
  cfg.clients = doc.value("clients", cfg.clients);
  cfg.partition = doc.value("partition", cfg.partition);
  cfg.rounds = doc.value("rounds", cfg.rounds);
  cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
  cfg.batch_size = doc.value("batch_size", cfg.batch_size);
  cfg.local_steps = doc.value("local_steps", cfg.local_steps);
  cfg.clients_per_round = doc.value("clients_per_round", cfg.clients_per_round);
  cfg.upload_fraction = doc.value("upload_fraction", cfg.upload_fraction);
  cfg.download_fraction = doc.value("download_fraction", cfg.download_fraction);
  cfg.selection = doc.value("selection", cfg.selection);
  cfg.sampling_prob = doc.value("sampling_prob", cfg.sampling_prob);
  cfg.clip_bound = doc.value("clip_bound", cfg.clip_bound);
  cfg.noise_multiplier = doc.value("noise_multiplier", cfg.noise_multiplier);
  cfg.delta = doc.value("delta", cfg.delta);
  cfg.eval_every = doc.value("eval_every", cfg.eval_every);
  if (doc.contains("target_accuracy") && !doc.at("target_accuracy").is_null()) {
    cfg.target_accuracy = doc.at("target_accuracy").get<double>();
  }
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json doc = {{"name", cfg.name},
                        {"seed", cfg.seed},
                        {"dataset", cfg.dataset},
                        {"data_seed", cfg.data_seed},
                        {"samples", cfg.samples},
                        {"classes", cfg.classes},
                        {"dim", cfg.dim},
                        {"separation", cfg.separation},
                        {"users", cfg.users},
                        {"sessions_per_user", cfg.sessions_per_user},
                        {"signal_strength", cfg.signal_strength},
                        {"test_fraction", cfg.test_fraction},
                        {"workload", cfg.workload},
                        {"mlp_hidden", cfg.mlp_hidden},
                        {"head", cfg.head},
                        {"hidden_dim", cfg.hidden_dim},
                        {"head_units", cfg.head_units},
                        {"protocol", cfg.protocol},
                        {"clients", cfg.clients},
                        {"partition", cfg.partition},
                        {"rounds", cfg.rounds},
                        {"learning_rate", cfg.learning_rate},
                        {"batch_size", cfg.batch_size},
                        {"local_steps", cfg.local_steps},
                        {"clients_per_round", cfg.clients_per_round},
                        {"upload_fraction", cfg.upload_fraction},
                        {"download_fraction", cfg.download_fraction},
                        {"selection", cfg.selection},
                        {"sampling_prob", cfg.sampling_prob},
                        {"clip_bound", cfg.clip_bound},
                        {"noise_multiplier", cfg.noise_multiplier},
                        {"delta", cfg.delta},
                        {"eval_every", cfg.eval_every}};
  doc["target_accuracy"] =
      cfg.target_accuracy ? nlohmann::json(*cfg.target_accuracy) : nlohmann::json();
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config " + file.string());
  return config_from_json(nlohmann::json::parse(in));
}

void validate_config(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };

  if (cfg.dataset != "blobs" && cfg.dataset != "sessions") {
    fail("dataset must be blobs or sessions, got '" + cfg.dataset + "'");
  }
  if (cfg.workload != "mlp" && cfg.workload != "multiview-gru") {
    fail("workload must be mlp or multiview-gru, got '" + cfg.workload + "'");
  }
  if (cfg.workload == "mlp" && cfg.dataset != "blobs") fail("the mlp workload needs the blobs dataset");
  if (cfg.workload == "multiview-gru" && cfg.dataset != "sessions") {
    fail("the multiview-gru workload needs the sessions dataset");
  }
  if (cfg.protocol != "centralized" && cfg.protocol != "selective" && cfg.protocol != "fedavg" &&
      cfg.protocol != "dp-fedavg") {
    fail("protocol must be centralized, selective, fedavg, or dp-fedavg, got '" + cfg.protocol + "'");
  }
  if (cfg.classes < 2) fail("need at least 2 classes");
  if (!(cfg.test_fraction > 0.0) || !(cfg.test_fraction < 1.0)) fail("test_fraction must be in (0,1)");
  if (cfg.dataset == "blobs") {
    if (cfg.samples < cfg.classes) fail("samples must be >= classes");
    if (cfg.dim < cfg.classes) fail("dim must be >= classes");
    if (cfg.separation < 0.0) fail("separation must be non-negative");
  } else {
    if (cfg.users == 0 || cfg.sessions_per_user == 0) fail("users and sessions_per_user must be positive");
    if (cfg.signal_strength < 0.0 || cfg.signal_strength > 1.0) fail("signal_strength must be in [0,1]");
  }
  if (cfg.workload == "multiview-gru") {
    fusion_kind_from_name(cfg.head);
    if (cfg.hidden_dim == 0 || cfg.head_units == 0) fail("hidden_dim and head_units must be positive");
  } else {
    for (std::size_t w : cfg.mlp_hidden) {
      if (w == 0) fail("mlp_hidden widths must be positive");
    }
  }

  if (!(cfg.learning_rate > 0.0)) fail("learning_rate must be positive");
  if (cfg.eval_every == 0) fail("eval_every must be >= 1");
  if (cfg.clients == 0) fail("clients must be >= 1");
  partition_mode_from_name(cfg.partition);
  selection_strategy_from_name(cfg.selection);
  if (!(cfg.delta > 0.0) || !(cfg.delta < 1.0)) fail("delta must be in (0,1)");
  if (cfg.target_accuracy && (!(*cfg.target_accuracy > 0.0) || *cfg.target_accuracy > 1.0)) {
    fail("target_accuracy must be in (0,1]");
  }

  if (cfg.protocol == "centralized" && cfg.clients != 1) {
    fail("centralized runs use exactly one data holder; set clients to 1");
  }
  const bool fedavg_like = cfg.protocol == "fedavg" || cfg.protocol == "dp-fedavg";
  if (!fedavg_like && cfg.local_steps != 1) {
    fail("local_steps applies only to fedavg and dp-fedavg");
  }
  if (fedavg_like && cfg.local_steps == 0) fail("local_steps must be >= 1");
  if (cfg.protocol != "selective" &&
      (cfg.upload_fraction != 1.0 || cfg.download_fraction != 1.0)) {
    fail("upload/download fractions apply only to the selective protocol");
  }
  if (cfg.protocol == "selective") {
    if (!(cfg.upload_fraction > 0.0) || cfg.upload_fraction > 1.0 ||
        !(cfg.download_fraction > 0.0) || cfg.download_fraction > 1.0) {
      fail("upload/download fractions must be in (0,1]");
    }
  }
  if (cfg.protocol != "dp-fedavg") {
    if (cfg.sampling_prob != 1.0 || cfg.clip_bound != 0.0 || cfg.noise_multiplier != 0.0) {
      fail("sampling_prob, clip_bound, noise_multiplier apply only to dp-fedavg");
    }
    if (cfg.clients_per_round != 0 && cfg.protocol != "fedavg") {
      fail("clients_per_round applies only to fedavg");
    }
  } else {
    if (!(cfg.sampling_prob > 0.0) || cfg.sampling_prob > 1.0) fail("sampling_prob must be in (0,1]");
    if (cfg.clip_bound < 0.0) fail("clip_bound must be non-negative (0 disables clipping)");
    if (cfg.noise_multiplier < 0.0) fail("noise_multiplier must be non-negative");
    if (cfg.noise_multiplier > 0.0 && cfg.clip_bound == 0.0) {
      fail("noise_multiplier > 0 needs a positive clip_bound");
    }
    if (cfg.clients_per_round != 0) fail("dp-fedavg samples clients by probability, not by count");
  }
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw std::invalid_argument("accuracy: need equal-length non-empty inputs");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double f1_macro(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw std::invalid_argument("f1_macro: need equal-length non-empty inputs");
  }
  std::set<int> present(predictions.begin(), predictions.end());
  present.insert(labels.begin(), labels.end());

  double sum = 0.0;
  for (int c : present) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const bool p = predictions[i] == c, t = labels[i] == c;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
    }
    const double prec = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double rec = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    sum += prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
  }
  return sum / static_cast<double>(present.size());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  std::unique_ptr<Workload> workload;
  std::vector<int> labels;
  if (cfg.dataset == "blobs") {
    LabeledVectorDataset data =
        gen_classification(cfg.data_seed, cfg.samples, cfg.classes, cfg.dim, cfg.separation);
    labels = data.labels;
    std::vector<std::size_t> sizes{cfg.dim};
    sizes.insert(sizes.end(), cfg.mlp_hidden.begin(), cfg.mlp_hidden.end());
    sizes.push_back(cfg.classes);
    workload = std::make_unique<MlpWorkload>(std::move(sizes), std::move(data.features),
                                             std::move(data.labels));
  } else {
    SessionDataset data = gen_multiview_sessions(cfg.data_seed, cfg.users, cfg.sessions_per_user,
                                                 {cfg.classes, cfg.signal_strength});
    labels.reserve(data.sessions.size());
    for (const MultiViewSession& s : data.sessions) labels.push_back(s.label);
    MultiViewSpec spec{session_view_dims(), cfg.hidden_dim, cfg.classes,
                       fusion_kind_from_name(cfg.head), cfg.head_units};
    workload = std::make_unique<MultiViewWorkload>(std::move(spec), std::move(data.sessions));
  }

  Rng base(cfg.seed);
  const std::size_t n = workload->sample_count();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng = base.split(kSplitStream);
  shuffle(order, split_rng);
  const auto n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(cfg.test_fraction * static_cast<double>(n))), 1, n - 1);
  std::vector<std::size_t> test(order.begin(), order.begin() + n_test);
  std::vector<std::size_t> train(order.begin() + n_test, order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  std::vector<int> train_labels, test_labels;
  for (std::size_t i : train) train_labels.push_back(labels[i]);
  for (std::size_t i : test) test_labels.push_back(labels[i]);

  const ParamVector init = workload->initial_params(derived_seed(base, kInitStream));

  // Protocol state. Only the branch matching cfg.protocol is used.
  ParamVector central_params = init;
  Rng batch_rng = base.split(kBatchStream);
  std::vector<ClientState> clients;
  ServerState server;
  PrivacyLedger ledger;
  MomentsAccountant accountant;
  const bool is_dp = cfg.protocol == "dp-fedavg";

  std::function<const ParamVector&()> current;
  std::function<RoundTrace()> step;

  if (cfg.protocol == "centralized") {
    current = [&]() -> const ParamVector& { return central_params; };
    step = [&]() {
      std::vector<std::size_t> batch = train;
      if (cfg.batch_size > 0 && cfg.batch_size < train.size()) {
        batch = batch_rng.sample_indices(train.size(), cfg.batch_size);
        for (auto& i : batch) i = train[i];
      }
      LossGrad lg = workload->loss_and_gradient(central_params, batch);
      central_params = sgd_apply(central_params, lg.grad, cfg.learning_rate);
      return RoundTrace{0, "centralized", {}, 0, 0};
    };
  } else {
    Partition part = make_partition(labels, train, cfg.clients,
                                    partition_mode_from_name(cfg.partition),
                                    derived_seed(base, kPartitionStream));
    // Canonical within-shard order keeps full-batch gradients independent of
    // how the shuffle dealt the samples.
    for (auto& shard : part.shards) std::sort(shard.begin(), shard.end());
    clients = make_clients(part.shards, init, derived_seed(base, kClientStream));
    server = make_server(init, clients, derived_seed(base, kServerStream));
    current = [&]() -> const ParamVector& { return server.params; };

    if (cfg.protocol == "selective") {
      SelectiveSgdConfig scfg{cfg.upload_fraction, cfg.download_fraction,
                              selection_strategy_from_name(cfg.selection), cfg.learning_rate,
                              cfg.batch_size};
      step = [&, scfg]() { return selective_sgd_round(server, clients, *workload, scfg); };
    } else if (cfg.protocol == "fedavg") {
      FedAvgConfig fcfg{cfg.local_steps, cfg.learning_rate, cfg.clients_per_round, cfg.batch_size};
      step = [&, fcfg]() { return fedavg_round(server, clients, *workload, fcfg); };
    } else {
      FedAvgConfig fcfg{cfg.local_steps, cfg.learning_rate, 0, cfg.batch_size};
      DpConfig dcfg{cfg.sampling_prob, cfg.clip_bound == 0.0 ? kNoClip : cfg.clip_bound,
                    cfg.noise_multiplier};
      step = [&, fcfg, dcfg]() {
        RoundTrace t = dp_fedavg_round(server, clients, *workload, fcfg, dcfg, ledger);
        accountant.compose_round(dcfg.sampling_prob, dcfg.noise_multiplier);
        return t;
      };
    }
  }

  ExperimentResult result;
  result.config = cfg;
  std::size_t up = 0, down = 0;

  auto eval_split = [&](const ParamVector& params, const std::vector<std::size_t>& idx,
                        const std::vector<int>& truth, double& loss, double& acc,
                        std::vector<int>* preds_out) {
    const std::vector<Vector> scores = workload->logits(params, idx);
    std::vector<int> preds(idx.size());
    double total = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      total += softmax_cross_entropy(scores[i], static_cast<std::size_t>(truth[i])).loss;
      preds[i] = argmax(scores[i]);
    }
    loss = total / static_cast<double>(idx.size());
    acc = accuracy(preds, truth);
    if (preds_out) *preds_out = std::move(preds);
  };

  auto evaluate = [&](std::size_t round) {
    MetricRecord rec;
    rec.round = round;
    eval_split(current(), train, train_labels, rec.train_loss, rec.train_accuracy, nullptr);
    std::vector<int> preds;
    eval_split(current(), test, test_labels, rec.test_loss, rec.test_accuracy, &preds);
    rec.test_f1 = f1_macro(preds, test_labels);
    rec.scalars_up = up;
    rec.scalars_down = down;
    rec.epsilon = is_dp ? accountant.epsilon_at_delta(cfg.delta) : 0.0;
    result.records.push_back(rec);

    // Smoothed stopping rule: mean test accuracy over the last 3 evaluations.
    if (!cfg.target_accuracy || result.reached_target || result.records.size() < 3) return;
    double avg = 0.0;
    for (std::size_t i = result.records.size() - 3; i < result.records.size(); ++i) {
      avg += result.records[i].test_accuracy;
    }
    if (avg / 3.0 >= *cfg.target_accuracy) {
      result.reached_target = true;
      result.scalars_up_at_target = up;
    }
  };

  evaluate(0);
  std::size_t t = 0;
  while (t < cfg.rounds && !result.reached_target) {
    ++t;
    RoundTrace trace = step();
    up += trace.scalars_up;
    down += trace.scalars_down;
    if (t % cfg.eval_every == 0 || t == cfg.rounds) evaluate(t);
  }
  result.rounds_run = t;
  if (!result.reached_target) result.scalars_up_at_target = up;
  result.final_epsilon = result.records.back().epsilon;
  result.ledger = std::move(ledger);
  result.final_params = current();
  return result;
}

std::vector<ComparisonRow> compare_protocols(const std::vector<ExperimentConfig>& cfgs) {
  if (cfgs.empty()) throw std::invalid_argument("compare_protocols: no configs");
  auto shared_key = [](const ExperimentConfig& c) {
    return std::make_tuple(c.seed, c.dataset, c.data_seed, c.samples, c.classes, c.dim,
                           c.separation, c.users, c.sessions_per_user, c.signal_strength,
                           c.test_fraction, c.workload, c.mlp_hidden, c.head, c.hidden_dim,
                           c.head_units);
  };
  for (const ExperimentConfig& c : cfgs) {
    if (shared_key(c) != shared_key(cfgs.front())) {
      throw std::invalid_argument("compare_protocols: configs must share workload, dataset, seed");
    }
  }

  std::vector<ComparisonRow> rows;
  for (const ExperimentConfig& c : cfgs) {
    ExperimentResult res = run_experiment(c);
    ComparisonRow row;
    row.name = c.name;
    row.reached_target = res.reached_target;
    row.rounds_run = res.rounds_run;
    row.scalars_up = res.scalars_up_at_target;
    row.final_accuracy = res.records.back().test_accuracy;
    row.final_epsilon = res.final_epsilon;
    rows.push_back(row);
  }
  const double baseline = static_cast<double>(rows.front().scalars_up);
  for (ComparisonRow& row : rows) {
    row.upload_ratio = baseline > 0.0 ? static_cast<double>(row.scalars_up) / baseline : 1.0;
  }
  return rows;
}

std::string comparison_table(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "name                        reached  rounds      uploads    ratio      acc        eps\n";
  for (const ComparisonRow& r : rows) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-27s %-8s %6zu %12zu %8.3f %8.4f %10.4g\n",
                  r.name.c_str(), r.reached_target ? "yes" : "no", r.rounds_run, r.scalars_up,
                  r.upload_ratio, r.final_accuracy, r.final_epsilon);
    out << line;
  }
  return out.str();
}

void emit_report(const std::vector<MetricRecord>& records, const std::string& format,
                 const std::filesystem::path& file) {
  if (records.empty()) throw std::invalid_argument("emit_report: no records");
  std::ofstream out(file);
  if (!out) throw std::runtime_error("emit_report: cannot open " + file.string());

  if (format == "csv") {
    out << "round,loss,acc,f1,up,down,eps\n";
    for (const MetricRecord& r : records) {
      out << r.round << "," << fmt_double(r.test_loss) << "," << fmt_double(r.test_accuracy) << ","
          << fmt_double(r.test_f1) << "," << r.scalars_up << "," << r.scalars_down << ","
          << fmt_double(r.epsilon) << "\n";
    }
  } else if (format == "jsonl") {
    for (const MetricRecord& r : records) {
      nlohmann::json doc = {{"round", r.round},
                            {"train_loss", r.train_loss},
                            {"test_loss", r.test_loss},
                            {"train_accuracy", r.train_accuracy},
                            {"test_accuracy", r.test_accuracy},
                            {"test_f1", r.test_f1},
                            {"scalars_up", r.scalars_up},
                            {"scalars_down", r.scalars_down}};
      // json has no infinity literal; an unbounded epsilon round-trips as null
      doc["epsilon"] = std::isfinite(r.epsilon) ? nlohmann::json(r.epsilon) : nlohmann::json();
      out << doc.dump() << "\n";
    }
  } else {
    throw std::invalid_argument("emit_report: format must be csv or jsonl, got '" + format + "'");
  }
}

std::vector<MetricRecord> read_records_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("read_records_jsonl: cannot open " + file.string());
  std::vector<MetricRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json doc = nlohmann::json::parse(line);
    MetricRecord r;
    r.round = doc.at("round").get<std::size_t>();
    r.train_loss = doc.at("train_loss").get<double>();
    r.test_loss = doc.at("test_loss").get<double>();
    r.train_accuracy = doc.at("train_accuracy").get<double>();
    r.test_accuracy = doc.at("test_accuracy").get<double>();
    r.test_f1 = doc.at("test_f1").get<double>();
    r.scalars_up = doc.at("scalars_up").get<std::size_t>();
    r.scalars_down = doc.at("scalars_down").get<std::size_t>();
    r.epsilon = doc.at("epsilon").is_null() ? std::numeric_limits<double>::infinity()
                                            : doc.at("epsilon").get<double>();
    records.push_back(r);
  }
  return records;
}

}  // namespace fedsim
