#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedsim/datagen.hpp"
#include "fedsim/federation.hpp"
#include "fedsim/workload.hpp"

namespace fedsim {

// Everything one experiment needs, with every field defaulted so an echoed
// config is complete and re-runnable on its own.
struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;

  // dataset
  std::string dataset = "blobs";  // blobs | sessions
  std::uint64_t data_seed = 1;
  std::size_t samples = 2000;  // blobs
  std::size_t classes = 2;
  std::size_t dim = 16;  // blobs
  double separation = 3.0;
  std::size_t users = 10;              // sessions
  std::size_t sessions_per_user = 50;  // sessions
  double signal_strength = 1.0;        // sessions
  double test_fraction = 0.25;

  // model
  std::string workload = "mlp";  // mlp | multiview-gru
  std::vector<std::size_t> mlp_hidden = {32};
  std::string head = "fc";  // fc | fm | mvm, multiview-gru only
  std::size_t hidden_dim = 8;
  std::size_t head_units = 8;

  // protocol
  std::string protocol = "centralized";  // centralized | selective | fedavg | dp-fedavg
  std::size_t clients = 1;
  std::string partition = "iid";  // iid | label-shard
  std::size_t rounds = 50;
  double learning_rate = 0.1;
  std::size_t batch_size = 0;  // 0 = full shard
  std::size_t local_steps = 1;
  std::size_t clients_per_round = 0;  // 0 = all
  double upload_fraction = 1.0;
  double download_fraction = 1.0;
  std::string selection = "largest";  // largest | random
  double sampling_prob = 1.0;
  double clip_bound = 0.0;  // 0 = no clipping
  double noise_multiplier = 0.0;
  double delta = 1e-5;

  // evaluation
  std::size_t eval_every = 5;
  std::optional<double> target_accuracy;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& file);

// Throws std::invalid_argument on any cross-field inconsistency; called by
// run_experiment before any data is generated.
void validate_config(const ExperimentConfig& cfg);

struct MetricRecord {
  std::size_t round = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double test_f1 = 0.0;
  std::size_t scalars_up = 0;    // cumulative
  std::size_t scalars_down = 0;  // cumulative
  double epsilon = 0.0;

  bool operator==(const MetricRecord&) const = default;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<MetricRecord> records;
  bool reached_target = false;
  std::size_t rounds_run = 0;
  // Upload cost when the smoothed target accuracy was first met (total cost
  // of the run when it never was).
  std::size_t scalars_up_at_target = 0;
  double final_epsilon = 0.0;
  PrivacyLedger ledger;  // empty unless the protocol was dp-fedavg
  ParamVector final_params;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Unweighted mean of per-class F1 over classes present in either vector.
double f1_macro(const std::vector<int>& predictions, const std::vector<int>& labels);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

struct ComparisonRow {
  std::string name;
  bool reached_target = false;
  std::size_t rounds_run = 0;
  std::size_t scalars_up = 0;
  double upload_ratio = 1.0;  // this config's uploads / first config's uploads
  double final_accuracy = 0.0;
  double final_epsilon = 0.0;
};

// Runs each config and tabulates upload cost until target accuracy. All
// configs must share the dataset fields and seed.
std::vector<ComparisonRow> compare_protocols(const std::vector<ExperimentConfig>& cfgs);

std::string comparison_table(const std::vector<ComparisonRow>& rows);

// records.csv columns, in order: round,loss,acc,f1,up,down,eps
// (test loss/accuracy; up/down cumulative).
void emit_report(const std::vector<MetricRecord>& records, const std::string& format,
                 const std::filesystem::path& file);
std::vector<MetricRecord> read_records_jsonl(const std::filesystem::path& file);

}  // namespace fedsim
