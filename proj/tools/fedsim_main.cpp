#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedsim/datagen.hpp"
#include "fedsim/harness.hpp"
#include "fedsim/privacy.hpp"

namespace fs = std::filesystem;
using namespace fedsim;

namespace {

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << text;
}

// The echoed config carries every default, so the output directory is
// self-contained and re-runnable.
void echo_config(const ExperimentConfig& cfg, const fs::path& dir) {
  write_text(dir / "config.json", config_to_json(cfg).dump(2) + "\n");
}

void write_run_outputs(const ExperimentResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  echo_config(result.config, dir);
  emit_report(result.records, "csv", dir / "records.csv");
  emit_report(result.records, "jsonl", dir / "records.jsonl");
  save_checkpoint(result.final_params, dir / "checkpoint.json");
  if (result.ledger.round_count() > 0) result.ledger.save(dir / "ledger.json");

  nlohmann::json summary = {{"name", result.config.name},
                            {"rounds_run", result.rounds_run},
                            {"reached_target", result.reached_target},
                            {"scalars_up_at_target", result.scalars_up_at_target},
                            {"final_test_accuracy", result.records.back().test_accuracy},
                            {"final_test_loss", result.records.back().test_loss}};
  summary["final_epsilon"] = std::isfinite(result.final_epsilon)
                                 ? nlohmann::json(result.final_epsilon)
                                 : nlohmann::json();
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
}

int run_protocol_command(const std::string& config_file, const std::string& out_dir,
                         const std::string& forced_protocol) {
  ExperimentConfig cfg = load_config(config_file);
  if (!forced_protocol.empty()) cfg.protocol = forced_protocol;
  ExperimentResult result = run_experiment(cfg);
  write_run_outputs(result, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedsim: deterministic federated training simulator"};
  app.require_subcommand(1);

  // gen-data
  std::string gen_config, gen_out;
  auto* gen = app.add_subcommand("gen-data", "generate a dataset from a config file");
  gen->add_option("--config", gen_config, "experiment config json")->required();
  gen->add_option("--out", gen_out, "output dataset directory")->required();

  // train
  std::string train_config, train_out;
  auto* train = app.add_subcommand("train", "run a centralized training experiment");
  train->add_option("--config", train_config, "experiment config json")->required();
  train->add_option("--out", train_out, "output directory")->required();

  // federate
  std::string fed_config, fed_out, fed_protocol;
  auto* fed = app.add_subcommand("federate", "run a federated protocol experiment");
  fed->add_option("--config", fed_config, "experiment config json")->required();
  fed->add_option("--out", fed_out, "output directory")->required();
  fed->add_option("--protocol", fed_protocol, "selective | fedavg | dp-fedavg (overrides config)");

  // privacy
  double pv_p = 1.0, pv_z = 1.0, pv_delta = 1e-5, pv_budget = -1.0;
  std::int64_t pv_rounds = -1;
  std::string pv_ledger;
  auto* priv = app.add_subcommand("privacy", "moments-accountant queries");
  priv->add_option("--p", pv_p, "per-round client sampling probability");
  priv->add_option("--z", pv_z, "noise multiplier");
  priv->add_option("--delta", pv_delta, "target delta")->capture_default_str();
  priv->add_option("--rounds", pv_rounds, "compose this many identical rounds and report epsilon");
  priv->add_option("--budget", pv_budget, "epsilon budget: report how many rounds fit");
  priv->add_option("--ledger", pv_ledger, "report epsilon of a recorded ledger file");

  // compare
  std::vector<std::string> cmp_configs;
  std::string cmp_out;
  auto* cmp = app.add_subcommand("compare", "run several configs and tabulate upload costs");
  cmp->add_option("--out", cmp_out, "output directory")->required();
  cmp->add_option("configs", cmp_configs, "experiment config json files")->required();

  // report
  std::string rep_records, rep_format = "csv", rep_out;
  auto* rep = app.add_subcommand("report", "convert a jsonl record stream");
  rep->add_option("--records", rep_records, "records.jsonl produced by a run")->required();
  rep->add_option("--format", rep_format, "csv | jsonl")->capture_default_str();
  rep->add_option("--out", rep_out, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      ExperimentConfig cfg = load_config(gen_config);
      validate_config(cfg);
      fs::create_directories(gen_out);
      echo_config(cfg, gen_out);
      if (cfg.dataset == "blobs") {
        save_vector_dataset(
            gen_classification(cfg.data_seed, cfg.samples, cfg.classes, cfg.dim, cfg.separation),
            gen_out);
      } else {
        save_session_dataset(gen_multiview_sessions(cfg.data_seed, cfg.users,
                                                    cfg.sessions_per_user,
                                                    {cfg.classes, cfg.signal_strength}),
                             gen_out);
      }
      std::cout << "wrote dataset to " << gen_out << "\n";
      return 0;
    }
    if (train->parsed()) {
      return run_protocol_command(train_config, train_out, "centralized");
    }
    if (fed->parsed()) {
      if (!fed_protocol.empty() && fed_protocol != "selective" && fed_protocol != "fedavg" &&
          fed_protocol != "dp-fedavg") {
        throw std::invalid_argument("federate: unknown protocol '" + fed_protocol + "'");
      }
      return run_protocol_command(fed_config, fed_out, fed_protocol);
    }
    if (priv->parsed()) {
      nlohmann::json out;
      if (!pv_ledger.empty()) {
        MomentsAccountant acc;
        acc.compose(PrivacyLedger::load(pv_ledger));
        const double eps = acc.epsilon_at_delta(pv_delta);
        out["rounds"] = acc.rounds_composed();
        out["epsilon"] = std::isfinite(eps) ? nlohmann::json(eps) : nlohmann::json();
      } else if (pv_budget >= 0.0) {
        out["rounds"] = rounds_until_budget(pv_p, pv_z, pv_delta, pv_budget);
      } else if (pv_rounds >= 0) {
        MomentsAccountant acc;
        for (std::int64_t t = 0; t < pv_rounds; ++t) acc.compose_round(pv_p, pv_z);
        const double eps = acc.epsilon_at_delta(pv_delta);
        out["epsilon"] = std::isfinite(eps) ? nlohmann::json(eps) : nlohmann::json();
      } else {
        throw std::invalid_argument("privacy: need --rounds, --budget, or --ledger");
      }
      std::cout << out.dump() << "\n";
      return 0;
    }
    if (cmp->parsed()) {
      std::vector<ExperimentConfig> cfgs;
      for (const std::string& f : cmp_configs) cfgs.push_back(load_config(f));
      const std::vector<ComparisonRow> rows = compare_protocols(cfgs);
      fs::create_directories(cmp_out);

      nlohmann::json table = nlohmann::json::array();
      for (const ComparisonRow& r : rows) {
        nlohmann::json row = {{"name", r.name},
                              {"reached_target", r.reached_target},
                              {"rounds_run", r.rounds_run},
                              {"scalars_up", r.scalars_up},
                              {"upload_ratio", r.upload_ratio},
                              {"final_accuracy", r.final_accuracy}};
        row["final_epsilon"] =
            std::isfinite(r.final_epsilon) ? nlohmann::json(r.final_epsilon) : nlohmann::json();
        table.push_back(row);
      }
      write_text(fs::path(cmp_out) / "comparison.json", table.dump(2) + "\n");
      const std::string text = comparison_table(rows);
      write_text(fs::path(cmp_out) / "comparison.txt", text);
      std::cout << text;
      return 0;
    }
    if (rep->parsed()) {
      emit_report(read_records_jsonl(rep_records), rep_format, rep_out);
      std::cout << "wrote " << rep_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
