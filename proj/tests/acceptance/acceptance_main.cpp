// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any of them fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fedsim/datagen.hpp"
#include "fedsim/federation.hpp"
#include "fedsim/harness.hpp"
#include "fedsim/privacy.hpp"
#include "fedsim/workload.hpp"
#include "support/finite_diff.hpp"

using namespace fedsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

MlpWorkload blob_workload(std::uint64_t seed, std::size_t n, std::size_t classes, std::size_t dim,
                          double sep, std::vector<std::size_t> hidden) {
  auto data = gen_classification(seed, n, classes, dim, sep);
  std::vector<std::size_t> sizes{dim};
  for (std::size_t h : hidden) sizes.push_back(h);
  sizes.push_back(classes);
  return MlpWorkload(std::move(sizes), std::move(data.features), std::move(data.labels));
}

std::vector<std::vector<std::size_t>> equal_shards(std::size_t n, std::size_t clients) {
  std::vector<std::vector<std::size_t>> shards(clients);
  for (std::size_t i = 0; i < n; ++i) shards[i % clients].push_back(i);
  for (auto& s : shards) std::sort(s.begin(), s.end());
  return shards;
}

// Minimal objective for protocol plumbing checks: zero gradient everywhere.
class ZeroWorkload : public Workload {
 public:
  explicit ZeroWorkload(std::size_t samples)
      : layout_(std::make_shared<ParamLayout>(std::vector<TensorSpec>{{"w", 1, 1}})),
        samples_(samples) {}
  ParamLayoutPtr layout() const override { return layout_; }
  ParamVector initial_params(std::uint64_t) const override { return ParamVector(layout_); }
  std::size_t sample_count() const override { return samples_; }
  std::size_t class_count() const override { return 2; }
  int label_of(std::size_t) const override { return 0; }
  LossGrad loss_and_gradient(const ParamVector&,
                             const std::vector<std::size_t>&) const override {
    return {0.0, ParamVector(layout_)};
  }
  std::vector<Vector> logits(const ParamVector&,
                             const std::vector<std::size_t>& idx) const override {
    return std::vector<Vector>(idx.size(), Vector(2, 0.0));
  }

 private:
  ParamLayoutPtr layout_;
  std::size_t samples_;
};

// 1. One local step of averaging must coincide with pooled-gradient descent.
Outcome criterion_equivalent_forms() {
  double worst = 0.0;
  for (const std::size_t clients : {std::size_t{2}, std::size_t{5}}) {
    MlpWorkload workload = blob_workload(11, 60, 3, 6, 2.0, {10});
    const ParamVector init = workload.initial_params(3);
    const auto shards = equal_shards(60, clients);
    auto ca = make_clients(shards, init, 4);
    auto cb = make_clients(shards, init, 4);
    ServerState sa = make_server(init, ca, 5);
    ServerState sb = make_server(init, cb, 5);
    FedAvgConfig cfg;
    cfg.local_steps = 1;
    cfg.learning_rate = 0.2;
    for (int t = 0; t < 50; ++t) {
      fedavg_round(sa, ca, workload, cfg);
      naive_distributed_sgd_round(sb, cb, workload, 0.2);
      for (std::size_t i = 0; i < sa.params.size(); ++i) {
        worst = std::max(worst, std::fabs(sa.params[i] - sb.params[i]));
      }
    }
  }
  std::ostringstream os;
  os << "max coordinate gap " << worst << " over 50 rounds, K in {2,5}";
  return {worst < 1e-12, os.str()};
}

// 2. More local computation buys at least a 5x upload saving to 90% accuracy.
Outcome criterion_communication_saving() {
  ExperimentConfig base;
  base.dataset = "blobs";
  base.workload = "mlp";
  base.samples = 2000;
  base.classes = 2;
  base.dim = 16;
  base.separation = 3.0;
  base.mlp_hidden = {16};
  base.protocol = "fedavg";
  base.clients = 10;
  base.partition = "iid";
  base.learning_rate = 0.02;
  base.eval_every = 1;
  base.target_accuracy = 0.90;

  ExperimentConfig chatty = base;
  chatty.name = "local-steps-1";
  chatty.local_steps = 1;
  chatty.rounds = 800;

  ExperimentConfig frugal = base;
  frugal.name = "local-steps-20";
  frugal.local_steps = 20;
  frugal.rounds = 100;

  const ExperimentResult a = run_experiment(chatty);
  const ExperimentResult b = run_experiment(frugal);
  if (!a.reached_target || !b.reached_target) {
    return {false, "a run never reached 90% test accuracy"};
  }
  const double ratio = static_cast<double>(a.scalars_up_at_target) /
                       static_cast<double>(b.scalars_up_at_target);
  std::ostringstream os;
  os << "upload ratio " << ratio << " (" << a.scalars_up_at_target << " vs "
     << b.scalars_up_at_target << " scalars, rounds " << a.rounds_run << " vs " << b.rounds_run
     << ")";
  return {ratio >= 5.0, os.str()};
}

// 3. Analytic gradients of the recurrent encoders and all three heads.
Outcome criterion_gradient_checks() {
  const std::vector<std::size_t> view_dims{3, 2, 4};
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::vector<MultiViewSession> sessions;
    for (int s = 0; s < 2; ++s) {
      MultiViewSession sess;
      sess.label = s;
      sess.duration_seconds = 1.0;
      for (std::size_t p = 0; p < view_dims.size(); ++p) {
        const std::size_t steps = 2 + rng.uniform_index(3);  // <= 4
        std::vector<Vector> seq(steps, Vector(view_dims[p]));
        for (auto& x : seq)
          for (double& v : x) v = rng.uniform_symmetric(1.0);
        sess.views.push_back(std::move(seq));
      }
      sessions.push_back(std::move(sess));
    }
    for (const FusionKind kind : {FusionKind::Fc, FusionKind::Fm, FusionKind::Mvm}) {
      const MultiViewSpec spec{view_dims, 3, 2, kind, 2};
      MultiViewWorkload workload(spec, sessions);
      const ParamVector at = workload.initial_params(seed * 131 + 7);
      const std::vector<std::size_t> batch{0, 1};
      const LossGrad lg = workload.loss_and_gradient(at, batch);
      const auto loss_of = [&](const ParamVector& p) {
        return workload.loss_and_gradient(p, batch).loss;
      };
      worst = std::max(worst, testing::max_gradient_error(loss_of, at, lg.grad));
    }
  }
  std::ostringstream os;
  os << "worst scaled gradient error " << worst << " across 20 seeds x 3 heads";
  return {worst < 1e-4, os.str()};
}

// 4. The factorized multi-view score equals its expanded enumeration.
Outcome criterion_mvm_algebra() {
  double worst = 0.0;
  for (const auto& dims : std::vector<std::vector<std::size_t>>{{3, 2}, {2, 3, 2}}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(seed * 13 + dims.size());
      const std::size_t factor_dim = 2 + seed % 2;
      const std::size_t classes = 2 + seed % 2;
      MvmHead head = MvmHead::glorot(dims, factor_dim, classes, rng);
      std::vector<Vector> views;
      for (std::size_t d : dims) {
        Vector h(d);
        for (double& v : h) v = rng.uniform_symmetric(2.0);
        views.push_back(std::move(h));
      }
      const Vector got = fuse_mvm(head, views);
      for (std::size_t a = 0; a < classes; ++a) {
        double want = 0.0;
        for (std::size_t f = 0; f < factor_dim; ++f) {
          double prod = 1.0;
          for (std::size_t p = 0; p < dims.size(); ++p) {
            double q = head.factors[a][p](f, dims[p]);
            for (std::size_t j = 0; j < dims[p]; ++j) q += head.factors[a][p](f, j) * views[p][j];
            prod *= q;
          }
          want += prod;
        }
        worst = std::max(worst, std::fabs(got[a] - want));
      }
    }
  }
  std::ostringstream os;
  os << "max |factorized - enumerated| " << worst;
  return {worst < 1e-12, os.str()};
}

// 5. Clipping, the no-privacy reduction, and Poisson participation.
Outcome criterion_dp_invariants() {
  std::ostringstream os;

  // (a) every clipped client delta sits inside the S-ball, 100 rounds
  {
    MlpWorkload workload = blob_workload(17, 40, 2, 4, 2.0, {6});
    const ParamVector init = workload.initial_params(2);
    auto clients = make_clients(equal_shards(40, 4), init, 21);
    ServerState server = make_server(init, clients, 22);
    FedAvgConfig fed;
    fed.local_steps = 2;
    fed.learning_rate = 0.3;
    DpConfig dp;
    dp.sampling_prob = 0.8;
    dp.clip_bound = 0.05;
    dp.noise_multiplier = 0.3;
    PrivacyLedger ledger;
    double worst_norm = 0.0;
    for (int t = 0; t < 100; ++t) {
      // Recompute each client's full-batch local delta at the round-start
      // model and verify the clipped form respects the bound.
      for (ClientState& c : clients) {
        ParamVector local = server.params;
        for (std::size_t e = 0; e < fed.local_steps; ++e) {
          local = sgd_apply(local, workload.loss_and_gradient(local, c.shard).grad,
                            fed.learning_rate);
        }
        ParamVector delta(server.params.layout());
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = local[i] - server.params[i];
        worst_norm = std::max(worst_norm, l2_norm(clip_update(delta, dp.clip_bound).values()));
      }
      dp_fedavg_round(server, clients, workload, fed, dp, ledger);
    }
    if (!(worst_norm <= dp.clip_bound * (1.0 + 1e-12))) {
      os << "clipped norm " << worst_norm << " exceeds bound " << dp.clip_bound;
      return {false, os.str()};
    }
    os << "max clipped norm " << worst_norm << " <= " << dp.clip_bound;
  }

  // (b) p=1, z=0, S=inf reduces to plain averaging, bit for bit
  {
    MlpWorkload workload = blob_workload(18, 40, 2, 4, 2.0, {6});
    const ParamVector init = workload.initial_params(3);
    auto ca = make_clients(equal_shards(40, 4), init, 23);
    auto cb = make_clients(equal_shards(40, 4), init, 23);
    ServerState sa = make_server(init, ca, 24);
    ServerState sb = make_server(init, cb, 24);
    FedAvgConfig fed;
    fed.local_steps = 2;
    fed.learning_rate = 0.3;
    DpConfig relaxed;  // p=1, S=kNoClip, z=0
    PrivacyLedger ledger;
    for (int t = 0; t < 100; ++t) {
      fedavg_round(sa, ca, workload, fed);
      dp_fedavg_round(sb, cb, workload, fed, relaxed, ledger);
      if (!(sa.params == sb.params)) {
        return {false, "relaxed dp run diverged from plain averaging at round " +
                           std::to_string(t)};
      }
    }
    os << "; 100-round reduction trajectory identical";
  }

  // (c) realized participation rate vs p*K
  {
    const std::size_t clients_n = 10;
    const double p = 0.3;
    ZeroWorkload workload(clients_n);
    const ParamVector init = workload.initial_params(0);
    auto clients = make_clients(equal_shards(clients_n, clients_n), init, 29);
    ServerState server = make_server(init, clients, 30);
    FedAvgConfig fed;
    DpConfig dp;
    dp.sampling_prob = p;
    PrivacyLedger ledger;
    std::size_t total = 0;
    const int rounds = 10000;
    for (int t = 0; t < rounds; ++t) {
      total += dp_fedavg_round(server, clients, workload, fed, dp, ledger).participants.size();
    }
    const double realized = static_cast<double>(total) / static_cast<double>(rounds);
    const double expect = p * static_cast<double>(clients_n);
    os << "; mean participants/round " << realized << " vs " << expect;
    if (std::fabs(realized - expect) > 0.02 * expect) return {false, os.str()};
  }

  return {true, os.str()};
}

// 6. Accountant vs the closed-form minimization oracle at p=1.
Outcome criterion_accountant() {
  const double delta = 1e-5;
  const double log_inv_delta = std::log(1.0 / delta);
  double worst_rel = 0.0;
  for (const double z : {1.0, 2.0, 4.0, 8.0}) {
    for (const std::size_t T : {std::size_t{1}, std::size_t{10}, std::size_t{100}}) {
      MomentsAccountant acc;
      for (std::size_t t = 0; t < T; ++t) acc.compose_round(1.0, z);
      const double got = acc.epsilon_at_delta(delta);

      // Closed-form minimization of (T lam (lam+1) / (2 z^2) + ln(1/delta))
      // over the integer orders lam >= 1 the mechanism admits. The objective
      // is convex in lam, so the minimum sits at a neighbor of the
      // unconstrained stationary point sqrt(2 z^2 ln(1/delta) / T).
      const auto eps_at = [&](double lam) {
        return static_cast<double>(T) * (lam + 1.0) / (2.0 * z * z) + log_inv_delta / lam;
      };
      const double stationary = std::sqrt(2.0 * z * z * log_inv_delta / static_cast<double>(T));
      const double lo = std::max(1.0, std::floor(stationary));
      const double oracle = std::min(eps_at(lo), eps_at(lo + 1.0));
      worst_rel = std::max(worst_rel, std::fabs(got - oracle) / oracle);
    }
  }
  if (worst_rel >= 0.01) {
    return {false, "oracle mismatch " + std::to_string(worst_rel)};
  }

  // Monotone in rounds, anti-monotone in noise.
  for (const double z : {0.8, 1.5, 3.0}) {
    MomentsAccountant acc;
    double prev = 0.0;
    for (int t = 1; t <= 64; ++t) {
      acc.compose_round(0.4, z);
      const double eps = acc.epsilon_at_delta(delta);
      if (eps < prev) return {false, "epsilon decreased with extra rounds"};
      prev = eps;
    }
  }
  for (const std::size_t T : {std::size_t{5}, std::size_t{50}}) {
    double prev = std::numeric_limits<double>::infinity();
    for (const double z : {1.0, 2.0, 4.0, 8.0}) {
      MomentsAccountant acc;
      for (std::size_t t = 0; t < T; ++t) acc.compose_round(0.4, z);
      const double eps = acc.epsilon_at_delta(delta);
      if (eps >= prev) return {false, "epsilon failed to drop with extra noise"};
      prev = eps;
    }
  }
  std::ostringstream os;
  os << "worst oracle gap " << worst_rel * 100.0 << "% over z in {1,2,4,8}, T in {1,10,100}";
  return {true, os.str()};
}

// 7. Planted-signal sessions are learnable; null-signal ones are not.
Outcome criterion_session_learning() {
  ExperimentConfig cfg;
  cfg.dataset = "sessions";
  cfg.workload = "multiview-gru";
  cfg.users = 20;
  cfg.sessions_per_user = 200;
  cfg.classes = 2;
  cfg.signal_strength = 1.0;
  cfg.hidden_dim = 6;
  cfg.head = "fc";
  cfg.head_units = 8;
  cfg.protocol = "centralized";
  cfg.batch_size = 32;
  cfg.learning_rate = 0.25;
  cfg.rounds = 1200;
  cfg.eval_every = 25;
  cfg.target_accuracy = 0.92;

  const ExperimentResult planted = run_experiment(cfg);
  const MetricRecord& last = planted.records.back();

  ExperimentConfig null_cfg = cfg;
  null_cfg.signal_strength = 0.0;
  null_cfg.rounds = 150;
  null_cfg.eval_every = 50;
  null_cfg.target_accuracy.reset();
  const ExperimentResult null_run = run_experiment(null_cfg);
  const double null_acc = null_run.records.back().test_accuracy;

  std::ostringstream os;
  os << "planted train/test accuracy " << last.train_accuracy << "/" << last.test_accuracy
     << " after " << planted.rounds_run << " rounds; null test accuracy " << null_acc;
  const bool pass = last.train_accuracy >= 0.95 && last.test_accuracy >= 0.85 &&
                    std::fabs(null_acc - 0.5) <= 0.05;
  return {pass, os.str()};
}

// 8. Full sharing through the parameter server is exact; 10% uploads stay
// within 5x of its round count to 90% accuracy.
Outcome criterion_selective_sharing() {
  // Exactness with one client and full upload/download.
  {
    MlpWorkload workload = blob_workload(31, 50, 2, 5, 2.0, {8});
    const ParamVector init = workload.initial_params(6);
    std::vector<std::size_t> all(50);
    std::iota(all.begin(), all.end(), 0);
    auto clients = make_clients({all}, init, 33);
    ServerState server = make_server(init, clients, 34);
    SelectiveSgdConfig cfg;
    cfg.learning_rate = 0.2;

    ParamVector central = init;
    for (int t = 0; t < 40; ++t) {
      selective_sgd_round(server, clients, workload, cfg);
      central = sgd_apply(central, workload.loss_and_gradient(central, all).grad, 0.2);
      if (!(server.params == central)) {
        return {false, "full sharing diverged from the centralized step at round " +
                           std::to_string(t)};
      }
    }
  }

  // Sparse uploads on the separable task.
  ExperimentConfig base;
  base.dataset = "blobs";
  base.workload = "mlp";
  base.samples = 2000;
  base.classes = 2;
  base.dim = 16;
  base.separation = 3.0;
  base.mlp_hidden = {16};
  base.protocol = "selective";
  base.clients = 10;
  base.learning_rate = 0.1;
  base.eval_every = 1;
  base.rounds = 600;
  base.target_accuracy = 0.90;

  ExperimentConfig full = base;
  full.name = "full-sharing";
  ExperimentConfig sparse = base;
  sparse.name = "sparse-uploads";
  sparse.upload_fraction = 0.1;

  const ExperimentResult a = run_experiment(full);
  const ExperimentResult b = run_experiment(sparse);
  std::ostringstream os;
  os << "exact single-client match; rounds to 90%: full " << a.rounds_run << ", sparse "
     << b.rounds_run;
  if (!a.reached_target || !b.reached_target) {
    return {false, os.str() + " (a run never reached the target)"};
  }
  const bool pass =
      static_cast<double>(b.rounds_run) <= 5.0 * static_cast<double>(a.rounds_run);
  return {pass, os.str()};
}

// 9. Reruns serialize to byte-identical metric streams.
Outcome criterion_determinism() {
  std::vector<ExperimentConfig> battery;
  {
    ExperimentConfig cfg;
    cfg.dataset = "blobs";
    cfg.workload = "mlp";
    cfg.samples = 120;
    cfg.classes = 3;
    cfg.dim = 6;
    cfg.mlp_hidden = {8};
    cfg.rounds = 10;
    cfg.eval_every = 2;

    cfg.name = "det-central";
    battery.push_back(cfg);

    cfg.name = "det-selective";
    cfg.protocol = "selective";
    cfg.clients = 4;
    cfg.upload_fraction = 0.3;
    cfg.download_fraction = 0.5;
    cfg.selection = "random";
    battery.push_back(cfg);

    cfg.name = "det-dp";
    cfg.protocol = "dp-fedavg";
    cfg.upload_fraction = 1.0;
    cfg.download_fraction = 1.0;
    cfg.selection = "largest";
    cfg.partition = "label-shard";
    cfg.batch_size = 8;
    cfg.sampling_prob = 0.6;
    cfg.clip_bound = 0.2;
    cfg.noise_multiplier = 0.8;
    battery.push_back(cfg);
  }
  {
    ExperimentConfig cfg;
    cfg.dataset = "sessions";
    cfg.workload = "multiview-gru";
    cfg.name = "det-sessions";
    cfg.users = 3;
    cfg.sessions_per_user = 4;
    cfg.classes = 2;
    cfg.hidden_dim = 3;
    cfg.head = "mvm";
    cfg.head_units = 2;
    cfg.rounds = 2;
    cfg.eval_every = 1;
    cfg.learning_rate = 0.05;
    battery.push_back(cfg);
  }

  const auto records_bytes = [](const ExperimentConfig& cfg) {
    const ExperimentResult result = run_experiment(cfg);
    const auto file = std::filesystem::temp_directory_path() /
                      ("fedsim_accept_" + cfg.name + ".jsonl");
    emit_report(result.records, "jsonl", file);
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::filesystem::remove(file);
    return buf.str();
  };

  for (const ExperimentConfig& cfg : battery) {
    if (records_bytes(cfg) != records_bytes(cfg)) {
      return {false, "rerun of '" + cfg.name + "' changed its metric bytes"};
    }
  }
  return {true, std::to_string(battery.size()) + " configs rerun byte-identically"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria{
      {"averaging with one local step equals pooled-gradient descent", criterion_equivalent_forms},
      {"local computation cuts uploads to target accuracy by >= 5x", criterion_communication_saving},
      {"analytic gradients match finite differences for all heads", criterion_gradient_checks},
      {"factorized multi-view scores equal brute-force enumeration", criterion_mvm_algebra},
      {"clipping, no-privacy reduction, and participation rate", criterion_dp_invariants},
      {"accountant matches the closed-form oracle and is monotone", criterion_accountant},
      {"planted session signal is learned, null signal is not", criterion_session_learning},
      {"selective sharing: exact at full fractions, efficient at 10%", criterion_selective_sharing},
      {"reruns produce byte-identical metric records", criterion_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %zu. %s (%s) [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, outcome.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !outcome.pass;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
