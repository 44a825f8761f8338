#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fedsim/param_vector.hpp"
#include "fedsim/privacy.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/workload.hpp"

namespace fedsim {

// Explicit "no clipping" sentinel; keeps reduction-to-plain-averaging exact.
inline constexpr double kNoClip = std::numeric_limits<double>::infinity();

struct ClientState {
  std::size_t id = 0;
  std::vector<std::size_t> shard;  // indices into the workload's samples
  ParamVector params;              // local model, same layout as the server's
  Rng rng{0};

  std::size_t sample_count() const { return shard.size(); }
};

struct ServerState {
  ParamVector params;
  std::size_t round = 0;
  std::size_t total_samples = 0;
  Rng rng{0};  // base key for aggregate-level noise; never advanced directly
};

enum class SelectionStrategy { LargestMagnitude, Random };

SelectionStrategy selection_strategy_from_name(const std::string& name);
std::string selection_strategy_name(SelectionStrategy s);

struct SelectiveSgdConfig {
  double upload_fraction = 1.0;    // in (0,1]
  double download_fraction = 1.0;  // in (0,1]
  SelectionStrategy strategy = SelectionStrategy::LargestMagnitude;
  double learning_rate = 0.1;
  std::size_t batch_size = 0;  // 0 means the whole local shard
};

struct FedAvgConfig {
  std::size_t local_steps = 1;  // E
  double learning_rate = 0.1;
  std::size_t clients_per_round = 0;  // 0 means all; otherwise a rotating subset
  std::size_t batch_size = 0;         // 0 means the whole local shard
};

struct DpConfig {
  double sampling_prob = 1.0;   // per-client inclusion probability
  double clip_bound = kNoClip;  // max L2 norm of a client's model delta
  double noise_multiplier = 0.0;
};

// What one protocol round moved over the (simulated) network.
struct RoundTrace {
  std::size_t round = 0;
  std::string protocol;
  std::vector<std::size_t> participants;
  std::size_t scalars_up = 0;
  std::size_t scalars_down = 0;
};

// Uploaded/downloaded scalar counts of one round, and a whole-run sum.
std::pair<std::size_t, std::size_t> communication_cost(const RoundTrace& trace);
std::pair<std::size_t, std::size_t> communication_cost(const std::vector<RoundTrace>& traces);

// Builds client states from shards; client k's randomness is an independent
// split stream of `seed`, so adding clients never reshuffles existing ones.
std::vector<ClientState> make_clients(const std::vector<std::vector<std::size_t>>& shards,
                                      const ParamVector& init, std::uint64_t seed);

ServerState make_server(const ParamVector& init, const std::vector<ClientState>& clients,
                        std::uint64_t seed);

// One round of selective-sharing SGD through a global parameter server:
// every client refreshes a download_fraction subset of coordinates from the
// server, takes one local SGD step, and uploads an upload_fraction subset of
// its gradient, which the server applies scaled by -learning_rate.
RoundTrace selective_sgd_round(ServerState& server, std::vector<ClientState>& clients,
                               const Workload& workload, const SelectiveSgdConfig& cfg);

// One round of federated averaging: participants start from the server
// model, run E local steps, and the server takes the sample-size-weighted
// average of their models (weights renormalized over the participants).
RoundTrace fedavg_round(ServerState& server, std::vector<ClientState>& clients,
                        const Workload& workload, const FedAvgConfig& cfg);

// Single-step baseline: the server applies the sample-size-weighted average
// of client gradients, all evaluated at the current server model.
RoundTrace naive_distributed_sgd_round(ServerState& server, std::vector<ClientState>& clients,
                                       const Workload& workload, double learning_rate);

// delta scaled by min(1, clip_bound / ||delta||); output norm <= clip_bound.
ParamVector clip_update(const ParamVector& delta, double clip_bound);

// Federated averaging with user-level privacy controls: Poisson-sampled
// participants, per-client delta clipping, a fixed-denominator 1/(p*K)
// estimator, and Gaussian noise on the aggregate. Records (p, z) in the
// ledger. With p=1, z=0, S=kNoClip this reproduces fedavg_round bit for bit
// on equal shards.
RoundTrace dp_fedavg_round(ServerState& server, std::vector<ClientState>& clients,
                           const Workload& workload, const FedAvgConfig& fed, const DpConfig& dp,
                           PrivacyLedger& ledger);

}  // namespace fedsim
