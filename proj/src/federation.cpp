#include "fedsim/federation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedsim {

namespace {

// Participation draws come from a reserved per-client stream so they never
// interact with batch sampling; sub-split by round index keeps every round's
// draw independent of how many draws earlier rounds made.
constexpr std::uint64_t kParticipationStream = 0x70a1;

std::size_t frac_count(double frac, std::size_t dim) {
  if (!(frac > 0.0) || frac > 1.0) {
    throw std::invalid_argument("fraction must be in (0,1], got " + std::to_string(frac));
  }
  // Tiny slack keeps exact multiples from being pushed up a slot by the
  // inexact product.
  auto count = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(dim) - 1e-9));
  return std::clamp<std::size_t>(count, 1, dim);
}

void check_clients(const std::vector<ClientState>& clients, const ServerState& server,
                   const char* what) {
  if (clients.empty()) throw std::invalid_argument(std::string(what) + ": no clients");
  for (const ClientState& c : clients) {
    server.params.require_same_layout(c.params, what);
  }
}

std::vector<std::size_t> pick_batch(ClientState& client, std::size_t batch_size) {
  if (batch_size == 0 || batch_size >= client.shard.size()) return client.shard;
  std::vector<std::size_t> picks = client.rng.sample_indices(client.shard.size(), batch_size);
  for (auto& i : picks) i = client.shard[i];
  return picks;
}

ParamVector local_steps(const ServerState& server, ClientState& client, const Workload& workload,
                        std::size_t steps, double eta, std::size_t batch_size) {
  ParamVector local = server.params;
  for (std::size_t e = 0; e < steps; ++e) {
    LossGrad lg = workload.loss_and_gradient(local, pick_batch(client, batch_size));
    local = sgd_apply(local, lg.grad, eta);
  }
  return local;
}

std::vector<std::size_t> rotating_participants(std::size_t total, std::size_t per_round,
                                               std::size_t round) {
  if (per_round == 0 || per_round >= total) {
    std::vector<std::size_t> all(total);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  std::vector<std::size_t> ids;
  ids.reserve(per_round);
  const std::size_t start = (round * per_round) % total;
  for (std::size_t j = 0; j < per_round; ++j) ids.push_back((start + j) % total);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

SelectionStrategy selection_strategy_from_name(const std::string& name) {
  if (name == "largest" || name == "largest-magnitude") return SelectionStrategy::LargestMagnitude;
  if (name == "random") return SelectionStrategy::Random;
  throw std::invalid_argument("unknown selection strategy '" + name +
                              "', expected largest or random");
}

std::string selection_strategy_name(SelectionStrategy s) {
  return s == SelectionStrategy::LargestMagnitude ? "largest" : "random";
}

std::pair<std::size_t, std::size_t> communication_cost(const RoundTrace& trace) {
  return {trace.scalars_up, trace.scalars_down};
}

std::pair<std::size_t, std::size_t> communication_cost(const std::vector<RoundTrace>& traces) {
  std::pair<std::size_t, std::size_t> total{0, 0};
  for (const RoundTrace& t : traces) {
    total.first += t.scalars_up;
    total.second += t.scalars_down;
  }
  return total;
}

std::vector<ClientState> make_clients(const std::vector<std::vector<std::size_t>>& shards,
                                      const ParamVector& init, std::uint64_t seed) {
  if (shards.empty()) throw std::invalid_argument("make_clients: no shards");
  Rng base(seed);
  std::vector<ClientState> clients;
  clients.reserve(shards.size());
  for (std::size_t k = 0; k < shards.size(); ++k) {
    if (shards[k].empty()) {
      throw std::invalid_argument("make_clients: shard " + std::to_string(k) + " is empty");
    }
    clients.push_back({k, shards[k], init, base.split(k)});
  }
  return clients;
}

ServerState make_server(const ParamVector& init, const std::vector<ClientState>& clients,
                        std::uint64_t seed) {
  ServerState server;
  server.params = init;
  server.rng = Rng(seed).split(std::numeric_limits<std::uint64_t>::max());
  for (const ClientState& c : clients) {
    init.require_same_layout(c.params, "make_server");
    server.total_samples += c.sample_count();
  }
  return server;
}

RoundTrace selective_sgd_round(ServerState& server, std::vector<ClientState>& clients,
                               const Workload& workload, const SelectiveSgdConfig& cfg) {
  check_clients(clients, server, "selective_sgd_round");
  const std::size_t dim = server.params.size();
  const std::size_t down_count = frac_count(cfg.download_fraction, dim);
  const std::size_t up_count = frac_count(cfg.upload_fraction, dim);

  // Phase 1: every client works against the round-start global model.
  std::vector<std::vector<std::pair<std::size_t, double>>> pending(clients.size());
  for (ClientState& client : clients) {
    if (down_count == dim) {
      client.params = server.params;
    } else {
      for (std::size_t i : client.rng.sample_indices(dim, down_count)) {
        client.params[i] = server.params[i];
      }
    }

    LossGrad lg = workload.loss_and_gradient(client.params, pick_batch(client, cfg.batch_size));

    std::vector<std::size_t> chosen;
    if (cfg.strategy == SelectionStrategy::Random) {
      chosen = client.rng.sample_indices(dim, up_count);
    } else {
      chosen.resize(dim);
      std::iota(chosen.begin(), chosen.end(), 0);
      std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        const double ma = std::abs(lg.grad[a]), mb = std::abs(lg.grad[b]);
        return ma != mb ? ma > mb : a < b;
      });
      chosen.resize(up_count);
    }
    auto& ups = pending[client.id];
    ups.reserve(up_count);
    for (std::size_t i : chosen) ups.emplace_back(i, lg.grad[i]);

    client.params = sgd_apply(client.params, lg.grad, cfg.learning_rate);
  }

  // Phase 2: sparse updates land in client-id order.
  RoundTrace trace{server.round, "selective", {}, 0, 0};
  for (std::size_t k = 0; k < clients.size(); ++k) {
    for (const auto& [i, g] : pending[k]) {
      server.params[i] -= cfg.learning_rate * g;
    }
    trace.participants.push_back(k);
  }
  trace.scalars_up = clients.size() * up_count;
  trace.scalars_down = clients.size() * down_count;
  server.round += 1;
  return trace;
}

RoundTrace fedavg_round(ServerState& server, std::vector<ClientState>& clients,
                        const Workload& workload, const FedAvgConfig& cfg) {
  check_clients(clients, server, "fedavg_round");
  if (cfg.local_steps == 0) throw std::invalid_argument("fedavg_round: local_steps must be >= 1");

  const std::vector<std::size_t> participants =
      rotating_participants(clients.size(), cfg.clients_per_round, server.round);
  std::size_t participating_samples = 0;
  for (std::size_t id : participants) participating_samples += clients[id].sample_count();

  ParamVector acc(server.params.layout());
  for (std::size_t id : participants) {
    ClientState& client = clients[id];
    ParamVector local =
        local_steps(server, client, workload, cfg.local_steps, cfg.learning_rate, cfg.batch_size);
    const double weight = static_cast<double>(client.sample_count()) /
                          static_cast<double>(participating_samples);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += weight * (local[i] - server.params[i]);
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) server.params[i] += acc[i];

  RoundTrace trace{server.round, "fedavg", participants,
                   participants.size() * server.params.size(),
                   participants.size() * server.params.size()};
  server.round += 1;
  return trace;
}

RoundTrace naive_distributed_sgd_round(ServerState& server, std::vector<ClientState>& clients,
                                       const Workload& workload, double learning_rate) {
  check_clients(clients, server, "naive_distributed_sgd_round");

  ParamVector pooled(server.params.layout());
  for (const ClientState& client : clients) {
    LossGrad lg = workload.loss_and_gradient(server.params, client.shard);
    const double weight = static_cast<double>(client.sample_count()) /
                          static_cast<double>(server.total_samples);
    axpy_params(weight, lg.grad, pooled);
  }
  server.params = sgd_apply(server.params, pooled, learning_rate);

  std::vector<std::size_t> participants(clients.size());
  std::iota(participants.begin(), participants.end(), 0);
  RoundTrace trace{server.round, "naive-sgd", std::move(participants),
                   clients.size() * server.params.size(),
                   clients.size() * server.params.size()};
  server.round += 1;
  return trace;
}

ParamVector clip_update(const ParamVector& delta, double clip_bound) {
  if (!(clip_bound > 0.0)) {
    throw std::invalid_argument("clip_update: bound must be positive, got " +
                                std::to_string(clip_bound));
  }
  const double norm = l2_norm(delta.values());
  if (!(norm > clip_bound)) return delta;
  ParamVector out = delta;
  const double factor = clip_bound / norm;
  for (auto& v : out.values()) v *= factor;
  return out;
}

RoundTrace dp_fedavg_round(ServerState& server, std::vector<ClientState>& clients,
                           const Workload& workload, const FedAvgConfig& fed, const DpConfig& dp,
                           PrivacyLedger& ledger) {
  check_clients(clients, server, "dp_fedavg_round");
  if (fed.local_steps == 0) throw std::invalid_argument("dp_fedavg_round: local_steps must be >= 1");
  if (!(dp.sampling_prob > 0.0) || dp.sampling_prob > 1.0) {
    throw std::invalid_argument("dp_fedavg_round: sampling probability must be in (0,1]");
  }
  if (!(dp.clip_bound > 0.0)) {
    throw std::invalid_argument("dp_fedavg_round: clip bound must be positive");
  }
  if (dp.noise_multiplier < 0.0) {
    throw std::invalid_argument("dp_fedavg_round: noise multiplier must be non-negative");
  }
  if (dp.noise_multiplier > 0.0 && dp.clip_bound == kNoClip) {
    throw std::invalid_argument("dp_fedavg_round: noise calibration needs a finite clip bound");
  }

  std::vector<std::size_t> participants;
  for (const ClientState& client : clients) {
    Rng coin = client.rng.split(kParticipationStream).split(server.round);
    if (coin.uniform() < dp.sampling_prob) participants.push_back(client.id);
  }

  const double weight =
      1.0 / (dp.sampling_prob * static_cast<double>(clients.size()));
  ParamVector acc(server.params.layout());
  for (std::size_t id : participants) {
    ClientState& client = clients[id];
    ParamVector local =
        local_steps(server, client, workload, fed.local_steps, fed.learning_rate, fed.batch_size);
    ParamVector delta(server.params.layout());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = local[i] - server.params[i];
    delta = clip_update(delta, dp.clip_bound);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weight * delta[i];
  }

  if (dp.noise_multiplier > 0.0) {
    const double std = dp.noise_multiplier * dp.clip_bound * weight;
    Rng noise = server.rng.split(server.round);
    for (auto& v : acc.values()) v += std * noise.gaussian();
  }
  for (std::size_t i = 0; i < acc.size(); ++i) server.params[i] += acc[i];
  ledger.record_round(dp.sampling_prob, dp.noise_multiplier);

  RoundTrace trace{server.round, "dp-fedavg", std::move(participants), 0, 0};
  trace.scalars_up = trace.participants.size() * server.params.size();
  trace.scalars_down = trace.participants.size() * server.params.size();
  server.round += 1;
  return trace;
}

}  // namespace fedsim
