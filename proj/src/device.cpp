// SPDX-License-Identifier: Apache-2.0
#include "prext/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace prext::dev {

BitString Device::invoke(const BitString& input) {
  BitString out = respond(input);
  if (out.size() > m_per_round_)
    throw std::invalid_argument("device '" + id_ +
                                "': output exceeds declared m_per_round");
  return out;
}

namespace {

// Joint sampler for a sequence of CHSH rounds.  Each round draws a
// fixed bundle of randomness on first touch, so outcomes do not depend
// on which device asks first; the second measurement is sampled from
// the conditional distribution of the canonical strategy, which keeps
// both marginals uniform (no signaling).
class EprRounds {
public:
  EprRounds(double noise_eta, SplitMix64 rng) : eta_(noise_eta), rng_(rng) {}

  bool measure(int side, std::size_t round, bool input) {
    ensure(round);
    Slot& s = slots_[round];
    if (s.done[side]) throw std::invalid_argument("device: round re-measured");
    s.done[side] = true;
    s.input[side] = input;
    bool honest;
    if (!s.done[1 - side]) {
      honest = s.first_coin;
    } else {
      const bool other = s.honest_out[1 - side];
      const bool product = s.input[0] && s.input[1];
      const bool relation = s.match ? product : !product;  // a XOR b
      honest = other != relation;
    }
    s.honest_out[side] = honest;
    return s.noisy ? s.noise_coin[side] : honest;
  }

private:
  struct Slot {
    bool done[2] = {false, false};
    bool input[2] = {false, false};
    bool honest_out[2] = {false, false};
    bool first_coin = false;
    bool match = false;
    bool noisy = false;
    bool noise_coin[2] = {false, false};
  };

  void ensure(std::size_t round) {
    while (slots_.size() <= round) {
      Slot s;
      s.first_coin = rng_.next_bit();
      s.match = rng_.next_bool(kChshQuantum);
      s.noisy = rng_.next_bool(eta_);
      s.noise_coin[0] = rng_.next_bit();
      s.noise_coin[1] = rng_.next_bit();
      slots_.push_back(s);
    }
  }

  double eta_;
  SplitMix64 rng_;
  std::vector<Slot> slots_;
};

class ChshDevice : public Device {
public:
  ChshDevice(std::string id, int side, std::shared_ptr<EprRounds> shared)
      : Device(std::move(id), 1), side_(side), shared_(std::move(shared)) {}

protected:
  BitString respond(const BitString& input) override {
    if (input.size() != 1)
      throw std::invalid_argument("chsh device: expects a single input bit");
    const bool out = shared_->measure(side_, round_++, input.get(0));
    BitString b(1);
    b.set(0, out);
    return b;
  }

private:
  int side_;
  std::size_t round_ = 0;
  std::shared_ptr<EprRounds> shared_;
};

class TableDevice : public Device {
public:
  TableDevice(std::string id, StrategyTable table)
      : Device(std::move(id), table.output_len), table_(std::move(table)) {}

protected:
  BitString respond(const BitString& input) override {
    const std::string& out = table_.lookup(input.to_string01());
    BitString b(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) b.set(i, out[i] == '1');
    return b;
  }

private:
  StrategyTable table_;
};

class ReplayDevice : public Device {
public:
  ReplayDevice(std::string id, BitString outputs)
      : Device(std::move(id), 1), outputs_(std::move(outputs)) {}

protected:
  BitString respond(const BitString&) override {
    BitString b(1);
    // past the prepared transcript the replayer just repeats zeros
    if (pos_ < outputs_.size()) b.set(0, outputs_.get(pos_));
    ++pos_;
    return b;
  }

private:
  BitString outputs_;
  std::size_t pos_ = 0;
};

}  // namespace

Implementation make_chsh_pair(double noise_eta, std::uint64_t rng_seed) {
  if (noise_eta < 0.0 || noise_eta > 1.0)
    throw std::invalid_argument("make_chsh_pair: noise_eta must be in [0,1]");
  auto shared = std::make_shared<EprRounds>(noise_eta, SplitMix64(rng_seed));
  Implementation impl;
  impl.shared_init = "epr-per-round noise_eta=" + std::to_string(noise_eta);
  impl.devices.push_back(std::make_unique<ChshDevice>("A", 0, shared));
  impl.devices.push_back(std::make_unique<ChshDevice>("B", 1, shared));
  return impl;
}

const std::string& StrategyTable::lookup(const std::string& input) const {
  auto it = entries.find(input);
  if (it == entries.end())
    throw std::invalid_argument("strategy table: missing entry for input '" +
                                input + "'");
  return it->second;
}

Implementation make_deterministic(const std::vector<StrategyTable>& strategies) {
  Implementation impl;
  impl.shared_init = "none (deterministic tables)";
  std::size_t idx = 0;
  for (const auto& table : strategies) {
    // totality check up front
    const std::size_t combos = std::size_t{1} << table.input_len;
    for (std::size_t v = 0; v < combos; ++v) {
      std::string key(table.input_len, '0');
      for (std::size_t b = 0; b < table.input_len; ++b)
        if ((v >> (table.input_len - 1 - b)) & 1) key[b] = '1';
      const std::string& out = table.lookup(key);
      if (out.size() != table.output_len)
        throw std::invalid_argument("strategy table: wrong output length for '" +
                                    key + "'");
    }
    impl.devices.push_back(
        std::make_unique<TableDevice>("T" + std::to_string(idx++), table));
  }
  return impl;
}

std::vector<StrategyTable> load_strategy_tables(std::istream& in) {
  std::map<std::string, StrategyTable> by_id;
  std::vector<std::string> order;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string id, input, output;
    if (!(ls >> id >> input >> output)) continue;
    for (char c : input + output)
      if (c != '0' && c != '1')
        throw std::invalid_argument("strategy file: non-binary bits in line '" +
                                    line + "'");
    auto [it, fresh] = by_id.try_emplace(id);
    if (fresh) {
      order.push_back(id);
      it->second.input_len = input.size();
      it->second.output_len = output.size();
    }
    if (it->second.input_len != input.size() ||
        it->second.output_len != output.size())
      throw std::invalid_argument("strategy file: inconsistent lengths for '" +
                                  id + "'");
    it->second.entries[input] = output;
  }
  std::vector<StrategyTable> out;
  for (const auto& id : order) out.push_back(by_id[id]);
  return out;
}

Implementation make_source_correlated_cheater(
    const std::function<BitString(const BitString&)>& x_knowledge,
    const std::function<Implementation(const BitString& knowledge)>& strategy,
    const BitString& x) {
  Implementation impl = strategy(x_knowledge(x));
  impl.shared_init = "source-correlated (knowledge assigned at init)";
  return impl;
}

Implementation make_replayer_pair(const BitString& anticipated_a_inputs,
                                  const BitString& anticipated_b_inputs) {
  if (anticipated_a_inputs.size() != anticipated_b_inputs.size())
    throw std::invalid_argument("replayer: anticipated input streams must align");
  const std::size_t rounds = anticipated_a_inputs.size();
  BitString a_out(rounds), b_out(rounds);
  for (std::size_t j = 0; j < rounds; ++j) {
    // a = 0, b = x AND y wins round j when the anticipation is right
    b_out.set(j, anticipated_a_inputs.get(j) && anticipated_b_inputs.get(j));
  }
  Implementation impl;
  impl.shared_init = "replayed transcript (anticipated inputs)";
  impl.devices.push_back(std::make_unique<ReplayDevice>("RA", a_out));
  impl.devices.push_back(std::make_unique<ReplayDevice>("RB", b_out));
  return impl;
}

Game chsh_game() {
  Game g;
  g.name = "chsh";
  g.device_subset = {0, 1};
  g.sample_inputs = [](SplitMix64& rng) {
    return std::vector<bool>{rng.next_bit(), rng.next_bit()};
  };
  g.wins = [](const std::vector<bool>& in, const std::vector<bool>& out) {
    return (out[0] != out[1]) == (in[0] && in[1]);
  };
  return g;
}

std::vector<Game> chsh_battery() {
  std::vector<Game> battery{chsh_game()};
  for (std::size_t dev = 0; dev < 2; ++dev) {
    Game g;
    g.name = "balance-" + std::to_string(dev);
    g.device_subset = {dev};
    g.sample_inputs = [](SplitMix64& rng) {
      return std::vector<bool>{rng.next_bit()};
    };
    g.wins = [](const std::vector<bool>&, const std::vector<bool>& out) {
      return !out[0];
    };
    battery.push_back(std::move(g));
  }
  return battery;
}

double play_win_rate(Implementation& impl, const Game& game, std::size_t rounds,
                     std::uint64_t rng_seed) {
  SplitMix64 rng(rng_seed);
  std::size_t wins = 0;
  for (std::size_t r = 0; r < rounds; ++r) {
    const std::vector<bool> in = game.sample_inputs(rng);
    std::vector<bool> out(in.size());
    for (std::size_t k = 0; k < game.device_subset.size(); ++k) {
      BitString ib(1);
      ib.set(0, in[k]);
      out[k] = impl.device(game.device_subset[k]).invoke(ib).get(0);
    }
    if (game.wins(in, out)) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(rounds);
}

NoiseBreakdown noise_distance_breakdown(Implementation& a, Implementation& b,
                                        const std::vector<Game>& battery,
                                        std::uint64_t rng_seed,
                                        std::size_t rounds) {
  if (a.size() != b.size())
    throw std::invalid_argument("noise_distance: device count mismatch");
  NoiseBreakdown out;
  double worst = 0.0;
  SplitMix64 root(rng_seed);
  for (const auto& g : battery) {
    if (g.device_subset.size() > 2)
      throw std::invalid_argument("noise_distance: battery subsets capped at 2");
    for (std::size_t idx : g.device_subset)
      if (idx >= a.size())
        throw std::invalid_argument("noise_distance: game names unknown device");
    // per-game seed keyed by name so a sub-battery sees identical streams
    std::uint64_t name_hash = 1469598103934665603ULL;
    for (unsigned char c : g.name) {
      name_hash ^= c;
      name_hash *= 1099511628211ULL;
    }
    const std::uint64_t seed = root.split(name_hash).seed();
    const double wa = play_win_rate(a, g, rounds, seed);
    const double wb = play_win_rate(b, g, rounds, seed);
    out.game_names.push_back(g.name);
    out.gaps.push_back(std::abs(wa - wb));
    worst = std::max(worst, out.gaps.back());
  }
  out.value = NoiseValue{std::clamp(worst, 0.0, 1.0)};
  return out;
}

NoiseValue noise_distance(Implementation& a, Implementation& b,
                          const std::vector<Game>& battery,
                          std::uint64_t rng_seed, std::size_t rounds) {
  return noise_distance_breakdown(a, b, battery, rng_seed, rounds).value;
}

double deterministic_chsh_win_rate(const StrategyTable& a, const StrategyTable& b) {
  int wins = 0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const bool oa = a.lookup(x ? "1" : "0") == "1";
      const bool ob = b.lookup(y ? "1" : "0") == "1";
      if ((oa != ob) == (x == 1 && y == 1)) ++wins;
    }
  return wins / 4.0;
}

double best_deterministic_chsh_win_rate() {
  double best = 0.0;
  for (int fa = 0; fa < 4; ++fa)
    for (int fb = 0; fb < 4; ++fb) {
      StrategyTable a, b;
      a.entries["0"] = (fa & 1) ? "1" : "0";
      a.entries["1"] = (fa & 2) ? "1" : "0";
      b.entries["0"] = (fb & 1) ? "1" : "0";
      b.entries["1"] = (fb & 2) ? "1" : "0";
      best = std::max(best, deterministic_chsh_win_rate(a, b));
    }
  return best;
}

}  // namespace prext::dev
