// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "prext/bitstring.hpp"
#include "prext/rng.hpp"

namespace prext::dev {

// cos^2(pi/8), the optimal quantum CHSH win probability.
inline constexpr double kChshQuantum = 0.8535533905932737;
inline constexpr double kChshClassical = 0.75;

// One untrusted device: classical input/output interface over opaque
// private state.  respond() has access to this device's state only;
// devices of one implementation may share correlation objects that
// were assigned at initialization (pre-shared entanglement or common
// randomness), never each other's inputs.
class Device {
public:
  Device(std::string id, std::size_t m_per_round)
      : id_(std::move(id)), m_per_round_(m_per_round) {}
  virtual ~Device() = default;

  const std::string& id() const { return id_; }
  std::size_t m_per_round() const { return m_per_round_; }

  BitString invoke(const BitString& input);

protected:
  virtual BitString respond(const BitString& input) = 0;

private:
  std::string id_;
  std::size_t m_per_round_;
};

struct Implementation {
  std::vector<std::unique_ptr<Device>> devices;
  std::string shared_init;  // description of the pre-shared correlation

  std::size_t size() const { return devices.size(); }
  Device& device(std::size_t i) { return *devices.at(i); }
};

// Honest CHSH pair.  Each round the devices measure a fresh shared EPR
// pair with the canonical optimal strategy; outcome statistics are
// sampled jointly (marginals stay uniform, so nothing signals).  With
// probability noise_eta per round the pair is depolarized and each
// device's output is replaced by an independent fair coin, which drops
// that round's win probability to 1/2:
//   W(eta) = (1 - eta) cos^2(pi/8) + eta/2.
Implementation make_chsh_pair(double noise_eta, std::uint64_t rng_seed);

// Total lookup tables, one per device: input bits -> output bits.
struct StrategyTable {
  std::size_t input_len = 1;
  std::size_t output_len = 1;
  std::map<std::string, std::string> entries;  // "01" -> "1"

  const std::string& lookup(const std::string& input) const;
};

Implementation make_deterministic(const std::vector<StrategyTable>& strategies);

// `device-id input-bits output-bits` per line; '#' starts a comment.
std::vector<StrategyTable> load_strategy_tables(std::istream& in);

// Devices constructed with knowledge(x) available at initialization
// (models pre-protocol correlation with the source; nothing else of x
// ever reaches them).
Implementation make_source_correlated_cheater(
    const std::function<BitString(const BitString&)>& x_knowledge,
    const std::function<Implementation(const BitString& knowledge)>& strategy,
    const BitString& x);

// Pair that ignores inputs and replays fixed output sequences chosen
// to win every round against the anticipated input stream (a_j = 0,
// b_j = x_j AND y_j).  Used as the transcript-replaying adversary.
Implementation make_replayer_pair(const BitString& anticipated_a_inputs,
                                  const BitString& anticipated_b_inputs);

// ---- games and the noise premetric ----

struct Game {
  std::string name;
  std::vector<std::size_t> device_subset;  // indices into an implementation
  // one single-bit input per device in the subset
  std::function<std::vector<bool>(SplitMix64&)> sample_inputs;
  std::function<bool(const std::vector<bool>& in, const std::vector<bool>& out)> wins;
};

// The declared battery: the CHSH game on devices {0,1} plus per-device
// output-balance probes.
std::vector<Game> chsh_battery();

Game chsh_game();

double play_win_rate(Implementation& impl, const Game& game, std::size_t rounds,
                     std::uint64_t rng_seed);

struct NoiseValue {
  double value = 0.0;
};

struct NoiseBreakdown {
  std::vector<std::string> game_names;
  std::vector<double> gaps;  // |win-rate difference| per battery game
  NoiseValue value;          // max gap, clamped to [0,1]
};

// Premetric: max over battery games (each naming its device subset, all
// of size <= 2) of the absolute empirical win-rate difference.  The
// default sample count of 2e5 rounds per game estimates each gap to
// about +-0.005.  Identical implementations under identical seeds give
// exactly 0.  Restricting to a device subset means dropping the games
// that touch other devices, so the restricted value is a max over fewer
// of the same gaps.
NoiseBreakdown noise_distance_breakdown(Implementation& a, Implementation& b,
                                        const std::vector<Game>& battery,
                                        std::uint64_t rng_seed,
                                        std::size_t rounds = 200000);

NoiseValue noise_distance(Implementation& a, Implementation& b,
                          const std::vector<Game>& battery,
                          std::uint64_t rng_seed,
                          std::size_t rounds = 200000);

// Exact win rate of a deterministic strategy pair under uniform inputs,
// and the exhaustive maximum over all 16 single-bit strategy pairs.
double deterministic_chsh_win_rate(const StrategyTable& a, const StrategyTable& b);
double best_deterministic_chsh_win_rate();

}  // namespace prext::dev
