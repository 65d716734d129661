// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prext/bitstring.hpp"
#include "prext/device.hpp"
#include "prext/extractor.hpp"

namespace prext::pre {

// Toy seeded randomness-expansion protocol: every round is a CHSH game
// round whose inputs are consumed from the seed, acceptance is an
// empirical win-rate threshold, and accepted device outputs are hashed
// by a strong extractor whose seed is a disjoint slice of the input
// seed.  Its soundness is checked empirically, not proven, and the
// seed consumption is linear in the round count (a spot-check-free
// simplification; production expansion protocols get by with far
// shorter seeds).
struct SeededPreSpec {
  std::size_t seed_len = 0;             // m
  std::size_t rounds = 0;               // R
  std::size_t game_bits_per_round = 2;  // one input bit per device
  double win_threshold = 0.0;           // w*
  std::size_t output_len = 0;           // l
  ext::ExtractorSpec post_ext;          // n = 2R, m = output_len

  void validate() const;
  std::uint64_t config_hash() const;

  // Threshold w* = cos^2(pi/8) - delta; the post-extraction hash uses a
  // Trevisan instance over the concatenated device outputs.
  static SeededPreSpec standard(std::size_t rounds, double delta,
                                std::size_t output_len, std::size_t hash_t,
                                std::size_t hash_d);
};

struct Transcript {
  BitString inputs_a, inputs_b, outputs_a, outputs_b, wins;
};

struct RunStats {
  double win_rate = 0.0;
  std::size_t rounds = 0;
  std::size_t wins = 0;
  bool degenerate = false;  // R = 0 vacuous accept
  // Noise level a win rate this low would correspond to for an honest
  // pair; advisory only.
  double noise_estimate = 0.0;
};

struct ProtocolOutcome {
  bool accept = false;
  BitString output;  // length l when accepted, empty otherwise
  Transcript transcript;
  RunStats stats;
  std::uint64_t config_hash = 0;

  nlohmann::json to_json() const;
};

ProtocolOutcome run_seeded_pre(const SeededPreSpec& spec, const BitString& seed,
                               dev::Implementation& impl);

using DeviceFactory = std::function<dev::Implementation(std::uint64_t seed)>;

struct CompletenessEstimate {
  double rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 1.0;
  std::size_t trials = 0;
  std::size_t accepts = 0;
};

// Monte Carlo accept probability with a fresh uniform seed and a fresh
// implementation per trial; reports the Wilson 95% interval.
CompletenessEstimate completeness_estimate(const SeededPreSpec& spec,
                                           const DeviceFactory& factory,
                                           std::size_t trials,
                                           std::uint64_t rng_seed);

// Alternates two seeded protocols, feeding each accept's output (sliced
// to the partner's seed length) as the next seed.  Devices persist
// across iterations; any intermediate reject aborts with A = 0.
ProtocolOutcome cross_feed(const SeededPreSpec& spec_a,
                           const SeededPreSpec& spec_b,
                           dev::Implementation& impl_a,
                           dev::Implementation& impl_b,
                           const BitString& initial_seed, std::size_t iterations,
                           std::vector<RunStats>* per_iteration = nullptr);

}  // namespace prext::pre
