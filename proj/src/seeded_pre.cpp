// SPDX-License-Identifier: Apache-2.0
#include "prext/seeded_pre.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prext::pre {

void SeededPreSpec::validate() const {
  if (game_bits_per_round != 2)
    throw std::invalid_argument("seeded pre: two game bits per round expected");
  if (seed_len < 2 * rounds + post_ext.d())
    throw std::invalid_argument(
        "seeded pre: seed must cover round inputs plus the hashing seed");
  if (!(win_threshold > dev::kChshClassical && win_threshold < dev::kChshQuantum))
    throw std::invalid_argument(
        "seeded pre: threshold must separate classical 0.75 from quantum optimum");
  if (output_len == 0) throw std::invalid_argument("seeded pre: output_len >= 1");
  if (rounds == 0) return;  // degenerate spec: the hash is never consulted
  if (post_ext.n() != 2 * rounds)
    throw std::invalid_argument("seeded pre: hash input must be 2R device bits");
  if (post_ext.m() != output_len)
    throw std::invalid_argument("seeded pre: hash output must be output_len");
}

std::uint64_t SeededPreSpec::config_hash() const {
  BitString probe;
  for (std::uint64_t v : {static_cast<std::uint64_t>(seed_len),
                          static_cast<std::uint64_t>(rounds),
                          static_cast<std::uint64_t>(output_len),
                          static_cast<std::uint64_t>(post_ext.d()),
                          static_cast<std::uint64_t>(win_threshold * 1e12)})
    probe.append(BitString::from_value(v & 0xFFFFFFFFFFFFULL, 48));
  return probe.fnv1a();
}

SeededPreSpec SeededPreSpec::standard(std::size_t rounds, double delta,
                                      std::size_t output_len, std::size_t hash_t,
                                      std::size_t hash_d) {
  SeededPreSpec s;
  s.rounds = rounds;
  s.win_threshold = dev::kChshQuantum - delta;
  s.output_len = output_len;
  s.post_ext = ext::ExtractorSpec::trevisan(2 * rounds, hash_d, output_len,
                                            /*k=*/rounds, /*eps=*/0.25, hash_t);
  s.seed_len = 2 * rounds + hash_d;
  s.validate();
  return s;
}

nlohmann::json ProtocolOutcome::to_json() const {
  return nlohmann::json{{"decision", accept ? 1 : 0},
                        {"output_hex", output.to_hex()},
                        {"win_rate", stats.win_rate},
                        {"rounds", stats.rounds},
                        {"degenerate", stats.degenerate},
                        {"config_hash", config_hash}};
}

ProtocolOutcome run_seeded_pre(const SeededPreSpec& spec, const BitString& seed,
                               dev::Implementation& impl) {
  spec.validate();
  if (seed.size() != spec.seed_len)
    throw std::invalid_argument("run_seeded_pre: seed length mismatch");
  if (impl.size() != 2)
    throw std::invalid_argument("run_seeded_pre: exactly two devices expected");

  ProtocolOutcome out;
  out.config_hash = spec.config_hash();
  Transcript& tr = out.transcript;
  tr.inputs_a = BitString(spec.rounds);
  tr.inputs_b = BitString(spec.rounds);
  tr.outputs_a = BitString(spec.rounds);
  tr.outputs_b = BitString(spec.rounds);
  tr.wins = BitString(spec.rounds);

  std::size_t wins = 0;
  for (std::size_t j = 0; j < spec.rounds; ++j) {
    const bool x = seed.get(2 * j);
    const bool y = seed.get(2 * j + 1);
    BitString xin(1), yin(1);
    xin.set(0, x);
    yin.set(0, y);
    const bool a = impl.device(0).invoke(xin).get(0);
    const bool b = impl.device(1).invoke(yin).get(0);
    const bool win = ((a != b) == (x && y));
    tr.inputs_a.set(j, x);
    tr.inputs_b.set(j, y);
    tr.outputs_a.set(j, a);
    tr.outputs_b.set(j, b);
    tr.wins.set(j, win);
    if (win) ++wins;
  }

  out.stats.rounds = spec.rounds;
  out.stats.wins = wins;
  if (spec.rounds == 0) {
    // Empty-product convention: no evidence against the devices, accept.
    out.stats.degenerate = true;
    out.stats.win_rate = 1.0;
    out.stats.noise_estimate = 0.0;
    out.accept = true;
  } else {
    out.stats.win_rate =
        static_cast<double>(wins) / static_cast<double>(spec.rounds);
    out.stats.noise_estimate =
        std::clamp((dev::kChshQuantum - out.stats.win_rate) /
                       (dev::kChshQuantum - 0.5),
                   0.0, 1.0);
    out.accept = out.stats.win_rate >= spec.win_threshold;
  }

  if (out.accept) {
    if (spec.rounds == 0) {
      // hash of the empty transcript, by convention the zero string
      out.output = BitString(spec.output_len);
    } else {
      BitString device_bits(2 * spec.rounds);
      for (std::size_t j = 0; j < spec.rounds; ++j) {
        device_bits.set(2 * j, tr.outputs_a.get(j));
        device_bits.set(2 * j + 1, tr.outputs_b.get(j));
      }
      const BitString hash_seed =
          seed.slice(2 * spec.rounds, spec.post_ext.d());
      out.output = ext::trevisan_ext(spec.post_ext, device_bits, hash_seed);
    }
  }
  return out;
}

CompletenessEstimate completeness_estimate(const SeededPreSpec& spec,
                                           const DeviceFactory& factory,
                                           std::size_t trials,
                                           std::uint64_t rng_seed) {
  if (trials < 1) throw std::invalid_argument("completeness_estimate: trials >= 1");
  SplitMix64 root(rng_seed);
  std::size_t accepts = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    SplitMix64 trial = root.split(t);
    const BitString seed = BitString::random(trial, spec.seed_len);
    dev::Implementation impl = factory(trial.split(1).seed());
    if (run_seeded_pre(spec, seed, impl).accept) ++accepts;
  }
  CompletenessEstimate est;
  est.trials = trials;
  est.accepts = accepts;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(accepts) / n;
  est.rate = p;
  const double z = 1.959963984540054;  // 95%
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  est.wilson_low = std::max(0.0, center - half);
  est.wilson_high = std::min(1.0, center + half);
  return est;
}

ProtocolOutcome cross_feed(const SeededPreSpec& spec_a,
                           const SeededPreSpec& spec_b,
                           dev::Implementation& impl_a,
                           dev::Implementation& impl_b,
                           const BitString& initial_seed, std::size_t iterations,
                           std::vector<RunStats>* per_iteration) {
  spec_a.validate();
  spec_b.validate();
  if (spec_a.output_len < spec_b.seed_len || spec_b.output_len < spec_a.seed_len)
    throw std::invalid_argument(
        "cross_feed: each output must cover the partner's seed");
  if (initial_seed.size() != spec_a.seed_len)
    throw std::invalid_argument("cross_feed: initial seed length mismatch");
  if (iterations < 1) throw std::invalid_argument("cross_feed: iterations >= 1");

  BitString seed = initial_seed;
  ProtocolOutcome last;
  for (std::size_t it = 0; it < iterations; ++it) {
    const bool use_a = (it % 2 == 0);
    const SeededPreSpec& spec = use_a ? spec_a : spec_b;
    dev::Implementation& impl = use_a ? impl_a : impl_b;
    last = run_seeded_pre(spec, seed, impl);
    if (per_iteration != nullptr) per_iteration->push_back(last.stats);
    if (!last.accept) {
      last.output = BitString();
      return last;
    }
    if (it + 1 < iterations) {
      const SeededPreSpec& next = use_a ? spec_b : spec_a;
      seed = last.output.slice(0, next.seed_len);
    }
  }
  return last;
}

}  // namespace prext::pre
