// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"
#include "prext/bitstring.hpp"
#include "prext/device.hpp"
#include "prext/extractor.hpp"
#include "prext/seeded_pre.hpp"

namespace prext::master {

inline constexpr std::size_t kInstanceCap = 1024;  // 2^d harness cap

struct MasterSpec {
  ext::ExtractorSpec ext;    // n, d, m, k, eps
  pre::SeededPreSpec seeded; // consumes ext.m-bit seeds
  double eta = 0.5;          // reject when the rejecting fraction >= eta

  void validate() const;
  std::size_t instance_count() const { return std::size_t{1} << ext.d(); }
  std::size_t device_budget() const { return instance_count() * 2; }
  std::uint64_t config_hash() const;
};

struct ErrorLedger {
  double eps_ext = 0.0;
  double eps_c = 0.0;
  double eps_s = 0.0;
  double eta = 0.0;
  double completeness_bound = 0.0;  // (eps_c + eps_ext) / eta
  double soundness_bound = 0.0;     // eps_s + 2 sqrt(eps_ext) + eta

  nlohmann::json to_json() const;
};

ErrorLedger error_bounds(double eps_ext, double eps_c, double eps_s, double eta);

struct InstanceResult {
  bool accept = false;
  double win_rate = 0.0;
};

struct MasterOutcome {
  bool accept = false;
  BitString output;
  std::vector<InstanceResult> instances;
  double reject_fraction = 0.0;
  std::uint64_t config_hash = 0;
};

// Bitwise XOR over the accepted blocks; rejected positions contribute
// the zero string.
BitString xor_combine(const std::vector<BitString>& blocks,
                      const std::vector<bool>& accept_mask);

// Exposed threshold rule: reject iff (#rejects / #instances) >= eta.
bool threshold_accepts(std::size_t rejects, std::size_t instances, double eta);

// Runs Ext under every seed value, feeds each block to its own seeded
// protocol instance on its own (disjoint) implementation, applies the
// eta-threshold rule and XORs the accepted outputs.  Instances run
// concurrently (worker count from PREXT_WORKERS, default hardware) and
// reduce deterministically in seed order.
MasterOutcome run_master(const MasterSpec& spec, const BitString& x,
                         std::vector<dev::Implementation>& impls,
                         std::uint64_t rng_seed);

// instance index, per-instance seed -> fresh implementation
using Gallery = std::function<dev::Implementation(std::size_t instance,
                                                  std::uint64_t seed)>;
// additionally receives the sampled source value (adversaries
// correlated with X via make_source_correlated_cheater)
using AdversaryGallery = std::function<dev::Implementation(
    const BitString& x, std::size_t instance, std::uint64_t seed)>;

std::vector<dev::Implementation> build_implementations(const MasterSpec& spec,
                                                       const Gallery& gallery,
                                                       std::uint64_t rng_seed);

struct SoundnessProbeReport {
  double accept_rate = 0.0;
  // sum_z |p(accept, z) - p(accept) 2^-l| (joint with x in exact mode):
  // trace distance of the accept-projected output to uniform-given-
  // accept, weighted by the accept probability.
  double weighted_distance = 0.0;
  double soundness_bound = 0.0;
  bool exceeded = false;  // counterexample artifact for inspection
  bool exact = false;
  std::size_t trials = 0;

  nlohmann::json to_json() const;
};

// exact=true enumerates the source support and requires deterministic
// adversaries (one transcript per x); otherwise Monte Carlo sampling.
SoundnessProbeReport soundness_probe(const MasterSpec& spec,
                                     const AdversaryGallery& adversary,
                                     const ext::ClassicalSource& source,
                                     std::size_t trials, std::uint64_t rng_seed,
                                     double eps_s, bool exact);

}  // namespace prext::master
