// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "prext/qmath.hpp"

namespace prext::eq {

// Labels used throughout: classical source "X", device factor "D",
// adversary factor "E", purifying register "Ep".

// cq state over X (x) D (x) E (plus "Ep" on constructed baselines),
// with its uniformity flags verified numerically at construction.
struct PhysicalSystemState {
  qmath::CqState state;
  std::size_t x_dim = 0;
  bool device_uniform = false;  // rho_XD = U_X (x) rho_D within 1e-7
  bool global_uniform = false;  // all conditionals identical within 1e-7
};

// Uniform classical value with the same joint conditional phi for
// every x; globally uniform by construction.
PhysicalSystemState make_global_uniform(std::size_t x_bits,
                                        const qmath::DensityOperator& phi_de);

// Uniform classical value with per-x conditionals on D (x) E sharing a
// common D marginal; rejects (naming the offending x) otherwise.
PhysicalSystemState make_device_uniform(
    std::size_t x_bits, const std::vector<qmath::DensityOperator>& conditionals);

struct Decomposition {
  PhysicalSystemState baseline;      // global-uniform, conditionals on D,E,Ep
  qmath::ControlledOperation attack; // X-controlled unitary-then-trace on E,Ep
};

// Writes a device-uniform target as an X-controlled attack applied to
// a global-uniform baseline: purify each conditional on Ep (dimension
// dim D * dim E), take the x = 0 purification as the shared baseline
// state, and rotate it onto the others with the Uhlmann unitaries on
// E (x) Ep determined by the common Schmidt structure over D.
Decomposition decompose_via_uhlmann(const PhysicalSystemState& target);

// Trace distance between the attacked baseline and the target
// (block-diagonal expansion over x).
double reconstruction_distance(const Decomposition& dec,
                               const PhysicalSystemState& target);

// X-controlled two-outcome decision: accept element per x (POVM on D).
struct DecisionChannel {
  std::vector<Matrix> accept_povm;  // one dD x dD PSD element per x

  void validate(std::size_t x_dim, std::size_t d_dim) const;
};

DecisionChannel random_decision_channel(SplitMix64& rng, std::size_t x_dim,
                                        std::size_t d_dim);

double acceptance_probability(const DecisionChannel& channel,
                              const PhysicalSystemState& system);

struct InvarianceReport {
  double p_accept_baseline = 0.0;
  double p_accept_target = 0.0;
  double accept_diff = 0.0;
  double commute_defect = 0.0;  // || Phi(M(rho)) - M(Phi(rho)) ||_tr
};

// Checks that the attack cannot change the acceptance statistics: the
// acceptance probability depends only on the X D reduction, and the
// decision instrument commutes with the attack in trace norm.
InvarianceReport acceptance_invariance_check(const DecisionChannel& channel,
                                             const Decomposition& dec,
                                             const PhysicalSystemState& target);

struct BatteryResult {
  std::string case_id;
  std::size_t x_dim = 0, d_dim = 0, e_dim = 0;
  double reconstruction_err = 0.0;
  double accept_diff = 0.0;
  double commute_defect = 0.0;
  bool pass = false;
};

// Seeded random device-uniform targets (common D marginal built with
// uhlmann_extension) decomposed and checked end to end.
std::vector<BatteryResult> run_battery(std::uint64_t seed, std::size_t cases,
                                       double reconstruct_tol = 1e-6,
                                       double accept_tol = 1e-9);

nlohmann::json battery_json(const std::vector<BatteryResult>& results);

}  // namespace prext::eq
