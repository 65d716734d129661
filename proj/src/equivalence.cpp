// SPDX-License-Identifier: Apache-2.0
#include "prext/equivalence.hpp"

#include <cmath>
#include <stdexcept>

#include "prext/errors.hpp"

namespace prext::eq {

using qmath::CqState;
using qmath::DensityOperator;
using qmath::KrausChannel;

namespace {

DensityOperator d_marginal(const DensityOperator& cond) {
  return qmath::partial_trace(cond, {"D"});
}

bool uniform_flags(const CqState& st, double tol, bool* device_uniform) {
  // device-uniform: common D marginal (probs are uniform by construction)
  const std::size_t dx = st.classical_dim();
  DensityOperator avg_d = d_marginal(st.quantum_marginal());
  bool dev_ok = true;
  for (std::size_t x = 0; x < dx && dev_ok; ++x)
    if ((d_marginal(st.conditional(x)).matrix() - avg_d.matrix()).max_abs() > tol)
      dev_ok = false;
  *device_uniform = dev_ok;
  // global-uniform: identical conditionals
  const DensityOperator avg = st.quantum_marginal();
  for (std::size_t x = 0; x < dx; ++x)
    if ((st.conditional(x).matrix() - avg.matrix()).max_abs() > tol) return false;
  return true;
}

PhysicalSystemState finish(std::vector<double> probs,
                           std::vector<DensityOperator> conds) {
  PhysicalSystemState sys{CqState(std::move(probs), std::move(conds)), 0, false,
                          false};
  sys.x_dim = sys.state.classical_dim();
  sys.global_uniform = uniform_flags(sys.state, qmath::kDerivedTol,
                                     &sys.device_uniform);
  return sys;
}

}  // namespace

PhysicalSystemState make_global_uniform(std::size_t x_bits,
                                        const qmath::DensityOperator& phi_de) {
  const std::size_t dx = std::size_t{1} << x_bits;
  if (dx * phi_de.total_dim() > qmath::kDimCap)
    throw resource_limit_error("make_global_uniform: dimension cap exceeded");
  std::vector<double> probs(dx, 1.0 / static_cast<double>(dx));
  std::vector<DensityOperator> conds(dx, phi_de);
  return finish(std::move(probs), std::move(conds));
}

PhysicalSystemState make_device_uniform(
    std::size_t x_bits, const std::vector<qmath::DensityOperator>& conditionals) {
  const std::size_t dx = std::size_t{1} << x_bits;
  if (conditionals.size() != dx)
    throw std::invalid_argument("make_device_uniform: need one conditional per x");
  if (dx * conditionals[0].total_dim() > qmath::kDimCap)
    throw resource_limit_error("make_device_uniform: dimension cap exceeded");
  const DensityOperator ref = d_marginal(conditionals[0]);
  for (std::size_t x = 1; x < dx; ++x) {
    const double dev =
        (d_marginal(conditionals[x]).matrix() - ref.matrix()).max_abs();
    if (dev > qmath::kDerivedTol)
      throw std::invalid_argument(
          "make_device_uniform: conditional " + std::to_string(x) +
          " has a mismatched D marginal (deviation " + std::to_string(dev) + ")");
  }
  std::vector<double> probs(dx, 1.0 / static_cast<double>(dx));
  return finish(std::move(probs), conditionals);
}

Decomposition decompose_via_uhlmann(const PhysicalSystemState& target) {
  if (!target.device_uniform)
    throw std::invalid_argument("decompose_via_uhlmann: target not device-uniform");
  const CqState& st = target.state;
  const DensityOperator& c0 = st.conditional(0);
  const std::size_t dD = c0.dim_of("D");
  const std::size_t dE = c0.dim_of("E");
  const std::size_t dC = dD * dE;  // purifying register, same dimension as D E
  const std::size_t dEC = dE * dC;

  // One eigenbasis of the common D marginal fixes the Schmidt vectors
  // of every purification, so the Uhlmann unitaries are deterministic.
  const DensityOperator rho_d = d_marginal(st.quantum_marginal());
  EigenSystem de = hermitian_eigen(rho_d.matrix());

  // Per x: purification amplitudes reshaped to D x (E C).
  auto purified_matrix = [&](std::size_t x) {
    const std::vector<cplx> psi = qmath::purify(st.conditional(x));
    Matrix m(dD, dEC);
    for (std::size_t d = 0; d < dD; ++d)
      for (std::size_t e = 0; e < dE; ++e)
        for (std::size_t c = 0; c < dC; ++c)
          m(d, e * dC + c) = psi[(d * dE + e) * dC + c];
    return m;
  };

  // Normalized Schmidt partners of the D eigenvectors.
  auto schmidt_basis = [&](const Matrix& m) {
    Matrix cols(dEC, dD);
    std::size_t have = 0;
    for (std::size_t k = 0; k < dD; ++k) {
      const double lam = de.values[k];
      if (lam <= 1e-12) continue;
      const double rt = std::sqrt(lam);
      for (std::size_t ec = 0; ec < dEC; ++ec) {
        cplx acc = 0.0;
        for (std::size_t d = 0; d < dD; ++d)
          acc += std::conj(de.vectors(d, k)) * m(d, ec);
        cols(ec, have) = acc / rt;
      }
      ++have;
    }
    Matrix lead(dEC, have);
    for (std::size_t k = 0; k < have; ++k)
      for (std::size_t i = 0; i < dEC; ++i) lead(i, k) = cols(i, k);
    return complete_orthonormal(lead, dEC);
  };

  const Matrix m0 = purified_matrix(0);
  const Matrix b0 = schmidt_basis(m0);

  std::vector<KrausChannel> channels;
  channels.reserve(target.x_dim);
  for (std::size_t x = 0; x < target.x_dim; ++x) {
    const Matrix bx = schmidt_basis(purified_matrix(x));
    const Matrix w = bx * b0.adjoint();  // maps baseline Schmidt vectors to x's
    channels.push_back(KrausChannel::unitary_then_trace_tail(w, dE, dC));
  }

  // Baseline conditional: the x = 0 purification as a pure state on D,E,Ep.
  std::vector<cplx> phi0(dD * dEC);
  for (std::size_t d = 0; d < dD; ++d)
    for (std::size_t ec = 0; ec < dEC; ++ec) phi0[d * dEC + ec] = m0(d, ec);
  DensityOperator baseline_cond =
      DensityOperator::pure({dD, dE, dC}, {"D", "E", "Ep"}, phi0);

  Decomposition dec{
      make_global_uniform(static_cast<std::size_t>(std::log2(target.x_dim)),
                          baseline_cond),
      qmath::ControlledOperation(target.x_dim, std::move(channels), {"E", "Ep"},
                                 {dE}, {"E"})};
  return dec;
}

double reconstruction_distance(const Decomposition& dec,
                               const PhysicalSystemState& target) {
  const CqState attacked = qmath::apply_controlled(dec.attack, dec.baseline.state);
  // apply_channel appends the channel output, so conditionals come back
  // as (D, E) already in target order
  return qmath::trace_distance(attacked.expand(), target.state.expand());
}

void DecisionChannel::validate(std::size_t x_dim, std::size_t d_dim) const {
  if (accept_povm.size() != x_dim)
    throw std::invalid_argument("decision channel: need one POVM element per x");
  for (const auto& f : accept_povm) {
    if (f.rows() != d_dim || !f.square())
      throw std::invalid_argument("decision channel: element size mismatch");
    if (f.hermiticity_defect() > qmath::kStateTol)
      throw std::invalid_argument("decision channel: element not Hermitian");
    std::vector<double> lam = hermitian_eigenvalues(f);
    if (lam.back() < -qmath::kStateTol || lam.front() > 1.0 + qmath::kStateTol)
      throw std::invalid_argument("decision channel: element outside [0, id]");
  }
}

DecisionChannel random_decision_channel(SplitMix64& rng, std::size_t x_dim,
                                        std::size_t d_dim) {
  DecisionChannel ch;
  for (std::size_t x = 0; x < x_dim; ++x) {
    // F = U diag(r_k) U^dagger with r_k in [0,1]
    const Matrix u = qmath::random_unitary(rng, d_dim);
    std::vector<double> r(d_dim);
    for (auto& v : r) v = rng.next_double();
    Matrix f(d_dim, d_dim);
    for (std::size_t i = 0; i < d_dim; ++i)
      for (std::size_t j = 0; j < d_dim; ++j) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < d_dim; ++k)
          acc += u(i, k) * r[k] * std::conj(u(j, k));
        f(i, j) = acc;
      }
    ch.accept_povm.push_back(std::move(f));
  }
  return ch;
}

double acceptance_probability(const DecisionChannel& channel,
                              const PhysicalSystemState& system) {
  const CqState& st = system.state;
  channel.validate(st.classical_dim(), st.conditional(0).dim_of("D"));
  double p = 0.0;
  for (std::size_t x = 0; x < st.classical_dim(); ++x) {
    const DensityOperator rd = d_marginal(st.conditional(x));
    p += st.probs()[x] * (channel.accept_povm[x] * rd.matrix()).trace().real();
  }
  return p;
}

namespace {

// Kraus pair recording the decision outcome in a fresh classical factor
// "A" ahead of D: K_a = |a> (x) sqrt(F_a).
KrausChannel decision_instrument(const Matrix& accept_element) {
  const std::size_t dD = accept_element.rows();
  const Matrix f1 = accept_element;
  Matrix f0 = Matrix::identity(dD) - f1;
  const Matrix s1 = psd_sqrt(f1, qmath::kStateTol);
  const Matrix s0 = psd_sqrt(f0, qmath::kStateTol);
  KrausChannel ch;
  for (int a = 0; a < 2; ++a) {
    Matrix k(2 * dD, dD);
    const Matrix& s = (a == 1) ? s1 : s0;
    for (std::size_t i = 0; i < dD; ++i)
      for (std::size_t j = 0; j < dD; ++j) k(a * dD + i, j) = s(i, j);
    ch.ops.push_back(std::move(k));
  }
  return ch;
}

}  // namespace

InvarianceReport acceptance_invariance_check(const DecisionChannel& channel,
                                             const Decomposition& dec,
                                             const PhysicalSystemState& target) {
  InvarianceReport rep;
  rep.p_accept_baseline = acceptance_probability(channel, dec.baseline);
  rep.p_accept_target = acceptance_probability(channel, target);
  rep.accept_diff = std::abs(rep.p_accept_baseline - rep.p_accept_target);

  // Commutation on the baseline: decide-then-attack vs attack-then-decide.
  const CqState& base = dec.baseline.state;
  const std::size_t dD = base.conditional(0).dim_of("D");
  std::vector<DensityOperator> path1, path2;
  for (std::size_t x = 0; x < base.classical_dim(); ++x) {
    const KrausChannel instr = decision_instrument(channel.accept_povm[x]);
    // decision first: (D,E,Ep) -> (E,Ep,A,D), then attack -> (A,D,E)
    DensityOperator decided = qmath::apply_channel(
        base.conditional(x), {"D"}, instr, {2, dD}, {"A", "D"});
    DensityOperator p1 = qmath::apply_channel(
        decided, dec.attack.target_labels(), dec.attack.channel(x),
        dec.attack.out_dims(), dec.attack.out_labels());
    // attack first: (D,E,Ep) -> (D,E), then decision -> (E,A,D)
    DensityOperator attacked = qmath::apply_channel(
        base.conditional(x), dec.attack.target_labels(), dec.attack.channel(x),
        dec.attack.out_dims(), dec.attack.out_labels());
    DensityOperator p2 =
        qmath::apply_channel(attacked, {"D"}, instr, {2, dD}, {"A", "D"});
    path1.push_back(p1.reorder({"A", "D", "E"}));
    path2.push_back(p2.reorder({"A", "D", "E"}));
  }
  const CqState cq1(base.probs(), std::move(path1));
  const CqState cq2(base.probs(), std::move(path2));
  rep.commute_defect = qmath::trace_distance(cq1.expand(), cq2.expand());
  return rep;
}

std::vector<BatteryResult> run_battery(std::uint64_t seed, std::size_t cases,
                                       double reconstruct_tol, double accept_tol) {
  std::vector<BatteryResult> out;
  const std::size_t x_bits_opts[] = {1, 2};
  const std::size_t dims_opts[] = {2, 3, 4};
  SplitMix64 root(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    SplitMix64 rng = root.split(c);
    const std::size_t x_bits = x_bits_opts[c % 2];
    const std::size_t dD = dims_opts[c % 3];
    const std::size_t dE = dims_opts[(c / 3) % 3];

    // Common D marginal; per-x conditionals are random extensions of it.
    const DensityOperator rho_d = qmath::random_density(rng, {dD}, {"D"});
    std::vector<DensityOperator> conds;
    for (std::size_t x = 0; x < (std::size_t{1} << x_bits); ++x) {
      const DensityOperator raw = qmath::random_density(rng, {dD, dE}, {"D", "E"});
      const DensityOperator raw_d = qmath::partial_trace(raw, {"D"});
      conds.push_back(qmath::uhlmann_extension(raw_d, rho_d, raw));
    }
    const PhysicalSystemState target = make_device_uniform(x_bits, conds);
    const Decomposition dec = decompose_via_uhlmann(target);
    const DecisionChannel channel =
        random_decision_channel(rng, target.x_dim, dD);
    const InvarianceReport inv = acceptance_invariance_check(channel, dec, target);

    BatteryResult res;
    res.case_id = "case-" + std::to_string(c);
    res.x_dim = target.x_dim;
    res.d_dim = dD;
    res.e_dim = dE;
    res.reconstruction_err = reconstruction_distance(dec, target);
    res.accept_diff = inv.accept_diff;
    res.commute_defect = inv.commute_defect;
    res.pass = res.reconstruction_err <= reconstruct_tol &&
               res.accept_diff <= accept_tol && res.commute_defect <= accept_tol;
    out.push_back(std::move(res));
  }
  return out;
}

nlohmann::json battery_json(const std::vector<BatteryResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results)
    arr.push_back({{"case_id", r.case_id},
                   {"dims", {r.x_dim, r.d_dim, r.e_dim}},
                   {"reconstruction_err", r.reconstruction_err},
                   {"accept_diff", r.accept_diff},
                   {"commute_defect", r.commute_defect},
                   {"pass", r.pass}});
  return arr;
}

}  // namespace prext::eq
