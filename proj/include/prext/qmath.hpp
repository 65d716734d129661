// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "prext/matrix.hpp"
#include "prext/rng.hpp"

namespace prext::qmath {

// Validity tolerance for states (hermiticity, trace, eigenvalue floor).
inline constexpr double kStateTol = 1e-9;
// Tolerance for derived equalities (marginal matches, fidelity identities).
inline constexpr double kDerivedTol = 1e-7;
// Total-dimension cap; everything here is dense complex arithmetic.
inline constexpr std::size_t kDimCap = 4096;

// Density operator over an ordered list of labeled subsystems.
// Construction validates hermiticity and trace; positivity is checked
// by eigendecomposition up to dimension 64 (larger states come out of
// operations that preserve positivity, and can be checked on demand
// with validate_psd()).
class DensityOperator {
public:
  DensityOperator(std::vector<std::size_t> dims, std::vector<std::string> labels,
                  Matrix matrix, bool subnormalized = false);

  static DensityOperator pure(std::vector<std::size_t> dims,
                              std::vector<std::string> labels,
                              const std::vector<cplx>& amplitudes,
                              bool subnormalized = false);

  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Matrix& matrix() const { return m_; }
  std::size_t total_dim() const { return m_.rows(); }
  bool subnormalized() const { return subnormalized_; }

  std::size_t label_index(const std::string& label) const;
  std::size_t dim_of(const std::string& label) const;

  // Throws numeric_error if an eigenvalue is below -kStateTol.
  void validate_psd() const;

  DensityOperator tensor(const DensityOperator& other) const;

  // Same state with subsystems permuted into the given label order.
  DensityOperator reorder(const std::vector<std::string>& new_order) const;

private:
  explicit DensityOperator(int);  // uninitialized tag, see trusted_state

  std::vector<std::size_t> dims_;
  std::vector<std::string> labels_;
  Matrix m_;
  bool subnormalized_ = false;

  friend DensityOperator trusted_state(std::vector<std::size_t>,
                                       std::vector<std::string>, Matrix, bool);
};

// Internal factory that skips the positivity scan (for states produced
// by positivity-preserving operations).  Hermiticity/trace still checked.
DensityOperator trusted_state(std::vector<std::size_t> dims,
                              std::vector<std::string> labels, Matrix m,
                              bool subnormalized);

// Classical-quantum state: a probability vector over a classical value
// and one conditional density operator per value.
class CqState {
public:
  CqState(std::vector<double> probs, std::vector<DensityOperator> conditionals);

  std::size_t classical_dim() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  const DensityOperator& conditional(std::size_t x) const { return conds_[x]; }
  const std::vector<DensityOperator>& conditionals() const { return conds_; }

  // Block-diagonal expansion  sum_x p_x |x><x| (x) rho^x.
  DensityOperator expand(const std::string& classical_label = "X") const;

  // sum_x p_x rho^x
  DensityOperator quantum_marginal() const;

private:
  std::vector<double> probs_;
  std::vector<DensityOperator> conds_;
};

// A completely positive trace-preserving map in operator-sum form.
// Kraus operators may be rectangular (input and output spaces differ).
struct KrausChannel {
  std::vector<Matrix> ops;

  std::size_t in_dim() const { return ops.empty() ? 0 : ops.front().cols(); }
  std::size_t out_dim() const { return ops.empty() ? 0 : ops.front().rows(); }
  double completeness_defect() const;  // max |sum K^dag K - id|

  static KrausChannel identity(std::size_t dim);
  static KrausChannel from_unitary(const Matrix& u);
  // Traces out the trailing factor of dimension `traced` from an input
  // of dimension kept*traced.
  static KrausChannel trace_out_tail(std::size_t kept, std::size_t traced);
  // Applies u (on kept*traced) then traces out the trailing factor.
  static KrausChannel unitary_then_trace_tail(const Matrix& u, std::size_t kept,
                                              std::size_t traced);
};

// Classically controlled channel: one CPTP map per control value, all
// acting on the same labeled factor(s) of the conditional states.
class ControlledOperation {
public:
  ControlledOperation(std::size_t control_dim, std::vector<KrausChannel> channels,
                      std::vector<std::string> target_labels,
                      std::vector<std::size_t> out_dims,
                      std::vector<std::string> out_labels);

  std::size_t control_dim() const { return control_dim_; }
  const KrausChannel& channel(std::size_t x) const { return channels_[x]; }
  const std::vector<std::string>& target_labels() const { return target_labels_; }
  const std::vector<std::size_t>& out_dims() const { return out_dims_; }
  const std::vector<std::string>& out_labels() const { return out_labels_; }

private:
  std::size_t control_dim_;
  std::vector<KrausChannel> channels_;
  std::vector<std::string> target_labels_;
  std::vector<std::size_t> out_dims_;
  std::vector<std::string> out_labels_;
};

// ---- operations ----

// Sum of singular values.
double trace_norm(const Matrix& a);

double trace_distance(const DensityOperator& a, const DensityOperator& b);

// F(rho0, rho1) = || sqrt(rho0) sqrt(rho1) ||_tr
double fidelity(const DensityOperator& rho0, const DensityOperator& rho1);

DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::string>& keep);

// Conditional min-entropy for a fully classical joint table p(x,e):
// -log2 sum_e max_x p(x,e).  Rows index x, columns index e.
double cond_min_entropy_cc(const std::vector<std::vector<double>>& joint);

// True iff 2^-lambda id_X (x) sigma - rho_XE has min eigenvalue >= -kStateTol.
bool check_min_entropy_witness(const CqState& rho_xe, double lambda,
                               const DensityOperator& sigma);

// Extension of xi_a to A(x)B with marginal xi_a on A and
// F(rho_ab, result) = F(rho_a, xi_a); rho_a's labels must be a prefix
// of rho_ab's (the A factor), the remainder is B.
DensityOperator uhlmann_extension(const DensityOperator& rho_a,
                                  const DensityOperator& xi_a,
                                  const DensityOperator& rho_ab);

// Applies channel to the labeled factor(s); remaining factors keep
// their order, the channel's output labels are appended at the end.
DensityOperator apply_channel(const DensityOperator& rho,
                              const std::vector<std::string>& target_labels,
                              const KrausChannel& channel,
                              const std::vector<std::size_t>& out_dims,
                              const std::vector<std::string>& out_labels);

CqState apply_controlled(const ControlledOperation& op, const CqState& state);

// Purification of rho on its labels plus a reference factor of equal
// dimension.  The eigenbasis is taken with eigenvalues descending, ties
// broken by index, so purifications are deterministic; eigenvalues in
// (-clamp, 0) are clamped to zero.
std::vector<cplx> purify(const DensityOperator& rho, double clamp = kStateTol);

// ---- seeded random instances (property tests, batteries) ----

std::vector<cplx> random_pure(SplitMix64& rng, std::size_t dim);
DensityOperator random_density(SplitMix64& rng, std::vector<std::size_t> dims,
                               std::vector<std::string> labels,
                               std::size_t rank = 0);
Matrix random_unitary(SplitMix64& rng, std::size_t dim);
KrausChannel random_channel(SplitMix64& rng, std::size_t in_dim,
                            std::size_t out_dim, std::size_t n_kraus);

DensityOperator basis_state(std::size_t dim, std::size_t k,
                            const std::string& label);
DensityOperator maximally_mixed(std::size_t dim, const std::string& label);

}  // namespace prext::qmath
