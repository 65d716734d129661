// SPDX-License-Identifier: Apache-2.0
#include "prext/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "prext/errors.hpp"

namespace prext::qmath {

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t p = 1;
  for (auto d : dims) p *= d;
  return p;
}

void check_shape(const std::vector<std::size_t>& dims,
                 const std::vector<std::string>& labels, const Matrix& m) {
  if (dims.empty()) throw std::invalid_argument("state: no subsystems");
  if (dims.size() != labels.size())
    throw std::invalid_argument("state: dims/labels length mismatch");
  for (auto d : dims)
    if (d < 1) throw std::invalid_argument("state: subsystem dimension < 1");
  std::set<std::string> uniq(labels.begin(), labels.end());
  if (uniq.size() != labels.size())
    throw std::invalid_argument("state: duplicate subsystem label");
  const std::size_t total = product(dims);
  if (total > kDimCap) throw resource_limit_error("state: dimension cap exceeded");
  if (m.rows() != total || m.cols() != total)
    throw std::invalid_argument("state: matrix size does not match dims");
  if (!m.finite()) throw std::invalid_argument("state: non-finite entries");
}

void check_hermitian_trace(const Matrix& m, bool subnormalized) {
  if (m.hermiticity_defect() > kStateTol)
    throw std::invalid_argument("state: matrix is not Hermitian");
  const double tr = m.trace().real();
  if (subnormalized) {
    if (tr < -kStateTol || tr > 1.0 + kStateTol)
      throw std::invalid_argument("state: subnormalized trace outside [0,1]");
  } else {
    if (std::abs(tr - 1.0) > kStateTol)
      throw std::invalid_argument("state: trace is not 1");
  }
}

// digit strides for row-major multi-index
std::vector<std::size_t> strides_of(const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * dims[k];
  return s;
}

double gaussian(SplitMix64& rng) {
  double u1 = rng.next_double();
  while (u1 <= 0.0) u1 = rng.next_double();
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

cplx cgaussian(SplitMix64& rng) {
  return cplx(gaussian(rng), gaussian(rng)) * 0.7071067811865476;
}

Matrix gram_schmidt_columns(const Matrix& g) {
  const std::size_t n = g.rows();
  Matrix out(n, n);
  std::size_t have = 0;
  for (std::size_t c = 0; c < g.cols() && have < n; ++c) {
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = g(i, c);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < have; ++k) {
        cplx ov = 0.0;
        for (std::size_t i = 0; i < n; ++i) ov += std::conj(out(i, k)) * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= ov * out(i, k);
      }
    }
    double nrm = 0.0;
    for (const auto& z : v) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    if (nrm > 1e-10) {
      for (std::size_t i = 0; i < n; ++i) out(i, have) = v[i] / nrm;
      ++have;
    }
  }
  if (have != n) throw numeric_error("gram_schmidt: rank-deficient input");
  return out;
}

}  // namespace

DensityOperator::DensityOperator(std::vector<std::size_t> dims,
                                 std::vector<std::string> labels, Matrix matrix,
                                 bool subnormalized)
    : dims_(std::move(dims)), labels_(std::move(labels)), m_(std::move(matrix)),
      subnormalized_(subnormalized) {
  check_shape(dims_, labels_, m_);
  check_hermitian_trace(m_, subnormalized_);
  if (total_dim() <= 64) validate_psd();
}

DensityOperator trusted_state(std::vector<std::size_t> dims,
                              std::vector<std::string> labels, Matrix m,
                              bool subnormalized) {
  check_shape(dims, labels, m);
  check_hermitian_trace(m, subnormalized);
  DensityOperator out(1);
  out.dims_ = std::move(dims);
  out.labels_ = std::move(labels);
  out.m_ = std::move(m);
  out.subnormalized_ = subnormalized;
  return out;
}

// private tag constructor used by trusted_state
DensityOperator::DensityOperator(int)
    : dims_{1}, labels_{"_"}, m_(Matrix::identity(1)) {}

DensityOperator DensityOperator::pure(std::vector<std::size_t> dims,
                                      std::vector<std::string> labels,
                                      const std::vector<cplx>& amplitudes,
                                      bool subnormalized) {
  const std::size_t n = amplitudes.size();
  Matrix m = Matrix::outer(amplitudes, amplitudes);
  (void)n;
  return trusted_state(std::move(dims), std::move(labels), std::move(m),
                       subnormalized);
}

std::size_t DensityOperator::label_index(const std::string& label) const {
  for (std::size_t k = 0; k < labels_.size(); ++k)
    if (labels_[k] == label) return k;
  throw std::invalid_argument("state: unknown subsystem label '" + label + "'");
}

std::size_t DensityOperator::dim_of(const std::string& label) const {
  return dims_[label_index(label)];
}

void DensityOperator::validate_psd() const {
  std::vector<double> lam = hermitian_eigenvalues(m_);
  if (!lam.empty() && lam.back() < -kStateTol)
    throw numeric_error("state: negative eigenvalue " + std::to_string(lam.back()));
}

DensityOperator DensityOperator::tensor(const DensityOperator& other) const {
  std::vector<std::size_t> dims = dims_;
  dims.insert(dims.end(), other.dims_.begin(), other.dims_.end());
  std::vector<std::string> labels = labels_;
  labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
  return trusted_state(std::move(dims), std::move(labels),
                       Matrix::kron(m_, other.m_),
                       subnormalized_ || other.subnormalized_);
}

DensityOperator DensityOperator::reorder(
    const std::vector<std::string>& new_order) const {
  if (new_order.size() != labels_.size())
    throw std::invalid_argument("reorder: label count mismatch");
  std::vector<std::size_t> perm;
  for (const auto& l : new_order) perm.push_back(label_index(l));
  std::set<std::size_t> uniq(perm.begin(), perm.end());
  if (uniq.size() != perm.size())
    throw std::invalid_argument("reorder: repeated label");

  const auto old_strides = strides_of(dims_);
  std::vector<std::size_t> new_dims(dims_.size());
  for (std::size_t k = 0; k < perm.size(); ++k) new_dims[k] = dims_[perm[k]];
  const std::size_t total = total_dim();

  // map new flat index -> old flat index
  std::vector<std::size_t> to_old(total, 0);
  std::vector<std::size_t> digit(new_dims.size(), 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t o = 0;
    for (std::size_t k = 0; k < new_dims.size(); ++k)
      o += digit[k] * old_strides[perm[k]];
    to_old[idx] = o;
    for (std::size_t k = new_dims.size(); k-- > 0;) {
      if (++digit[k] < new_dims[k]) break;
      digit[k] = 0;
    }
  }
  Matrix out(total, total);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < total; ++j) out(i, j) = m_(to_old[i], to_old[j]);
  std::vector<std::string> labels = new_order;
  return trusted_state(std::move(new_dims), std::move(labels), std::move(out),
                       subnormalized_);
}

CqState::CqState(std::vector<double> probs, std::vector<DensityOperator> conds)
    : probs_(std::move(probs)), conds_(std::move(conds)) {
  if (probs_.empty() || probs_.size() != conds_.size())
    throw std::invalid_argument("cq-state: probs/conditionals mismatch");
  double sum = 0.0;
  for (double p : probs_) {
    if (p < -kStateTol) throw std::invalid_argument("cq-state: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStateTol)
    throw std::invalid_argument("cq-state: probabilities do not sum to 1");
  for (std::size_t x = 1; x < conds_.size(); ++x) {
    if (conds_[x].dims() != conds_[0].dims() ||
        conds_[x].labels() != conds_[0].labels())
      throw std::invalid_argument("cq-state: conditionals have mixed shapes");
  }
}

DensityOperator CqState::expand(const std::string& classical_label) const {
  const std::size_t dx = probs_.size();
  const std::size_t dq = conds_[0].total_dim();
  Matrix m(dx * dq, dx * dq);
  for (std::size_t x = 0; x < dx; ++x) {
    const Matrix& c = conds_[x].matrix();
    for (std::size_t i = 0; i < dq; ++i)
      for (std::size_t j = 0; j < dq; ++j)
        m(x * dq + i, x * dq + j) = probs_[x] * c(i, j);
  }
  std::vector<std::size_t> dims{dx};
  std::vector<std::string> labels{classical_label};
  dims.insert(dims.end(), conds_[0].dims().begin(), conds_[0].dims().end());
  labels.insert(labels.end(), conds_[0].labels().begin(), conds_[0].labels().end());
  return trusted_state(std::move(dims), std::move(labels), std::move(m), false);
}

DensityOperator CqState::quantum_marginal() const {
  Matrix m(conds_[0].total_dim(), conds_[0].total_dim());
  for (std::size_t x = 0; x < probs_.size(); ++x)
    m = m + conds_[x].matrix() * cplx(probs_[x], 0.0);
  return trusted_state(conds_[0].dims(), conds_[0].labels(), std::move(m), false);
}

double KrausChannel::completeness_defect() const {
  if (ops.empty()) return 1.0;
  Matrix sum(in_dim(), in_dim());
  for (const auto& k : ops) sum = sum + k.adjoint() * k;
  return (sum - Matrix::identity(in_dim())).max_abs();
}

KrausChannel KrausChannel::identity(std::size_t dim) {
  return KrausChannel{{Matrix::identity(dim)}};
}

KrausChannel KrausChannel::from_unitary(const Matrix& u) {
  return KrausChannel{{u}};
}

KrausChannel KrausChannel::trace_out_tail(std::size_t kept, std::size_t traced) {
  KrausChannel ch;
  for (std::size_t t = 0; t < traced; ++t) {
    Matrix k(kept, kept * traced);
    for (std::size_t i = 0; i < kept; ++i) k(i, i * traced + t) = 1.0;
    ch.ops.push_back(std::move(k));
  }
  return ch;
}

KrausChannel KrausChannel::unitary_then_trace_tail(const Matrix& u,
                                                   std::size_t kept,
                                                   std::size_t traced) {
  if (u.rows() != kept * traced || !u.square())
    throw std::invalid_argument("unitary_then_trace_tail: shape mismatch");
  KrausChannel base = trace_out_tail(kept, traced);
  KrausChannel ch;
  for (auto& k : base.ops) ch.ops.push_back(k * u);
  return ch;
}

ControlledOperation::ControlledOperation(std::size_t control_dim,
                                         std::vector<KrausChannel> channels,
                                         std::vector<std::string> target_labels,
                                         std::vector<std::size_t> out_dims,
                                         std::vector<std::string> out_labels)
    : control_dim_(control_dim), channels_(std::move(channels)),
      target_labels_(std::move(target_labels)), out_dims_(std::move(out_dims)),
      out_labels_(std::move(out_labels)) {
  if (control_dim_ == 0 || channels_.size() != control_dim_)
    throw std::invalid_argument("controlled op: need one channel per control value");
  if (out_dims_.size() != out_labels_.size())
    throw std::invalid_argument("controlled op: out dims/labels mismatch");
  const std::size_t in0 = channels_[0].in_dim();
  const std::size_t out0 = channels_[0].out_dim();
  if (product(out_dims_) != out0)
    throw std::invalid_argument("controlled op: out_dims product mismatch");
  for (const auto& ch : channels_) {
    if (ch.in_dim() != in0 || ch.out_dim() != out0)
      throw std::invalid_argument("controlled op: channels have mixed shapes");
    if (ch.completeness_defect() > kStateTol)
      throw std::invalid_argument("controlled op: channel is not trace preserving");
  }
}

double trace_norm(const Matrix& a) { return trace_norm_matrix(a); }

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  if (a.dims() != b.dims())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  return trace_norm_matrix(a.matrix() - b.matrix());
}

double fidelity(const DensityOperator& rho0, const DensityOperator& rho1) {
  if (rho0.dims() != rho1.dims())
    throw std::invalid_argument("fidelity: dimension mismatch");
  const Matrix s0 = psd_sqrt(rho0.matrix(), kStateTol);
  const Matrix s1 = psd_sqrt(rho1.matrix(), kStateTol);
  return trace_norm_matrix(s0 * s1);
}

DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::string>& keep) {
  std::vector<std::size_t> keep_pos;
  for (const auto& l : keep) keep_pos.push_back(rho.label_index(l));
  std::sort(keep_pos.begin(), keep_pos.end());
  if (std::adjacent_find(keep_pos.begin(), keep_pos.end()) != keep_pos.end())
    throw std::invalid_argument("partial_trace: repeated label");

  const auto& dims = rho.dims();
  std::vector<std::size_t> trace_pos;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!std::binary_search(keep_pos.begin(), keep_pos.end(), k))
      trace_pos.push_back(k);

  const auto strides = strides_of(dims);
  std::size_t keep_dim = 1, tr_dim = 1;
  for (auto k : keep_pos) keep_dim *= dims[k];
  for (auto k : trace_pos) tr_dim *= dims[k];

  // offset tables: flat offsets of every kept / traced multi-index
  auto offsets = [&](const std::vector<std::size_t>& pos, std::size_t count) {
    std::vector<std::size_t> off(count, 0);
    std::vector<std::size_t> digit(pos.size(), 0);
    for (std::size_t c = 0; c < count; ++c) {
      std::size_t o = 0;
      for (std::size_t k = 0; k < pos.size(); ++k) o += digit[k] * strides[pos[k]];
      off[c] = o;
      for (std::size_t k = pos.size(); k-- > 0;) {
        if (++digit[k] < dims[pos[k]]) break;
        digit[k] = 0;
      }
    }
    return off;
  };
  const auto keep_off = offsets(keep_pos, keep_dim);
  const auto tr_off = offsets(trace_pos, tr_dim);

  Matrix out(keep_dim, keep_dim);
  const Matrix& m = rho.matrix();
  for (std::size_t i = 0; i < keep_dim; ++i)
    for (std::size_t j = 0; j < keep_dim; ++j) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t < tr_dim; ++t)
        acc += m(keep_off[i] + tr_off[t], keep_off[j] + tr_off[t]);
      out(i, j) = acc;
    }

  std::vector<std::size_t> out_dims;
  std::vector<std::string> out_labels;
  for (auto k : keep_pos) {
    out_dims.push_back(dims[k]);
    out_labels.push_back(rho.labels()[k]);
  }
  return trusted_state(std::move(out_dims), std::move(out_labels), std::move(out),
                       rho.subnormalized());
}

double cond_min_entropy_cc(const std::vector<std::vector<double>>& joint) {
  if (joint.empty() || joint[0].empty())
    throw std::invalid_argument("cond_min_entropy_cc: empty table");
  const std::size_t ne = joint[0].size();
  double sum = 0.0;
  for (const auto& row : joint) {
    if (row.size() != ne)
      throw std::invalid_argument("cond_min_entropy_cc: ragged table");
    for (double p : row) {
      if (p < -1e-12 || !std::isfinite(p))
        throw std::invalid_argument("cond_min_entropy_cc: bad probability");
      sum += p;
    }
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("cond_min_entropy_cc: table does not sum to 1");
  double guess = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    double best = 0.0;
    for (const auto& row : joint) best = std::max(best, row[e]);
    guess += best;
  }
  return -std::log2(guess);
}

bool check_min_entropy_witness(const CqState& rho_xe, double lambda,
                               const DensityOperator& sigma) {
  if (sigma.dims() != rho_xe.conditional(0).dims())
    throw std::invalid_argument("witness: dimension mismatch");
  const double factor = std::exp2(-lambda);
  for (std::size_t x = 0; x < rho_xe.classical_dim(); ++x) {
    Matrix gap = sigma.matrix() * cplx(factor, 0.0) -
                 rho_xe.conditional(x).matrix() * cplx(rho_xe.probs()[x], 0.0);
    std::vector<double> lam = hermitian_eigenvalues(gap);
    if (!lam.empty() && lam.back() < -kStateTol) return false;
  }
  return true;
}

std::vector<cplx> purify(const DensityOperator& rho, double clamp) {
  const std::size_t n = rho.total_dim();
  EigenSystem es = hermitian_eigen(rho.matrix());
  std::vector<cplx> psi(n * n, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    double lam = es.values[k];
    if (lam < -clamp)
      throw numeric_error("purify: negative eigenvalue beyond clamp");
    lam = std::max(lam, 0.0);
    const double r = std::sqrt(lam);
    if (r == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) psi[i * n + k] += r * es.vectors(i, k);
  }
  return psi;
}

DensityOperator apply_channel(const DensityOperator& rho,
                              const std::vector<std::string>& target_labels,
                              const KrausChannel& channel,
                              const std::vector<std::size_t>& out_dims,
                              const std::vector<std::string>& out_labels) {
  if (target_labels.empty())
    throw std::invalid_argument("apply_channel: no target labels");
  if (out_dims.size() != out_labels.size())
    throw std::invalid_argument("apply_channel: out dims/labels mismatch");
  std::vector<std::size_t> tpos;
  for (const auto& l : target_labels) tpos.push_back(rho.label_index(l));
  std::set<std::size_t> tset(tpos.begin(), tpos.end());
  if (tset.size() != tpos.size())
    throw std::invalid_argument("apply_channel: repeated target label");

  const auto& dims = rho.dims();
  std::vector<std::size_t> rest_pos;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (tset.find(k) == tset.end()) rest_pos.push_back(k);

  std::size_t in_dim = 1, rest_dim = 1;
  for (auto k : tpos) in_dim *= dims[k];
  for (auto k : rest_pos) rest_dim *= dims[k];
  if (channel.in_dim() != in_dim)
    throw std::invalid_argument("apply_channel: channel input dimension mismatch");
  if (product(out_dims) != channel.out_dim())
    throw std::invalid_argument("apply_channel: out_dims product mismatch");
  if (channel.completeness_defect() > kStateTol)
    throw std::invalid_argument("apply_channel: channel is not trace preserving");

  // flat offsets of rest- and target-multi-indices in the original layout
  const auto strides = strides_of(dims);
  auto offsets = [&](const std::vector<std::size_t>& pos, std::size_t count) {
    std::vector<std::size_t> off(count, 0);
    std::vector<std::size_t> digit(pos.size(), 0);
    for (std::size_t c = 0; c < count; ++c) {
      std::size_t o = 0;
      for (std::size_t k = 0; k < pos.size(); ++k) o += digit[k] * strides[pos[k]];
      off[c] = o;
      for (std::size_t k = pos.size(); k-- > 0;) {
        if (++digit[k] < dims[pos[k]]) break;
        digit[k] = 0;
      }
    }
    return off;
  };
  const auto rest_off = offsets(rest_pos, rest_dim);
  const auto t_off = offsets(tpos, in_dim);

  const std::size_t od = channel.out_dim();
  Matrix result(rest_dim * od, rest_dim * od);
  const Matrix& m = rho.matrix();
  Matrix block(in_dim, in_dim);
  for (std::size_t r = 0; r < rest_dim; ++r) {
    for (std::size_t rp = 0; rp < rest_dim; ++rp) {
      for (std::size_t i = 0; i < in_dim; ++i)
        for (std::size_t ip = 0; ip < in_dim; ++ip)
          block(i, ip) = m(rest_off[r] + t_off[i], rest_off[rp] + t_off[ip]);
      for (const auto& k : channel.ops) {
        const Matrix kb = k * block;           // od x in
        for (std::size_t o = 0; o < od; ++o)
          for (std::size_t op = 0; op < od; ++op) {
            cplx acc = 0.0;
            for (std::size_t ip = 0; ip < in_dim; ++ip)
              acc += kb(o, ip) * std::conj(k(op, ip));
            result(r * od + o, rp * od + op) += acc;
          }
      }
    }
  }

  std::vector<std::size_t> rdims;
  std::vector<std::string> rlabels;
  for (auto k : rest_pos) {
    rdims.push_back(dims[k]);
    rlabels.push_back(rho.labels()[k]);
  }
  rdims.insert(rdims.end(), out_dims.begin(), out_dims.end());
  rlabels.insert(rlabels.end(), out_labels.begin(), out_labels.end());
  return trusted_state(std::move(rdims), std::move(rlabels), std::move(result),
                       rho.subnormalized());
}

CqState apply_controlled(const ControlledOperation& op, const CqState& state) {
  if (op.control_dim() != state.classical_dim())
    throw std::invalid_argument("apply_controlled: control dimension mismatch");
  std::vector<DensityOperator> out;
  out.reserve(state.classical_dim());
  for (std::size_t x = 0; x < state.classical_dim(); ++x)
    out.push_back(apply_channel(state.conditional(x), op.target_labels(),
                                op.channel(x), op.out_dims(), op.out_labels()));
  return CqState(state.probs(), std::move(out));
}

DensityOperator uhlmann_extension(const DensityOperator& rho_a,
                                  const DensityOperator& xi_a,
                                  const DensityOperator& rho_ab) {
  if (xi_a.dims() != rho_a.dims())
    throw std::invalid_argument("uhlmann_extension: xi_a/rho_a dimension mismatch");
  const std::size_t na = rho_a.dims().size();
  if (rho_ab.dims().size() <= na ||
      !std::equal(rho_a.labels().begin(), rho_a.labels().end(),
                  rho_ab.labels().begin()) ||
      !std::equal(rho_a.dims().begin(), rho_a.dims().end(), rho_ab.dims().begin()))
    throw std::invalid_argument(
        "uhlmann_extension: rho_a must be the leading factor of rho_ab");

  const DensityOperator marg = partial_trace(rho_ab, rho_a.labels());
  if ((marg.matrix() - rho_a.matrix()).max_abs() > kDerivedTol)
    throw std::invalid_argument(
        "uhlmann_extension: partial_trace(rho_ab, A) != rho_a");

  const std::size_t dA = rho_a.total_dim();
  const std::size_t dAB = rho_ab.total_dim();
  const std::size_t dB = dAB / dA;
  const std::size_t dC = dAB;  // purifying register
  const std::size_t dBC = dB * dC;
  if (dAB * dC > kDimCap)
    throw resource_limit_error("uhlmann_extension: purification exceeds cap");

  // Purification of rho_ab on C, reshaped to A x (B C).
  const std::vector<cplx> psi = purify(rho_ab);
  Matrix r(dA, dBC);
  for (std::size_t a = 0; a < dA; ++a)
    for (std::size_t b = 0; b < dB; ++b)
      for (std::size_t c = 0; c < dC; ++c)
        r(a, b * dC + c) = psi[(a * dB + b) * dC + c];

  // Canonical purification of xi_a on the B C register.
  EigenSystem xe = hermitian_eigen(xi_a.matrix());
  Matrix x0(dA, dBC);
  for (std::size_t j = 0; j < dA; ++j) {
    double lam = xe.values[j];
    if (lam < -kStateTol)
      throw numeric_error("uhlmann_extension: xi_a eigenvalue beyond clamp");
    lam = std::max(lam, 0.0);
    const double rt = std::sqrt(lam);
    for (std::size_t a = 0; a < dA; ++a) x0(a, j) = rt * xe.vectors(a, j);
  }

  // Overlap-maximizing unitary on B C.
  const Matrix k = r.adjoint() * x0;
  Svd sv = svd(k);
  const Matrix wt = sv.v * sv.u.adjoint();
  const Matrix xhat = x0 * wt;

  Matrix sigma(dAB, dAB);
  for (std::size_t a = 0; a < dA; ++a)
    for (std::size_t b = 0; b < dB; ++b)
      for (std::size_t ap = 0; ap < dA; ++ap)
        for (std::size_t bp = 0; bp < dB; ++bp) {
          cplx acc = 0.0;
          for (std::size_t c = 0; c < dC; ++c)
            acc += xhat(a, b * dC + c) * std::conj(xhat(ap, bp * dC + c));
          sigma(a * dB + b, ap * dB + bp) = acc;
        }
  return trusted_state(rho_ab.dims(), rho_ab.labels(), std::move(sigma), false);
}

std::vector<cplx> random_pure(SplitMix64& rng, std::size_t dim) {
  std::vector<cplx> v(dim);
  double nrm = 0.0;
  for (auto& z : v) {
    z = cgaussian(rng);
    nrm += std::norm(z);
  }
  nrm = std::sqrt(nrm);
  for (auto& z : v) z /= nrm;
  return v;
}

DensityOperator random_density(SplitMix64& rng, std::vector<std::size_t> dims,
                               std::vector<std::string> labels, std::size_t rank) {
  const std::size_t n = product(dims);
  if (rank == 0) rank = n;
  Matrix g(n, rank);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < rank; ++j) g(i, j) = cgaussian(rng);
  Matrix rho = g * g.adjoint();
  const double tr = rho.trace().real();
  rho = rho * cplx(1.0 / tr, 0.0);
  return trusted_state(std::move(dims), std::move(labels), std::move(rho), false);
}

Matrix random_unitary(SplitMix64& rng, std::size_t dim) {
  Matrix g(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) g(i, j) = cgaussian(rng);
  return gram_schmidt_columns(g);
}

KrausChannel random_channel(SplitMix64& rng, std::size_t in_dim,
                            std::size_t out_dim, std::size_t n_kraus) {
  std::vector<Matrix> a(n_kraus, Matrix(out_dim, in_dim));
  for (auto& m : a)
    for (std::size_t i = 0; i < out_dim; ++i)
      for (std::size_t j = 0; j < in_dim; ++j) m(i, j) = cgaussian(rng);
  Matrix s(in_dim, in_dim);
  for (const auto& m : a) s = s + m.adjoint() * m;
  EigenSystem es = hermitian_eigen(s);
  Matrix isqrt(in_dim, in_dim);
  for (std::size_t i = 0; i < in_dim; ++i)
    for (std::size_t j = 0; j < in_dim; ++j) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < in_dim; ++k)
        acc += es.vectors(i, k) * (1.0 / std::sqrt(es.values[k])) *
               std::conj(es.vectors(j, k));
      isqrt(i, j) = acc;
    }
  KrausChannel ch;
  for (auto& m : a) ch.ops.push_back(m * isqrt);
  return ch;
}

DensityOperator basis_state(std::size_t dim, std::size_t k,
                            const std::string& label) {
  Matrix m(dim, dim);
  m(k, k) = 1.0;
  return trusted_state({dim}, {label}, std::move(m), false);
}

DensityOperator maximally_mixed(std::size_t dim, const std::string& label) {
  Matrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0 / static_cast<double>(dim);
  return trusted_state({dim}, {label}, std::move(m), false);
}

}  // namespace prext::qmath
