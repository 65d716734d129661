// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "prext/bitstring.hpp"
#include "prext/rng.hpp"

namespace prext::ext {

// Arithmetic in GF(t) for prime-power t <= 16, via exp/log tables.
// Elements are encoded 0..t-1 (base-p digit vectors for t = p^k).
class GaloisField {
public:
  explicit GaloisField(std::size_t t);

  std::size_t order() const { return t_; }
  std::size_t add(std::size_t a, std::size_t b) const;
  std::size_t mul(std::size_t a, std::size_t b) const;
  // Evaluates sum_j coeffs[j] x^j (Horner).
  std::size_t eval_poly(const std::vector<std::size_t>& coeffs,
                        std::size_t x) const;

  static bool is_prime_power(std::size_t t);

private:
  std::size_t t_, p_, k_;
  std::vector<std::size_t> exp_, log_;
  std::vector<std::size_t> add_;  // t*t addition table
};

// Family of m size-t blocks over seed positions [0, d) satisfying the
// Nisan-Wigderson overlap bound  sum_{j<i} 2^{|Si ∩ Sj|} <= r (m-1)
// with r = 2e.  For d >= t^2 blocks are polynomial graphs
// {(a, p_i(a))} embedded at a*t + p_i(a); when m exceeds the t^t
// distinct polynomial functions, blocks repeat cyclically (the bound
// is still checked exactly).  For t <= d < t^2 a sliding-window family
// is used.  Construction fails with the violated inequality named if
// the bound does not hold.
class WeakDesign {
public:
  static WeakDesign build(std::size_t m, std::size_t t, std::size_t d);

  std::size_t num_blocks() const { return m_; }
  std::size_t block_size() const { return t_; }
  std::size_t seed_len() const { return d_; }
  double overlap_parameter() const { return r_; }

  // Sorted positions of block i.
  const std::vector<std::size_t>& block(std::size_t i) const;

  // max over i of sum_{j<i} 2^{|Si ∩ Sj|} / (m-1); <= r by construction.
  double max_overlap_ratio() const { return max_ratio_; }

private:
  WeakDesign() = default;
  void check_bound();

  std::size_t m_ = 0, t_ = 0, d_ = 0;
  double r_ = 0.0;
  double max_ratio_ = 0.0;
  std::vector<std::vector<std::size_t>> distinct_;  // cycle of distinct blocks
};

enum class ExtractorKind { OneBitXor, Trevisan };

// Parameters plus the concrete construction of a strong extractor
// {0,1}^n x {0,1}^d -> {0,1}^m.  `eps` is the claimed error; for the
// inner-product one-bit extractor it follows the parameter sheet
// eps = 2^{-(k - max(0, n-d))/2} (entropy surviving the cyclic seed
// fold), capped at 1.  For Trevisan instances eps is caller-supplied.
class ExtractorSpec {
public:
  // Default-constructed specs are placeholders; build one through the
  // named factories before use.
  ExtractorSpec() = default;

  static ExtractorSpec one_bit_xor(std::size_t n, std::size_t d, std::size_t k);
  static ExtractorSpec trevisan(std::size_t n, std::size_t d, std::size_t m,
                                std::size_t k, double eps, std::size_t t);

  ExtractorKind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  std::size_t m() const { return m_; }
  std::size_t k() const { return k_; }
  double eps() const { return eps_; }
  const WeakDesign& design() const;

  std::string id() const;

private:
  ExtractorKind kind_ = ExtractorKind::OneBitXor;
  std::size_t n_ = 0, d_ = 0, m_ = 0, k_ = 0, t_ = 0;
  double eps_ = 1.0;
  std::vector<WeakDesign> design_;  // empty or one element
};

// Inner product of x and y modulo 2 (lengths must match).
bool ext_one_bit(const BitString& x, const BitString& y);

// Fixed seed-expansion rules (documented so golden vectors are
// reproducible):
//  - whole-seed rule (one-bit extractor): out[j] = y[j mod d]
//  - block rule (Trevisan, output bit b): out starts all-zero, then for
//    each s in S_b (ascending) out[(s + b) mod n] ^= y[s].  The rotation
//    by b keeps distinct output bits distinct even when the design
//    cycles through few blocks (tiny-seed compositions).
BitString expand_seed_cyclic(const BitString& y, std::size_t n);
BitString expand_seed_block(const BitString& y, const std::vector<std::size_t>& block,
                            std::size_t n, std::size_t rotation = 0);

BitString trevisan_ext(const ExtractorSpec& spec, const BitString& x,
                       const BitString& y);

// Dispatch on spec.kind(); the one-bit extractor returns a length-1 string.
BitString extract(const ExtractorSpec& spec, const BitString& x,
                  const BitString& y);

// Blocks for every seed value in numeric order (2^d <= 2^20).
std::vector<BitString> enumerate_blocks(const ExtractorSpec& spec,
                                        const BitString& x);

// Explicit classical source with side information: p[x][e], x < 2^n.
struct ClassicalSource {
  std::size_t n_bits = 0;
  std::vector<std::vector<double>> p;

  void validate() const;
  std::size_t x_count() const { return p.size(); }
  std::size_t e_count() const { return p.empty() ? 0 : p[0].size(); }
  std::vector<double> e_marginal() const;
  std::vector<double> x_marginal() const;
  // -log2 sum_e max_x p(x,e)
  double min_entropy_to_e() const;

  // Flat source: uniform on a random 2^k-element support, trivial E.
  static ClassicalSource flat_random(SplitMix64& rng, std::size_t n,
                                     std::size_t k);
  static ClassicalSource point_mass(std::size_t n, std::uint64_t x);
  static ClassicalSource uniform(std::size_t n);
};

struct SrDistanceReport {
  double average = 0.0;       // E_i || rho_{S_i E} - U_m (x) rho_E ||_tr
  double min_distance = 0.0;
  std::size_t argmin = 0;
  std::vector<double> per_block;
};

// Exact seed-averaged trace distance of the extractor blocks from
// uniform-times-marginal, by full enumeration (classical side info;
// trace distance = 2 * total variation).  Feasible for n <= 12, d <= 10.
SrDistanceReport sr_average_distance(const ExtractorSpec& spec,
                                     const ClassicalSource& source);

}  // namespace prext::ext
