// SPDX-License-Identifier: Apache-2.0
#include "prext/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "prext/errors.hpp"

namespace prext::ext {

namespace {
constexpr double kTwoE = 2.0 * 2.718281828459045;
}

bool GaloisField::is_prime_power(std::size_t t) {
  if (t < 2) return false;
  std::size_t p = 2;
  while (p * p <= t && t % p != 0) ++p;
  if (p * p > t) return true;  // prime
  std::size_t q = t;
  while (q % p == 0) q /= p;
  return q == 1;
}

GaloisField::GaloisField(std::size_t t) : t_(t) {
  if (!is_prime_power(t) || t > 16)
    throw std::invalid_argument("GaloisField: order must be a prime power <= 16");
  p_ = 2;
  while (t % p_ != 0) ++p_;
  k_ = 0;
  for (std::size_t q = t; q > 1; q /= p_) ++k_;

  // Element <-> base-p digit vector (polynomial over GF(p)).
  auto digits = [this](std::size_t v) {
    std::vector<std::size_t> d(k_);
    for (std::size_t i = 0; i < k_; ++i) {
      d[i] = v % p_;
      v /= p_;
    }
    return d;
  };
  auto undigits = [this](const std::vector<std::size_t>& d) {
    std::size_t v = 0;
    for (std::size_t i = k_; i-- > 0;) v = v * p_ + d[i];
    return v;
  };

  add_.assign(t_ * t_, 0);
  for (std::size_t a = 0; a < t_; ++a)
    for (std::size_t b = 0; b < t_; ++b) {
      auto da = digits(a), db = digits(b);
      for (std::size_t i = 0; i < k_; ++i) da[i] = (da[i] + db[i]) % p_;
      add_[a * t_ + b] = undigits(da);
    }

  // Polynomial multiplication modulo an irreducible monic polynomial of
  // degree k (found by trial division); k = 1 reduces to mod-p arithmetic.
  std::vector<std::size_t> modulus;  // coefficients 0..k-1 of the monic poly
  if (k_ > 1) {
    auto poly_mul_mod = [&](std::vector<std::size_t> a,
                            const std::vector<std::size_t>& b,
                            const std::vector<std::size_t>& mod) {
      std::vector<std::size_t> prod(2 * k_, 0);
      for (std::size_t i = 0; i < k_; ++i)
        for (std::size_t j = 0; j < k_; ++j)
          prod[i + j] = (prod[i + j] + a[i] * b[j]) % p_;
      for (std::size_t deg = 2 * k_ - 1; deg >= k_; --deg) {
        const std::size_t c = prod[deg];
        if (c == 0) continue;
        prod[deg] = 0;
        for (std::size_t i = 0; i < k_; ++i)
          prod[deg - k_ + i] = (prod[deg - k_ + i] + c * (p_ - mod[i])) % p_;
      }
      prod.resize(k_);
      return prod;
    };
    // Brute-force irreducibility: a monic degree-k poly with no root is
    // enough for k <= 3; for k = 4 also exclude degree-2 divisors.
    for (std::size_t cand = 0; cand < t_ && modulus.empty(); ++cand) {
      std::vector<std::size_t> mod = digits(cand);
      auto eval = [&](std::size_t x) {
        std::size_t acc = 1;  // monic leading term
        for (std::size_t i = k_; i-- > 0;) acc = (acc * x + mod[i]) % p_;
        return acc;
      };
      bool has_root = false;
      for (std::size_t x = 0; x < p_; ++x)
        if (eval(x) == 0) has_root = true;
      if (has_root) continue;
      if (k_ == 4) {
        // x^4 + ... reducible without roots only as (deg2)(deg2)
        bool divisible = false;
        for (std::size_t lo = 0; lo < p_ * p_ && !divisible; ++lo) {
          // monic quadratic q = x^2 + q1 x + q0
          const std::size_t q0 = lo % p_, q1 = lo / p_;
          // long division of x^4 + mod by q, over GF(p)
          std::vector<std::size_t> rem = {mod[0], mod[1], mod[2], mod[3], 1};
          for (std::size_t deg = 4; deg >= 2; --deg) {
            const std::size_t c = rem[deg];
            if (c == 0) continue;
            rem[deg] = 0;
            rem[deg - 1] = (rem[deg - 1] + c * (p_ - q1)) % p_;
            rem[deg - 2] = (rem[deg - 2] + c * (p_ - q0)) % p_;
          }
          if (rem[0] == 0 && rem[1] == 0) divisible = true;
        }
        if (divisible) continue;
      }
      modulus = mod;
    }
    if (modulus.empty()) throw numeric_error("GaloisField: no irreducible poly");

    // generator search
    exp_.clear();
    for (std::size_t g = 1; g < t_; ++g) {
      std::vector<std::size_t> pow = digits(1);
      std::vector<std::size_t> table;
      std::set<std::size_t> seen;
      bool ok = true;
      for (std::size_t e = 0; e < t_ - 1; ++e) {
        const std::size_t v = undigits(pow);
        if (!seen.insert(v).second) {
          ok = false;
          break;
        }
        table.push_back(v);
        pow = poly_mul_mod(pow, digits(g), modulus);
      }
      if (ok && undigits(pow) == 1) {
        exp_ = table;
        break;
      }
    }
  } else {
    // prime field: find a primitive root mod p
    for (std::size_t g = 1; g < t_; ++g) {
      std::vector<std::size_t> table;
      std::set<std::size_t> seen;
      std::size_t v = 1;
      bool ok = true;
      for (std::size_t e = 0; e < t_ - 1; ++e) {
        if (!seen.insert(v).second) {
          ok = false;
          break;
        }
        table.push_back(v);
        v = (v * g) % p_;
      }
      if (ok && v == 1) {
        exp_ = table;
        break;
      }
    }
  }
  if (exp_.empty()) throw numeric_error("GaloisField: no generator found");
  log_.assign(t_, 0);
  for (std::size_t e = 0; e + 1 < t_; ++e) log_[exp_[e]] = e;
}

std::size_t GaloisField::add(std::size_t a, std::size_t b) const {
  return add_[a * t_ + b];
}

std::size_t GaloisField::mul(std::size_t a, std::size_t b) const {
  if (a == 0 || b == 0) return 0;
  return exp_[(log_[a] + log_[b]) % (t_ - 1)];
}

std::size_t GaloisField::eval_poly(const std::vector<std::size_t>& coeffs,
                                   std::size_t x) const {
  std::size_t acc = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = add(mul(acc, x), coeffs[i]);
  return acc;
}

WeakDesign WeakDesign::build(std::size_t m, std::size_t t, std::size_t d) {
  if (m < 1) throw std::invalid_argument("weak design: m >= 1 required");
  if (!GaloisField::is_prime_power(t))
    throw std::invalid_argument("weak design: t must be a prime power");
  if (d < t)
    throw std::invalid_argument("weak design: violated d >= t (blocks need t positions)");

  WeakDesign wd;
  wd.m_ = m;
  wd.t_ = t;
  wd.d_ = d;
  wd.r_ = kTwoE;

  if (d >= t * t) {
    const GaloisField gf(t);
    // smallest digit count c with t^c >= m, capped at t (the number of
    // distinct polynomial functions is t^t)
    std::size_t c = 1, cap = t;
    while (c < t && cap < m) {
      ++c;
      cap *= t;
    }
    const std::size_t cycle = std::min<std::size_t>(m, cap);
    wd.distinct_.reserve(cycle);
    for (std::size_t i = 0; i < cycle; ++i) {
      std::vector<std::size_t> coeffs(c);
      std::size_t v = i;
      for (std::size_t j = 0; j < c; ++j) {
        coeffs[j] = v % t;
        v /= t;
      }
      std::vector<std::size_t> block(t);
      for (std::size_t a = 0; a < t; ++a)
        block[a] = a * t + gf.eval_poly(coeffs, a);
      std::sort(block.begin(), block.end());
      wd.distinct_.push_back(std::move(block));
    }
  } else {
    // sliding windows over [0, d); only survives the overlap check for
    // tiny t, which is exactly the degenerate-seed regime it serves
    const std::size_t cycle = std::min<std::size_t>(m, d);
    for (std::size_t i = 0; i < cycle; ++i) {
      std::vector<std::size_t> block(t);
      for (std::size_t j = 0; j < t; ++j) block[j] = (i + j) % d;
      std::sort(block.begin(), block.end());
      wd.distinct_.push_back(std::move(block));
    }
  }
  wd.check_bound();
  return wd;
}

const std::vector<std::size_t>& WeakDesign::block(std::size_t i) const {
  if (i >= m_) throw std::invalid_argument("weak design: block index out of range");
  return distinct_[i % distinct_.size()];
}

void WeakDesign::check_bound() {
  const std::size_t g = distinct_.size();
  std::vector<std::vector<std::size_t>> overlap(g, std::vector<std::size_t>(g, 0));
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t b = 0; b < g; ++b) {
      std::size_t cnt = 0;
      std::size_t i = 0, j = 0;
      const auto& sa = distinct_[a];
      const auto& sb = distinct_[b];
      while (i < sa.size() && j < sb.size()) {
        if (sa[i] == sb[j]) ++cnt, ++i, ++j;
        else if (sa[i] < sb[j]) ++i;
        else ++j;
      }
      overlap[a][b] = cnt;
    }
  // running count of earlier blocks per distinct class
  std::vector<double> pow2(t_ + 1);
  for (std::size_t e = 0; e <= t_; ++e) pow2[e] = std::ldexp(1.0, static_cast<int>(e));
  std::vector<double> class_count(g, 0.0);
  double worst = 0.0;
  const double budget = r_ * static_cast<double>(m_ - 1);
  for (std::size_t i = 0; i < m_; ++i) {
    const std::size_t ci = i % g;
    double sum = 0.0;
    for (std::size_t h = 0; h < g; ++h)
      sum += class_count[h] * pow2[overlap[ci][h]];
    if (m_ > 1) worst = std::max(worst, sum);
    if (m_ > 1 && sum > budget + 1e-9)
      throw std::invalid_argument(
          "weak design: violated sum_{j<i} 2^|Si^Sj| <= 2e(m-1) at i=" +
          std::to_string(i) + " (" + std::to_string(sum) + " > " +
          std::to_string(budget) + ")");
    class_count[ci] += 1.0;
  }
  max_ratio_ = (m_ > 1) ? worst / static_cast<double>(m_ - 1) : 0.0;
}

ExtractorSpec ExtractorSpec::one_bit_xor(std::size_t n, std::size_t d,
                                         std::size_t k) {
  if (n < 1 || d < 1) throw std::invalid_argument("extractor: n, d >= 1 required");
  if (k > n) throw std::invalid_argument("extractor: k <= n required");
  ExtractorSpec s;
  s.kind_ = ExtractorKind::OneBitXor;
  s.n_ = n;
  s.d_ = d;
  s.m_ = 1;
  s.k_ = k;
  const std::size_t loss = (n > d) ? (n - d) : 0;
  const double k_eff = (k > loss) ? static_cast<double>(k - loss) : 0.0;
  s.eps_ = std::min(1.0, std::exp2(-0.5 * k_eff));
  return s;
}

ExtractorSpec ExtractorSpec::trevisan(std::size_t n, std::size_t d, std::size_t m,
                                      std::size_t k, double eps, std::size_t t) {
  if (n < 1 || m < 1) throw std::invalid_argument("extractor: n, m >= 1 required");
  if (k > n) throw std::invalid_argument("extractor: k <= n required");
  if (eps <= 0.0 || eps > 1.0)
    throw std::invalid_argument("extractor: eps must be in (0,1]");
  ExtractorSpec s;
  s.kind_ = ExtractorKind::Trevisan;
  s.n_ = n;
  s.d_ = d;
  s.m_ = m;
  s.k_ = k;
  s.t_ = t;
  s.eps_ = eps;
  // d = 0 is the degenerate single-empty-seed composition case: every
  // expanded seed is zero and the output is 0^m.
  if (d > 0) s.design_.push_back(WeakDesign::build(m, t, d));
  return s;
}

const WeakDesign& ExtractorSpec::design() const {
  if (design_.empty())
    throw std::invalid_argument("extractor: spec has no weak design");
  return design_.front();
}

std::string ExtractorSpec::id() const {
  if (kind_ == ExtractorKind::OneBitXor)
    return "onebit-n" + std::to_string(n_) + "-d" + std::to_string(d_) + "-k" +
           std::to_string(k_);
  return "trevisan-n" + std::to_string(n_) + "-d" + std::to_string(d_) + "-t" +
         std::to_string(t_) + "-m" + std::to_string(m_);
}

bool ext_one_bit(const BitString& x, const BitString& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("ext_one_bit: length mismatch");
  return x.inner_product(y);
}

BitString expand_seed_cyclic(const BitString& y, std::size_t n) {
  if (y.size() == 0) return BitString(n);
  BitString out(n);
  for (std::size_t j = 0; j < n; ++j) out.set(j, y.get(j % y.size()));
  return out;
}

BitString expand_seed_block(const BitString& y,
                            const std::vector<std::size_t>& block, std::size_t n,
                            std::size_t rotation) {
  BitString out(n);
  for (std::size_t s : block) {
    if (s >= y.size())
      throw std::invalid_argument("expand_seed_block: position beyond seed");
    const std::size_t pos = (s + rotation) % n;
    if (y.get(s)) out.set(pos, !out.get(pos));
  }
  return out;
}

BitString trevisan_ext(const ExtractorSpec& spec, const BitString& x,
                       const BitString& y) {
  if (spec.kind() != ExtractorKind::Trevisan)
    throw std::invalid_argument("trevisan_ext: spec kind mismatch");
  if (x.size() != spec.n() || y.size() != spec.d())
    throw std::invalid_argument("trevisan_ext: input length mismatch");
  BitString out(spec.m());
  if (spec.d() == 0) return out;
  const WeakDesign& wd = spec.design();
  const std::size_t n = spec.n();
  for (std::size_t i = 0; i < spec.m(); ++i) {
    // <x, expand_seed_block(y, S_i, n, i)> unrolled: XOR-placing seed
    // bits and taking the inner product collapses to a t-term parity
    bool bit = false;
    for (std::size_t s : wd.block(i))
      if (y.get(s) && x.get((s + i) % n)) bit = !bit;
    out.set(i, bit);
  }
  return out;
}

BitString extract(const ExtractorSpec& spec, const BitString& x,
                  const BitString& y) {
  if (spec.kind() == ExtractorKind::Trevisan) return trevisan_ext(spec, x, y);
  if (x.size() != spec.n() || y.size() != spec.d())
    throw std::invalid_argument("extract: input length mismatch");
  BitString out(1);
  out.set(0, ext_one_bit(x, expand_seed_cyclic(y, spec.n())));
  return out;
}

std::vector<BitString> enumerate_blocks(const ExtractorSpec& spec,
                                        const BitString& x) {
  if (spec.d() > 20)
    throw resource_limit_error("enumerate_blocks: 2^d exceeds desk-scale cap");
  const std::size_t count = std::size_t{1} << spec.d();
  std::vector<BitString> blocks;
  blocks.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    blocks.push_back(extract(spec, x, BitString::from_value(i, spec.d())));
  return blocks;
}

void ClassicalSource::validate() const {
  if (n_bits == 0 || p.empty())
    throw std::invalid_argument("source: empty table");
  if (p.size() != (std::size_t{1} << n_bits))
    throw std::invalid_argument("source: table must cover all 2^n values");
  const std::size_t ne = p[0].size();
  if (ne == 0) throw std::invalid_argument("source: no side-information column");
  double sum = 0.0;
  for (const auto& row : p) {
    if (row.size() != ne) throw std::invalid_argument("source: ragged table");
    for (double v : row) {
      if (v < -1e-12 || !std::isfinite(v))
        throw std::invalid_argument("source: bad probability");
      sum += v;
    }
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("source: table does not sum to 1");
}

std::vector<double> ClassicalSource::e_marginal() const {
  std::vector<double> out(e_count(), 0.0);
  for (const auto& row : p)
    for (std::size_t e = 0; e < out.size(); ++e) out[e] += row[e];
  return out;
}

std::vector<double> ClassicalSource::x_marginal() const {
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t x = 0; x < p.size(); ++x)
    for (double v : p[x]) out[x] += v;
  return out;
}

double ClassicalSource::min_entropy_to_e() const {
  double guess = 0.0;
  for (std::size_t e = 0; e < e_count(); ++e) {
    double best = 0.0;
    for (const auto& row : p) best = std::max(best, row[e]);
    guess += best;
  }
  return -std::log2(guess);
}

ClassicalSource ClassicalSource::flat_random(SplitMix64& rng, std::size_t n,
                                             std::size_t k) {
  if (k > n) throw std::invalid_argument("source: k <= n required");
  if (n > 24) throw resource_limit_error("source: n too large for explicit table");
  const std::size_t total = std::size_t{1} << n;
  const std::size_t support = std::size_t{1} << k;
  // Floyd-style sampling of a distinct support set
  std::set<std::uint64_t> chosen;
  while (chosen.size() < support) chosen.insert(rng.next_below(total));
  ClassicalSource src;
  src.n_bits = n;
  src.p.assign(total, std::vector<double>(1, 0.0));
  const double w = 1.0 / static_cast<double>(support);
  for (auto x : chosen) src.p[x][0] = w;
  return src;
}

ClassicalSource ClassicalSource::point_mass(std::size_t n, std::uint64_t x) {
  if (n > 24) throw resource_limit_error("source: n too large for explicit table");
  ClassicalSource src;
  src.n_bits = n;
  src.p.assign(std::size_t{1} << n, std::vector<double>(1, 0.0));
  src.p[x][0] = 1.0;
  return src;
}

ClassicalSource ClassicalSource::uniform(std::size_t n) {
  if (n > 24) throw resource_limit_error("source: n too large for explicit table");
  ClassicalSource src;
  src.n_bits = n;
  const std::size_t total = std::size_t{1} << n;
  src.p.assign(total, std::vector<double>(1, 1.0 / static_cast<double>(total)));
  return src;
}

SrDistanceReport sr_average_distance(const ExtractorSpec& spec,
                                     const ClassicalSource& source) {
  if (spec.n() > 12 || spec.d() > 10)
    throw resource_limit_error("sr_average_distance: exhaustive cap is n<=12, d<=10");
  source.validate();
  if (source.n_bits != spec.n())
    throw std::invalid_argument("sr_average_distance: source length mismatch");

  const std::size_t seeds = std::size_t{1} << spec.d();
  const std::size_t ne = source.e_count();
  const std::size_t outs = std::size_t{1} << spec.m();
  if (spec.m() > 16)
    throw resource_limit_error("sr_average_distance: output alphabet too large");
  const std::vector<double> pe = source.e_marginal();
  const double unif = 1.0 / static_cast<double>(outs);

  SrDistanceReport rep;
  rep.per_block.resize(seeds);
  double total = 0.0;
  std::vector<double> q(outs * ne);
  for (std::size_t i = 0; i < seeds; ++i) {
    const BitString y = BitString::from_value(i, spec.d());
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t x = 0; x < source.p.size(); ++x) {
      bool any = false;
      for (double v : source.p[x])
        if (v != 0.0) any = true;
      if (!any) continue;
      const BitString s = extract(spec, BitString::from_value(x, spec.n()), y);
      std::uint64_t sval = 0;
      for (std::size_t b = 0; b < s.size(); ++b) sval = (sval << 1) | (s.get(b) ? 1 : 0);
      for (std::size_t e = 0; e < ne; ++e) q[sval * ne + e] += source.p[x][e];
    }
    double dist = 0.0;
    for (std::size_t s = 0; s < outs; ++s)
      for (std::size_t e = 0; e < ne; ++e)
        dist += std::abs(q[s * ne + e] - unif * pe[e]);
    rep.per_block[i] = dist;
    total += dist;
    if (i == 0 || dist < rep.min_distance) {
      rep.min_distance = dist;
      rep.argmin = i;
    }
  }
  rep.average = total / static_cast<double>(seeds);
  return rep;
}

}  // namespace prext::ext
