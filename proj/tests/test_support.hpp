// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, implemented independently of the library paths
// they check (different algorithms, plain containers).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracle {

// ---- real-symmetric Jacobi eigenvalues --------------------------------
// Eigenvalues of a Hermitian matrix via its real embedding
// [[Re, -Im], [Im, Re]] and a classic real Jacobi iteration; each
// eigenvalue of the input appears twice in the embedding.

inline std::vector<double> sym_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 128; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-26) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

inline std::vector<double> hermitian_eigenvalues_real_embedding(
    const std::vector<std::vector<std::complex<double>>>& h) {
  const std::size_t n = h.size();
  std::vector<std::vector<double>> m(2 * n, std::vector<double>(2 * n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      m[i][j] = h[i][j].real();
      m[i][j + n] = -h[i][j].imag();
      m[i + n][j] = h[i][j].imag();
      m[i + n][j + n] = h[i][j].real();
    }
  std::vector<double> doubled = sym_eigenvalues(std::move(m));
  std::vector<double> ev;
  for (std::size_t k = 0; k < doubled.size(); k += 2) ev.push_back(doubled[k]);
  return ev;  // descending, each once
}

// Sum of |eigenvalues| for Hermitian input (the trace-norm oracle).
inline double hermitian_trace_norm(
    const std::vector<std::vector<std::complex<double>>>& h) {
  double s = 0.0;
  for (double l : hermitian_eigenvalues_real_embedding(h)) s += std::abs(l);
  return s;
}

// ---- nested-loop partial trace ----------------------------------------
// keep[k] marks subsystems to retain; contraction done by explicit digit
// decomposition of row/column indices.

inline std::vector<std::vector<std::complex<double>>> partial_trace_loops(
    const std::vector<std::vector<std::complex<double>>>& rho,
    const std::vector<std::size_t>& dims, const std::vector<bool>& keep) {
  const std::size_t total = rho.size();
  std::size_t keep_dim = 1;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (keep[k]) keep_dim *= dims[k];
  auto split = [&](std::size_t flat) {
    std::vector<std::size_t> digit(dims.size());
    for (std::size_t k = dims.size(); k-- > 0;) {
      digit[k] = flat % dims[k];
      flat /= dims[k];
    }
    return digit;
  };
  auto kept_index = [&](const std::vector<std::size_t>& digit) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dims.size(); ++k)
      if (keep[k]) idx = idx * dims[k] + digit[k];
    return idx;
  };
  std::vector<std::vector<std::complex<double>>> out(
      keep_dim, std::vector<std::complex<double>>(keep_dim, 0.0));
  for (std::size_t r = 0; r < total; ++r) {
    const auto dr = split(r);
    for (std::size_t c = 0; c < total; ++c) {
      const auto dc = split(c);
      bool traced_equal = true;
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (!keep[k] && dr[k] != dc[k]) traced_equal = false;
      if (traced_equal) out[kept_index(dr)][kept_index(dc)] += rho[r][c];
    }
  }
  return out;
}

// ---- binomial tails ----------------------------------------------------

inline double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// P[Bin(n, p) >= k]
inline double binomial_upper_tail(std::size_t n, double p, std::size_t k) {
  double sum = 0.0;
  for (std::size_t i = k; i <= n; ++i)
    sum += std::exp(log_choose(n, i) + static_cast<double>(i) * std::log(p) +
                    static_cast<double>(n - i) * std::log1p(-p));
  return std::min(1.0, sum);
}

// ---- canonical CHSH strategy, simulated on 2 qubits --------------------
// EPR pair plus the optimal measurement angles, evaluated with plain
// 4x4 complex arithmetic.  Returns the win probability under uniform
// inputs (= cos^2(pi/8)).

inline double chsh_quantum_win_probability() {
  using cd = std::complex<double>;
  // |phi+> = (|00> + |11>)/sqrt(2)
  std::array<cd, 4> psi{cd(1 / std::sqrt(2.0)), 0.0, 0.0, cd(1 / std::sqrt(2.0))};
  // measurement of cos(a) Z + sin(a) X: projector onto outcome o
  auto projector = [](double angle, int outcome) {
    // eigenvectors of cos Z + sin X: |v0> = (cos(a/2), sin(a/2)),
    // |v1> = (-sin(a/2), cos(a/2)) for eigenvalues +1, -1
    const double half = angle / 2.0;
    std::array<cd, 2> v = outcome == 0
                              ? std::array<cd, 2>{std::cos(half), std::sin(half)}
                              : std::array<cd, 2>{-std::sin(half), std::cos(half)};
    std::array<std::array<cd, 2>, 2> p;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) p[i][j] = v[i] * std::conj(v[j]);
    return p;
  };
  const double a_angle[2] = {0.0, M_PI / 2.0};             // Z, X
  const double b_angle[2] = {M_PI / 4.0, -M_PI / 4.0};     // (Z±X)/sqrt 2
  double win = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          if (((a ^ b) == (x & y)) == false) continue;
          const auto pa = projector(a_angle[x], a);
          const auto pb = projector(b_angle[y], b);
          // <psi| Pa (x) Pb |psi>
          cd val = 0.0;
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
              for (int ip = 0; ip < 2; ++ip)
                for (int jp = 0; jp < 2; ++jp)
                  val += std::conj(psi[i * 2 + j]) * pa[i][ip] * pb[j][jp] *
                         psi[ip * 2 + jp];
          win += 0.25 * val.real();
        }
  return win;
}

// ---- straight-line Trevisan reimplementation (golden oracle) -----------
// Fixed instance n=16, d=16, t=4, m=4.  The weak design for m <= t is
// the constant polynomials: S_i = {4a + i : a in 0..3}.  Output bit i is
// the parity of x AND the seed bits of S_i placed at positions
// (s + i) mod 16 (the block rule's rotation by the output index).
// Bits are indexed MSB first within the 16-bit words.

inline std::uint16_t trevisan_16_16_4_4(std::uint16_t x, std::uint16_t y) {
  auto bit = [](std::uint16_t w, int i) { return (w >> (15 - i)) & 1; };
  std::uint16_t out = 0;
  for (int i = 0; i < 4; ++i) {
    int parity = 0;
    for (int a = 0; a < 4; ++a) {
      const int s = 4 * a + i;
      parity ^= bit(x, (s + i) % 16) & bit(y, s);
    }
    out = static_cast<std::uint16_t>((out << 1) | parity);
  }
  return out;  // 4 bits, bit 0 of the output is the MSB of the nibble
}

}  // namespace oracle
