// SPDX-License-Identifier: Apache-2.0
#include "prext/master.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <thread>

#include "prext/errors.hpp"

namespace prext::master {

void MasterSpec::validate() const {
  seeded.validate();
  if (ext.m() != seeded.seed_len)
    throw std::invalid_argument(
        "master: extractor output length must equal the seeded protocol's "
        "seed length");
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("master: eta must be in (0,1)");
  if (instance_count() > kInstanceCap)
    throw resource_limit_error("master: 2^d exceeds the harness cap");
}

std::uint64_t MasterSpec::config_hash() const {
  BitString probe;
  for (std::uint64_t v :
       {static_cast<std::uint64_t>(ext.n()), static_cast<std::uint64_t>(ext.d()),
        static_cast<std::uint64_t>(ext.m()), static_cast<std::uint64_t>(ext.k()),
        static_cast<std::uint64_t>(eta * 1e12), seeded.config_hash()})
    probe.append(BitString::from_value(v & 0xFFFFFFFFFFFFULL, 48));
  return probe.fnv1a();
}

nlohmann::json ErrorLedger::to_json() const {
  return nlohmann::json{{"eps_ext", eps_ext},
                        {"eps_c", eps_c},
                        {"eps_s", eps_s},
                        {"eta", eta},
                        {"completeness_bound", completeness_bound},
                        {"soundness_bound", soundness_bound}};
}

ErrorLedger error_bounds(double eps_ext, double eps_c, double eps_s, double eta) {
  for (double v : {eps_ext, eps_c, eps_s, eta})
    if (v < 0.0 || v > 1.0 || !std::isfinite(v))
      throw std::invalid_argument("error_bounds: inputs must lie in [0,1]");
  if (eta <= 0.0) throw std::invalid_argument("error_bounds: eta must be positive");
  ErrorLedger lg;
  lg.eps_ext = eps_ext;
  lg.eps_c = eps_c;
  lg.eps_s = eps_s;
  lg.eta = eta;
  lg.completeness_bound = (eps_c + eps_ext) / eta;
  lg.soundness_bound = eps_s + 2.0 * std::sqrt(eps_ext) + eta;
  return lg;
}

BitString xor_combine(const std::vector<BitString>& blocks,
                      const std::vector<bool>& accept_mask) {
  if (blocks.size() != accept_mask.size())
    throw std::invalid_argument("xor_combine: mask length mismatch");
  BitString acc;
  bool first = true;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!accept_mask[i]) continue;
    if (first) {
      acc = blocks[i];
      first = false;
    } else {
      if (blocks[i].size() != acc.size())
        throw std::invalid_argument("xor_combine: block length mismatch");
      acc.xor_assign(blocks[i]);
    }
  }
  return acc;
}

bool threshold_accepts(std::size_t rejects, std::size_t instances, double eta) {
  return static_cast<double>(rejects) <
         eta * static_cast<double>(instances);  // reject iff fraction >= eta
}

namespace {

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("PREXT_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<std::size_t>(v);
  }
  if (n < 1) n = 1;
  return std::min(n, jobs);
}

}  // namespace

MasterOutcome run_master(const MasterSpec& spec, const BitString& x,
                         std::vector<dev::Implementation>& impls,
                         std::uint64_t rng_seed) {
  spec.validate();
  if (x.size() != spec.ext.n())
    throw std::invalid_argument("run_master: source length mismatch");
  const std::size_t count = spec.instance_count();
  if (impls.size() != count)
    throw std::invalid_argument("run_master: need exactly 2^d implementations");
  (void)rng_seed;  // device randomness lives inside the implementations

  // The devices see X only through Ext(X, i).
  std::vector<BitString> seeds;
  seeds.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    seeds.push_back(
        ext::extract(spec.ext, x, BitString::from_value(i, spec.ext.d())));

  std::vector<pre::ProtocolOutcome> results(count);
  const std::size_t workers = worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      results[i] = pre::run_seeded_pre(spec.seeded, seeds[i], impls[i]);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          results[i] = pre::run_seeded_pre(spec.seeded, seeds[i], impls[i]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  MasterOutcome out;
  out.config_hash = spec.config_hash();
  out.instances.reserve(count);
  std::vector<BitString> blocks(count);
  std::vector<bool> mask(count, false);
  std::size_t rejects = 0;
  for (std::size_t i = 0; i < count; ++i) {
    out.instances.push_back({results[i].accept, results[i].stats.win_rate});
    if (results[i].accept) {
      blocks[i] = results[i].output;
      mask[i] = true;
    } else {
      ++rejects;
    }
  }
  out.reject_fraction =
      static_cast<double>(rejects) / static_cast<double>(count);
  out.accept = threshold_accepts(rejects, count, spec.eta);
  if (out.accept) {
    out.output = xor_combine(blocks, mask);
    if (out.output.size() == 0) out.output = BitString(spec.seeded.output_len);
  }
  return out;
}

std::vector<dev::Implementation> build_implementations(const MasterSpec& spec,
                                                       const Gallery& gallery,
                                                       std::uint64_t rng_seed) {
  SplitMix64 root(rng_seed);
  std::vector<dev::Implementation> impls;
  impls.reserve(spec.instance_count());
  for (std::size_t i = 0; i < spec.instance_count(); ++i)
    impls.push_back(gallery(i, root.split(i).seed()));
  return impls;
}

nlohmann::json SoundnessProbeReport::to_json() const {
  return nlohmann::json{{"accept_rate", accept_rate},
                        {"weighted_distance", weighted_distance},
                        {"soundness_bound", soundness_bound},
                        {"exceeded", exceeded},
                        {"exact", exact},
                        {"trials", trials}};
}

SoundnessProbeReport soundness_probe(const MasterSpec& spec,
                                     const AdversaryGallery& adversary,
                                     const ext::ClassicalSource& source,
                                     std::size_t trials, std::uint64_t rng_seed,
                                     double eps_s, bool exact) {
  spec.validate();
  source.validate();
  if (source.n_bits != spec.ext.n())
    throw std::invalid_argument("soundness_probe: source length mismatch");
  if (spec.seeded.output_len > 20)
    throw resource_limit_error("soundness_probe: output histogram needs l <= 20");

  SoundnessProbeReport rep;
  rep.exact = exact;
  rep.soundness_bound =
      error_bounds(spec.ext.eps(), 0.0, eps_s, spec.eta).soundness_bound;
  const std::size_t outs = std::size_t{1} << spec.seeded.output_len;
  const double unif = 1.0 / static_cast<double>(outs);

  // joint weight over (x, accept, z); x collapses to one cell in MC mode
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> accept_mass;
  std::map<std::uint64_t, double> accept_by_x;

  auto z_value = [](const BitString& z) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < z.size(); ++b) v = (v << 1) | (z.get(b) ? 1 : 0);
    return v;
  };

  SplitMix64 root(rng_seed);
  if (exact) {
    const std::vector<double> px = source.x_marginal();
    std::size_t runs = 0;
    for (std::size_t xv = 0; xv < px.size(); ++xv) {
      if (px[xv] == 0.0) continue;
      const BitString x = BitString::from_value(xv, spec.ext.n());
      std::vector<dev::Implementation> impls;
      for (std::size_t i = 0; i < spec.instance_count(); ++i)
        impls.push_back(adversary(x, i, root.split(i).seed()));
      const MasterOutcome mo = run_master(spec, x, impls, 0);
      ++runs;
      if (mo.accept) {
        accept_by_x[xv] += px[xv];
        accept_mass[{xv, z_value(mo.output)}] += px[xv];
        rep.accept_rate += px[xv];
      }
    }
    rep.trials = runs;
  } else {
    if (trials < 1) throw std::invalid_argument("soundness_probe: trials >= 1");
    const std::vector<double> px = source.x_marginal();
    std::size_t accepts = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      SplitMix64 trial = root.split(t);
      // inverse-CDF draw from the source
      double u = trial.next_double();
      std::uint64_t xv = 0;
      for (std::size_t v = 0; v < px.size(); ++v) {
        if (u < px[v] || v + 1 == px.size()) {
          xv = v;
          break;
        }
        u -= px[v];
      }
      const BitString x = BitString::from_value(xv, spec.ext.n());
      std::vector<dev::Implementation> impls;
      for (std::size_t i = 0; i < spec.instance_count(); ++i)
        impls.push_back(adversary(x, i, trial.split(i + 1).seed()));
      const MasterOutcome mo = run_master(spec, x, impls, 0);
      if (mo.accept) {
        ++accepts;
        const double w = 1.0 / static_cast<double>(trials);
        accept_by_x[0] += w;
        accept_mass[{0, z_value(mo.output)}] += w;
      }
    }
    rep.trials = trials;
    rep.accept_rate =
        static_cast<double>(accepts) / static_cast<double>(trials);
  }

  double dist = 0.0;
  for (const auto& [xv, mass] : accept_by_x) {
    // cells with samples
    double seen = 0.0;
    for (std::uint64_t z = 0; z < outs; ++z) {
      auto it = accept_mass.find({xv, z});
      const double got = (it == accept_mass.end()) ? 0.0 : it->second;
      dist += std::abs(got - mass * unif);
      seen += got;
    }
    (void)seen;
  }
  rep.weighted_distance = dist;
  rep.exceeded = rep.weighted_distance > rep.soundness_bound + 1e-12;
  return rep;
}

}  // namespace prext::master
