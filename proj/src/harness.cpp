// SPDX-License-Identifier: Apache-2.0
#include "prext/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "prext/errors.hpp"

namespace prext::harness {

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc;
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

template <typename T>
T require(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field))
    throw std::invalid_argument("config: missing field '" + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("config: field '" + field + "' has wrong type");
  }
}

}  // namespace

void SourceFile::validate() const {
  if (declared_n == 0)
    throw std::invalid_argument("source.declared_n: must be positive");
  if (declared_n > raw.size() * 8)
    throw std::invalid_argument(
        "source.declared_n: exceeds available bits in file");
  if (claimed_k > declared_n)
    throw std::invalid_argument("source.claimed_k: exceeds declared_n");
}

BitString SourceFile::bits() const { return BitString::from_bytes(raw, declared_n); }

SourceFile SourceFile::load(const std::string& path, std::size_t declared_n,
                            std::size_t claimed_k, const std::string& provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("source.path: cannot open '" + path + "'");
  SourceFile sf;
  sf.raw.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  sf.declared_n = declared_n;
  sf.claimed_k = claimed_k;
  sf.provenance = provenance;
  std::ifstream side(path + ".json");
  if (side) {
    nlohmann::json j;
    side >> j;
    if (j.contains("declared_n")) sf.declared_n = j["declared_n"].get<std::size_t>();
    if (j.contains("claimed_k")) sf.claimed_k = j["claimed_k"].get<std::size_t>();
    if (j.contains("provenance")) sf.provenance = j["provenance"].get<std::string>();
  }
  sf.validate();
  return sf;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  const auto ext_j = require<nlohmann::json>(j, "ext");
  const auto kind = require<std::string>(ext_j, "kind");
  const auto n = require<std::size_t>(ext_j, "n");
  const auto d = require<std::size_t>(ext_j, "d");
  const auto k = require<std::size_t>(ext_j, "k");
  if (kind == "trevisan") {
    cfg.spec.ext = ext::ExtractorSpec::trevisan(
        n, d, require<std::size_t>(ext_j, "m"), k, require<double>(ext_j, "eps"),
        require<std::size_t>(ext_j, "t"));
  } else if (kind == "one-bit-xor") {
    cfg.spec.ext = ext::ExtractorSpec::one_bit_xor(n, d, k);
  } else {
    throw std::invalid_argument("config: ext.kind must be trevisan or one-bit-xor");
  }

  const auto seeded_j = require<nlohmann::json>(j, "seeded");
  const auto rounds = require<std::size_t>(seeded_j, "rounds");
  const auto w = require<double>(seeded_j, "win_threshold");
  cfg.spec.seeded = pre::SeededPreSpec::standard(
      rounds, dev::kChshQuantum - w, require<std::size_t>(seeded_j, "output_len"),
      require<std::size_t>(seeded_j, "hash_t"),
      require<std::size_t>(seeded_j, "hash_d"));
  cfg.spec.eta = require<double>(j, "eta");
  cfg.spec.validate();

  const auto gal = require<nlohmann::json>(j, "gallery");
  cfg.gallery.name = require<std::string>(gal, "name");
  if (gal.contains("noise")) cfg.gallery.noise = gal["noise"].get<double>();
  if (cfg.gallery.noise < 0.0 || cfg.gallery.noise > 1.0)
    throw std::invalid_argument("config: gallery.noise must be in [0,1]");

  cfg.eps_s = require<double>(j, "eps_s");
  cfg.rng_seed = require<std::uint64_t>(j, "rng_seed");
  cfg.trials = j.value("trials", std::size_t{1});

  const auto src = require<nlohmann::json>(j, "source");
  cfg.source_path = require<std::string>(src, "path");
  cfg.source_declared_n = src.value("declared_n", std::size_t{0});
  cfg.source_claimed_k = src.value("claimed_k", std::size_t{0});
  cfg.source_provenance = src.value("provenance", std::string{});

  const auto outp = require<nlohmann::json>(j, "output");
  cfg.z_path = require<std::string>(outp, "z_path");
  cfg.report_path = require<std::string>(outp, "report_path");
  make_gallery(cfg.gallery, cfg.spec);  // referenced gallery must exist
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") +
                                e.what());
  }
  return from_json(j);
}

namespace {

dev::Implementation zero_output_pair() {
  dev::StrategyTable t;
  t.input_len = 1;
  t.output_len = 1;
  t.entries["0"] = "0";
  t.entries["1"] = "0";
  return dev::make_deterministic({t, t});
}

// Input streams the adversary anticipates for seed index `guess`.
std::pair<BitString, BitString> anticipated_streams(
    const master::MasterSpec& spec, const BitString& x, std::size_t guess) {
  const BitString seed = ext::extract(
      spec.ext, x, BitString::from_value(guess, spec.ext.d()));
  const std::size_t rounds = spec.seeded.rounds;
  BitString a(rounds), b(rounds);
  for (std::size_t j = 0; j < rounds; ++j) {
    a.set(j, seed.get(2 * j));
    b.set(j, seed.get(2 * j + 1));
  }
  return {a, b};
}

}  // namespace

master::AdversaryGallery make_gallery(const GallerySpec& gallery,
                                      const master::MasterSpec& spec) {
  if (gallery.name == "honest") {
    const double noise = gallery.noise;
    return [noise](const BitString&, std::size_t, std::uint64_t seed) {
      return dev::make_chsh_pair(noise, seed);
    };
  }
  if (gallery.name == "deterministic") {
    return [](const BitString&, std::size_t, std::uint64_t) {
      return zero_output_pair();
    };
  }
  if (gallery.name == "replayer-full-x") {
    // Full X knowledge but no knowledge of the seed index the instance
    // will serve: every pair replays the transcript for index 0.
    return [spec](const BitString& x, std::size_t, std::uint64_t) {
      return dev::make_source_correlated_cheater(
          [](const BitString& src) { return src; },
          [&spec](const BitString& knowledge) {
            const auto [a, b] = anticipated_streams(spec, knowledge, 0);
            return dev::make_replayer_pair(a, b);
          },
          x);
    };
  }
  if (gallery.name == "index-aware-replayer") {
    // Counterexample adversary: also knows its seed index, so it
    // anticipates every round exactly and is always accepted.
    return [spec](const BitString& x, std::size_t instance, std::uint64_t) {
      return dev::make_source_correlated_cheater(
          [](const BitString& src) { return src; },
          [&spec, instance](const BitString& knowledge) {
            const auto [a, b] = anticipated_streams(spec, knowledge, instance);
            return dev::make_replayer_pair(a, b);
          },
          x);
    };
  }
  throw std::invalid_argument("config: unknown gallery '" + gallery.name + "'");
}

ExtractResult run_extract(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  SourceFile sf = SourceFile::load(config.source_path, config.source_declared_n,
                                   config.source_claimed_k,
                                   config.source_provenance);
  if (sf.declared_n != config.spec.ext.n())
    throw std::invalid_argument(
        "source.declared_n: must equal ext.n (" +
        std::to_string(config.spec.ext.n()) + ")");
  const BitString x = sf.bits();

  master::AdversaryGallery gallery = make_gallery(config.gallery, config.spec);
  SplitMix64 root(config.rng_seed);
  std::vector<dev::Implementation> impls;
  for (std::size_t i = 0; i < config.spec.instance_count(); ++i)
    impls.push_back(gallery(x, i, root.split(i).seed()));
  master::MasterOutcome mo =
      master::run_master(config.spec, x, impls, config.rng_seed);

  const master::ErrorLedger ledger = master::error_bounds(
      config.spec.ext.eps(), 0.0, config.eps_s, config.spec.eta);
  const auto t1 = std::chrono::steady_clock::now();
  const double ms =
      std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() /
      1000.0;

  nlohmann::json instances = nlohmann::json::array();
  for (const auto& inst : mo.instances)
    instances.push_back({{"accept", inst.accept}, {"win_rate", inst.win_rate}});

  ExtractResult res;
  res.outcome = mo;
  res.report = nlohmann::json{{"schema_version", kSchemaVersion},
                              {"decision", mo.accept ? 1 : 0},
                              {"z_hex", mo.output.to_hex()},
                              {"reject_fraction", mo.reject_fraction},
                              {"instances", instances},
                              {"error_ledger", ledger.to_json()},
                              {"gallery", config.gallery.name},
                              {"source_provenance", sf.provenance},
                              {"claimed_k", sf.claimed_k},
                              {"config_hash", config.spec.config_hash()},
                              {"timestamp", now_iso8601()},
                              {"wall_clock_ms", ms}};
  res.exit_code = mo.accept ? 0 : 2;
  return res;
}

int cli_extract(const std::string& config_path, std::ostream& diag) {
  RunConfig config;
  try {
    config = RunConfig::load(config_path);
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    ExtractResult res = run_extract(config);
    {
      std::ofstream rep(config.report_path);
      if (!rep) {
        diag << "error: output.report_path: cannot write '" << config.report_path
             << "'\n";
        return 1;
      }
      rep << res.report.dump(2) << "\n";
    }
    if (res.outcome.accept) {
      std::ofstream z(config.z_path, std::ios::binary);
      if (!z) {
        diag << "error: output.z_path: cannot write '" << config.z_path << "'\n";
        return 1;
      }
      const auto bytes = res.outcome.output.to_bytes();
      z.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    }
    return res.exit_code;
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return 1;
  }
}

nlohmann::json stats_battery(const BitString& bits) {
  const std::size_t n = bits.size();
  if (n < 128)
    throw std::invalid_argument("stats_battery: need at least 128 bits");
  const double nd = static_cast<double>(n);

  // monobit
  const std::size_t ones = bits.count_ones();
  const double s_obs =
      std::abs(2.0 * static_cast<double>(ones) - nd) / std::sqrt(nd);
  const double p_monobit = std::erfc(s_obs / std::sqrt(2.0));

  // runs
  const double pi = static_cast<double>(ones) / nd;
  double p_runs = 0.0;
  std::size_t runs = 1;
  if (std::abs(pi - 0.5) < 2.0 / std::sqrt(nd)) {
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (bits.get(i) != bits.get(i + 1)) ++runs;
    const double vn = static_cast<double>(runs);
    p_runs = std::erfc(std::abs(vn - 2.0 * nd * pi * (1.0 - pi)) /
                       (2.0 * std::sqrt(2.0 * nd) * pi * (1.0 - pi)));
  }

  // serial test, m = 2 (overlapping, cyclic)
  double c2[4] = {0, 0, 0, 0};
  double c1[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const bool b0 = bits.get(i);
    const bool b1 = bits.get((i + 1) % n);
    ++c2[(b0 ? 2 : 0) + (b1 ? 1 : 0)];
    ++c1[b0 ? 1 : 0];
  }
  const double psi2 =
      (4.0 / nd) * (c2[0] * c2[0] + c2[1] * c2[1] + c2[2] * c2[2] + c2[3] * c2[3]) -
      nd;
  const double psi1 = (2.0 / nd) * (c1[0] * c1[0] + c1[1] * c1[1]) - nd;
  const double delta = psi2 - psi1;
  const double p_serial = std::exp(-delta / 2.0);

  auto entry = [](double stat, double p) {
    return nlohmann::json{{"statistic", stat}, {"p_value", p}, {"pass", p >= 0.01}};
  };
  return nlohmann::json{
      {"schema_version", kSchemaVersion},
      {"note",
       "advisory only: no statistical battery can certify that a generator "
       "is uniform; these tests only flag gross defects"},
      {"n_bits", n},
      {"monobit", entry(s_obs, p_monobit)},
      {"runs", entry(static_cast<double>(runs), p_runs)},
      {"serial2", entry(delta, p_serial)}};
}

int cli_stats(const std::string& input_path, std::ostream& out,
              std::ostream& diag) {
  std::ifstream in(input_path, std::ios::binary);
  if (!in) {
    diag << "error: cannot open '" << input_path << "'\n";
    return 1;
  }
  std::vector<std::uint8_t> raw(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>{});
  try {
    const BitString bits = BitString::from_bytes(raw, raw.size() * 8);
    out << stats_battery(bits).dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return 1;
  }
}

namespace {

std::size_t sweep_worker_count(std::size_t rows) {
  std::size_t n = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("PREXT_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<std::size_t>(v);
  }
  if (n < 1) n = 1;
  return std::min(n, rows);
}

}  // namespace

std::string experiment_sweep_csv(const RunConfig& config,
                                 const nlohmann::json& grid) {
  if (!grid.contains("eta") || !grid.contains("noise"))
    throw std::invalid_argument("grid: needs 'eta' and 'noise' arrays");
  const std::vector<double> etas = grid["eta"].get<std::vector<double>>();
  const std::vector<double> noises = grid["noise"].get<std::vector<double>>();
  if (etas.size() * noises.size() > kSweepRowCap)
    throw resource_limit_error("grid: exceeds sweep row cap");

  SourceFile sf = SourceFile::load(config.source_path, config.source_declared_n,
                                   config.source_claimed_k,
                                   config.source_provenance);
  const BitString x = sf.bits();

  std::vector<std::pair<double, double>> points;
  for (const double eta : etas)
    for (const double noise : noises) points.emplace_back(eta, noise);

  auto run_row = [&](const std::pair<double, double>& pt) {
    const auto [eta, noise] = pt;
    master::MasterSpec spec = config.spec;
    spec.eta = eta;
    GallerySpec gs{config.gallery.name, noise};
    master::AdversaryGallery gallery = make_gallery(gs, spec);

    std::size_t accepts = 0;
    SplitMix64 root(config.rng_seed);
    for (std::size_t t = 0; t < config.trials; ++t) {
      SplitMix64 trial = root.split(t);
      std::vector<dev::Implementation> impls;
      for (std::size_t i = 0; i < spec.instance_count(); ++i)
        impls.push_back(gallery(x, i, trial.split(i).seed()));
      if (master::run_master(spec, x, impls, trial.seed()).accept) ++accepts;
    }
    const double accept_rate =
        static_cast<double>(accepts) / static_cast<double>(config.trials);

    ext::ClassicalSource probe_source = ext::ClassicalSource::flat_random(
        root, spec.ext.n() <= 12 ? spec.ext.n() : 12,
        std::min<std::size_t>(sf.claimed_k, 8));
    double probe = 0.0;
    if (probe_source.n_bits == spec.ext.n() && spec.seeded.output_len <= 12) {
      probe = master::soundness_probe(spec, gallery, probe_source,
                                      config.trials, root.split(999).seed(),
                                      config.eps_s, /*exact=*/false)
                  .weighted_distance;
    }
    const master::ErrorLedger ledger =
        master::error_bounds(spec.ext.eps(), 0.0, config.eps_s, eta);

    char row[256];
    std::snprintf(row, sizeof(row), "%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", eta,
                  noise, accept_rate, probe, ledger.completeness_bound,
                  ledger.soundness_bound);
    return std::string(row);
  };

  // rows run in a worker pool as isolated jobs; assembly stays
  // single-threaded in grid order
  std::vector<std::string> rows(points.size());
  const std::size_t workers = sweep_worker_count(points.size());
  if (workers <= 1) {
    for (std::size_t r = 0; r < points.size(); ++r) rows[r] = run_row(points[r]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t r = next.fetch_add(1);
          if (r >= points.size()) return;
          rows[r] = run_row(points[r]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  std::ostringstream csv;
  csv << "eta,noise,accept_rate,soundness_probe,completeness_bound,"
         "soundness_bound\n";
  for (const auto& row : rows) csv << row;
  return csv.str();
}

int cli_sweep(const std::string& config_path, const std::string& grid_path,
              std::ostream& out, std::ostream& diag) {
  try {
    RunConfig config = RunConfig::load(config_path);
    std::ifstream gin(grid_path);
    if (!gin) {
      diag << "error: cannot open grid '" << grid_path << "'\n";
      return 1;
    }
    nlohmann::json grid;
    gin >> grid;
    out << experiment_sweep_csv(config, grid);
    return 0;
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return 1;
  }
}

void validate_report_schema(const nlohmann::json& report) {
  auto need = [&report](const char* field, bool ok) {
    if (!report.contains(field))
      throw std::invalid_argument(std::string("report: missing '") + field + "'");
    if (!ok)
      throw std::invalid_argument(std::string("report: bad type for '") + field +
                                  "'");
  };
  need("schema_version", report.value("schema_version", -1) >= 1);
  need("decision", report.contains("decision") && report["decision"].is_number());
  need("z_hex", report.contains("z_hex") && report["z_hex"].is_string());
  need("instances", report.contains("instances") && report["instances"].is_array());
  need("error_ledger",
       report.contains("error_ledger") && report["error_ledger"].is_object());
  need("config_hash",
       report.contains("config_hash") && report["config_hash"].is_number());
  need("timestamp", report.contains("timestamp") && report["timestamp"].is_string());
  need("wall_clock_ms",
       report.contains("wall_clock_ms") && report["wall_clock_ms"].is_number());
}

nlohmann::json strip_volatile_fields(nlohmann::json report) {
  report.erase("timestamp");
  report.erase("wall_clock_ms");
  return report;
}

}  // namespace prext::harness
