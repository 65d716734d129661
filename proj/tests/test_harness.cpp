// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prext/errors.hpp"
#include "prext/harness.hpp"

using namespace prext;
using namespace prext::harness;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("prext_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

nlohmann::json base_config(const TempDir& dir, const std::string& gallery) {
  return nlohmann::json{
      {"ext",
       {{"kind", "trevisan"}, {"n", 64}, {"d", 2}, {"m", 804}, {"k", 16},
        {"eps", 0.25}, {"t", 2}}},
      {"seeded",
       {{"rounds", 400}, {"win_threshold", 0.83}, {"output_len", 16},
        {"hash_t", 2}, {"hash_d", 4}}},
      {"eta", 0.5},
      {"gallery", {{"name", gallery}, {"noise", 0.0}}},
      {"eps_s", 0.05},
      {"rng_seed", 424242},
      {"trials", 4},
      {"source",
       {{"path", dir.file("source.bin")}, {"declared_n", 64}, {"claimed_k", 16},
        {"provenance", "test fixture"}}},
      {"output",
       {{"z_path", dir.file("z.bin")}, {"report_path", dir.file("report.json")}}}};
}

void write_source(const TempDir& dir) {
  write_bytes(dir.file("source.bin"),
              {0xC5, 0x2A, 0x71, 0x4E, 0x9D, 0x3B, 0x86, 0xF0});
}

// small-n config so the sweep's soundness probe actually runs
nlohmann::json sweep_config(const TempDir& dir) {
  nlohmann::json j = base_config(dir, "honest");
  j["ext"] = {{"kind", "trevisan"}, {"n", 8}, {"d", 2}, {"m", 804}, {"k", 4},
              {"eps", 0.25}, {"t", 2}};
  j["seeded"]["output_len"] = 4;
  j["source"]["path"] = dir.file("sweep_source.bin");
  j["source"]["declared_n"] = 8;
  j["source"]["claimed_k"] = 4;
  return j;
}

}  // namespace

TEST_CASE("source file validation") {
  TempDir dir;
  write_bytes(dir.file("s.bin"), {0xFF, 0x00});
  const SourceFile ok = SourceFile::load(dir.file("s.bin"), 12, 6, "beacon dump");
  CHECK(ok.bits().size() == 12);
  CHECK(ok.bits().get(0));

  CHECK_THROWS_WITH_AS(SourceFile::load(dir.file("s.bin"), 20, 4, ""),
                       doctest::Contains("declared_n"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(SourceFile::load(dir.file("s.bin"), 12, 14, ""),
                       doctest::Contains("claimed_k"), std::invalid_argument);
  CHECK_THROWS_AS(SourceFile::load(dir.file("missing.bin"), 4, 2, ""),
                  std::invalid_argument);
}

TEST_CASE("source sidecar overrides metadata") {
  TempDir dir;
  write_bytes(dir.file("s.bin"), {0xAB, 0xCD, 0xEF});
  write_file(dir.file("s.bin.json"),
             R"({"declared_n": 20, "claimed_k": 10, "provenance": "sidecar"})");
  const SourceFile sf = SourceFile::load(dir.file("s.bin"), 8, 2, "inline");
  CHECK(sf.declared_n == 20);
  CHECK(sf.claimed_k == 10);
  CHECK(sf.provenance == "sidecar");
}

TEST_CASE("config parsing names missing or mistyped fields") {
  TempDir dir;
  nlohmann::json j = base_config(dir, "honest");
  CHECK_NOTHROW(RunConfig::from_json(j));

  nlohmann::json missing = j;
  missing.erase("eta");
  CHECK_THROWS_WITH_AS(RunConfig::from_json(missing), doctest::Contains("eta"),
                       std::invalid_argument);

  nlohmann::json bad_type = j;
  bad_type["seeded"]["rounds"] = "many";
  CHECK_THROWS_WITH_AS(RunConfig::from_json(bad_type),
                       doctest::Contains("rounds"), std::invalid_argument);

  nlohmann::json bad_gallery = j;
  bad_gallery["gallery"]["name"] = "mystery";
  CHECK_THROWS_WITH_AS(RunConfig::from_json(bad_gallery),
                       doctest::Contains("mystery"), std::invalid_argument);
}

TEST_CASE("cli_extract: honest happy path writes Z and a valid report") {
  TempDir dir;
  write_source(dir);
  write_file(dir.file("config.json"), base_config(dir, "honest").dump(2));
  std::ostringstream diag;
  const int code = cli_extract(dir.file("config.json"), diag);
  CHECK(code == 0);
  CHECK(diag.str().empty());

  std::ifstream z(dir.file("z.bin"), std::ios::binary);
  REQUIRE(z.good());
  std::vector<char> zbytes(std::istreambuf_iterator<char>(z), {});
  CHECK(zbytes.size() == 2);  // 16 bits

  std::ifstream rep(dir.file("report.json"));
  REQUIRE(rep.good());
  nlohmann::json report;
  rep >> report;
  CHECK_NOTHROW(validate_report_schema(report));
  CHECK(report["decision"] == 1);
  CHECK(report["instances"].size() == 4);
}

TEST_CASE("cli_extract: deterministic gallery exits 2 with a reject report") {
  TempDir dir;
  write_source(dir);
  write_file(dir.file("config.json"), base_config(dir, "deterministic").dump(2));
  std::ostringstream diag;
  const int code = cli_extract(dir.file("config.json"), diag);
  CHECK(code == 2);
  std::ifstream rep(dir.file("report.json"));
  nlohmann::json report;
  rep >> report;
  CHECK(report["decision"] == 0);
  CHECK(report["z_hex"] == "");
  CHECK_FALSE(fs::exists(dir.file("z.bin")));
}

TEST_CASE("cli_extract: truncated source exits 1 naming the field") {
  TempDir dir;
  write_bytes(dir.file("source.bin"), {0xC5});  // 8 bits < declared 16
  write_file(dir.file("config.json"), base_config(dir, "honest").dump(2));
  std::ostringstream diag;
  CHECK(cli_extract(dir.file("config.json"), diag) == 1);
  CHECK(diag.str().find("declared_n") != std::string::npos);
}

TEST_CASE("cli_extract: malformed config exits 1") {
  TempDir dir;
  write_file(dir.file("config.json"), "{ not json");
  std::ostringstream diag;
  CHECK(cli_extract(dir.file("config.json"), diag) == 1);
  CHECK(diag.str().find("error") != std::string::npos);
}

TEST_CASE("reproducibility: identical config gives identical reports") {
  TempDir dir;
  write_source(dir);
  write_file(dir.file("config.json"), base_config(dir, "honest").dump(2));
  std::ostringstream diag;
  REQUIRE(cli_extract(dir.file("config.json"), diag) == 0);
  nlohmann::json first;
  {
    std::ifstream rep(dir.file("report.json"));
    rep >> first;
  }
  std::ifstream z1s(dir.file("z.bin"), std::ios::binary);
  std::vector<char> z1(std::istreambuf_iterator<char>(z1s), {});

  REQUIRE(cli_extract(dir.file("config.json"), diag) == 0);
  nlohmann::json second;
  {
    std::ifstream rep(dir.file("report.json"));
    rep >> second;
  }
  std::ifstream z2s(dir.file("z.bin"), std::ios::binary);
  std::vector<char> z2(std::istreambuf_iterator<char>(z2s), {});

  CHECK(strip_volatile_fields(first).dump() == strip_volatile_fields(second).dump());
  CHECK(z1 == z2);
}

TEST_CASE("stats battery: extreme inputs fail the right tests") {
  BitString zeros(256);
  const nlohmann::json z = stats_battery(zeros);
  CHECK(z["monobit"]["p_value"].get<double>() < 1e-10);
  CHECK_FALSE(z["monobit"]["pass"].get<bool>());
  CHECK(z.contains("note"));

  BitString alternating(256);
  for (std::size_t i = 0; i < 256; i += 2) alternating.set(i, true);
  const nlohmann::json a = stats_battery(alternating);
  CHECK(a["monobit"]["pass"].get<bool>());  // perfectly balanced
  CHECK_FALSE(a["runs"]["pass"].get<bool>());
  CHECK_FALSE(a["serial2"]["pass"].get<bool>());

  CHECK_THROWS_AS(stats_battery(BitString(100)), std::invalid_argument);
}

TEST_CASE("stats battery: counter-rng output passes with high probability") {
  std::size_t all_pass = 0;
  const std::size_t seeds = 20;
  for (std::size_t s = 0; s < seeds; ++s) {
    SplitMix64 rng(1000 + s);
    const BitString bits = BitString::random(rng, 10000);
    const nlohmann::json r = stats_battery(bits);
    if (r["monobit"]["pass"].get<bool>() && r["runs"]["pass"].get<bool>() &&
        r["serial2"]["pass"].get<bool>())
      ++all_pass;
  }
  CHECK(all_pass >= seeds * 9 / 10);
}

TEST_CASE("cli_stats runs end to end") {
  TempDir dir;
  std::vector<std::uint8_t> bytes(64);
  SplitMix64 rng(5);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next_u64());
  write_bytes(dir.file("bits.bin"), bytes);
  std::ostringstream out, diag;
  CHECK(cli_stats(dir.file("bits.bin"), out, diag) == 0);
  const nlohmann::json j = nlohmann::json::parse(out.str());
  CHECK(j["n_bits"] == 512);

  CHECK(cli_stats(dir.file("nope.bin"), out, diag) == 1);
}

TEST_CASE("experiment sweep: grid cardinality, monotonicity, bounds") {
  TempDir dir;
  write_bytes(dir.file("sweep_source.bin"), {0xB6});
  nlohmann::json cfg_json = sweep_config(dir);
  cfg_json["trials"] = 12;
  const RunConfig cfg = RunConfig::from_json(cfg_json);
  const nlohmann::json grid{{"eta", {0.25, 0.5}}, {"noise", {0.0, 0.1}}};
  const std::string csv = experiment_sweep_csv(cfg, grid);

  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "eta,noise,accept_rate,soundness_probe,completeness_bound,"
        "soundness_bound");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(lines, line)) {
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    REQUIRE(vals.size() == 6);
    rows.push_back(vals);
  }
  REQUIRE(rows.size() == 4);  // 2 x 2 grid
  // per eta, accept rate non-increasing in noise (with healthy slack)
  const double slack = 3.0 * std::sqrt(2.0 * 0.25 / 12.0);
  CHECK(rows[1][2] <= rows[0][2] + slack);
  CHECK(rows[3][2] <= rows[2][2] + slack);
  // soundness probe column within the ledger bound on honest rows
  for (const auto& r : rows) CHECK(r[3] <= r[5] + 1e-9);

  // deterministic row order: a second run is byte-identical
  CHECK(experiment_sweep_csv(cfg, grid) == csv);

  const nlohmann::json big{{"eta", std::vector<double>(9, 0.5)},
                           {"noise", std::vector<double>(9, 0.0)}};
  CHECK_THROWS_AS(experiment_sweep_csv(cfg, big), resource_limit_error);
}

TEST_CASE("replayer-full-x gallery anticipates only its guessed index") {
  TempDir dir;
  write_source(dir);
  const RunConfig cfg = RunConfig::from_json(base_config(dir, "replayer-full-x"));
  SplitMix64 rng(61);
  const BitString x = BitString::random(rng, cfg.spec.ext.n());
  master::AdversaryGallery gallery = make_gallery(cfg.gallery, cfg.spec);
  // against the index-0 stream it anticipated, the pair wins every round
  dev::Implementation impl = gallery(x, 3, 12);
  const BitString seed =
      ext::extract(cfg.spec.ext, x, BitString::from_value(0, cfg.spec.ext.d()));
  std::size_t wins = 0;
  for (std::size_t j = 0; j < cfg.spec.seeded.rounds; ++j) {
    BitString xin(1), yin(1);
    xin.set(0, seed.get(2 * j));
    yin.set(0, seed.get(2 * j + 1));
    const bool a = impl.device(0).invoke(xin).get(0);
    const bool b = impl.device(1).invoke(yin).get(0);
    if ((a != b) == (seed.get(2 * j) && seed.get(2 * j + 1))) ++wins;
  }
  CHECK(wins == cfg.spec.seeded.rounds);
}

TEST_CASE("index-aware replayer gallery defeats the toy protocol by design") {
  // the deliberately omniscient adversary is accepted with a
  // deterministic output: the counterexample the soundness probes flag
  TempDir dir;
  write_source(dir);
  write_file(dir.file("config.json"),
             base_config(dir, "index-aware-replayer").dump(2));
  std::ostringstream diag;
  CHECK(cli_extract(dir.file("config.json"), diag) == 0);
  std::ifstream rep(dir.file("report.json"));
  nlohmann::json report;
  rep >> report;
  CHECK(report["decision"] == 1);
  for (const auto& inst : report["instances"])
    CHECK(inst["win_rate"].get<double>() == 1.0);
}

TEST_CASE("report schema validation catches a missing field") {
  nlohmann::json report{{"schema_version", 1},
                        {"decision", 1},
                        {"z_hex", "ab"},
                        {"instances", nlohmann::json::array()},
                        {"error_ledger", nlohmann::json::object()},
                        {"config_hash", 1},
                        {"timestamp", "2026-01-01T00:00:00Z"},
                        {"wall_clock_ms", 1.0}};
  CHECK_NOTHROW(validate_report_schema(report));
  report.erase("error_ledger");
  CHECK_THROWS_WITH_AS(validate_report_schema(report),
                       doctest::Contains("error_ledger"), std::invalid_argument);
}
