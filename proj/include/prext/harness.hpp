// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "prext/bitstring.hpp"
#include "prext/master.hpp"

namespace prext::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kSweepRowCap = 64;

// Raw weak-source bytes plus metadata.  claimed_k is never trusted for
// security accounting; it only selects which error ledger is reported.
struct SourceFile {
  std::vector<std::uint8_t> raw;
  std::size_t declared_n = 0;
  std::size_t claimed_k = 0;
  std::string provenance;

  void validate() const;
  BitString bits() const;  // first declared_n bits

  // Loads `path`; metadata comes from the JSON sidecar `<path>.json`
  // when present, else from the supplied defaults.
  static SourceFile load(const std::string& path, std::size_t declared_n,
                         std::size_t claimed_k, const std::string& provenance);
};

struct GallerySpec {
  std::string name;     // honest | deterministic | replayer-full-x |
                        // index-aware-replayer
  double noise = 0.0;   // honest gallery only
};

struct RunConfig {
  master::MasterSpec spec;
  GallerySpec gallery;
  double eps_s = 0.0;
  std::uint64_t rng_seed = 0;
  std::size_t trials = 1;
  std::string source_path;
  std::size_t source_declared_n = 0;
  std::size_t source_claimed_k = 0;
  std::string source_provenance;
  std::string z_path;
  std::string report_path;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
};

// Builds the per-instance implementation gallery named by the config
// (adversaries receive the source value, honest galleries ignore it).
master::AdversaryGallery make_gallery(const GallerySpec& gallery,
                                      const master::MasterSpec& spec);

// End-to-end run: parses and validates the config, ingests the source,
// runs the master protocol, writes the JSON report (always) and the
// output bits (on accept).  Returns 0 accept, 2 protocol reject,
// 1 error; diagnostics go to `diag`.
int cli_extract(const std::string& config_path, std::ostream& diag);

// JSON report of the extract run without touching the filesystem.
struct ExtractResult {
  int exit_code = 1;
  master::MasterOutcome outcome;
  nlohmann::json report;
};
ExtractResult run_extract(const RunConfig& config);

// Monobit, runs, and 2-bit serial tests with p-values.  Advisory only:
// statistical tests cannot certify uniformity, they only flag gross
// defects (the report says so in its header note).
nlohmann::json stats_battery(const BitString& bits);

int cli_stats(const std::string& input_path, std::ostream& out,
              std::ostream& diag);

// One CSV row per grid point (eta x noise), deterministic order:
// eta,noise,accept_rate,soundness_probe,completeness_bound,soundness_bound
std::string experiment_sweep_csv(const RunConfig& config,
                                 const nlohmann::json& grid);

int cli_sweep(const std::string& config_path, const std::string& grid_path,
              std::ostream& out, std::ostream& diag);

// Schema check for extract reports; throws std::invalid_argument
// naming the missing or mistyped field.
void validate_report_schema(const nlohmann::json& report);

// Report with volatile fields ("timestamp", "wall_clock_ms") removed,
// for byte-identical comparisons.
nlohmann::json strip_volatile_fields(nlohmann::json report);

}  // namespace prext::harness
