#pragma once

#include "cntuple/daos_backend.hpp"
#include "cntuple/file_backend.hpp"
#include "cntuple/object_store.hpp"
#include "cntuple/pagestore.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace cntuple {

enum class BackendKind : std::uint8_t { kFile = 0, kDaos = 1 };

const char* backend_name(BackendKind backend);

// Where a benchmark dataset lives: a file path or a simulated container.
struct BenchTarget {
  BackendKind backend = BackendKind::kFile;
  std::string file_path;
  std::shared_ptr<SimContainer> container;
  MappingStrategy strategy = MappingStrategy::kOidPerPage;
  ObjectClass objclass = ObjectClass::sx();
  std::uint16_t codec_id = kCodecNone;

  std::unique_ptr<PageSink> make_sink() const;
  std::shared_ptr<PageSource> make_source() const;
  // Simulated clock for daos targets, wall clock otherwise.
  double now_seconds() const;
};

// One benchmark cell: dataset shape + placement + workload size.
struct BenchConfig {
  std::uint64_t elements_per_page = 10000;
  std::uint64_t elements_per_cluster = 320000;
  std::uint64_t entries = 100000;
  std::uint64_t seed = 42;

  void validate() const; // cluster ≥ page and a multiple of it
};

struct RunStats {
  std::uint64_t bytes = 0; // stored page bytes moved (metadata excluded)
  double seconds = 0.0;
};

struct ThroughputReport {
  std::uint64_t bytes = 0;
  double secs_min = 0.0;
  double secs_avg = 0.0;
  double secs_max = 0.0;
  double gbps_avg = 0.0;
  std::uint32_t reps = 0;

  static ThroughputReport from_runs(const std::vector<RunStats>& runs);
};

// Writes `entries` synthetic events to the target; deterministic in
// (seed, config).
RunStats gen_dataset(const BenchConfig& config, const BenchTarget& target);

inline constexpr int kHistogramBins = 100;
inline constexpr double kHistogramMax = 300.0; // [0, 300), 3 GeV bins

struct AnalysisResult {
  std::array<std::uint64_t, kHistogramBins> histogram{};
  std::uint64_t checksum = 0;
  std::uint64_t selected_entries = 0;
  RunStats stats;
};

std::uint64_t histogram_checksum(const std::array<std::uint64_t, kHistogramBins>& bins);

// Full scan over the 12 analysis columns (three isMuon flags and nine
// momentum components): keeps events whose hadrons are all non-muons and
// histograms the summed momentum magnitude.
AnalysisResult run_analysis(const BenchTarget& target);

// ── Parameter sweeps ─────────────────────────────────────────────────────────

enum class SweepMode : std::uint8_t {
  kConstPageGrowCluster = 0, // page 10000; cluster 20000 … 320000
  kGrowPageConstCluster = 1, // page 10000 … 320000; cluster 320000
};

const char* sweep_mode_name(SweepMode mode);

// Cell shapes exactly as swept in the evaluation.
std::vector<BenchConfig> sweep_cells(SweepMode mode, const BenchConfig& base);

struct SweepSettings {
  SweepMode mode = SweepMode::kConstPageGrowCluster;
  BenchConfig base;
  BackendKind backend = BackendKind::kFile;
  MappingStrategy strategy = MappingStrategy::kOidPerPage;
  std::string objclass = "sx";
  std::uint16_t codec_id = kCodecNone;
  std::uint32_t reps = 20;
  PoolConfig pool;            // daos targets
  std::string scratch_dir;    // file targets
};

struct SweepRow {
  SweepMode mode;
  BenchConfig config;
  BackendKind backend;
  MappingStrategy strategy;
  std::string objclass;
  std::uint16_t codec_id;
  ThroughputReport write_report;
  ThroughputReport read_report;
};

std::vector<SweepRow> run_sweep(const SweepSettings& settings);

// One CSV row per cell; the timing columns carry the read (analysis) phase.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

} // namespace cntuple
