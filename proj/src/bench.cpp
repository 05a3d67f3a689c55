#include "cntuple/bench.hpp"

#include "cntuple/reader.hpp"
#include "cntuple/workload.hpp"
#include "cntuple/writer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>

namespace cntuple {

const char* backend_name(BackendKind backend) {
  return backend == BackendKind::kFile ? "file" : "daos";
}

std::unique_ptr<PageSink> BenchTarget::make_sink() const {
  if (backend == BackendKind::kFile) {
    return std::make_unique<FileSink>(file_path, codec_id);
  }
  DaosSinkOptions options;
  options.strategy = strategy;
  options.objclass = objclass;
  options.codec_id = codec_id;
  return std::make_unique<DaosSink>(container, options);
}

std::shared_ptr<PageSource> BenchTarget::make_source() const {
  if (backend == BackendKind::kFile) {
    return std::make_shared<FileSource>(file_path);
  }
  return std::make_shared<DaosSource>(container);
}

double BenchTarget::now_seconds() const {
  if (backend == BackendKind::kDaos) {
    return container->simulated_seconds();
  }
  auto now = std::chrono::steady_clock::now().time_since_epoch();
  return std::chrono::duration<double>(now).count();
}

void BenchConfig::validate() const {
  if (elements_per_page < 1) throw UsageError("elements_per_page must be at least 1");
  if (elements_per_cluster < elements_per_page) {
    throw UsageError("elements_per_cluster must be at least elements_per_page");
  }
  if (elements_per_cluster % elements_per_page != 0) {
    throw UsageError("elements_per_cluster must be a multiple of elements_per_page");
  }
}

ThroughputReport ThroughputReport::from_runs(const std::vector<RunStats>& runs) {
  if (runs.empty()) throw UsageError("report over zero repetitions");
  ThroughputReport report;
  report.reps = static_cast<std::uint32_t>(runs.size());
  report.bytes = runs.back().bytes;
  report.secs_min = runs.front().seconds;
  report.secs_max = runs.front().seconds;
  double total = 0.0;
  for (const RunStats& run : runs) {
    report.secs_min = std::min(report.secs_min, run.seconds);
    report.secs_max = std::max(report.secs_max, run.seconds);
    total += run.seconds;
  }
  report.secs_avg = total / static_cast<double>(runs.size());
  report.gbps_avg =
      report.secs_avg > 0.0
          ? static_cast<double>(report.bytes) / report.secs_avg / 1e9
          : 0.0;
  return report;
}

namespace {

std::uint64_t stored_page_bytes(const DatasetFooter& footer) {
  std::uint64_t total = 0;
  for (const ClusterDescriptor& cluster : footer.clusters) {
    for (const auto& [column_id, pages] : cluster.page_lists) {
      for (const PageRef& ref : pages) total += ref.locator.stored_size();
    }
  }
  return total;
}

} // namespace

RunStats gen_dataset(const BenchConfig& config, const BenchTarget& target) {
  config.validate();
  auto sink = target.make_sink();
  EventGenerator generator(config.seed);
  DatasetWriter::Options options;
  options.elements_per_page = config.elements_per_page;
  options.elements_per_cluster = config.elements_per_cluster;

  double start = target.now_seconds();
  DatasetWriter writer("DecayTree", workload_schema(), *sink, options);
  for (std::uint64_t i = 0; i < config.entries; ++i) {
    writer.append(event_to_value(generator.next()));
  }
  writer.close();
  double elapsed = target.now_seconds() - start;
  return RunStats{stored_page_bytes(writer.footer()), elapsed};
}

std::uint64_t histogram_checksum(const std::array<std::uint64_t, kHistogramBins>& bins) {
  ByteBuffer bytes(kHistogramBins * 8);
  for (int i = 0; i < kHistogramBins; ++i) {
    put_le<std::uint64_t>(bytes.data() + i * 8, bins[i]);
  }
  return fnv1a64(bytes);
}

AnalysisResult run_analysis(const BenchTarget& target) {
  auto source = target.make_source();
  double start = target.now_seconds();
  std::uint64_t bytes_before = source->io_accounting().page_bytes;

  DatasetReader reader(source);
  std::array<ScalarView<std::int32_t>, 3> muon = {
      reader.view<std::int32_t>("H1_isMuon"),
      reader.view<std::int32_t>("H2_isMuon"),
      reader.view<std::int32_t>("H3_isMuon"),
  };
  std::array<ScalarView<double>, 3> px = {
      reader.view<double>("H1_PX"), reader.view<double>("H2_PX"),
      reader.view<double>("H3_PX")};
  std::array<ScalarView<double>, 3> py = {
      reader.view<double>("H1_PY"), reader.view<double>("H2_PY"),
      reader.view<double>("H3_PY")};
  std::array<ScalarView<double>, 3> pz = {
      reader.view<double>("H1_PZ"), reader.view<double>("H2_PZ"),
      reader.view<double>("H3_PZ")};

  AnalysisResult result;
  const double bin_width = kHistogramMax / kHistogramBins;
  for (std::uint64_t i = 0; i < reader.n_entries(); ++i) {
    if (muon[0].at(i) != 0 || muon[1].at(i) != 0 || muon[2].at(i) != 0) {
      continue;
    }
    double sum = 0.0;
    for (int h = 0; h < 3; ++h) {
      double x = px[h].at(i), y = py[h].at(i), z = pz[h].at(i);
      sum += std::sqrt(x * x + y * y + z * z);
    }
    ++result.selected_entries;
    if (sum >= 0.0 && sum < kHistogramMax) {
      ++result.histogram[static_cast<int>(sum / bin_width)];
    }
  }
  result.checksum = histogram_checksum(result.histogram);
  result.stats.seconds = target.now_seconds() - start;
  result.stats.bytes = source->io_accounting().page_bytes - bytes_before;
  return result;
}

// ── Sweeps ───────────────────────────────────────────────────────────────────

const char* sweep_mode_name(SweepMode mode) {
  return mode == SweepMode::kConstPageGrowCluster ? "grow-cluster" : "grow-page";
}

std::vector<BenchConfig> sweep_cells(SweepMode mode, const BenchConfig& base) {
  std::vector<BenchConfig> cells;
  if (mode == SweepMode::kConstPageGrowCluster) {
    for (std::uint64_t cluster = 20000; cluster <= 320000; cluster *= 2) {
      BenchConfig cell = base;
      cell.elements_per_page = 10000;
      cell.elements_per_cluster = cluster;
      cells.push_back(cell);
    }
  } else {
    for (std::uint64_t page = 10000; page <= 320000; page *= 2) {
      BenchConfig cell = base;
      cell.elements_per_page = page;
      cell.elements_per_cluster = 320000;
      cells.push_back(cell);
    }
  }
  return cells;
}

namespace {

Uuid sequence_uuid(std::uint64_t a, std::uint64_t b) {
  Uuid uuid;
  put_le<std::uint64_t>(reinterpret_cast<std::byte*>(uuid.bytes.data()), a);
  put_le<std::uint64_t>(reinterpret_cast<std::byte*>(uuid.bytes.data() + 8), b);
  return uuid;
}

} // namespace

std::vector<SweepRow> run_sweep(const SweepSettings& settings) {
  if (settings.reps < 1) throw UsageError("sweep needs at least one repetition");

  std::shared_ptr<SimPool> pool;
  if (settings.backend == BackendKind::kDaos) {
    PoolConfig config = settings.pool;
    if (config.uuid == Uuid{}) config.uuid = sequence_uuid(0x706f6f6c, 0);
    pool = std::make_shared<SimPool>(config);
  }
  std::string scratch =
      settings.scratch_dir.empty()
          ? std::filesystem::temp_directory_path().string()
          : settings.scratch_dir;

  std::vector<SweepRow> rows;
  std::uint64_t cell_seq = 0;
  for (const BenchConfig& cell : sweep_cells(settings.mode, settings.base)) {
    SweepRow row;
    row.mode = settings.mode;
    row.config = cell;
    row.backend = settings.backend;
    row.strategy = settings.strategy;
    row.objclass = settings.objclass;
    row.codec_id = settings.codec_id;

    std::vector<RunStats> writes, reads;
    for (std::uint32_t rep = 0; rep < settings.reps; ++rep) {
      BenchTarget target;
      target.backend = settings.backend;
      target.strategy = settings.strategy;
      target.codec_id = settings.codec_id;
      if (settings.backend == BackendKind::kDaos) {
        target.objclass = object_class_from_name(settings.objclass, pool->config().n_targets);
        target.container = pool->open_container(sequence_uuid(cell_seq, rep + 1));
      } else {
        target.file_path = (std::filesystem::path(scratch) /
                            ("sweep_cell" + std::to_string(cell_seq) + ".cntp"))
                               .string();
      }
      writes.push_back(gen_dataset(cell, target));
      reads.push_back(run_analysis(target).stats);
    }
    row.write_report = ThroughputReport::from_runs(writes);
    row.read_report = ThroughputReport::from_runs(reads);
    rows.push_back(row);
    ++cell_seq;
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "mode,page_elems,cluster_elems,backend,mapping,objclass,codec,bytes,"
         "secs_min,secs_avg,secs_max,gbps_avg\n";
  for (const SweepRow& row : rows) {
    const ThroughputReport& r = row.read_report;
    out << sweep_mode_name(row.mode) << ',' << row.config.elements_per_page << ','
        << row.config.elements_per_cluster << ',' << backend_name(row.backend) << ','
        << mapping_name(row.strategy) << ',' << row.objclass << ','
        << codec_name(row.codec_id) << ',' << r.bytes << ',' << r.secs_min << ','
        << r.secs_avg << ',' << r.secs_max << ',' << r.gbps_avg << '\n';
  }
}

} // namespace cntuple
