// Benchmark and inspection CLI for cntuple datasets on the file backend or
// the simulated object store.

#include "cntuple/bench.hpp"
#include "cntuple/reader.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace cntuple;

struct CommonOpts {
  std::string location;
  std::string backend = "auto"; // file | daos | auto (from the location)
  std::string mapping = "page";
  std::string objclass = "sx";
  std::string compression = "none";
  std::uint64_t elements_per_page = 10000;
  std::uint64_t elements_per_cluster = 320000;
  std::uint64_t entries = 100000;
  std::uint64_t seed = 42;
  std::uint32_t reps = 20;
  std::string pool_config;
  std::string out = "report.csv";
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts, bool with_location) {
  if (with_location) {
    cmd->add_option("--location", opts.location, "file path or daos:// URI")->required();
  }
  cmd->add_option("--backend", opts.backend, "file|daos (default: from the location)");
  cmd->add_option("--mapping", opts.mapping, "page|cluster|akey");
  cmd->add_option("--objclass", opts.objclass, "sx|rp-xsf");
  cmd->add_option("--compression", opts.compression, "none|general");
  cmd->add_option("--elements-per-page", opts.elements_per_page, "elements per page");
  cmd->add_option("--elements-per-cluster", opts.elements_per_cluster,
                  "entries per cluster");
  cmd->add_option("--entries", opts.entries, "events to generate");
  cmd->add_option("--seed", opts.seed, "generator seed");
  cmd->add_option("--reps", opts.reps, "repetitions per sweep cell");
  cmd->add_option("--pool-config", opts.pool_config,
                  "key=value pool file: n_targets, latency_us, bandwidth_mbps, snapshot_dir");
  cmd->add_option("--out", opts.out, "sweep CSV output path");
}

BackendKind resolve_backend(const CommonOpts& opts) {
  if (opts.backend == "file") return BackendKind::kFile;
  if (opts.backend == "daos") return BackendKind::kDaos;
  if (opts.backend == "auto") {
    return is_daos_uri(opts.location) ? BackendKind::kDaos : BackendKind::kFile;
  }
  throw UsageError("unknown backend: " + opts.backend);
}

PoolConfig pool_config_for(const CommonOpts& opts) {
  PoolConfig config;
  if (!opts.pool_config.empty()) config = load_pool_config(opts.pool_config);
  if (config.snapshot_dir.empty()) config.snapshot_dir = "./daos-sim";
  return config;
}

std::string snapshot_path(const PoolConfig& pool, const DaosUri& uri) {
  return (std::filesystem::path(pool.snapshot_dir) / uri.container_uuid.str()).string();
}

// Builds the target for one-shot commands; daos locations restore any
// existing snapshot so gen/analyze/inspect work across processes.
BenchTarget make_target(const CommonOpts& opts, SimStore& store, bool restore_snapshot) {
  BenchTarget target;
  target.backend = resolve_backend(opts);
  target.strategy = mapping_from_name(opts.mapping);
  target.codec_id = codec_from_name(opts.compression);
  if (target.backend == BackendKind::kFile) {
    target.file_path = opts.location;
    return target;
  }
  DaosUri uri = parse_daos_uri(opts.location);
  PoolConfig pool_config = pool_config_for(opts);
  pool_config.uuid = uri.pool_uuid;
  auto pool = store.create_pool(pool_config);
  target.objclass = object_class_from_name(opts.objclass, pool->config().n_targets);
  target.container = pool->open_container(uri.container_uuid);
  if (restore_snapshot) {
    std::string dir = snapshot_path(pool_config, uri);
    if (!std::filesystem::exists(dir)) {
      throw IoError("no snapshot for " + opts.location + " under " + dir +
                    " (run gen first)");
    }
    target.container->restore(dir);
  }
  return target;
}

void persist_if_daos(const CommonOpts& opts, const BenchTarget& target) {
  if (target.backend != BackendKind::kDaos) return;
  DaosUri uri = parse_daos_uri(opts.location);
  std::string dir = snapshot_path(pool_config_for(opts), uri);
  target.container->persist(dir);
  std::printf("snapshot: %s\n", dir.c_str());
}

void print_run(const char* phase, const RunStats& stats, BackendKind backend) {
  const char* clock = backend == BackendKind::kDaos ? "simulated" : "wall";
  double gbps = stats.seconds > 0 ? static_cast<double>(stats.bytes) / stats.seconds / 1e9 : 0.0;
  std::printf("%s: %llu page bytes in %.6f s (%s), %.3f GB/s\n", phase,
              static_cast<unsigned long long>(stats.bytes), stats.seconds, clock, gbps);
}

int cmd_gen(const CommonOpts& opts) {
  SimStore store;
  BenchTarget target = make_target(opts, store, /*restore_snapshot=*/false);
  BenchConfig config;
  config.elements_per_page = opts.elements_per_page;
  config.elements_per_cluster = opts.elements_per_cluster;
  config.entries = opts.entries;
  config.seed = opts.seed;
  RunStats stats = gen_dataset(config, target);
  print_run("gen", stats, target.backend);
  persist_if_daos(opts, target);
  return 0;
}

int cmd_analyze(const CommonOpts& opts) {
  SimStore store;
  BenchTarget target = make_target(opts, store, /*restore_snapshot=*/true);
  AnalysisResult result = run_analysis(target);
  std::uint64_t filled = 0, total = 0;
  for (std::uint64_t count : result.histogram) {
    if (count > 0) ++filled;
    total += count;
  }
  std::printf("selected %llu entries; histogram: %llu counts in %llu of %d bins\n",
              static_cast<unsigned long long>(result.selected_entries),
              static_cast<unsigned long long>(total),
              static_cast<unsigned long long>(filled), kHistogramBins);
  std::printf("checksum: %016llx\n", static_cast<unsigned long long>(result.checksum));
  print_run("analyze", result.stats, target.backend);
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& mode) {
  if (mode != "grow-page" && mode != "grow-cluster") {
    throw UsageError("unknown sweep mode: " + mode);
  }
  if (opts.backend != "file" && opts.backend != "daos" && opts.backend != "auto") {
    throw UsageError("unknown backend: " + opts.backend);
  }
  SweepSettings settings;
  settings.mode = mode == "grow-page" ? SweepMode::kGrowPageConstCluster
                                      : SweepMode::kConstPageGrowCluster;
  settings.base.entries = opts.entries;
  settings.base.seed = opts.seed;
  settings.backend = opts.backend == "daos" ? BackendKind::kDaos : BackendKind::kFile;
  settings.strategy = mapping_from_name(opts.mapping);
  settings.objclass = opts.objclass;
  settings.codec_id = codec_from_name(opts.compression);
  settings.reps = opts.reps;
  settings.pool = pool_config_for(opts);

  std::vector<SweepRow> rows = run_sweep(settings);
  for (const SweepRow& row : rows) {
    std::printf("cell page=%llu cluster=%llu: write %.6f s avg (%.3f GB/s), "
                "read %.6f s avg (%.3f GB/s)\n",
                static_cast<unsigned long long>(row.config.elements_per_page),
                static_cast<unsigned long long>(row.config.elements_per_cluster),
                row.write_report.secs_avg, row.write_report.gbps_avg,
                row.read_report.secs_avg, row.read_report.gbps_avg);
  }
  std::ofstream csv(opts.out);
  if (!csv) throw IoError("cannot write CSV to " + opts.out);
  write_sweep_csv(csv, rows);
  std::printf("wrote %zu rows to %s\n", rows.size(), opts.out.c_str());
  return 0;
}

int cmd_inspect(const CommonOpts& opts) {
  SimStore store;
  BenchTarget target = make_target(opts, store, /*restore_snapshot=*/
                                   resolve_backend(opts) == BackendKind::kDaos);
  if (target.backend == BackendKind::kFile) {
    FileSource source(target.file_path);
    const FileAnchor& a = source.anchor();
    std::printf("anchor: version %u\n", a.format_version);
    std::printf("  header: offset %llu stored %llu uncompressed %llu codec %s\n",
                static_cast<unsigned long long>(a.header_offset),
                static_cast<unsigned long long>(a.header_size_stored),
                static_cast<unsigned long long>(a.header_size_uncompressed),
                codec_name(a.header_codec_id));
    std::printf("  footer: offset %llu stored %llu uncompressed %llu codec %s\n",
                static_cast<unsigned long long>(a.footer_offset),
                static_cast<unsigned long long>(a.footer_size_stored),
                static_cast<unsigned long long>(a.footer_size_uncompressed),
                codec_name(a.footer_codec_id));
  }
  auto source = target.make_source();
  if (target.backend == BackendKind::kDaos) {
    const DaosAnchor& a = static_cast<DaosSource&>(*source).anchor();
    std::printf("anchor object: version %u mapping %s objclass %s\n", a.format_version,
                mapping_name(a.strategy), object_class_name(a.objclass).c_str());
    std::printf("  header: stored %llu uncompressed %llu codec %s\n",
                static_cast<unsigned long long>(a.header_size_stored),
                static_cast<unsigned long long>(a.header_size_uncompressed),
                codec_name(a.header_codec_id));
    std::printf("  footer: stored %llu uncompressed %llu codec %s\n",
                static_cast<unsigned long long>(a.footer_size_stored),
                static_cast<unsigned long long>(a.footer_size_uncompressed),
                codec_name(a.footer_codec_id));
  }
  const DatasetHeader& header = source->header();
  const DatasetFooter& footer = source->footer();
  std::printf("header: name '%s', %zu fields, %zu columns\n", header.name.c_str(),
              header.schema.fields().size(), header.schema.columns().size());
  for (const ColumnDescriptor& c : header.schema.columns()) {
    std::printf("  column %u: %s %s '%s'\n", c.column_id,
                c.role == ColumnRole::kIndex ? "index" : "value",
                physical_name(c.element_type), c.source_field.c_str());
  }
  std::printf("footer: %llu entries, %zu clusters, schema digest %016llx\n",
              static_cast<unsigned long long>(footer.n_entries), footer.clusters.size(),
              static_cast<unsigned long long>(footer.schema_digest));
  std::size_t shown = 0;
  for (const ClusterDescriptor& cluster : footer.clusters) {
    if (shown == 20) {
      std::printf("  ... %zu more clusters\n", footer.clusters.size() - shown);
      break;
    }
    std::uint64_t pages = 0, bytes = 0;
    for (const auto& [column_id, refs] : cluster.page_lists) {
      pages += refs.size();
      for (const PageRef& ref : refs) bytes += ref.locator.stored_size();
    }
    std::printf("  cluster %u: entries [%llu, +%llu), %llu pages, %llu stored bytes\n",
                cluster.cluster_id, static_cast<unsigned long long>(cluster.first_entry),
                static_cast<unsigned long long>(cluster.n_entries),
                static_cast<unsigned long long>(pages),
                static_cast<unsigned long long>(bytes));
    ++shown;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"cntuple columnar event-storage benchmark"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string sweep_mode = "grow-cluster";

  CLI::App* gen = app.add_subcommand("gen", "generate and write a synthetic dataset");
  add_common_flags(gen, opts, true);
  CLI::App* analyze = app.add_subcommand("analyze", "run the analysis scan");
  add_common_flags(analyze, opts, true);
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep, emit CSV");
  add_common_flags(sweep, opts, false);
  sweep->add_option("--mode", sweep_mode, "grow-cluster|grow-page");
  CLI::App* inspect = app.add_subcommand("inspect", "dump anchor/header/footer");
  add_common_flags(inspect, opts, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(opts);
    if (analyze->parsed()) return cmd_analyze(opts);
    if (sweep->parsed()) return cmd_sweep(opts, sweep_mode);
    if (inspect->parsed()) return cmd_inspect(opts);
  } catch (const cntuple::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
