// Acceptance suite: runs each release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits non-zero if any fail.

#include "cntuple/bench.hpp"
#include "cntuple/reader.hpp"
#include "cntuple/workload.hpp"
#include "cntuple/writer.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

using namespace cntuple;
using cntuple::testing::TempDir;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define ACCEPT(cond)                                                          \
  do {                                                                        \
    if (!(cond)) {                                                            \
      throw CheckFailure("check failed at line " + std::to_string(__LINE__) + \
                         ": " #cond);                                         \
    }                                                                         \
  } while (0)

PoolConfig acceptance_pool() {
  PoolConfig config;
  config.uuid = Uuid::parse("00000000-0000-0000-0000-0000000ac001");
  config.n_targets = 8;
  config.latency_s = 2e-3; // latency-dominated: the small-page penalty regime
  config.bandwidth_bytes_per_s = 2e9;
  return config;
}

std::shared_ptr<SimContainer> numbered_container(SimPool& pool, std::uint64_t seq) {
  Uuid uuid;
  put_le<std::uint64_t>(reinterpret_cast<std::byte*>(uuid.bytes.data()), 0xacce97);
  put_le<std::uint64_t>(reinterpret_cast<std::byte*>(uuid.bytes.data() + 8), seq);
  return pool.open_container(uuid);
}

constexpr MappingStrategy kAllMappings[] = {MappingStrategy::kOidPerPage,
                                            MappingStrategy::kOidPerCluster,
                                            MappingStrategy::kAkeyPerPage};

// ── 1. Round-trip equivalence ────────────────────────────────────────────────

void criterion_1() {
  TempDir dir("accept1");
  std::mt19937_64 rng(1001);
  testing::SchemaGen schemas(rng);
  SimPool pool(acceptance_pool());
  std::uint64_t container_seq = 0;

  for (int round = 0; round < 200; ++round) {
    Schema schema = schemas.schema();
    auto entries = testing::random_entries(rng, schema, 1 + rng() % 80);
    DatasetWriter::Options sizing;
    sizing.elements_per_page = 1 + rng() % 32;
    sizing.elements_per_cluster = sizing.elements_per_page * (1 + rng() % 5);
    std::uint16_t codec = (rng() & 1) ? kCodecGeneral : kCodecNone;

    // file backend
    std::string path = dir.file("case.cntp");
    {
      FileSink sink(path, codec);
      DatasetWriter writer("case", schema, sink, sizing);
      for (const Value& entry : entries) writer.append(entry);
      writer.close();
    }
    {
      DatasetReader reader(std::make_shared<FileSource>(path));
      ACCEPT(reader.read_all() == entries);
    }
    // the three object mappings
    for (MappingStrategy strategy : kAllMappings) {
      auto container = numbered_container(pool, container_seq++);
      DaosSinkOptions options;
      options.strategy = strategy;
      options.codec_id = codec;
      DaosSink sink(container, options);
      DatasetWriter writer("case", schema, sink, sizing);
      for (const Value& entry : entries) writer.append(entry);
      writer.close();
      DatasetReader reader(std::make_shared<DaosSource>(container));
      ACCEPT(reader.read_all() == entries);
    }
  }
}

// ── 2. load_cluster ≡ populate_page loop ─────────────────────────────────────

void criterion_2() {
  TempDir dir("accept2");
  std::mt19937_64 rng(2002);
  testing::SchemaGen schemas(rng);
  SimPool pool(acceptance_pool());
  std::uint64_t clusters_checked = 0;
  std::uint64_t container_seq = 1000;

  while (clusters_checked < 100) {
    Schema schema = schemas.schema();
    auto entries = testing::random_entries(rng, schema, 40 + rng() % 60);
    DatasetWriter::Options sizing;
    sizing.elements_per_page = 2 + rng() % 8;
    sizing.elements_per_cluster = sizing.elements_per_page * (1 + rng() % 3);
    std::uint16_t codec = (rng() & 1) ? kCodecGeneral : kCodecNone;

    auto verify = [&](std::shared_ptr<PageSource> source) {
      std::set<std::uint32_t> all_columns;
      for (const auto& c : schema.columns()) all_columns.insert(c.column_id);
      for (std::uint32_t c = 0; c < source->footer().clusters.size(); ++c) {
        auto pages = source->load_cluster(c, all_columns);
        const auto& lists = source->footer().clusters[c].page_lists;
        ACCEPT(pages.size() == lists.size());
        for (const auto& [col, refs] : lists) {
          ACCEPT(pages.at(col).size() == refs.size());
          for (std::size_t p = 0; p < refs.size(); ++p) {
            ACCEPT(pages.at(col)[p].payload == source->populate_page(refs[p].locator));
          }
        }
        ++clusters_checked;
      }
    };

    std::string path = dir.file("case.cntp");
    {
      FileSink sink(path, codec);
      DatasetWriter writer("case", schema, sink, sizing);
      for (const Value& entry : entries) writer.append(entry);
      writer.close();
    }
    verify(std::make_shared<FileSource>(path));

    MappingStrategy strategy = kAllMappings[rng() % 3];
    auto container = numbered_container(pool, container_seq++);
    DaosSinkOptions options;
    options.strategy = strategy;
    options.codec_id = codec;
    {
      DaosSink sink(container, options);
      DatasetWriter writer("case", schema, sink, sizing);
      for (const Value& entry : entries) writer.append(entry);
      writer.close();
    }
    verify(std::make_shared<DaosSource>(container));
  }
}

// ── 3. URI grammar ───────────────────────────────────────────────────────────

void criterion_3() {
  DaosUri uri = parse_daos_uri(
      "daos://4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4");
  ACCEPT(uri.pool_uuid.str() == "4b614f30-f476-4831-84ba-a51197600020");
  ACCEPT(uri.svc_ranks == std::vector<std::uint32_t>{1});
  ACCEPT(uri.container_uuid.str() == "f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4");

  const char* kMalformed[20] = {
      "http://4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos:/4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos//4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:1f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:x/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:1_/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:_1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:1__2/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a-7fbb-4fba-b7d2",
      "daos://4b614f30-f476-4831-84ba-a511976000:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:1/",
      "daos://",
      "B2HHH.ntuple",
      "daos://4b614f30f476483184baa51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:-1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a_7fbb_4fba_b7d2_9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a5119760002g:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
  };
  for (const char* text : kMalformed) {
    bool rejected = false;
    try {
      parse_daos_uri(text);
    } catch (const UriError&) {
      rejected = true;
    }
    ACCEPT(rejected);
  }
}

// ── 4. Mapping conformance ───────────────────────────────────────────────────

void criterion_4() {
  // 3 clusters × 4 pages fixture.
  std::uint64_t global_seq = 0;
  for (std::uint32_t cluster = 0; cluster < 3; ++cluster) {
    for (std::uint32_t page = 0; page < 4; ++page) {
      PagePlacement at{cluster, page, global_seq, page % 2, page / 2};
      ObjectKey per_page = keys_for_page(MappingStrategy::kOidPerPage, at);
      ACCEPT(per_page.oid.lo == global_seq); // sequential OID per committed page
      ACCEPT(per_page.dkey == 0 && per_page.akey == 0); // constant dkey/akey
      ObjectKey per_cluster = keys_for_page(MappingStrategy::kOidPerCluster, at);
      ACCEPT(per_cluster.oid.lo == cluster); // OID equals the cluster id
      ACCEPT(per_cluster.dkey == page);      // sequential dkey inside the cluster
      ACCEPT(per_cluster.akey == 0);
      ++global_seq;
    }
  }

  // Injectivity over 10k random dataset shapes per strategy.
  std::mt19937_64 rng(4004);
  for (MappingStrategy strategy : kAllMappings) {
    std::set<ObjectKey> seen;
    std::uint64_t total = 0;
    std::uint64_t global = 0;
    std::uint32_t cluster = 0;
    while (total < 10000) {
      std::uint32_t n_columns = 1 + rng() % 8;
      std::uint32_t seq_in_cluster = 0;
      for (std::uint32_t col = 0; col < n_columns; ++col) {
        std::uint32_t n_pages = 1 + rng() % 6;
        for (std::uint32_t p = 0; p < n_pages; ++p) {
          PagePlacement at{cluster, seq_in_cluster++, global++, col, p};
          ACCEPT(seen.insert(keys_for_page(strategy, at)).second);
          ++total;
        }
      }
      ++cluster;
    }
  }
}

// ── 5. Selective-read economy ────────────────────────────────────────────────

void criterion_5() {
  TempDir dir("accept5");
  BenchTarget target;
  target.file_path = dir.file("workload.cntp");
  BenchConfig config;
  config.entries = 30000;
  config.elements_per_page = 1000;
  config.elements_per_cluster = 10000;
  gen_dataset(config, target);

  auto source = std::make_shared<FileSource>(target.file_path);
  const ColumnDescriptor& column =
      source->header().schema.column_for("H2_ProbK", ColumnRole::kValue);
  std::uint64_t column_bytes = 0;
  for (const auto& cluster : source->footer().clusters) {
    auto it = cluster.page_lists.find(column.column_id);
    if (it == cluster.page_lists.end()) continue;
    for (const PageRef& ref : it->second) column_bytes += ref.locator.stored_size();
  }

  DatasetReader reader(source);
  auto view = reader.view<double>("H2_ProbK");
  double sum = 0.0;
  for (std::uint64_t i = 0; i < reader.n_entries(); ++i) sum += view.at(i);
  ACCEPT(sum > 0.0);
  // Zero extra page bytes: the scan fetched exactly this column's pages.
  ACCEPT(source->io_accounting().page_bytes == column_bytes);
  ACCEPT(column_bytes == config.entries * 8);
}

// ── 6. Cost-model trends ─────────────────────────────────────────────────────

void criterion_6() {
  // (a) mode-B sweep: simulated read seconds per byte non-increasing
  // (≤1% slack per step) as the page size doubles.
  SweepSettings settings;
  settings.mode = SweepMode::kGrowPageConstCluster;
  settings.base.entries = 320000;
  settings.base.seed = 6;
  settings.backend = BackendKind::kDaos;
  settings.strategy = MappingStrategy::kOidPerPage;
  settings.reps = 1;
  settings.pool = acceptance_pool();
  auto rows = run_sweep(settings);
  ACCEPT(rows.size() == 6);
  double last_per_byte = std::numeric_limits<double>::infinity();
  for (const SweepRow& row : rows) {
    ACCEPT(row.read_report.bytes > 0);
    double per_byte =
        row.read_report.secs_avg / static_cast<double>(row.read_report.bytes);
    ACCEPT(per_byte <= last_per_byte * 1.01);
    last_per_byte = per_byte;
  }

  // (b) batched load_cluster never exceeds the sequential per-page cost,
  // over random clusters, mappings and codecs.
  std::mt19937_64 rng(6006);
  testing::SchemaGen schemas(rng);
  SimPool pool(acceptance_pool());
  std::uint64_t container_seq = 6000;
  int clusters_checked = 0;
  while (clusters_checked < 60) {
    Schema schema = schemas.schema();
    auto entries = testing::random_entries(rng, schema, 30 + rng() % 60);
    auto container = numbered_container(pool, container_seq++);
    DaosSinkOptions options;
    options.strategy = kAllMappings[rng() % 3];
    DaosSink sink(container, options);
    DatasetWriter::Options sizing;
    sizing.elements_per_page = 2 + rng() % 10;
    sizing.elements_per_cluster = sizing.elements_per_page * (1 + rng() % 4);
    DatasetWriter writer("case", schema, sink, sizing);
    for (const Value& entry : entries) writer.append(entry);
    writer.close();

    auto source = std::make_shared<DaosSource>(container);
    std::set<std::uint32_t> all_columns;
    for (const auto& c : schema.columns()) all_columns.insert(c.column_id);
    for (std::uint32_t c = 0; c < source->footer().clusters.size(); ++c) {
      double before = container->simulated_seconds();
      for (const auto& [col, refs] : source->footer().clusters[c].page_lists) {
        for (const PageRef& ref : refs) source->populate_page(ref.locator);
      }
      double sequential = container->simulated_seconds() - before;
      before = container->simulated_seconds();
      source->load_cluster(c, all_columns);
      double batched = container->simulated_seconds() - before;
      ACCEPT(batched <= sequential * (1.0 + 1e-12));
      ++clusters_checked;
    }
  }

  // (c) OID-per-cluster places a 16-page cluster on at least two targets.
  auto container = numbered_container(pool, 6999);
  DaosSinkOptions options;
  options.strategy = MappingStrategy::kOidPerCluster;
  DaosSink sink(container, options);
  Schema schema({make_scalar("x", ScalarType::kInt64)});
  DatasetWriter writer("case", schema, sink, {10, 160});
  for (int i = 0; i < 160; ++i) {
    writer.append(Value::rec({Value::i64(i)}));
  }
  writer.close();
  const auto& lists = writer.footer().clusters.at(0).page_lists.at(0);
  ACCEPT(lists.size() == 16);
  std::set<std::uint32_t> targets;
  for (const PageRef& ref : lists) {
    const auto& region = std::get<ObjectRegion>(ref.locator.where);
    targets.insert(placement(region.key, ObjectClass::sx(), 8)[0]);
  }
  ACCEPT(targets.size() >= 2);
}

// ── 7. Analysis oracle ───────────────────────────────────────────────────────

void criterion_7() {
  TempDir dir("accept7");
  BenchTarget target;
  target.file_path = dir.file("lhcb.cntp");
  BenchConfig config;
  config.entries = 100000;
  config.seed = 42;
  config.elements_per_page = 10000;
  config.elements_per_cluster = 20000;
  gen_dataset(config, target);
  AnalysisResult engine = run_analysis(target);

  // Straight-loop reference: no columnar engine involved.
  EventGenerator generator(42);
  std::array<std::uint64_t, kHistogramBins> bins{};
  const double bin_width = kHistogramMax / kHistogramBins;
  for (std::uint64_t i = 0; i < config.entries; ++i) {
    Event e = generator.next();
    if (e.is_muon[0] != 0 || e.is_muon[1] != 0 || e.is_muon[2] != 0) continue;
    double sum = 0.0;
    for (int h = 0; h < 3; ++h) {
      sum += std::sqrt(e.px[h] * e.px[h] + e.py[h] * e.py[h] + e.pz[h] * e.pz[h]);
    }
    if (sum >= 0.0 && sum < kHistogramMax) {
      ++bins[static_cast<int>(sum / bin_width)];
    }
  }
  ACCEPT(engine.histogram == bins);
  ACCEPT(engine.checksum == histogram_checksum(bins));
}

// ── 8. Bool packing and compression ──────────────────────────────────────────

void criterion_8() {
  std::mt19937_64 rng(8008);
  for (std::uint64_t n : {1ULL, 5ULL, 8ULL, 9ULL, 1000ULL, 40001ULL}) {
    std::vector<std::uint8_t> bools(n);
    for (auto& b : bools) b = rng() & 1;
    auto payload = encode_elements(PhysicalType::kPackedBool, bools);
    ACCEPT(payload.size() == (n + 7) / 8);
  }

  ByteBuffer constant_page(40000);
  for (std::size_t i = 0; i < constant_page.size(); i += 4) {
    constant_page[i] = std::byte{0x2a};
  }
  ByteBuffer stored = compress(constant_page, kCodecGeneral);
  ACCEPT(stored.size() * 100 < constant_page.size());
  ACCEPT(decompress(stored, kCodecGeneral, constant_page.size()) == constant_page);

  ByteBuffer random_page(4096);
  for (auto& b : random_page) b = static_cast<std::byte>(rng());
  ACCEPT(compress(random_page, kCodecNone) == random_page);
  ACCEPT(decompress(random_page, kCodecNone, random_page.size()) == random_page);
}

// ── 9. Crash-safety of the file layout ───────────────────────────────────────

void criterion_9() {
  TempDir dir("accept9");
  std::string path = dir.file("full.cntp");
  BenchTarget target;
  target.file_path = path;
  BenchConfig config;
  config.entries = 5000;
  config.elements_per_page = 250;
  config.elements_per_cluster = 1000;
  gen_dataset(config, target);

  std::ifstream in(path, std::ios::binary | std::ios::ate);
  std::vector<char> bytes(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  // State just before the final anchor write: anchor bytes still zero.
  std::fill(bytes.begin(), bytes.begin() + 64, '\0');

  std::mt19937_64 rng(9009);
  for (int i = 0; i < 50; ++i) {
    std::uint64_t cut = rng() % bytes.size();
    std::string partial = dir.file("partial.cntp");
    std::ofstream(partial, std::ios::binary | std::ios::trunc)
        .write(bytes.data(), static_cast<std::streamsize>(cut));
    bool failed_cleanly = false;
    try {
      FileSource source(partial);
    } catch (const CorruptionError&) {
      failed_cleanly = true;
    }
    ACCEPT(failed_cleanly);
  }
}

// ── 10. Sweep table shape ────────────────────────────────────────────────────

void criterion_10() {
  TempDir dir("accept10");
  SweepSettings settings;
  settings.base.entries = 1000;
  settings.base.seed = 10;
  settings.reps = 1;
  settings.scratch_dir = dir.path().string();

  settings.mode = SweepMode::kConstPageGrowCluster;
  auto mode_a = run_sweep(settings);
  ACCEPT(mode_a.size() == 5);
  std::uint64_t cluster = 20000;
  for (const SweepRow& row : mode_a) {
    ACCEPT(row.config.elements_per_page == 10000);
    ACCEPT(row.config.elements_per_cluster == cluster);
    cluster *= 2;
  }

  settings.mode = SweepMode::kGrowPageConstCluster;
  auto mode_b = run_sweep(settings);
  ACCEPT(mode_b.size() == 6);
  std::uint64_t page = 10000;
  for (const SweepRow& row : mode_b) {
    ACCEPT(row.config.elements_per_page == page);
    ACCEPT(row.config.elements_per_cluster == 320000);
    page *= 2;
  }

  std::ostringstream csv;
  write_sweep_csv(csv, mode_a);
  std::istringstream lines(csv.str());
  std::string line;
  ACCEPT(std::getline(lines, line));
  ACCEPT(line ==
         "mode,page_elems,cluster_elems,backend,mapping,objclass,codec,bytes,"
         "secs_min,secs_avg,secs_max,gbps_avg");
  int data_rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) ++data_rows;
  }
  ACCEPT(data_rows == 5);
}

struct Criterion {
  int id;
  const char* label;
  double budget_seconds;
  std::function<void()> run;
};

} // namespace

int main() {
  const Criterion criteria[] = {
      {1, "round-trip equivalence across file backend and all object mappings", 120,
       criterion_1},
      {2, "load_cluster equals the populate_page loop byte-for-byte", 60, criterion_2},
      {3, "daos URI grammar accepts the published example, rejects 20 variants", 60,
       criterion_3},
      {4, "page-key mapping rules and injectivity", 60, criterion_4},
      {5, "single-column scan fetches zero extra page bytes", 60, criterion_5},
      {6, "cost-model trends: page-size sweep, batched reads, cluster spread", 60,
       criterion_6},
      {7, "analysis histogram equals the straight-loop oracle", 30, criterion_7},
      {8, "bool packing and codec bounds", 10, criterion_8},
      {9, "truncated files fail attach cleanly", 30, criterion_9},
      {10, "sweep tables match the published tick values", 60, criterion_10},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && elapsed > criterion.budget_seconds) {
      error = "exceeded the " + std::to_string(criterion.budget_seconds) +
              "s runtime budget (" + std::to_string(elapsed) + "s)";
    }
    if (error.empty()) {
      std::printf("criterion %2d PASS  (%6.2fs)  %s\n", criterion.id, elapsed,
                  criterion.label);
    } else {
      std::printf("criterion %2d FAIL  (%6.2fs)  %s\n              %s\n", criterion.id,
                  elapsed, criterion.label, error.c_str());
      ++failures;
    }
  }
  if (failures > 0) {
    std::printf("%d of 10 criteria failed\n", failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
