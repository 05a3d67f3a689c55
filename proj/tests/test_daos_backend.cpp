#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cntuple/daos_backend.hpp"
#include "cntuple/file_backend.hpp"
#include "cntuple/reader.hpp"
#include "cntuple/writer.hpp"
#include "test_support.hpp"

#include <atomic>
#include <random>
#include <set>
#include <thread>

using namespace cntuple;
using cntuple::testing::TempDir;

namespace {

PoolConfig test_pool(std::uint32_t n_targets = 8) {
  PoolConfig config;
  config.uuid = Uuid::parse("00000000-0000-0000-0000-00000000d001");
  config.n_targets = n_targets;
  config.latency_s = 10e-6;
  config.bandwidth_bytes_per_s = 1e9;
  return config;
}

std::shared_ptr<SimContainer> fresh_container(SimPool& pool, std::uint64_t seq) {
  Uuid uuid;
  put_le<std::uint64_t>(reinterpret_cast<std::byte*>(uuid.bytes.data()), 0xc0ffee);
  put_le<std::uint64_t>(reinterpret_cast<std::byte*>(uuid.bytes.data() + 8), seq);
  return pool.open_container(uuid);
}

Schema small_schema() {
  return Schema({make_scalar("x", ScalarType::kInt32),
                 make_vector("v", item_scalar(ScalarType::kFloat64))});
}

Page int32_page(std::uint32_t column, std::uint64_t first, std::uint64_t n,
                std::int32_t fill) {
  std::vector<std::int32_t> values(n, fill);
  Page page;
  page.column_id = column;
  page.first_element_index = first;
  page.n_elements = n;
  page.payload = encode_elements(PhysicalType::kInt32, values);
  return page;
}

DatasetFooter footer_for(const DatasetHeader& header,
                         std::vector<ClusterDescriptor> clusters,
                         std::uint64_t n_entries) {
  DatasetFooter footer;
  footer.clusters = std::move(clusters);
  footer.n_entries = n_entries;
  footer.schema_digest = schema_digest(serialize_header(header));
  return footer;
}

} // namespace

TEST_CASE("the published URI example parses exactly") {
  DaosUri uri = parse_daos_uri(
      "daos://4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4");
  CHECK(uri.pool_uuid.str() == "4b614f30-f476-4831-84ba-a51197600020");
  CHECK(uri.svc_ranks == std::vector<std::uint32_t>{1});
  CHECK(uri.container_uuid.str() == "f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4");
  CHECK(format_daos_uri(uri) ==
        "daos://4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4");
}

TEST_CASE("rank lists parse underscore-separated") {
  DaosUri uri = parse_daos_uri(
      "daos://4b614f30-f476-4831-84ba-a51197600020:0_2_5/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4");
  CHECK(uri.svc_ranks == std::vector<std::uint32_t>{0, 2, 5});
}

TEST_CASE("parse of format is the identity on random URIs") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 50; ++i) {
    DaosUri uri;
    for (auto& b : uri.pool_uuid.bytes) b = static_cast<std::uint8_t>(rng());
    for (auto& b : uri.container_uuid.bytes) b = static_cast<std::uint8_t>(rng());
    int n_ranks = 1 + static_cast<int>(rng() % 4);
    for (int r = 0; r < n_ranks; ++r) {
      uri.svc_ranks.push_back(static_cast<std::uint32_t>(rng() % 1000));
    }
    CHECK(parse_daos_uri(format_daos_uri(uri)) == uri);
  }
}

TEST_CASE("malformed URIs are rejected") {
  const char* kMalformed[] = {
      "http://4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos:/4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
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
      "",
      "B2HHH.ntuple",
      "daos://4b614f30f476483184baa51197600020:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:-1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a51197600020:1/f1b0a25a_7fbb_4fba_b7d2_9a9f4e10e8f4",
      "daos://4b614f30-f476-4831-84ba-a5119760002g:1/f1b0a25a-7fbb-4fba-b7d2-9a9f4e10e8f4",
  };
  for (const char* text : kMalformed) {
    CHECK_THROWS_AS(parse_daos_uri(text), UriError);
  }
}

TEST_CASE("key assignment follows the mapping rules") {
  SUBCASE("one OID per cluster: oid is the cluster, dkey the page sequence") {
    PagePlacement page{7, 3, 99, 2, 1};
    ObjectKey key = keys_for_page(MappingStrategy::kOidPerCluster, page);
    CHECK(key.oid.hi == kPageOidHi);
    CHECK(key.oid.lo == 7);
    CHECK(key.dkey == 3);
    CHECK(key.akey == 0);
  }

  SUBCASE("one OID per page: sequential oid, constant dkey/akey") {
    PagePlacement page{2, 1, 4, 0, 0}; // 5th committed page overall
    ObjectKey key = keys_for_page(MappingStrategy::kOidPerPage, page);
    CHECK(key.oid.hi == kPageOidHi);
    CHECK(key.oid.lo == 4);
    CHECK(key.dkey == 0);
    CHECK(key.akey == 0);
  }

  SUBCASE("akey mapping: oid from cluster, dkey from column, akey page ordinal") {
    PagePlacement page{2, 9, 50, 1, 0};
    ObjectKey key = keys_for_page(MappingStrategy::kAkeyPerPage, page);
    CHECK(key.oid.hi == kPageOidHi);
    CHECK(key.oid.lo == 2);
    CHECK(key.dkey == 1);
    CHECK(key.akey == 0);
  }

  SUBCASE("metadata keys live outside the page oid namespace") {
    std::set<ObjectKey> meta{MetadataKeys::anchor(), MetadataKeys::header(),
                             MetadataKeys::footer()};
    CHECK(meta.size() == 3);
    for (const ObjectKey& key : meta) CHECK(key.oid.hi != kPageOidHi);
  }
}

TEST_CASE("keys_for_page is injective over random dataset shapes") {
  std::mt19937_64 rng(55);
  for (MappingStrategy strategy :
       {MappingStrategy::kOidPerPage, MappingStrategy::kOidPerCluster,
        MappingStrategy::kAkeyPerPage}) {
    std::set<ObjectKey> seen;
    std::uint64_t total = 0, global_seq = 0;
    int clusters = 40;
    for (int c = 0; c < clusters && total < 10000 / 3; ++c) {
      std::uint32_t n_columns = 1 + rng() % 6;
      std::uint32_t page_seq_in_cluster = 0;
      for (std::uint32_t col = 0; col < n_columns; ++col) {
        std::uint32_t n_pages = 1 + rng() % 10;
        for (std::uint32_t p = 0; p < n_pages; ++p) {
          PagePlacement page{static_cast<std::uint32_t>(c), page_seq_in_cluster++,
                             global_seq++, col, p};
          CHECK(seen.insert(keys_for_page(strategy, page)).second);
          ++total;
        }
      }
    }
  }
}

TEST_CASE("commit and populate round-trip through the object store") {
  SimPool pool(test_pool());
  auto container = fresh_container(pool, 1);
  DatasetHeader header{kFormatVersion, "t", small_schema()};

  DaosSinkOptions options;
  options.strategy = MappingStrategy::kOidPerPage;
  DaosSink sink(container, options);
  Page page = int32_page(0, 0, 200, 5);
  PageLocator locator = sink.commit_page(0, page);
  sink.commit_page(0, int32_page(0, 200, 100, 6));
  auto cluster = sink.commit_cluster(300);
  sink.commit_dataset(header, footer_for(header, {cluster}, 300));

  DaosSource source(container);
  CHECK(source.populate_page(locator) == page.payload);
  CHECK(source.strategy() == MappingStrategy::kOidPerPage);
  CHECK(source.header().name == "t");

  SUBCASE("commit on the closed sink fails") {
    CHECK_THROWS_AS(sink.commit_page(0, int32_page(0, 300, 1, 0)), UsageError);
  }

  SUBCASE("keys derived with the wrong strategy are absent") {
    // The dataset was written OID-per-page (every dkey is 0); address its
    // second page as if it had been written OID-per-cluster without
    // consulting the anchor, which puts the page sequence in the dkey.
    PagePlacement second{0, 1, 1, 0, 1};
    ObjectKey wrong = keys_for_page(MappingStrategy::kOidPerCluster, second);
    CHECK(!container->contains(wrong));
    PageLocator forged;
    forged.where = ObjectRegion{wrong, page.payload.size()};
    forged.uncompressed_size = page.payload.size();
    CHECK_THROWS_AS(source.populate_page(forged), NotFoundError);
  }

  SUBCASE("tampered locator size is a corruption error") {
    PageLocator bad = locator;
    std::get<ObjectRegion>(bad.where).size -= 1;
    CHECK_THROWS_AS(source.populate_page(bad), CorruptionError);
  }
}

TEST_CASE("metadata objects make datasets self-describing") {
  SimPool pool(test_pool());

  SUBCASE("attach recovers the strategy from the anchor") {
    for (MappingStrategy strategy :
         {MappingStrategy::kOidPerPage, MappingStrategy::kOidPerCluster,
          MappingStrategy::kAkeyPerPage}) {
      auto container = fresh_container(pool, 100 + static_cast<int>(strategy));
      DatasetHeader header{kFormatVersion, "t", small_schema()};
      DaosSinkOptions options;
      options.strategy = strategy;
      DaosSink sink(container, options);
      sink.commit_page(0, int32_page(0, 0, 10, 1));
      auto cluster = sink.commit_cluster(10);
      sink.commit_dataset(header, footer_for(header, {cluster}, 10));

      DaosSource source(container);
      CHECK(source.strategy() == strategy);
      CHECK(source.anchor().objclass == ObjectClass::sx());
    }
  }

  SUBCASE("attach on an empty container is not-a-dataset") {
    auto container = fresh_container(pool, 200);
    CHECK_THROWS_AS(DaosSource{container}, NotFoundError);
  }

  SUBCASE("rewriting a dataset in the same container replaces it cleanly") {
    auto container = fresh_container(pool, 201);
    DatasetHeader header{kFormatVersion, "first", small_schema()};
    {
      DaosSink sink(container, {});
      sink.commit_page(0, int32_page(0, 0, 10, 1));
      auto cluster = sink.commit_cluster(10);
      sink.commit_dataset(header, footer_for(header, {cluster}, 10));
    }
    DatasetHeader header2{kFormatVersion, "second", small_schema()};
    {
      DaosSinkOptions options;
      options.strategy = MappingStrategy::kOidPerCluster;
      DaosSink sink(container, options);
      sink.commit_page(0, int32_page(0, 0, 20, 2));
      auto cluster = sink.commit_cluster(20);
      sink.commit_dataset(header2, footer_for(header2, {cluster}, 20));
    }
    DaosSource source(container);
    CHECK(source.header().name == "second");
    CHECK(source.strategy() == MappingStrategy::kOidPerCluster);
    CHECK(source.footer().n_entries == 20);
  }
}

TEST_CASE("load_cluster equals the per-page oracle and batches the fetches") {
  std::mt19937_64 rng(67);
  PoolConfig config = test_pool(8);
  SimPool pool(config);
  testing::SchemaGen schemas(rng);

  for (int round = 0; round < 8; ++round) {
    Schema schema = schemas.schema();
    auto entries = testing::random_entries(rng, schema, 40 + rng() % 80);
    auto container = fresh_container(pool, 300 + round);

    DaosSinkOptions options;
    options.strategy = static_cast<MappingStrategy>(round % 3);
    options.codec_id = (rng() & 1) ? kCodecGeneral : kCodecNone;
    DaosSink sink(container, options);
    DatasetWriter::Options wopts;
    wopts.elements_per_page = 8;
    wopts.elements_per_cluster = 32;
    DatasetWriter writer("t", schema, sink, wopts);
    for (const Value& entry : entries) writer.append(entry);
    writer.close();

    auto source = std::make_shared<DaosSource>(container);
    std::set<std::uint32_t> all_columns;
    for (const auto& c : schema.columns()) all_columns.insert(c.column_id);

    for (std::uint32_t c = 0; c < source->footer().clusters.size(); ++c) {
      double before_sequential = container->simulated_seconds();
      std::map<std::uint32_t, std::vector<ByteBuffer>> oracle;
      for (const auto& [col, refs] : source->footer().clusters[c].page_lists) {
        for (const PageRef& ref : refs) {
          oracle[col].push_back(source->populate_page(ref.locator));
        }
      }
      double sequential_elapsed = container->simulated_seconds() - before_sequential;

      double before_batch = container->simulated_seconds();
      auto pages = source->load_cluster(c, all_columns);
      double batch_elapsed = container->simulated_seconds() - before_batch;

      REQUIRE(pages.size() == oracle.size());
      for (const auto& [col, payloads] : oracle) {
        REQUIRE(pages.at(col).size() == payloads.size());
        for (std::size_t p = 0; p < payloads.size(); ++p) {
          CHECK(pages.at(col)[p].payload == payloads[p]);
        }
      }
      // Vector-read benefit: the parallel batch never loses to singles.
      CHECK(batch_elapsed <= sequential_elapsed + 1e-12);
      CHECK(source->last_batch_cost().simulated_elapsed == doctest::Approx(batch_elapsed));
    }

    CHECK(source->load_cluster(0, {}).empty());
    CHECK(source->last_batch_cost().simulated_elapsed == 0.0);
  }
}

TEST_CASE("OID-per-cluster spreads a 16-page cluster across targets") {
  PoolConfig config = test_pool(8);
  SimPool pool(config);
  std::set<std::uint32_t> targets;
  for (std::uint32_t p = 0; p < 16; ++p) {
    ObjectKey key = keys_for_page(MappingStrategy::kOidPerCluster,
                                  PagePlacement{0, p, p, 0, p});
    targets.insert(placement(key, ObjectClass::sx(), config.n_targets)[0]);
  }
  CHECK(targets.size() >= 2);
}

TEST_CASE("batched cluster writes produce the same dataset") {
  SimPool pool(test_pool());
  std::mt19937_64 rng(71);
  Schema schema = small_schema();
  auto entries = testing::random_entries(rng, schema, 60);

  auto write_with = [&](bool batched, std::uint64_t seq) {
    auto container = fresh_container(pool, seq);
    DaosSinkOptions options;
    options.strategy = MappingStrategy::kOidPerCluster;
    options.batched_cluster_writes = batched;
    DaosSink sink(container, options);
    DatasetWriter::Options wopts;
    wopts.elements_per_page = 10;
    wopts.elements_per_cluster = 20;
    DatasetWriter writer("t", schema, sink, wopts);
    for (const Value& entry : entries) writer.append(entry);
    writer.close();
    return container;
  };

  auto direct = write_with(false, 400);
  auto batched = write_with(true, 401);
  DatasetReader direct_reader(std::make_shared<DaosSource>(direct));
  DatasetReader batched_reader(std::make_shared<DaosSource>(batched));
  CHECK(direct_reader.read_all() == batched_reader.read_all());
  CHECK(direct_reader.read_all() == entries);
}

TEST_CASE("object sources serve concurrent cluster loads") {
  SimPool pool(test_pool());
  auto container = fresh_container(pool, 900);
  Schema schema = small_schema();
  std::mt19937_64 rng(91);
  auto entries = testing::random_entries(rng, schema, 400);
  {
    DaosSinkOptions options;
    options.strategy = MappingStrategy::kOidPerCluster;
    DaosSink sink(container, options);
    DatasetWriter writer("t", schema, sink, {16, 64});
    for (const Value& e : entries) writer.append(e);
    writer.close();
  }
  DaosSource source(container);
  std::set<std::uint32_t> all_columns;
  for (const auto& c : schema.columns()) all_columns.insert(c.column_id);

  // Single-threaded oracle copies.
  std::vector<std::map<std::uint32_t, std::vector<Page>>> expected;
  for (std::uint32_t c = 0; c < source.footer().clusters.size(); ++c) {
    expected.push_back(source.load_cluster(c, all_columns));
  }

  std::atomic<int> mismatches{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::uint32_t c = t; c < expected.size(); c += 4) {
        auto pages = source.load_cluster(c, all_columns);
        for (const auto& [col, list] : expected[c]) {
          for (std::size_t p = 0; p < list.size(); ++p) {
            if (pages.at(col)[p].payload != list[p].payload) ++mismatches;
          }
        }
      }
    });
  }
  for (auto& thread : threads) thread.join();
  CHECK(mismatches == 0);
}

TEST_CASE("cross-backend equality: file and all three mappings decode alike") {
  TempDir dir("cross");
  std::mt19937_64 rng(83);
  SimPool pool(test_pool());
  testing::SchemaGen schemas(rng);

  for (int round = 0; round < 5; ++round) {
    Schema schema = schemas.schema();
    auto entries = testing::random_entries(rng, schema, 30 + rng() % 50);
    DatasetWriter::Options wopts;
    wopts.elements_per_page = 1 + rng() % 16;
    wopts.elements_per_cluster = wopts.elements_per_page * (1 + rng() % 4);
    std::uint16_t codec = (rng() & 1) ? kCodecGeneral : kCodecNone;

    std::string path = dir.file("cross.cntp");
    {
      FileSink sink(path, codec);
      DatasetWriter writer("t", schema, sink, wopts);
      for (const Value& entry : entries) writer.append(entry);
      writer.close();
    }
    DatasetReader file_reader(std::make_shared<FileSource>(path));
    CHECK(file_reader.read_all() == entries);

    for (int s = 0; s < 3; ++s) {
      auto container = fresh_container(pool, 500 + round * 3 + s);
      DaosSinkOptions options;
      options.strategy = static_cast<MappingStrategy>(s);
      options.codec_id = codec;
      DaosSink sink(container, options);
      DatasetWriter writer("t", schema, sink, wopts);
      for (const Value& entry : entries) writer.append(entry);
      writer.close();
      DatasetReader reader(std::make_shared<DaosSource>(container));
      CHECK(reader.read_all() == entries);
    }
  }
}
