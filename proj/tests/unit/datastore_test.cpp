#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <unistd.h>

#include "fishing/codec.hpp"
#include "fishing/datastore.hpp"
#include "fishing/error.hpp"
#include "fishing/experiment.hpp"
#include "oracle.hpp"

namespace fishing::store {
namespace {

namespace fs = std::filesystem;
using fishing::testing::mac_number;

class StoreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("fishing-store-" + std::to_string(::getpid()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  static std::vector<ProbeEvent> three_events() {
    return {{1, "ap1", mac_number(1), -60, std::nullopt},
            {2, "ap2", mac_number(2), -61, std::nullopt},
            {3, "ap1", mac_number(3), -62, "cafe"}};
  }

  static ErrorCode code_of(const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::internal;
  }

  fs::path root_;
};

TEST_F(StoreTest, AppendCounts) {
  Store store(root_);
  const auto log = store.create_log("", {"ap1", "ap2"});
  EXPECT_EQ(store.append_events(log, three_events()), 3u);
  EXPECT_EQ(store.append_events(log, {}), 0u);
  EXPECT_EQ(code_of([&] { store.append_events("log-999999", three_events()); }), ErrorCode::not_found);
}

TEST_F(StoreTest, RejectsUnorderedBatch) {
  Store store(root_);
  const auto log = store.create_log("", {});
  auto events = three_events();
  std::swap(events[0], events[2]);
  EXPECT_EQ(code_of([&] { store.append_events(log, events); }), ErrorCode::validation);
  EXPECT_TRUE(store.all_events(log).empty());
}

TEST_F(StoreTest, QueryIsHalfOpen) {
  Store store(root_);
  const auto log = store.create_log("", {});
  store.append_events(log, three_events());
  EXPECT_EQ(store.query_events(log, "ap1", 1, 3).size(), 1u);
  EXPECT_EQ(store.query_events(log, "ap1", 0, 100).size(), 2u);
  EXPECT_EQ(store.query_events(log, "ap1", 3, 4).size(), 1u);
  EXPECT_TRUE(store.query_events(log, "ap9", 0, 100).empty());
  EXPECT_EQ(code_of([&] { store.query_events(log, "ap1", 5, 5); }), ErrorCode::validation);
}

TEST_F(StoreTest, QueriesSpanBatches) {
  Store store(root_);
  const auto log = store.create_log("", {});
  store.append_events(log, std::vector<ProbeEvent>{{10, "ap1", mac_number(1), -60, std::nullopt}});
  store.append_events(log, std::vector<ProbeEvent>{{5, "ap1", mac_number(2), -60, std::nullopt}});
  const auto got = store.query_events(log, "ap1", 0, 20);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].timestamp, 5);
  EXPECT_EQ(store.all_events(log)[0].timestamp, 10);
}

TEST_F(StoreTest, ReopenRebuildsIndexAndDropsTempFiles) {
  std::string log;
  {
    Store store(root_);
    log = store.create_log("scn-000001", {"ap1"});
    store.append_events(log, three_events());
    store.append_sightings(log, std::vector<SightingEvent>{{2, "ap1", "person-01", "cam-ap1/000002-00.jpg"}});
  }
  codec::write_file((root_ / "logs" / log / "events" / "000099.tsv.tmp").string(), "garbage\n");
  Store store(root_);
  EXPECT_EQ(store.all_events(log), three_events());
  EXPECT_EQ(store.query_sightings(log, std::nullopt, 0, 10).size(), 1u);
  EXPECT_EQ(store.log_meta(log).scenario_ref, "scn-000001");
  EXPECT_EQ(store.log_aps(log), (std::vector<std::string>{"ap1", "ap2"}));
  EXPECT_FALSE(fs::exists(root_ / "logs" / log / "events" / "000099.tsv.tmp"));
  EXPECT_EQ(store.list_logs(), std::vector<std::string>{log});
}

TEST_F(StoreTest, SecondOpenerIsRefused) {
  Store store(root_);
  EXPECT_EQ(code_of([&] { Store other(root_); }), ErrorCode::conflict);
}

TEST_F(StoreTest, SightingFilters) {
  Store store(root_);
  const auto log = store.create_log("", {});
  store.append_sightings(log, std::vector<SightingEvent>{{1, "ap1", "a", "x.jpg"}, {2, "ap2", "b", "y.jpg"},
                                                         {3, "ap1", "c", "z.jpg"}});
  EXPECT_EQ(store.query_sightings(log, std::string("ap1"), 0, 10).size(), 2u);
  EXPECT_EQ(store.query_sightings(log, std::nullopt, 2, 3).size(), 1u);
}

TEST_F(StoreTest, ScenarioAndTruth) {
  Store store(root_);
  const auto scenario = experiment::make_experiment_scenario(0, {});
  const auto id = store.put_scenario(scenario);
  EXPECT_EQ(store.get_scenario(id), scenario);
  EXPECT_EQ(code_of([&] { store.get_truth(id); }), ErrorCode::not_found);
  const auto truth = sim::run_scenario(scenario).truth;
  store.put_truth(id, truth);
  EXPECT_EQ(store.get_truth(id), truth);
  EXPECT_EQ(code_of([&] { store.get_scenario("scn-424242"); }), ErrorCode::not_found);
  EXPECT_EQ(code_of([&] { store.get_scenario("../etc"); }), ErrorCode::not_found);
  EXPECT_NE(store.put_scenario(scenario), id);
}

TEST_F(StoreTest, ExportImportRoundTrip) {
  Store store(root_);
  const auto log = store.create_log("scn-000002", {"ap1", "ap2"});
  store.append_events(log, three_events());
  store.export_log(log, root_ / "export");
  const auto copy = store.import_log(root_ / "export");
  EXPECT_NE(copy, log);
  EXPECT_EQ(store.all_events(copy), three_events());
  EXPECT_EQ(store.log_meta(copy).aps, store.log_meta(log).aps);
}

TEST_F(StoreTest, InvestigationLifecycle) {
  Store store(root_);
  Investigation draft;
  draft.log_id = store.create_log("", {});
  draft.staying_intervals = {{"ap1", 1, 2}};
  const auto created = store.create_investigation(draft);
  EXPECT_EQ(created.id, "inv-000001");
  EXPECT_EQ(created.version, 1u);
  EXPECT_EQ(store.load_investigation(created.id), created);

  auto done = created;
  done.status = InvestigationStatus::complete;
  done.result = filter::SuspiciousRateTable{{"ap1"}, {}, {}};
  const auto updated = store.update_investigation(done, 1);
  EXPECT_EQ(updated.version, 2u);
  EXPECT_EQ(store.load_investigation(created.id), updated);

  EXPECT_EQ(code_of([&] { store.update_investigation(done, 1); }), ErrorCode::conflict);
  EXPECT_EQ(code_of([&] { store.load_investigation("inv-000404"); }), ErrorCode::not_found);

  auto inconsistent = updated;
  inconsistent.result.reset();
  EXPECT_EQ(code_of([&] { store.update_investigation(inconsistent, 2); }), ErrorCode::validation);
}

TEST_F(StoreTest, ConcurrentReadersAndWriter) {
  Store store(root_);
  const auto log = store.create_log("", {});
  std::jthread writer([&] {
    for (int b = 0; b < 50; ++b) {
      store.append_events(log, std::vector<ProbeEvent>{{double(b), "ap1", mac_number(b), -60, std::nullopt}});
    }
  });
  std::size_t last = 0;
  for (int i = 0; i < 200; ++i) {
    const auto n = store.query_events(log, "ap1", 0, 1000).size();
    EXPECT_GE(n, last);
    last = n;
  }
  writer.join();
  EXPECT_EQ(store.query_events(log, "ap1", 0, 1000).size(), 50u);
}

}  // namespace
}  // namespace fishing::store
