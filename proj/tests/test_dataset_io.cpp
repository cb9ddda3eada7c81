#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "datapolicy/dataset_io.hpp"
#include "datapolicy/report_io.hpp"
#include "datapolicy/study.hpp"
#include "datapolicy/terminal_demo.hpp"
#include "oracles.hpp"

using namespace datapolicy;
using namespace datapolicy::testing;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "datapolicy_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  out << text;
}

}  // namespace

TEST(DatasetIo, SeedRoundTripIsBitExact) {
  const SafeSetStore s = seed_store();
  const auto path = temp_path("seed.json");
  save_dataset(s, path);
  const SafeSetStore back = load_dataset(path);
  EXPECT_TRUE(back == s);
  for (std::size_t k = 0; k < s.trajectories()[0].size(); ++k) {
    EXPECT_TRUE(bit_equal(back.trajectories()[0].costs_to_go[k], s.trajectories()[0].costs_to_go[k]));
    for (Index i = 0; i < 2; ++i) {
      EXPECT_TRUE(bit_equal(back.trajectories()[0].states[k](i), s.trajectories()[0].states[k](i)));
    }
  }
}

TEST(DatasetIo, LiteralTruncationAndTerminalDemoRoundTrip) {
  ClqrConfig plain;
  for (const SafeSetStore& s : {seed_store(study_second_seed_state(), kStudyInputWeight, plain), make_terminal_demo(),
                                make_terminal_demo(true)}) {
    const auto path = temp_path("round.json");
    save_dataset(s, path);
    const SafeSetStore back = load_dataset(path);
    EXPECT_TRUE(back == s);
    EXPECT_EQ(back.certified(), s.certified());
  }
}

TEST(DatasetIo, UnvalidatedRoundTripStaysUnvalidated) {
  Trajectory t = solve_clqr(double_integrator(), study_cost(), study_seed_state());
  t.inputs.back()(0) = 0.5;
  const SafeSetStore s = build_safe_set_unvalidated({t}, double_integrator(), StageCost(study_cost()), OriginMode{});
  const auto path = temp_path("unvalidated.json");
  save_dataset(s, path);
  const SafeSetStore back = load_dataset(path);
  EXPECT_FALSE(back.validated());
  EXPECT_TRUE(back == s);
}

TEST(DatasetIo, EmptyTrajectoryListRejected) {
  nlohmann::json doc = dataset_to_json(seed_store());
  doc["trajectories"] = nlohmann::json::array();
  EXPECT_THROW(dataset_from_json(doc), Error);
}

TEST(DatasetIo, StateDimensionMismatchIsParseError) {
  nlohmann::json doc = dataset_to_json(seed_store());
  doc["trajectories"][0]["states"][3] = {1.0, 2.0, 3.0};
  try {
    dataset_from_json(doc, "bad.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("trajectories[0].states[3]"), std::string::npos) << e.what();
  }
}

TEST(DatasetIo, VersionMismatch) {
  nlohmann::json doc = dataset_to_json(seed_store());
  doc["format"] = "ss-v0";
  EXPECT_THROW(dataset_from_json(doc), VersionError);
}

TEST(DatasetIo, MissingFieldNamesThePath) {
  nlohmann::json doc = dataset_to_json(seed_store());
  doc["system"].erase("B");
  try {
    dataset_from_json(doc, "f.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("\"B\""), std::string::npos) << e.what();
  }
}

TEST(DatasetIo, SyntaxErrorCarriesLine) {
  const auto path = temp_path("broken.json");
  write_text(path, "{\n  \"format\": \"ss-v1\",\n  \"system\": [1, 2,,]\n}\n");
  try {
    load_dataset(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(DatasetIo, TamperedValidatedDatasetFailsValidation) {
  nlohmann::json doc = dataset_to_json(seed_store());
  doc["trajectories"][0]["inputs"].back() = {0.25};
  EXPECT_THROW(dataset_from_json(doc), ValidationError);
}

TEST(DatasetIo, MissingFileIsAnError) { EXPECT_THROW(load_dataset(temp_path("does_not_exist.json")), Error); }

TEST(ReportIo, RoundTrip) {
  const SafeSetStore s = seed_store();
  const SimulationReport r = run_closed_loop(s.system(), s, study_second_seed_state(), PolicyConfig{});
  const auto path = temp_path("report.json");
  save_report(r, path);
  const SimulationReport back = load_report(path);
  EXPECT_EQ(back.steps.size(), r.steps.size());
  EXPECT_EQ(back.realized_cost, r.realized_cost);
  EXPECT_EQ(back.initial_q, r.initial_q);
  EXPECT_EQ(back.terminated, r.terminated);
  EXPECT_EQ(back.all_monitors_passed, r.all_monitors_passed);
  for (std::size_t k = 0; k < r.steps.size(); ++k) {
    EXPECT_EQ(back.steps[k].state, r.steps[k].state);
    EXPECT_EQ(back.steps[k].monitors.lyapunov_slack, r.steps[k].monitors.lyapunov_slack);
  }
  nlohmann::json doc = report_to_json(r);
  EXPECT_EQ(doc["format"], "rep-v1");
  doc["format"] = "rep-v9";
  EXPECT_THROW(report_from_json(doc), VersionError);
}
