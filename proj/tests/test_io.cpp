#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "limkit/io.hpp"

using namespace limkit;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("limkit_io_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TrainingLog ingest_text(const std::string& text) {
    std::istringstream in(text);
    return ingest_log(in);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::size_t count_lines(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("ingests a well-formed pass-rate log") {
    const TrainingLog log = ingest_text(
        R"({"sample_id":"a","epoch":1,"pass_rate":0.5,"rollouts":8}
{"sample_id":"a","epoch":2,"pass_rate":0.75,"rollouts":8}
{"sample_id":"b","epoch":1,"pass_rate":0.0,"rollouts":8}
{"sample_id":"b","epoch":2,"pass_rate":1.0,"rollouts":8}
)");
    CHECK(log.sample_count() == 2);
    CHECK(log.epochs() == 2);
    CHECK(log.trajectories().at("a").rewards == std::vector<double>{0.5, 0.75});
    CHECK(log.trajectories().at("b").rollouts_per_epoch == 8);
}

TEST_CASE("shaped rewards convert to pass rates at ingestion") {
    const TrainingLog log = ingest_text(
        R"({"sample_id":"a","epoch":1,"rewards":[1,1,-0.5,-1]}
{"sample_id":"a","epoch":2,"rewards":[1,1,1,1]}
)");
    CHECK(log.trajectories().at("a").rewards == std::vector<double>{0.5, 1.0});
    CHECK(log.trajectories().at("a").rollouts_per_epoch == 4);
}

TEST_CASE("ingestion rejections carry line numbers") {
    CHECK_THROWS_WITH_AS(ingest_text("{\"sample_id\":\"a\",\"epoch\":1"),
                         doctest::Contains("line 1"), ParseError);

    // a is missing epoch 2.
    try {
        ingest_text(
            R"({"sample_id":"a","epoch":1,"pass_rate":0.5,"rollouts":8}
{"sample_id":"b","epoch":1,"pass_rate":0.5,"rollouts":8}
{"sample_id":"b","epoch":2,"pass_rate":0.5,"rollouts":8}
)");
        FAIL("expected RaggedLog");
    } catch (const RaggedLog& e) {
        CHECK(std::string(e.what()) == "line 1: ragged log: sample 'a' covers 1 epoch(s), "
                                       "expected 1..2");
    }

    CHECK_THROWS_AS(ingest_text(
                        R"({"sample_id":"a","epoch":1,"pass_rate":0.5,"rollouts":8}
{"sample_id":"a","epoch":1,"pass_rate":0.6,"rollouts":8}
)"),
                    DuplicateRecord);

    // epoch gap inside one sample is ragged too.
    CHECK_THROWS_AS(ingest_text(
                        R"({"sample_id":"a","epoch":1,"pass_rate":0.5,"rollouts":8}
{"sample_id":"a","epoch":3,"pass_rate":0.5,"rollouts":8}
)"),
                    RaggedLog);

    CHECK_THROWS_AS(
        ingest_text(R"({"sample_id":"a","epoch":1,"pass_rate":1.5,"rollouts":8})"),
        ValueOutOfRange);
    CHECK_THROWS_AS(ingest_text(R"({"sample_id":"a","epoch":0,"pass_rate":0.5,"rollouts":8})"),
                    ValueOutOfRange);
    CHECK_THROWS_AS(ingest_text(R"({"sample_id":"a","epoch":1,"rewards":[1,0.5]})"),
                    ValueOutOfRange);
    CHECK_THROWS_AS(ingest_text(R"({"sample_id":"a","epoch":1,"rewards":[]})"), ParseError);
    CHECK_THROWS_AS(
        ingest_text(R"({"sample_id":"a","epoch":1,"pass_rate":0.5,"rollouts":0})"),
        ValueOutOfRange);
    CHECK_THROWS_AS(
        ingest_text(
            R"({"sample_id":"a","epoch":1,"pass_rate":0.5,"rollouts":8,"rewards":[1]})"),
        ParseError);
    CHECK_THROWS_AS(ingest_text(R"({"sample_id":"a","epoch":1})"), ParseError);
    CHECK_THROWS_AS(ingest_text(R"({"sample_id":"a","epoch":1,"pass_rate":0.5})"), ParseError);
    CHECK_THROWS_AS(ingest_text("[1,2,3]"), ParseError);
    CHECK_THROWS_AS(ingest_text(""), EmptyLog);

    CHECK_THROWS_AS(ingest_text(
                        R"({"sample_id":"a","epoch":1,"pass_rate":0.5,"rollouts":8}
{"sample_id":"a","epoch":2,"pass_rate":0.5,"rollouts":4}
)"),
                    InconsistentRollouts);
}

TEST_CASE("second line errors report line 2") {
    try {
        ingest_text("{\"sample_id\":\"a\",\"epoch\":1,\"pass_rate\":0.5,\"rollouts\":8}\nnot json\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("log write then ingest is exact") {
    TrainingLog log;
    log.add(RewardTrajectory{"b", {0.125, 1.0, 0.37500000000000006}, 8});
    log.add(RewardTrajectory{"a", {0.0, 0.3333333333333333, 0.875}, 8});
    std::ostringstream out;
    write_log(log, out);
    CHECK(out.str().back() == '\n');
    const TrainingLog back = ingest_text(out.str());
    CHECK(back.sample_count() == 2);
    for (const auto& [id, t] : log.trajectories()) {
        CHECK(back.trajectories().at(id).rewards == t.rewards);
        CHECK(back.trajectories().at(id).rollouts_per_epoch == t.rollouts_per_epoch);
    }
}

TEST_CASE("reward log write then ingest reproduces pass rates") {
    const std::vector<RolloutRewards> cells = {
        {"a", 1, {1.0, 1.0, -0.5, -1.0}},
        {"a", 2, {1.0, 1.0, 1.0, 1.0}},
    };
    std::ostringstream out;
    write_reward_log(cells, out);
    const TrainingLog log = ingest_text(out.str());
    CHECK(log.trajectories().at("a").rewards == std::vector<double>{0.5, 1.0});
}

TEST_CASE("scores round trip within 1e-10") {
    std::vector<ScoredSample> scores;
    scores.push_back({"a", 0.9139784946236559, 0.5000000000000001, false});
    scores.push_back({"b", -0.2517482517482518, 0.0, true});
    scores.push_back({"c", 1.0, 1.0, false});
    std::ostringstream out;
    write_scores(scores, out);
    std::istringstream in(out.str());
    const auto back = read_scores(in);
    REQUIRE(back.size() == scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        CHECK(back[i].sample_id == scores[i].sample_id);
        CHECK(back[i].selected == scores[i].selected);
        CHECK(std::abs(back[i].lim_score - scores[i].lim_score) <= 1e-10);
        CHECK(std::abs(back[i].linear_score - scores[i].linear_score) <= 1e-10);
    }
}

TEST_CASE("score reader validates records") {
    std::istringstream missing(R"({"sample_id":"a","lim_score":0.5})");
    CHECK_THROWS_AS(read_scores(missing), ParseError);
    std::istringstream bad_type(
        R"({"sample_id":"a","lim_score":"x","linear_score":0.5,"selected":false})");
    CHECK_THROWS_AS(read_scores(bad_type), ParseError);
    std::istringstream empty("");
    CHECK(read_scores(empty).empty());
}

TEST_CASE("manifest round trip is lossless") {
    SelectionManifest manifest;
    manifest.method = "random";
    manifest.count = 139;
    manifest.seed = 18446744073709551615ULL;  // largest 64-bit seed survives
    manifest.digest = "00ff00ff00ff00ff";
    manifest.selected_ids = {"a", "b", "z"};
    manifest.tool_version = "0.1.0";
    std::ostringstream out;
    write_manifest(manifest, out);
    std::istringstream in(out.str());
    const SelectionManifest back = read_manifest(in);
    CHECK(back.method == manifest.method);
    CHECK(back.count == manifest.count);
    CHECK(back.seed == manifest.seed);
    CHECK_FALSE(back.theta.has_value());
    CHECK(back.digest == manifest.digest);
    CHECK(back.selected_ids == manifest.selected_ids);
    CHECK(back.tool_version == manifest.tool_version);

    SelectionManifest thresh;
    thresh.method = "lim";
    thresh.theta = 0.6;
    thresh.digest = "aa";
    thresh.tool_version = "0.1.0";
    std::ostringstream out2;
    write_manifest(thresh, out2);
    std::istringstream in2(out2.str());
    const SelectionManifest back2 = read_manifest(in2);
    CHECK(back2.theta == 0.6);
    CHECK(back2.selected_ids.empty());
    CHECK_FALSE(back2.count.has_value());
}

TEST_CASE("manifest reader rejects unknown methods") {
    std::istringstream in(
        R"({"method":"best","digest":"aa","selected_ids":[],"tool_version":"0"})");
    CHECK_THROWS_AS(read_manifest(in), ParseError);
    std::istringstream blank("\n\n");
    CHECK_THROWS_AS(read_manifest(blank), ParseError);
}

TEST_CASE("truth sidecar round trips") {
    std::map<std::string, SampleArchetype> truth;
    truth.emplace("s1", SampleArchetype::make(ArchetypeKind::Progressive, 0.1, 0.7, 0.5));
    truth.emplace("s2", SampleArchetype::make(ArchetypeKind::NearZero, 0.0, 0.05, 0.5));
    std::ostringstream out;
    write_truth(truth, out);
    std::istringstream in(out.str());
    const auto back = read_truth(in);
    CHECK(back.size() == 2);
    CHECK(back.at("s1") == ArchetypeKind::Progressive);
    CHECK(back.at("s2") == ArchetypeKind::NearZero);

    std::istringstream bad(R"({"id":"s1","archetype":"mystery"})");
    CHECK_THROWS_AS(read_truth(bad), ParseError);
}

TEST_CASE("dataset and completion readers validate their records") {
    std::istringstream ok(
        R"({"id":"p1","problem":"compute","gold_answer":"42","level":4}
{"id":"p2","problem":"compute more","gold_answer":"1/2"}
)");
    const auto dataset = read_dataset(ok);
    CHECK(dataset.size() == 2);
    CHECK(dataset.at("p1").level == 4);
    CHECK_FALSE(dataset.at("p2").level.has_value());

    std::istringstream dup(
        R"({"id":"p1","problem":"x","gold_answer":"1"}
{"id":"p1","problem":"y","gold_answer":"2"}
)");
    CHECK_THROWS_AS(read_dataset(dup), ParseError);
    std::istringstream empty_gold(R"({"id":"p1","problem":"x","gold_answer":""})");
    CHECK_THROWS_AS(read_dataset(empty_gold), ParseError);

    std::istringstream completions(
        R"({"id":"p1","epoch":1,"rollout":0,"completion":"\\boxed{42}"}
)");
    const auto records = read_completions(completions);
    REQUIRE(records.size() == 1);
    CHECK(records[0].line == 1);
    CHECK(records[0].completion == "\\boxed{42}");

    std::istringstream bad_epoch(R"({"id":"p1","epoch":0,"rollout":0,"completion":"x"})");
    CHECK_THROWS_AS(read_completions(bad_epoch), ValueOutOfRange);
}

TEST_CASE("digest matches FNV-1a reference vectors") {
    CHECK(digest_hex("") == "cbf29ce484222325");
    CHECK(digest_hex("a") == "af63dc4c8601ec8c");
    CHECK(digest_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("file digest is stable for byte-identical files") {
    const fs::path dir = fresh_dir("digest");
    const fs::path file = dir / "log.jsonl";
    std::ofstream(file) << "{\"sample_id\":\"a\"}\n";
    CHECK(file_digest_hex(file) == file_digest_hex(file));
    const fs::path copy = dir / "copy.jsonl";
    fs::copy_file(file, copy);
    CHECK(file_digest_hex(file) == file_digest_hex(copy));
    CHECK_THROWS_AS(file_digest_hex(dir / "missing.jsonl"), IoError);
}

TEST_CASE("report emits the expected CSV shapes") {
    TrainingLog log;
    log.add(RewardTrajectory{"a", {0.1, 0.2, 0.3, 0.4, 0.5}, 8});
    log.add(RewardTrajectory{"b", {0.5, 0.5, 0.5, 0.5, 0.5}, 8});
    std::vector<ScoredSample> scores = {{"a", 0.5, 0.5, false}, {"b", 0.5, 0.5, false}};

    const fs::path dir = fresh_dir("report");
    std::map<std::string, ArchetypeKind> truth{{"a", ArchetypeKind::Progressive},
                                               {"b", ArchetypeKind::NearZero}};
    emit_report(log, scores, truth, dir);

    CHECK(count_lines(dir / "average_curve.csv") == 6);  // header + K rows
    CHECK(count_lines(dir / "lim_histogram.csv") == 21);
    CHECK(count_lines(dir / "linear_histogram.csv") == 21);
    CHECK(count_lines(dir / "archetype_curves.csv") == 11);  // header + 2 kinds x 5 epochs

    // All scores equal: every sample lands in one bin.
    const std::string histogram = slurp(dir / "lim_histogram.csv");
    std::istringstream lines(histogram);
    std::string line;
    std::getline(lines, line);  // header
    std::size_t nonzero_bins = 0;
    std::size_t total = 0;
    while (std::getline(lines, line)) {
        const std::size_t last_comma = line.rfind(',');
        const std::size_t count =
            static_cast<std::size_t>(std::stoul(line.substr(last_comma + 1)));
        nonzero_bins += count > 0 ? 1 : 0;
        total += count;
    }
    CHECK(nonzero_bins == 1);
    CHECK(total == scores.size());

    // Archetype rows equal an independent re-aggregation of the log.
    const std::string curves = slurp(dir / "archetype_curves.csv");
    CHECK(curves.find("progressive,3,0.3") != std::string::npos);
    CHECK(curves.find("near_zero,5,0.5") != std::string::npos);

    CHECK_THROWS_AS(emit_report(log, {}, std::nullopt, dir), Error);
}

TEST_CASE("comparison tables carry one row per strategy and per run") {
    ComparisonResult result;
    result.budget = 10;
    result.runs = 2;
    for (const char* name : {"full", "rand", "linear", "lim"}) {
        StrategyOutcome outcome;
        outcome.strategy = name;
        outcome.yields = {0.5, 0.6};
        outcome.mean_yield = 0.55;
        result.strategies.push_back(outcome);
    }
    const fs::path dir = fresh_dir("comparison");
    write_comparison(result, dir / "summary.csv", dir / "per_seed.csv");
    CHECK(count_lines(dir / "summary.csv") == 5);
    CHECK(count_lines(dir / "per_seed.csv") == 3);
    const std::string header = slurp(dir / "per_seed.csv");
    CHECK(header.rfind("run,full,rand,linear,lim\n", 0) == 0);
}

TEST_CASE("missing input files raise IoError") {
    CHECK_THROWS_AS(ingest_log(fs::path("/nonexistent/limkit.jsonl")), IoError);
    CHECK_THROWS_AS(read_scores(fs::path("/nonexistent/limkit.jsonl")), IoError);
    CHECK_THROWS_AS(read_manifest(fs::path("/nonexistent/limkit.json")), IoError);
}
