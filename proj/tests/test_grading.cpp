#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "limkit/grading.hpp"

using namespace limkit;
using nlohmann::json;

namespace {

std::vector<json> load_jsonl(const std::string& name) {
    std::ifstream in(std::string(LIMKIT_TEST_DATA_DIR) + "/" + name);
    REQUIRE(in.good());
    std::vector<json> records;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            records.push_back(json::parse(line));
        }
    }
    return records;
}

GoldItem gold(std::string answer) {
    return GoldItem{"g1", "problem text", std::move(answer), std::nullopt};
}

}  // namespace

TEST_CASE("extracts a single boxed group") {
    CHECK(extract_answer("so \\boxed{42}") == "42");
}

TEST_CASE("last boxed group wins") {
    CHECK(extract_answer("first \\boxed{1}, finally \\boxed{2}") == "2");
}

TEST_CASE("no boxed group means absent") {
    CHECK_FALSE(extract_answer("the answer is 42").has_value());
    CHECK_FALSE(extract_answer("").has_value());
    CHECK_FALSE(extract_answer("boxed{42}").has_value());
    CHECK_FALSE(extract_answer("\\boxed 42").has_value());
}

TEST_CASE("unbalanced groups fall back to the last balanced one") {
    CHECK(extract_answer("\\boxed{1} then \\boxed{2") == "1");
    CHECK_FALSE(extract_answer("\\boxed{42").has_value());
    CHECK_FALSE(extract_answer("\\boxed{{42}").has_value());
}

TEST_CASE("nested and escaped braces extract whole") {
    CHECK(extract_answer("\\boxed{\\frac{1}{2}}") == "\\frac{1}{2}");
    CHECK(extract_answer("\\boxed{\\{1,2\\}}") == "\\{1,2\\}");
    CHECK(extract_answer("\\boxed{}") == "");
}

TEST_CASE("normalization spec anchors") {
    CHECK(normalize_answer("  42. ") == "42");
    CHECK(normalize_answer("\\frac{1}{2}") == normalize_answer("1/2"));
    CHECK(normalize_answer("\\frac{1}{2}") == "1/2");
}

TEST_CASE("normalization golden corpus") {
    const auto corpus = load_jsonl("normalization_corpus.jsonl");
    REQUIRE(corpus.size() >= 200);
    for (const json& record : corpus) {
        const std::string raw = record["raw"].get<std::string>();
        const std::string expected = record["expected"].get<std::string>();
        INFO("raw: ", raw);
        CHECK(normalize_answer(raw) == expected);
        CHECK(normalize_answer(expected) == expected);  // idempotence
    }
}

TEST_CASE("grade maps the three outcomes to the shaped rewards") {
    const Verdict correct = grade("\\boxed{42}", gold("42"));
    CHECK(correct.kind == VerdictKind::Correct);
    CHECK(correct.reward == 1.0);
    CHECK(correct.extracted_answer == "42");

    const Verdict wrong = grade("\\boxed{41}", gold("42"));
    CHECK(wrong.kind == VerdictKind::IncorrectWellFormatted);
    CHECK(wrong.reward == -0.5);
    CHECK(wrong.extracted_answer == "41");

    const Verdict unformatted = grade("I think it's 42", gold("42"));
    CHECK(unformatted.kind == VerdictKind::FormatError);
    CHECK(unformatted.reward == -1.0);
    CHECK_FALSE(unformatted.extracted_answer.has_value());
}

TEST_CASE("grading golden corpus") {
    const auto corpus = load_jsonl("grading_corpus.jsonl");
    REQUIRE(corpus.size() >= 50);
    for (const json& record : corpus) {
        const std::string completion = record["completion"].get<std::string>();
        const GoldItem item = gold(record["gold_answer"].get<std::string>());
        const Verdict verdict = grade(completion, item);
        INFO("completion: ", completion);
        CHECK(std::string(to_string(verdict.kind)) == record["expected_kind"].get<std::string>());
        CHECK(verdict.reward == record["expected_reward"].get<double>());
        if (record.contains("expected_extracted")) {
            REQUIRE(verdict.extracted_answer.has_value());
            CHECK(*verdict.extracted_answer == record["expected_extracted"].get<std::string>());
        }
        CHECK((verdict.kind == VerdictKind::FormatError) == !verdict.extracted_answer.has_value());
    }
}

TEST_CASE("completions with identical normalized extraction grade identically") {
    const GoldItem item = gold("1/2");
    const std::vector<std::string> variants = {
        "\\boxed{1/2}", "\\boxed{\\frac{1}{2}}", "... \\boxed{ 1/2 }",
        "$\\boxed{1/2}$.", "wrong start \\boxed{7} but final \\boxed{1 / 2}"};
    for (const std::string& completion : variants) {
        const Verdict verdict = grade(completion, item);
        INFO("completion: ", completion);
        CHECK(verdict.kind == VerdictKind::Correct);
        CHECK(*verdict.extracted_answer == "1/2");
    }
}

TEST_CASE("grade is total over arbitrary bytes") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> byte(1, 255);
    std::uniform_int_distribution<int> length(0, 200);
    const GoldItem item = gold("42");
    for (int round = 0; round < 500; ++round) {
        std::string completion;
        const int n = length(rng);
        for (int i = 0; i < n; ++i) {
            completion.push_back(static_cast<char>(byte(rng)));
        }
        const Verdict verdict = grade(completion, item);
        const bool known_reward =
            verdict.reward == 1.0 || verdict.reward == -0.5 || verdict.reward == -1.0;
        CHECK(known_reward);
        CHECK((verdict.kind == VerdictKind::FormatError) ==
              !verdict.extracted_answer.has_value());
        CHECK(grade(completion, item).kind == verdict.kind);  // deterministic
    }
}

TEST_CASE("pass rate counts correct verdicts only") {
    const Verdict c{VerdictKind::Correct, 1.0, std::string("42")};
    const Verdict i{VerdictKind::IncorrectWellFormatted, -0.5, std::string("41")};
    const Verdict f{VerdictKind::FormatError, -1.0, std::nullopt};
    CHECK(pass_rate({c, c, i, f}) == 0.5);
    CHECK(pass_rate({c, c, c}) == 1.0);
    CHECK(pass_rate({f, f}) == 0.0);
    CHECK_THROWS_AS(pass_rate({}), EmptyRollouts);
}
