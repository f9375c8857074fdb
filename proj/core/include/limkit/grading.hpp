#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "limkit/errors.hpp"

namespace limkit {

enum class VerdictKind { Correct, IncorrectWellFormatted, FormatError };

// Shaped rewards of the rule-based grader.
inline constexpr double kRewardCorrect = 1.0;
inline constexpr double kRewardIncorrect = -0.5;
inline constexpr double kRewardFormatError = -1.0;

// Grading outcome for one rollout. extracted_answer is present exactly when
// the completion is well-formatted, and holds the normalized answer.
struct Verdict {
    VerdictKind kind = VerdictKind::FormatError;
    double reward = kRewardFormatError;
    std::optional<std::string> extracted_answer;
};

struct GoldItem {
    std::string id;
    std::string problem;
    std::string gold_answer;
    std::optional<int> level;
};

// Content of the last well-balanced \boxed{...} group, or nullopt when no
// such group exists. Braces escaped with a backslash do not affect nesting.
std::optional<std::string> extract_answer(std::string_view completion);

// Canonicalizes an answer string:
//   - drops '$' delimiters,
//   - collapses whitespace runs and trims the ends,
//   - strips trailing periods,
//   - maps whole-string fractions a/b and \frac{a}{b} to the form "a/b",
//   - lowercases purely textual answers.
// Anything unrecognized passes through intact. Idempotent.
std::string normalize_answer(std::string_view raw);

// Three-case rule-based grade: no extractable answer -> FormatError (-1);
// otherwise Correct (+1) iff the extracted answer normalizes to the same
// string as the gold answer, else IncorrectWellFormatted (-0.5).
// Total over arbitrary input; never throws.
Verdict grade(std::string_view completion, const GoldItem& gold);

// Fraction of verdicts graded Correct. Throws EmptyRollouts on empty input.
double pass_rate(const std::vector<Verdict>& verdicts);

const char* to_string(VerdictKind kind);

}  // namespace limkit
