#include "limkit/grading.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace limkit {

namespace {

constexpr std::string_view kBoxedMarker = "\\boxed{";

bool is_escaped(std::string_view text, std::size_t pos) {
    std::size_t backslashes = 0;
    while (pos > 0 && text[pos - 1] == '\\') {
        ++backslashes;
        --pos;
    }
    return backslashes % 2 == 1;
}

// Content between the group's braces if the group starting at `open` (the
// index of '{') is balanced, else nullopt.
std::optional<std::string> balanced_group(std::string_view text, std::size_t open) {
    int depth = 1;
    for (std::size_t i = open + 1; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '{' || c == '}') && is_escaped(text, i)) {
            continue;
        }
        if (c == '{') {
            ++depth;
        } else if (c == '}') {
            --depth;
            if (depth == 0) {
                return std::string(text.substr(open + 1, i - open - 1));
            }
        }
    }
    return std::nullopt;
}

std::string collapse_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_run = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_run = true;
            continue;
        }
        if (in_run && !out.empty()) {
            out.push_back(' ');
        }
        in_run = false;
        out.push_back(c);
    }
    return out;
}

const std::regex& slash_fraction_re() {
    static const std::regex re(R"(^(-?\d+)\s*/\s*(\d+)$)");
    return re;
}

const std::regex& latex_fraction_re() {
    static const std::regex re(R"(^\\[dt]?frac\{(-?\d+)\}\{(\d+)\}$)");
    return re;
}

bool is_textual(const std::string& s) {
    bool has_alpha = false;
    for (char c : s) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            has_alpha = true;
        } else if (c != ' ') {
            return false;
        }
    }
    return has_alpha;
}

}  // namespace

std::optional<std::string> extract_answer(std::string_view completion) {
    std::optional<std::string> last;
    std::size_t pos = 0;
    while ((pos = completion.find(kBoxedMarker, pos)) != std::string_view::npos) {
        const std::size_t open = pos + kBoxedMarker.size() - 1;
        if (auto group = balanced_group(completion, open)) {
            last = std::move(group);
        }
        pos += kBoxedMarker.size();
    }
    return last;
}

std::string normalize_answer(std::string_view raw) {
    std::string s(raw);
    s.erase(std::remove(s.begin(), s.end(), '$'), s.end());
    s = collapse_whitespace(s);
    while (!s.empty() && (s.back() == '.' || s.back() == ' ')) {
        s.pop_back();
    }
    std::smatch m;
    if (std::regex_match(s, m, slash_fraction_re()) ||
        std::regex_match(s, m, latex_fraction_re())) {
        return m[1].str() + "/" + m[2].str();
    }
    if (is_textual(s)) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    return s;
}

Verdict grade(std::string_view completion, const GoldItem& gold) {
    Verdict verdict;
    const auto extracted = extract_answer(completion);
    if (!extracted) {
        verdict.kind = VerdictKind::FormatError;
        verdict.reward = kRewardFormatError;
        return verdict;
    }
    verdict.extracted_answer = normalize_answer(*extracted);
    if (*verdict.extracted_answer == normalize_answer(gold.gold_answer)) {
        verdict.kind = VerdictKind::Correct;
        verdict.reward = kRewardCorrect;
    } else {
        verdict.kind = VerdictKind::IncorrectWellFormatted;
        verdict.reward = kRewardIncorrect;
    }
    return verdict;
}

double pass_rate(const std::vector<Verdict>& verdicts) {
    if (verdicts.empty()) {
        throw EmptyRollouts();
    }
    const auto correct = std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) {
        return v.kind == VerdictKind::Correct;
    });
    return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

const char* to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::Correct:
            return "correct";
        case VerdictKind::IncorrectWellFormatted:
            return "incorrect_well_formatted";
        case VerdictKind::FormatError:
            return "format_error";
    }
    return "format_error";
}

}  // namespace limkit
