#include "limkit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace limkit {

namespace {

using nlohmann::json;

std::string fmt_sig12(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

void finish_out(std::ostream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

json parse_line(const std::string& line, std::size_t line_no) {
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded()) {
        throw ParseError(line_no, "invalid JSON record");
    }
    if (!record.is_object()) {
        throw ParseError(line_no, "record is not a JSON object");
    }
    return record;
}

std::string require_string(const json& record, const char* key, std::size_t line_no) {
    if (!record.contains(key) || !record[key].is_string()) {
        throw ParseError(line_no, std::string("missing or non-string field '") + key + "'");
    }
    return record[key].get<std::string>();
}

int require_int(const json& record, const char* key, std::size_t line_no) {
    if (!record.contains(key) || !record[key].is_number_integer()) {
        throw ParseError(line_no, std::string("missing or non-integer field '") + key + "'");
    }
    return record[key].get<int>();
}

double require_number(const json& record, const char* key, std::size_t line_no) {
    if (!record.contains(key) || !record[key].is_number()) {
        throw ParseError(line_no, std::string("missing or non-numeric field '") + key + "'");
    }
    return record[key].get<double>();
}

LogRecord parse_log_record(const json& record, std::size_t line_no) {
    LogRecord out;
    out.line = line_no;
    out.sample_id = require_string(record, "sample_id", line_no);
    if (out.sample_id.empty()) {
        throw ParseError(line_no, "empty sample_id");
    }
    out.epoch = require_int(record, "epoch", line_no);
    if (out.epoch < 1) {
        throw ValueOutOfRange(line_no, "epoch must be >= 1");
    }

    const bool has_rewards = record.contains("rewards");
    const bool has_pass_rate = record.contains("pass_rate");
    if (has_rewards == has_pass_rate) {
        throw ParseError(line_no, "record needs exactly one of 'rewards' or 'pass_rate'");
    }

    if (has_rewards) {
        if (record.contains("rollouts")) {
            throw ParseError(line_no, "'rollouts' is implied by the 'rewards' array");
        }
        const json& rewards = record["rewards"];
        if (!rewards.is_array() || rewards.empty()) {
            throw ParseError(line_no, "'rewards' must be a non-empty array");
        }
        int correct = 0;
        for (const json& value : rewards) {
            if (!value.is_number()) {
                throw ParseError(line_no, "'rewards' entries must be numbers");
            }
            const double reward = value.get<double>();
            if (reward == 1.0) {
                ++correct;
            } else if (reward != -0.5 && reward != -1.0) {
                throw ValueOutOfRange(line_no,
                                      "shaped reward must be one of {1, -0.5, -1}, got " +
                                          fmt_sig12(reward));
            }
        }
        out.rollouts = static_cast<int>(rewards.size());
        out.pass_rate = static_cast<double>(correct) / static_cast<double>(rewards.size());
        return out;
    }

    out.pass_rate = require_number(record, "pass_rate", line_no);
    if (!(out.pass_rate >= 0.0 && out.pass_rate <= 1.0)) {
        throw ValueOutOfRange(line_no, "pass_rate must lie in [0, 1]");
    }
    out.rollouts = require_int(record, "rollouts", line_no);
    if (out.rollouts < 1) {
        throw ValueOutOfRange(line_no, "rollouts must be >= 1");
    }
    return out;
}

}  // namespace

TrainingLog assemble_log(const std::vector<LogRecord>& records) {
    struct SampleCells {
        std::size_t first_line = 0;
        std::map<int, LogRecord> by_epoch;
    };
    std::map<std::string, SampleCells> samples;
    int max_epoch = 0;
    for (const LogRecord& record : records) {
        auto [it, inserted] = samples.try_emplace(record.sample_id);
        if (inserted) {
            it->second.first_line = record.line;
        }
        auto [cell, fresh] = it->second.by_epoch.emplace(record.epoch, record);
        if (!fresh) {
            throw DuplicateRecord(record.line, record.sample_id, record.epoch);
        }
        max_epoch = std::max(max_epoch, record.epoch);
    }
    if (samples.empty()) {
        throw EmptyLog();
    }

    TrainingLog log;
    for (const auto& [sample_id, cells] : samples) {
        const int found = static_cast<int>(cells.by_epoch.size());
        if (found != max_epoch || cells.by_epoch.rbegin()->first != max_epoch) {
            throw RaggedLog(cells.first_line, sample_id, max_epoch, found);
        }
        RewardTrajectory trajectory;
        trajectory.sample_id = sample_id;
        trajectory.rollouts_per_epoch = cells.by_epoch.begin()->second.rollouts;
        trajectory.rewards.reserve(cells.by_epoch.size());
        for (const auto& [epoch, record] : cells.by_epoch) {
            if (record.rollouts != trajectory.rollouts_per_epoch) {
                throw InconsistentRollouts(record.line, sample_id,
                                           trajectory.rollouts_per_epoch, record.rollouts);
            }
            trajectory.rewards.push_back(record.pass_rate);
        }
        log.add(std::move(trajectory));
    }
    return log;
}

TrainingLog ingest_log(std::istream& in) {
    std::vector<LogRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        records.push_back(parse_log_record(parse_line(line, line_no), line_no));
    }
    return assemble_log(records);
}

TrainingLog ingest_log(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return ingest_log(in);
}

void write_log(const TrainingLog& log, std::ostream& out) {
    for (const auto& [sample_id, trajectory] : log.trajectories()) {
        for (std::size_t k = 0; k < trajectory.rewards.size(); ++k) {
            json record;
            record["sample_id"] = sample_id;
            record["epoch"] = static_cast<int>(k + 1);
            record["pass_rate"] = trajectory.rewards[k];
            record["rollouts"] = trajectory.rollouts_per_epoch;
            out << record.dump() << '\n';
        }
    }
}

void write_log(const TrainingLog& log, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    write_log(log, out);
    finish_out(out, path);
}

void write_reward_log(const std::vector<RolloutRewards>& cells, std::ostream& out) {
    for (const RolloutRewards& cell : cells) {
        json record;
        record["sample_id"] = cell.sample_id;
        record["epoch"] = cell.epoch;
        record["rewards"] = cell.rewards;
        out << record.dump() << '\n';
    }
}

void write_reward_log(const std::vector<RolloutRewards>& cells,
                      const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    write_reward_log(cells, out);
    finish_out(out, path);
}

void write_scores(const std::vector<ScoredSample>& scores, std::ostream& out) {
    for (const ScoredSample& sample : scores) {
        out << "{\"sample_id\":" << json(sample.sample_id).dump()
            << ",\"lim_score\":" << fmt_sig12(sample.lim_score)
            << ",\"linear_score\":" << fmt_sig12(sample.linear_score)
            << ",\"selected\":" << (sample.selected ? "true" : "false") << "}\n";
    }
}

void write_scores(const std::vector<ScoredSample>& scores, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    write_scores(scores, out);
    finish_out(out, path);
}

std::vector<ScoredSample> read_scores(std::istream& in) {
    std::vector<ScoredSample> scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const json record = parse_line(line, line_no);
        ScoredSample sample;
        sample.sample_id = require_string(record, "sample_id", line_no);
        sample.lim_score = require_number(record, "lim_score", line_no);
        sample.linear_score = require_number(record, "linear_score", line_no);
        if (!record.contains("selected") || !record["selected"].is_boolean()) {
            throw ParseError(line_no, "missing or non-boolean field 'selected'");
        }
        sample.selected = record["selected"].get<bool>();
        scores.push_back(std::move(sample));
    }
    return scores;
}

std::vector<ScoredSample> read_scores(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_scores(in);
}

void write_manifest(const SelectionManifest& manifest, std::ostream& out) {
    json record;
    record["method"] = manifest.method;
    if (manifest.theta) {
        record["theta"] = *manifest.theta;
    }
    if (manifest.count) {
        record["count"] = *manifest.count;
    }
    if (manifest.seed) {
        record["seed"] = *manifest.seed;
    }
    record["digest"] = manifest.digest;
    record["selected_ids"] = manifest.selected_ids;
    record["tool_version"] = manifest.tool_version;
    out << record.dump() << '\n';
}

void write_manifest(const SelectionManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    write_manifest(manifest, out);
    finish_out(out, path);
}

SelectionManifest read_manifest(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            break;
        }
    }
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
        throw ParseError(line_no == 0 ? 1 : line_no, "empty manifest");
    }
    const json record = parse_line(line, line_no);
    SelectionManifest manifest;
    manifest.method = require_string(record, "method", line_no);
    if (manifest.method != "lim" && manifest.method != "linear" && manifest.method != "random") {
        throw ParseError(line_no, "method must be one of lim|linear|random");
    }
    if (record.contains("theta")) {
        manifest.theta = require_number(record, "theta", line_no);
    }
    if (record.contains("count")) {
        if (!record["count"].is_number_unsigned() && !record["count"].is_number_integer()) {
            throw ParseError(line_no, "'count' must be an integer");
        }
        manifest.count = record["count"].get<std::size_t>();
    }
    if (record.contains("seed")) {
        if (!record["seed"].is_number_unsigned() && !record["seed"].is_number_integer()) {
            throw ParseError(line_no, "'seed' must be an integer");
        }
        manifest.seed = record["seed"].get<std::uint64_t>();
    }
    manifest.digest = require_string(record, "digest", line_no);
    manifest.tool_version = require_string(record, "tool_version", line_no);
    if (!record.contains("selected_ids") || !record["selected_ids"].is_array()) {
        throw ParseError(line_no, "missing or non-array field 'selected_ids'");
    }
    for (const json& id : record["selected_ids"]) {
        if (!id.is_string()) {
            throw ParseError(line_no, "'selected_ids' entries must be strings");
        }
        manifest.selected_ids.push_back(id.get<std::string>());
    }
    return manifest;
}

SelectionManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_manifest(in);
}

void write_truth(const std::map<std::string, SampleArchetype>& truth, std::ostream& out) {
    for (const auto& [id, archetype] : truth) {
        json record;
        record["id"] = id;
        record["archetype"] = to_string(archetype.kind);
        out << record.dump() << '\n';
    }
}

void write_truth(const std::map<std::string, SampleArchetype>& truth,
                 const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    write_truth(truth, out);
    finish_out(out, path);
}

std::map<std::string, ArchetypeKind> read_truth(std::istream& in) {
    std::map<std::string, ArchetypeKind> truth;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const json record = parse_line(line, line_no);
        const std::string id = require_string(record, "id", line_no);
        const std::string name = require_string(record, "archetype", line_no);
        ArchetypeKind kind;
        try {
            kind = archetype_from_string(name);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
        if (!truth.emplace(id, kind).second) {
            throw ParseError(line_no, "duplicate id '" + id + "'");
        }
    }
    return truth;
}

std::map<std::string, ArchetypeKind> read_truth(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_truth(in);
}

std::map<std::string, GoldItem> read_dataset(std::istream& in) {
    std::map<std::string, GoldItem> dataset;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const json record = parse_line(line, line_no);
        GoldItem item;
        item.id = require_string(record, "id", line_no);
        if (item.id.empty()) {
            throw ParseError(line_no, "empty id");
        }
        item.problem = require_string(record, "problem", line_no);
        item.gold_answer = require_string(record, "gold_answer", line_no);
        if (item.gold_answer.empty()) {
            throw ParseError(line_no, "empty gold_answer for id '" + item.id + "'");
        }
        if (record.contains("level")) {
            item.level = require_int(record, "level", line_no);
        }
        const std::string id = item.id;
        if (!dataset.emplace(id, std::move(item)).second) {
            throw ParseError(line_no, "duplicate id '" + id + "'");
        }
    }
    return dataset;
}

std::map<std::string, GoldItem> read_dataset(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_dataset(in);
}

std::vector<CompletionRecord> read_completions(std::istream& in) {
    std::vector<CompletionRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const json record = parse_line(line, line_no);
        CompletionRecord completion;
        completion.line = line_no;
        completion.id = require_string(record, "id", line_no);
        if (completion.id.empty()) {
            throw ParseError(line_no, "empty id");
        }
        completion.epoch = require_int(record, "epoch", line_no);
        if (completion.epoch < 1) {
            throw ValueOutOfRange(line_no, "epoch must be >= 1");
        }
        completion.rollout = require_int(record, "rollout", line_no);
        if (completion.rollout < 0) {
            throw ValueOutOfRange(line_no, "rollout must be >= 0");
        }
        completion.completion = require_string(record, "completion", line_no);
        records.push_back(std::move(completion));
    }
    return records;
}

std::vector<CompletionRecord> read_completions(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_completions(in);
}

void write_comparison(const ComparisonResult& result, const std::filesystem::path& summary_csv,
                      const std::filesystem::path& per_seed_csv) {
    {
        std::ofstream out = open_out(summary_csv);
        out << "strategy,mean_yield,stderr_yield,mean_progressive_fraction,mean_selected\n";
        for (const StrategyOutcome& outcome : result.strategies) {
            out << outcome.strategy << ',' << fmt_sig12(outcome.mean_yield) << ','
                << fmt_sig12(outcome.stderr_yield) << ','
                << fmt_sig12(outcome.mean_progressive_fraction) << ','
                << fmt_sig12(outcome.mean_selected) << '\n';
        }
        finish_out(out, summary_csv);
    }
    {
        std::ofstream out = open_out(per_seed_csv);
        out << "run";
        for (const StrategyOutcome& outcome : result.strategies) {
            out << ',' << outcome.strategy;
        }
        out << '\n';
        for (int r = 0; r < result.runs; ++r) {
            out << r;
            for (const StrategyOutcome& outcome : result.strategies) {
                out << ',' << fmt_sig12(outcome.yields[static_cast<std::size_t>(r)]);
            }
            out << '\n';
        }
        finish_out(out, per_seed_csv);
    }
}

namespace {

void write_histogram(const std::vector<ScoredSample>& scores, ScoreField field,
                     const std::filesystem::path& path) {
    auto value_of = [&](const ScoredSample& s) {
        return field == ScoreField::Lim ? s.lim_score : s.linear_score;
    };
    double lo = value_of(scores.front());
    double hi = lo;
    for (const ScoredSample& sample : scores) {
        lo = std::min(lo, value_of(sample));
        hi = std::max(hi, value_of(sample));
    }
    const double width = (hi - lo) / kHistogramBins;
    std::vector<std::size_t> counts(kHistogramBins, 0);
    for (const ScoredSample& sample : scores) {
        std::size_t bin = 0;
        if (width > 0.0) {
            bin = std::min<std::size_t>(
                kHistogramBins - 1,
                static_cast<std::size_t>((value_of(sample) - lo) / width));
        }
        ++counts[bin];
    }
    std::ofstream out = open_out(path);
    out << "bin_index,bin_low,bin_high,count\n";
    for (int b = 0; b < kHistogramBins; ++b) {
        out << b << ',' << fmt_sig12(lo + width * b) << ',' << fmt_sig12(lo + width * (b + 1))
            << ',' << counts[static_cast<std::size_t>(b)] << '\n';
    }
    finish_out(out, path);
}

}  // namespace

void emit_report(const TrainingLog& log, const std::vector<ScoredSample>& scores,
                 const std::optional<std::map<std::string, ArchetypeKind>>& truth,
                 const std::filesystem::path& out_dir) {
    if (log.empty()) {
        throw EmptyLog();
    }
    if (scores.empty()) {
        throw Error(ErrorClass::Usage, "no scores to report");
    }
    std::filesystem::create_directories(out_dir);

    {
        const AverageCurve average = compute_average_curve(log);
        const std::filesystem::path path = out_dir / "average_curve.csv";
        std::ofstream out = open_out(path);
        out << "epoch,mean_pass_rate\n";
        for (std::size_t k = 0; k < average.values.size(); ++k) {
            out << (k + 1) << ',' << fmt_sig12(average.values[k]) << '\n';
        }
        finish_out(out, path);
    }

    write_histogram(scores, ScoreField::Lim, out_dir / "lim_histogram.csv");
    write_histogram(scores, ScoreField::Linear, out_dir / "linear_histogram.csv");

    if (truth) {
        const std::filesystem::path path = out_dir / "archetype_curves.csv";
        std::ofstream out = open_out(path);
        out << "archetype,epoch,mean_pass_rate\n";
        const ArchetypeKind kinds[] = {ArchetypeKind::NearZero, ArchetypeKind::FastSaturating,
                                       ArchetypeKind::Progressive};
        for (ArchetypeKind kind : kinds) {
            std::vector<double> sums(static_cast<std::size_t>(log.epochs()), 0.0);
            std::size_t members = 0;
            for (const auto& [id, trajectory] : log.trajectories()) {
                const auto it = truth->find(id);
                if (it == truth->end() || it->second != kind) {
                    continue;
                }
                ++members;
                for (std::size_t k = 0; k < sums.size(); ++k) {
                    sums[k] += trajectory.rewards[k];
                }
            }
            if (members == 0) {
                continue;
            }
            for (std::size_t k = 0; k < sums.size(); ++k) {
                out << to_string(kind) << ',' << (k + 1) << ','
                    << fmt_sig12(sums[k] / static_cast<double>(members)) << '\n';
            }
        }
        finish_out(out, path);
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string digest_hex(std::string_view bytes) {
    const std::uint64_t hash = fnv1a64(bytes);
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

std::string file_digest_hex(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return digest_hex(buffer.str());
}

}  // namespace limkit
