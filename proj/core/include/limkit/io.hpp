#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "limkit/grading.hpp"
#include "limkit/sim.hpp"
#include "limkit/trajectory.hpp"

namespace limkit {

// Line-delimited log record, one JSON object per line. Field names are part
// of the wire format: sample_id, epoch, rewards, pass_rate, rollouts.
// Exactly one of `rewards` (per-rollout shaped rewards in {1, -0.5, -1}) or
// `pass_rate` (+ `rollouts`) is present per record.
struct LogRecord {
    std::size_t line = 0;  // 1-based source line, 0 when synthesized
    std::string sample_id;
    int epoch = 0;
    double pass_rate = 0.0;
    int rollouts = 0;
};

// Per-rollout shaped rewards for one (sample, epoch) cell; the form the
// grader emits.
struct RolloutRewards {
    std::string sample_id;
    int epoch = 0;
    std::vector<double> rewards;
};

// Self-describing record of one subset selection; re-running the described
// method over the digested input reproduces selected_ids exactly.
struct SelectionManifest {
    std::string method;  // "lim" | "linear" | "random"
    std::optional<double> theta;        // lim / linear
    std::optional<std::size_t> count;   // random
    std::optional<std::uint64_t> seed;  // random
    std::string digest;                 // fnv1a-64 hex of the input bytes
    std::vector<std::string> selected_ids;
    std::string tool_version;
};

// Streaming ingestion of a log file into a rectangular TrainingLog. Shaped
// rewards convert to pass rates at this boundary (correct <=> reward == 1).
// Rejections throw ParseError / ValueOutOfRange / DuplicateRecord /
// RaggedLog / InconsistentRollouts, all carrying a line number; nothing is
// imputed.
TrainingLog ingest_log(std::istream& in);
TrainingLog ingest_log(const std::filesystem::path& path);

// Assembles already-validated records. Used by ingestion and by the grader
// so a file it writes is ingestible by construction.
TrainingLog assemble_log(const std::vector<LogRecord>& records);

// Writers emit one record per line in (sample_id, epoch) order with a
// terminating newline; floats use shortest round-trip form.
void write_log(const TrainingLog& log, std::ostream& out);
void write_log(const TrainingLog& log, const std::filesystem::path& path);

void write_reward_log(const std::vector<RolloutRewards>& cells, std::ostream& out);
void write_reward_log(const std::vector<RolloutRewards>& cells,
                      const std::filesystem::path& path);

// Score files carry sample_id, lim_score, linear_score, selected per line,
// ordered by sample_id; scores are serialized with 12 significant digits.
void write_scores(const std::vector<ScoredSample>& scores, std::ostream& out);
void write_scores(const std::vector<ScoredSample>& scores, const std::filesystem::path& path);
std::vector<ScoredSample> read_scores(std::istream& in);
std::vector<ScoredSample> read_scores(const std::filesystem::path& path);

void write_manifest(const SelectionManifest& manifest, std::ostream& out);
void write_manifest(const SelectionManifest& manifest, const std::filesystem::path& path);
SelectionManifest read_manifest(std::istream& in);
SelectionManifest read_manifest(const std::filesystem::path& path);

// Ground-truth sidecar: one {"id": ..., "archetype": ...} object per line.
void write_truth(const std::map<std::string, SampleArchetype>& truth, std::ostream& out);
void write_truth(const std::map<std::string, SampleArchetype>& truth,
                 const std::filesystem::path& path);
std::map<std::string, ArchetypeKind> read_truth(std::istream& in);
std::map<std::string, ArchetypeKind> read_truth(const std::filesystem::path& path);

// Problem dataset: one {"id", "problem", "gold_answer", "level"?} object per
// line, id unique, gold_answer non-empty.
std::map<std::string, GoldItem> read_dataset(std::istream& in);
std::map<std::string, GoldItem> read_dataset(const std::filesystem::path& path);

// Completion transcript: one {"id", "epoch", "rollout", "completion"} object
// per line. (id, epoch, rollout) must be unique.
struct CompletionRecord {
    std::size_t line = 0;
    std::string id;
    int epoch = 0;
    int rollout = 0;
    std::string completion;
};
std::vector<CompletionRecord> read_completions(std::istream& in);
std::vector<CompletionRecord> read_completions(const std::filesystem::path& path);

// Comparison tables (simulate --compare).
void write_comparison(const ComparisonResult& result, const std::filesystem::path& summary_csv,
                      const std::filesystem::path& per_seed_csv);

// Report CSVs for external plotting: per-epoch average curve, 20-bin
// histograms of both scores, and per-archetype mean curves when a
// ground-truth map is supplied.
void emit_report(const TrainingLog& log, const std::vector<ScoredSample>& scores,
                 const std::optional<std::map<std::string, ArchetypeKind>>& truth,
                 const std::filesystem::path& out_dir);

inline constexpr int kHistogramBins = 20;

// FNV-1a 64-bit digest, stable across platforms for byte-identical input.
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::string_view bytes);
std::string file_digest_hex(const std::filesystem::path& path);

}  // namespace limkit
