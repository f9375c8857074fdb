// limkit: training-data curation for RL runs.
//
// Subcommands: score, select, grade, simulate, report. Every run is
// deterministic given its flags and input files; the effective configuration
// is echoed to stdout (and, for directory-producing commands, written to
// run_config.json). Failures print a single machine-parsable line to stderr:
//   ERROR <code> <detail>
// with codes 1 usage, 2 parse, 3 degenerate math, 4 io.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "limkit/grading.hpp"
#include "limkit/io.hpp"
#include "limkit/sim.hpp"
#include "limkit/trajectory.hpp"
#include "limkit/version.hpp"

namespace {

using nlohmann::json;

std::string single_line(std::string text) {
    std::replace(text.begin(), text.end(), '\n', ' ');
    std::replace(text.begin(), text.end(), '\r', ' ');
    return text;
}

// Flat or per-subcommand-nested JSON config files, e.g.
//   {"quiet": true, "select": {"theta": 0.5}}
// Command-line flags always take precedence over config values.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App* app, bool default_also, bool,
                          std::string) const override {
        json out = json::object();
        for (const CLI::Option* opt : app->get_options()) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) {
                continue;
            }
            if (!opt->results().empty()) {
                out[opt->get_lnames()[0]] = opt->results();
            } else if (default_also) {
                out[opt->get_lnames()[0]] = opt->get_default_str();
            }
        }
        return out.dump();
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json data = json::parse(input, nullptr, false);
        if (data.is_discarded() || !data.is_object()) {
            throw CLI::FileError("config file is not a JSON object");
        }
        std::vector<CLI::ConfigItem> items;
        collect(data, {}, items);
        return items;
    }

  private:
    static std::string scalar(const json& value) {
        if (value.is_string()) {
            return value.get<std::string>();
        }
        if (value.is_boolean()) {
            return value.get<bool>() ? "true" : "false";
        }
        return value.dump();
    }

    static void collect(const json& node, std::vector<std::string> parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : node.items()) {
            if (value.is_object()) {
                auto nested = parents;
                nested.push_back(key);
                collect(value, std::move(nested), items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const json& element : value) {
                    item.inputs.push_back(scalar(element));
                }
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

struct GlobalOptions {
    std::uint64_t seed = 0;
    bool quiet = false;
};

void echo_config(const GlobalOptions& global, const json& effective) {
    if (!global.quiet) {
        std::cout << effective.dump() << '\n';
    }
}

void write_run_config(const json& effective, const std::filesystem::path& dir) {
    const std::filesystem::path path = dir / "run_config.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw limkit::IoError("cannot open '" + path.string() + "' for writing");
    }
    out << effective.dump() << '\n';
    out.flush();
    if (!out) {
        throw limkit::IoError("failed writing '" + path.string() + "'");
    }
}

// ---- score ----

struct ScoreArgs {
    std::string log_path;
    std::string out_path;
};

void run_score(const ScoreArgs& args, const GlobalOptions& global) {
    const limkit::TrainingLog log = limkit::ingest_log(args.log_path);
    const std::vector<limkit::ScoredSample> scores = limkit::score_all(log);
    limkit::write_scores(scores, args.out_path);
    echo_config(global,
                json{{"subcommand", "score"}, {"log", args.log_path}, {"out", args.out_path}});
}

// ---- select ----

struct SelectArgs {
    std::string scores_path;
    std::string method;
    std::optional<double> theta;
    std::optional<std::size_t> count;
    std::string out_path;
};

void run_select(const SelectArgs& args, const GlobalOptions& global) {
    const std::vector<limkit::ScoredSample> scores = limkit::read_scores(args.scores_path);

    limkit::SelectionManifest manifest;
    manifest.method = args.method;
    manifest.digest = limkit::file_digest_hex(args.scores_path);
    manifest.tool_version = limkit::kVersion;

    if (args.method == "random") {
        if (args.theta) {
            throw limkit::Error(limkit::ErrorClass::Usage,
                                "--theta does not apply to --method random");
        }
        if (!args.count) {
            throw limkit::Error(limkit::ErrorClass::Usage, "--method random needs --count");
        }
        std::vector<std::string> ids;
        ids.reserve(scores.size());
        for (const limkit::ScoredSample& sample : scores) {
            ids.push_back(sample.sample_id);
        }
        manifest.count = *args.count;
        manifest.seed = global.seed;
        manifest.selected_ids = limkit::select_random(ids, *args.count, global.seed);
    } else {
        if (args.count) {
            throw limkit::Error(limkit::ErrorClass::Usage,
                                "--count only applies to --method random");
        }
        const limkit::ScoreField field =
            args.method == "lim" ? limkit::ScoreField::Lim : limkit::ScoreField::Linear;
        const double theta =
            args.theta ? *args.theta
                       : (field == limkit::ScoreField::Lim ? limkit::kDefaultLimTheta
                                                           : limkit::kDefaultLinearTheta);
        manifest.theta = theta;
        manifest.selected_ids = limkit::select_by_threshold(scores, field, theta);
    }

    limkit::write_manifest(manifest, args.out_path);

    json effective{{"subcommand", "select"},
                   {"scores", args.scores_path},
                   {"method", args.method},
                   {"out", args.out_path}};
    if (manifest.theta) {
        effective["theta"] = *manifest.theta;
    }
    if (manifest.count) {
        effective["count"] = *manifest.count;
        effective["seed"] = *manifest.seed;
    }
    echo_config(global, effective);
}

// ---- grade ----

struct GradeArgs {
    std::string completions_path;
    std::string dataset_path;
    std::string out_path;
};

void run_grade(const GradeArgs& args, const GlobalOptions& global) {
    const std::map<std::string, limkit::GoldItem> dataset =
        limkit::read_dataset(args.dataset_path);
    const std::vector<limkit::CompletionRecord> completions =
        limkit::read_completions(args.completions_path);

    // (id, epoch) -> rollout -> shaped reward; rollout ids ordered, unique.
    std::map<std::pair<std::string, int>, std::map<int, double>> cells;
    std::map<std::pair<std::string, int>, std::size_t> first_lines;
    for (const limkit::CompletionRecord& record : completions) {
        const auto gold = dataset.find(record.id);
        if (gold == dataset.end()) {
            throw limkit::ParseError(record.line,
                                     "unknown sample_id '" + record.id + "' in completions");
        }
        const limkit::Verdict verdict = limkit::grade(record.completion, gold->second);
        const auto key = std::make_pair(record.id, record.epoch);
        first_lines.try_emplace(key, record.line);
        if (!cells[key].emplace(record.rollout, verdict.reward).second) {
            throw limkit::ParseError(
                record.line, "duplicate rollout " + std::to_string(record.rollout) +
                                 " for sample '" + record.id + "' epoch " +
                                 std::to_string(record.epoch));
        }
    }

    std::vector<limkit::RolloutRewards> rows;
    std::vector<limkit::LogRecord> assembled;
    rows.reserve(cells.size());
    for (const auto& [key, rollouts] : cells) {
        limkit::RolloutRewards row;
        row.sample_id = key.first;
        row.epoch = key.second;
        int correct = 0;
        for (const auto& [rollout, reward] : rollouts) {
            row.rewards.push_back(reward);
            if (reward == limkit::kRewardCorrect) {
                ++correct;
            }
        }
        limkit::LogRecord record;
        record.line = first_lines.at(key);
        record.sample_id = row.sample_id;
        record.epoch = row.epoch;
        record.rollouts = static_cast<int>(row.rewards.size());
        record.pass_rate = static_cast<double>(correct) / static_cast<double>(row.rewards.size());
        assembled.push_back(std::move(record));
        rows.push_back(std::move(row));
    }

    // Rejects ragged or inconsistent aggregates up front, so the emitted
    // file is ingestible by construction.
    limkit::assemble_log(assembled);

    limkit::write_reward_log(rows, args.out_path);
    echo_config(global, json{{"subcommand", "grade"},
                             {"completions", args.completions_path},
                             {"dataset", args.dataset_path},
                             {"out", args.out_path}});
}

// ---- simulate ----

struct SimulateArgs {
    std::size_t samples = 300;
    int epochs = 8;
    int rollouts = 8;
    std::vector<double> mix;
    std::string noise = "bernoulli";
    double drift_step = 0.02;
    bool compare = false;
    std::size_t budget = 100;
    int compare_seeds = 20;
    std::string out_dir;
};

void run_simulate(const SimulateArgs& args, const GlobalOptions& global) {
    limkit::SimConfig cfg;
    cfg.n_samples = args.samples;
    cfg.epochs = args.epochs;
    cfg.rollouts = args.rollouts;
    if (!args.mix.empty()) {
        if (args.mix.size() != 3) {
            throw limkit::Error(limkit::ErrorClass::Usage, "--mix needs exactly three weights");
        }
        cfg.archetype_mix = {args.mix[0], args.mix[1], args.mix[2]};
    }
    try {
        cfg.noise = limkit::noise_from_string(args.noise);
    } catch (const std::invalid_argument& e) {
        throw limkit::Error(limkit::ErrorClass::Usage, e.what());
    }
    cfg.drift_step = args.drift_step;
    cfg.seed = global.seed;

    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);

    const limkit::SimResult sim = limkit::simulate_log(cfg);
    limkit::write_log(sim.log, dir / "log.jsonl");
    limkit::write_truth(sim.truth, dir / "truth.jsonl");

    json effective{{"subcommand", "simulate"},
                   {"out_dir", args.out_dir},
                   {"samples", cfg.n_samples},
                   {"epochs", cfg.epochs},
                   {"rollouts", cfg.rollouts},
                   {"mix", cfg.archetype_mix},
                   {"noise", limkit::to_string(cfg.noise)},
                   {"drift_step", cfg.drift_step},
                   {"seed", cfg.seed},
                   {"compare", args.compare}};
    if (args.compare) {
        effective["budget"] = args.budget;
        effective["compare_seeds"] = args.compare_seeds;
    }
    write_run_config(effective, dir);

    if (args.compare) {
        const limkit::ComparisonResult result =
            limkit::run_strategy_comparison(cfg, args.budget, args.compare_seeds);
        limkit::write_comparison(result, dir / "comparison.csv",
                                 dir / "comparison_per_seed.csv");
    }
    echo_config(global, effective);
}

// ---- report ----

struct ReportArgs {
    std::string log_path;
    std::string scores_path;
    std::string truth_path;
    std::string out_dir;
};

void run_report(const ReportArgs& args, const GlobalOptions& global) {
    const limkit::TrainingLog log = limkit::ingest_log(args.log_path);
    const std::vector<limkit::ScoredSample> scores = limkit::read_scores(args.scores_path);
    if (scores.empty()) {
        throw limkit::Error(limkit::ErrorClass::Usage,
                            "scores file '" + args.scores_path + "' has no records");
    }
    std::optional<std::map<std::string, limkit::ArchetypeKind>> truth;
    if (!args.truth_path.empty()) {
        truth = limkit::read_truth(args.truth_path);
    }

    const std::filesystem::path dir(args.out_dir);
    limkit::emit_report(log, scores, truth, dir);

    json effective{{"subcommand", "report"},
                   {"log", args.log_path},
                   {"scores", args.scores_path},
                   {"out_dir", args.out_dir}};
    if (!args.truth_path.empty()) {
        effective["truth"] = args.truth_path;
    }
    write_run_config(effective, dir);
    echo_config(global, effective);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"limkit: reward-trajectory scoring and training-data curation"};
    app.require_subcommand(1);
    app.fallthrough(true);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; explicit flags override its values");
    app.set_version_flag("--version", limkit::kVersion);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "RNG seed for seeded subcommands")
        ->capture_default_str();
    app.add_flag("--quiet", global.quiet, "suppress the effective-config echo on stdout");

    ScoreArgs score_args;
    CLI::App* score = app.add_subcommand("score", "score every sample of a reward log");
    score->add_option("--log", score_args.log_path, "input reward log (JSONL)")->required();
    score->add_option("--out", score_args.out_path, "output scores file (JSONL)")->required();
    score->callback([&] { run_score(score_args, global); });

    SelectArgs select_args;
    CLI::App* select =
        app.add_subcommand("select", "select a subset of samples from a scores file");
    select->add_option("--scores", select_args.scores_path, "input scores file (JSONL)")
        ->required();
    select->add_option("--method", select_args.method, "selection method: lim | linear | random")
        ->required()
        ->check(CLI::IsMember({"lim", "linear", "random"}));
    select->add_option("--theta", select_args.theta,
                       "strict score threshold (default 0.6 for lim, 0.7 for linear)");
    select->add_option("--count", select_args.count,
                       "subset size for --method random (uses --seed)");
    select->add_option("--out", select_args.out_path, "output selection manifest (JSON)")
        ->required();
    select->callback([&] { run_select(select_args, global); });

    GradeArgs grade_args;
    CLI::App* grade = app.add_subcommand(
        "grade", "grade completions against gold answers and emit a reward log");
    grade
        ->add_option("--completions", grade_args.completions_path,
                     "completions transcript (JSONL)")
        ->required();
    grade->add_option("--dataset", grade_args.dataset_path, "problem dataset (JSONL)")
        ->required();
    grade->add_option("--out", grade_args.out_path, "output reward log (JSONL)")->required();
    grade->callback([&] { run_grade(grade_args, global); });

    SimulateArgs simulate_args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "generate a synthetic reward log with known archetypes");
    simulate->add_option("--out-dir", simulate_args.out_dir, "output directory")->required();
    simulate->add_option("--samples", simulate_args.samples, "number of samples")
        ->capture_default_str();
    simulate->add_option("--epochs", simulate_args.epochs, "number of epochs")
        ->capture_default_str();
    simulate->add_option("--rollouts", simulate_args.rollouts, "rollouts per epoch (G)")
        ->capture_default_str();
    simulate
        ->add_option("--mix", simulate_args.mix,
                     "near-zero,fast-saturating,progressive weights (default 1/3 each; must "
                     "sum to 1)")
        ->delimiter(',')
        ->expected(0, 3);
    simulate->add_option("--noise", simulate_args.noise, "noise model: none | bernoulli | drift")
        ->capture_default_str()
        ->check(CLI::IsMember({"none", "bernoulli", "drift"}));
    simulate
        ->add_option("--drift-step", simulate_args.drift_step,
                     "random-walk half-width for --noise drift")
        ->capture_default_str();
    simulate->add_flag("--compare", simulate_args.compare,
                       "also run the full/rand/linear/lim strategy comparison");
    simulate->add_option("--budget", simulate_args.budget, "selection budget for --compare")
        ->capture_default_str();
    simulate
        ->add_option("--compare-seeds", simulate_args.compare_seeds,
                     "number of comparison runs for --compare")
        ->capture_default_str();
    simulate->callback([&] { run_simulate(simulate_args, global); });

    ReportArgs report_args;
    CLI::App* report =
        app.add_subcommand("report", "emit training-dynamics CSVs for a log and its scores");
    report->add_option("--log", report_args.log_path, "input reward log (JSONL)")->required();
    report->add_option("--scores", report_args.scores_path, "input scores file (JSONL)")
        ->required();
    report->add_option("--truth", report_args.truth_path,
                       "optional archetype ground-truth sidecar (JSONL)");
    report->add_option("--out-dir", report_args.out_dir, "output directory")->required();
    report->callback([&] { run_report(report_args, global); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << "ERROR 1 " << single_line(e.what()) << '\n';
        return 1;
    } catch (const limkit::Error& e) {
        std::cerr << "ERROR " << e.exit_code() << ' ' << single_line(e.what()) << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "ERROR 4 " << single_line(e.what()) << '\n';
        return 4;
    }
    return 0;
}
