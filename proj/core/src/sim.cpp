#include "limkit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "limkit/rng.hpp"

namespace limkit {

namespace {

// Logical seed streams; see rng.hpp.
constexpr std::uint64_t kAssignStream = 1;
constexpr std::uint64_t kRolloutStream = 2;
constexpr std::uint64_t kFreshRolloutStream = 3;
constexpr std::uint64_t kRandSelectStream = 4;
constexpr std::uint64_t kComparisonRunStream = 0x1000;

// Gain of the selection-feedback link in run_strategy_comparison.
constexpr double kFeedbackGain = 1.0;

// Draw ranges per archetype. Fixed toolkit constants; they satisfy the
// class constraints in SampleArchetype::make with margin.
struct ParamRange {
    double start_lo, start_hi;
    double asymptote_lo, asymptote_hi;  // Progressive: offsets above start
    double rate_lo, rate_hi;
};

constexpr ParamRange kNearZeroRange = {0.0, 0.05, 0.0, 0.10, 0.2, 1.0};
constexpr ParamRange kFastSaturatingRange = {0.60, 0.85, 0.90, 1.0, 0.8, 3.0};
constexpr ParamRange kProgressiveRange = {0.0, 0.25, 0.45, 0.95, 0.15, 0.9};

void validate_config(const SimConfig& cfg) {
    if (cfg.n_samples < 1) {
        throw Error(ErrorClass::Usage, "n_samples must be >= 1");
    }
    if (cfg.epochs < 2) {
        throw Error(ErrorClass::Usage, "epochs must be >= 2");
    }
    if (cfg.rollouts < 1) {
        throw Error(ErrorClass::Usage, "rollouts must be >= 1");
    }
    double sum = 0.0;
    for (double w : cfg.archetype_mix) {
        if (w < 0.0) {
            throw Error(ErrorClass::Usage, "archetype mix weights must be nonnegative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorClass::Usage, "archetype mix weights must sum to 1");
    }
    if (cfg.drift_step < 0.0) {
        throw Error(ErrorClass::Usage, "drift_step must be nonnegative");
    }
}

std::string make_sample_id(std::size_t index, std::size_t n_samples) {
    std::size_t width = std::to_string(n_samples).size();
    width = std::max<std::size_t>(width, 4);
    std::string digits = std::to_string(index + 1);
    return "s" + std::string(width - digits.size(), '0') + digits;
}

SampleArchetype draw_archetype(std::mt19937_64& rng, const std::array<double, 3>& mix) {
    const double u = uniform_unit(rng);
    ArchetypeKind kind;
    if (u < mix[0]) {
        kind = ArchetypeKind::NearZero;
    } else if (u < mix[0] + mix[1]) {
        kind = ArchetypeKind::FastSaturating;
    } else {
        kind = ArchetypeKind::Progressive;
    }
    switch (kind) {
        case ArchetypeKind::NearZero: {
            const ParamRange& r = kNearZeroRange;
            const double start = uniform_in(rng, r.start_lo, r.start_hi);
            const double asymptote = uniform_in(rng, start, r.asymptote_hi);
            const double rate = uniform_in(rng, r.rate_lo, r.rate_hi);
            return SampleArchetype::make(kind, start, asymptote, rate);
        }
        case ArchetypeKind::FastSaturating: {
            const ParamRange& r = kFastSaturatingRange;
            const double start = uniform_in(rng, r.start_lo, r.start_hi);
            const double asymptote = uniform_in(rng, r.asymptote_lo, r.asymptote_hi);
            const double rate = uniform_in(rng, r.rate_lo, r.rate_hi);
            return SampleArchetype::make(kind, start, asymptote, rate);
        }
        case ArchetypeKind::Progressive:
        default: {
            const ParamRange& r = kProgressiveRange;
            const double start = uniform_in(rng, r.start_lo, r.start_hi);
            const double asymptote = uniform_in(rng, start + r.asymptote_lo, r.asymptote_hi);
            const double rate = uniform_in(rng, r.rate_lo, r.rate_hi);
            return SampleArchetype::make(kind, start, asymptote, rate);
        }
    }
}

double mean_final_epoch(const TrainingLog& log) {
    double sum = 0.0;
    for (const auto& [id, trajectory] : log.trajectories()) {
        sum += trajectory.rewards.back();
    }
    return sum / static_cast<double>(log.sample_count());
}

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

double stderr_of(const std::vector<double>& values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double mean = mean_of(values);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    const double n = static_cast<double>(values.size());
    return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

}  // namespace

const char* to_string(ArchetypeKind kind) {
    switch (kind) {
        case ArchetypeKind::NearZero:
            return "near_zero";
        case ArchetypeKind::FastSaturating:
            return "fast_saturating";
        case ArchetypeKind::Progressive:
            return "progressive";
    }
    return "near_zero";
}

ArchetypeKind archetype_from_string(const std::string& name) {
    if (name == "near_zero") {
        return ArchetypeKind::NearZero;
    }
    if (name == "fast_saturating") {
        return ArchetypeKind::FastSaturating;
    }
    if (name == "progressive") {
        return ArchetypeKind::Progressive;
    }
    throw std::invalid_argument("unknown archetype '" + name + "'");
}

const char* to_string(NoiseModel noise) {
    switch (noise) {
        case NoiseModel::None:
            return "none";
        case NoiseModel::Bernoulli:
            return "bernoulli";
        case NoiseModel::BernoulliDrift:
            return "drift";
    }
    return "bernoulli";
}

NoiseModel noise_from_string(const std::string& name) {
    if (name == "none") {
        return NoiseModel::None;
    }
    if (name == "bernoulli") {
        return NoiseModel::Bernoulli;
    }
    if (name == "drift") {
        return NoiseModel::BernoulliDrift;
    }
    throw std::invalid_argument("unknown noise model '" + name + "'");
}

SampleArchetype SampleArchetype::make(ArchetypeKind kind, double start_level, double asymptote,
                                      double rate) {
    if (!(start_level >= 0.0 && start_level <= 1.0) || !(asymptote >= 0.0 && asymptote <= 1.0)) {
        throw std::invalid_argument("archetype levels must lie in [0, 1]");
    }
    if (!(rate > 0.0)) {
        throw std::invalid_argument("archetype rate must be positive");
    }
    switch (kind) {
        case ArchetypeKind::NearZero:
            if (asymptote > 0.1) {
                throw std::invalid_argument("near_zero asymptote must be <= 0.1");
            }
            break;
        case ArchetypeKind::FastSaturating:
            if (start_level < 0.6 && rate < 2.0) {
                throw std::invalid_argument(
                    "fast_saturating needs start >= 0.6 or rate >= 2.0");
            }
            break;
        case ArchetypeKind::Progressive:
            if (asymptote - start_level < 0.4) {
                throw std::invalid_argument("progressive needs asymptote - start >= 0.4");
            }
            if (rate < 0.1 || rate > 1.0) {
                throw std::invalid_argument("progressive rate must lie in [0.1, 1.0]");
            }
            break;
    }
    return SampleArchetype{kind, start_level, asymptote, rate};
}

double latent_curve(const SampleArchetype& archetype, int k) {
    if (k < 1) {
        throw std::invalid_argument("epoch index is 1-based");
    }
    const double growth = 1.0 - std::exp(-archetype.rate * static_cast<double>(k));
    return archetype.start_level + (archetype.asymptote - archetype.start_level) * growth;
}

std::vector<SampleArchetype> assign_archetypes(const SimConfig& cfg) {
    validate_config(cfg);
    const std::uint64_t assign_seed = derive_seed(cfg.seed, kAssignStream);
    std::vector<SampleArchetype> archetypes;
    archetypes.reserve(cfg.n_samples);
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
        std::mt19937_64 rng(derive_seed(assign_seed, i));
        archetypes.push_back(draw_archetype(rng, cfg.archetype_mix));
    }
    return archetypes;
}

TrainingLog simulate_rollouts(const std::vector<SampleArchetype>& archetypes,
                              const SimConfig& cfg, std::uint64_t seed_stream) {
    validate_config(cfg);
    if (archetypes.size() != cfg.n_samples) {
        throw std::invalid_argument("archetype count does not match n_samples");
    }
    const std::uint64_t rollout_seed = derive_seed(cfg.seed, seed_stream);
    TrainingLog log;
    for (std::size_t i = 0; i < archetypes.size(); ++i) {
        std::mt19937_64 rng(derive_seed(rollout_seed, i));
        RewardTrajectory trajectory;
        trajectory.sample_id = make_sample_id(i, cfg.n_samples);
        trajectory.rollouts_per_epoch = cfg.rollouts;
        trajectory.rewards.reserve(static_cast<std::size_t>(cfg.epochs));
        double drift = 0.0;
        for (int k = 1; k <= cfg.epochs; ++k) {
            double p = latent_curve(archetypes[i], k);
            if (cfg.noise == NoiseModel::BernoulliDrift) {
                drift += uniform_in(rng, -cfg.drift_step, cfg.drift_step);
                p = std::clamp(p + drift, 0.0, 1.0);
            }
            if (cfg.noise == NoiseModel::None) {
                trajectory.rewards.push_back(p);
                continue;
            }
            int successes = 0;
            for (int g = 0; g < cfg.rollouts; ++g) {
                if (uniform_unit(rng) < p) {
                    ++successes;
                }
            }
            trajectory.rewards.push_back(static_cast<double>(successes) /
                                         static_cast<double>(cfg.rollouts));
        }
        log.add(std::move(trajectory));
    }
    return log;
}

SimResult simulate_log(const SimConfig& cfg) {
    SimResult result;
    const std::vector<SampleArchetype> archetypes = assign_archetypes(cfg);
    result.log = simulate_rollouts(archetypes, cfg, kRolloutStream);
    for (std::size_t i = 0; i < archetypes.size(); ++i) {
        result.truth.emplace(make_sample_id(i, cfg.n_samples), archetypes[i]);
    }
    return result;
}

const StrategyOutcome& ComparisonResult::strategy(const std::string& name) const {
    for (const StrategyOutcome& outcome : strategies) {
        if (outcome.strategy == name) {
            return outcome;
        }
    }
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

ComparisonResult run_strategy_comparison(const SimConfig& cfg, std::size_t budget, int runs) {
    validate_config(cfg);
    if (budget > cfg.n_samples) {
        throw BudgetExceedsPopulation(budget, cfg.n_samples);
    }
    if (runs < 1) {
        throw Error(ErrorClass::Usage, "comparison needs at least one run");
    }

    const std::vector<std::string> strategy_names = {"full", "rand", "linear", "lim"};
    ComparisonResult result;
    result.budget = budget;
    result.runs = runs;
    for (const std::string& name : strategy_names) {
        StrategyOutcome outcome;
        outcome.strategy = name;
        result.strategies.push_back(std::move(outcome));
    }

    std::vector<double> progressive_fractions(strategy_names.size(), 0.0);
    std::vector<double> selected_sizes(strategy_names.size(), 0.0);

    for (int r = 0; r < runs; ++r) {
        SimConfig run_cfg = cfg;
        run_cfg.seed = derive_seed(cfg.seed, kComparisonRunStream + static_cast<std::uint64_t>(r));

        const std::vector<SampleArchetype> archetypes = assign_archetypes(run_cfg);
        const TrainingLog log = simulate_rollouts(archetypes, run_cfg, kRolloutStream);
        const std::vector<ScoredSample> scores = score_all(log);

        std::vector<std::string> all_ids;
        all_ids.reserve(scores.size());
        std::map<std::string, ArchetypeKind> kind_of;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            all_ids.push_back(scores[i].sample_id);
            kind_of.emplace(scores[i].sample_id, archetypes[i].kind);
        }

        for (std::size_t s = 0; s < strategy_names.size(); ++s) {
            std::vector<std::string> selection;
            if (strategy_names[s] == "full") {
                selection = all_ids;
            } else if (strategy_names[s] == "rand") {
                selection = select_random(all_ids, budget,
                                          derive_seed(run_cfg.seed, kRandSelectStream));
            } else if (strategy_names[s] == "linear") {
                selection = select_top_k(scores, ScoreField::Linear, budget);
            } else {
                selection = select_top_k(scores, ScoreField::Lim, budget);
            }

            std::size_t progressive = 0;
            for (const std::string& id : selection) {
                if (kind_of.at(id) == ArchetypeKind::Progressive) {
                    ++progressive;
                }
            }
            const double fraction =
                selection.empty() ? 0.0
                                  : static_cast<double>(progressive) /
                                        static_cast<double>(selection.size());

            std::vector<SampleArchetype> boosted = archetypes;
            for (SampleArchetype& archetype : boosted) {
                if (archetype.kind == ArchetypeKind::Progressive) {
                    archetype.rate *= 1.0 + kFeedbackGain * fraction;
                }
            }
            // Common rollout stream across strategies within a run, so yield
            // differences reflect the boost alone.
            const TrainingLog fresh = simulate_rollouts(boosted, run_cfg, kFreshRolloutStream);

            result.strategies[s].yields.push_back(mean_final_epoch(fresh));
            progressive_fractions[s] += fraction;
            selected_sizes[s] += static_cast<double>(selection.size());
        }
    }

    for (std::size_t s = 0; s < result.strategies.size(); ++s) {
        StrategyOutcome& outcome = result.strategies[s];
        outcome.mean_yield = mean_of(outcome.yields);
        outcome.stderr_yield = stderr_of(outcome.yields);
        outcome.mean_progressive_fraction = progressive_fractions[s] / static_cast<double>(runs);
        outcome.mean_selected = selected_sizes[s] / static_cast<double>(runs);
    }
    return result;
}

}  // namespace limkit
