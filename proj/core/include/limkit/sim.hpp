#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "limkit/trajectory.hpp"

namespace limkit {

// Latent trajectory classes. Boundary constants live in SampleArchetype::make
// and the kDefault* draw ranges below; they are fixed toolkit constants chosen
// so the classes are statistically separable, not measured quantities.
enum class ArchetypeKind { NearZero, FastSaturating, Progressive };

const char* to_string(ArchetypeKind kind);
ArchetypeKind archetype_from_string(const std::string& name);

// Saturating-growth parameters of one sample's latent pass-rate curve
//   p(k) = start + (asymptote - start) * (1 - exp(-rate * k)).
struct SampleArchetype {
    ArchetypeKind kind = ArchetypeKind::NearZero;
    double start_level = 0.0;  // p(0)
    double asymptote = 0.0;    // p(inf)
    double rate = 1.0;         // per-epoch growth rate, > 0

    // Validates the class constraints:
    //   NearZero:       asymptote <= 0.1
    //   FastSaturating: start >= 0.6 or rate >= 2.0
    //   Progressive:    asymptote - start >= 0.4 and rate in [0.1, 1.0]
    // plus start, asymptote in [0, 1] and rate > 0.
    // Throws std::invalid_argument on violation.
    static SampleArchetype make(ArchetypeKind kind, double start_level, double asymptote,
                                double rate);
};

enum class NoiseModel {
    None,       // pass rate equals the latent curve exactly (diagnostic mode)
    Bernoulli,  // pass rate = (# successes in G Bernoulli(p(k)) rollouts) / G
    BernoulliDrift,  // Bernoulli plus a per-sample random walk on p(k)
};

const char* to_string(NoiseModel noise);
NoiseModel noise_from_string(const std::string& name);

struct SimConfig {
    std::size_t n_samples = 300;
    int epochs = 8;
    int rollouts = 8;
    // near-zero, fast-saturating, progressive weights; must sum to 1.
    std::array<double, 3> archetype_mix = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    NoiseModel noise = NoiseModel::Bernoulli;
    double drift_step = 0.02;  // random-walk half-width, BernoulliDrift only
    std::uint64_t seed = 0;
};

// Latent pass rate of a sample at epoch k (1-based).
double latent_curve(const SampleArchetype& archetype, int k);

struct SimResult {
    TrainingLog log;
    // Hidden per-sample archetype, keyed like the log.
    std::map<std::string, SampleArchetype> truth;
};

// Draws an archetype and growth parameters per sample from the configured
// mix, then simulates per-epoch pass rates. Each sample uses its own
// generator seeded with derive_seed(derive_seed(cfg.seed, stream), index),
// so runs are reproducible bit-for-bit and samples could be generated in
// parallel in any order.
SimResult simulate_log(const SimConfig& cfg);

// Archetype assignment only (first half of simulate_log), in sample-id order.
std::vector<SampleArchetype> assign_archetypes(const SimConfig& cfg);

// Rollout simulation for an existing assignment. `seed_stream` selects an
// independent stream of the config seed so repeat runs over the same
// population stay decorrelated.
TrainingLog simulate_rollouts(const std::vector<SampleArchetype>& archetypes,
                              const SimConfig& cfg, std::uint64_t seed_stream);

struct StrategyOutcome {
    std::string strategy;  // "full", "rand", "linear", "lim"
    std::vector<double> yields;  // one learning-yield value per evaluation run
    double mean_yield = 0.0;
    double stderr_yield = 0.0;
    double mean_progressive_fraction = 0.0;
    double mean_selected = 0.0;
};

struct ComparisonResult {
    std::size_t budget = 0;
    int runs = 0;
    std::vector<StrategyOutcome> strategies;  // fixed order: full, rand, linear, lim

    const StrategyOutcome& strategy(const std::string& name) const;
};

// Desk-scale strategy comparison. For each run: simulate a log, score it,
// and build one selected set per strategy (full population; seeded uniform
// subset of `budget`; top-`budget` by linear score; top-`budget` by LIM
// score). The learning-yield metric of a selected set is the mean
// final-epoch pass rate of a fresh simulated run of the same population in
// which every Progressive sample's rate is boosted by the factor
// (1 + progressive_fraction_of_selection). Reports mean +/- standard error
// over `runs` seeds. Throws BudgetExceedsPopulation when budget > N.
ComparisonResult run_strategy_comparison(const SimConfig& cfg, std::size_t budget, int runs);

}  // namespace limkit
