#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "limkit/errors.hpp"

namespace limkit {

// One sample's per-epoch reward sequence. rewards[k] is the fraction of the
// sample's rollouts graded correct in epoch k+1, so every entry lies in [0, 1].
struct RewardTrajectory {
    std::string sample_id;
    std::vector<double> rewards;
    int rollouts_per_epoch = 0;
};

// Rectangular N x K collection of trajectories keyed by sample id. Iteration
// order is sorted by id, so everything derived from a log is independent of
// insertion order.
class TrainingLog {
public:
    // Enforces the log invariants: non-empty rewards in [0,1], positive
    // rollout count, one trajectory per id, identical epoch count across
    // samples.
    void add(RewardTrajectory trajectory);

    const std::map<std::string, RewardTrajectory>& trajectories() const { return trajectories_; }
    std::size_t sample_count() const { return trajectories_.size(); }
    int epochs() const { return epochs_; }
    bool empty() const { return trajectories_.empty(); }

private:
    std::map<std::string, RewardTrajectory> trajectories_;
    int epochs_ = 0;
};

// Per-epoch mean reward across all samples; the alignment reference.
struct AverageCurve {
    std::vector<double> values;
};

struct ScoredSample {
    std::string sample_id;
    double lim_score = 0.0;
    double linear_score = 0.0;
    bool selected = false;
};

enum class ScoreField { Lim, Linear };

// Default selection thresholds: 0.6 for the alignment (LIM) score,
// 0.7 for the linear-progress score.
inline constexpr double kDefaultLimTheta = 0.6;
inline constexpr double kDefaultLinearTheta = 0.7;

// Arithmetic mean of rewards per epoch. Throws EmptyLog on an empty log.
AverageCurve compute_average_curve(const TrainingLog& log);

// Normalized alignment score
//   s = 1 - sum_k (r_k - avg_k)^2 / sum_k (1 - avg_k)^2.
// Always <= 1, equal to 1 exactly when the trajectory matches the average
// curve elementwise. Throws DegenerateAverage when the denominator is below
// 1e-12 (average curve saturated at 1 in every epoch); callers must not
// substitute a default in that case.
double lim_score(const RewardTrajectory& trajectory, const AverageCurve& average);

// Clipped Pearson correlation of rewards against the epoch index 1..K.
// Returns max(0, rho) in [0, 1], and 0 for a constant trajectory.
// Throws TooFewEpochs when K < 2.
double linear_score(const RewardTrajectory& trajectory);

// Scores every sample against the log's average curve. Output is ordered by
// sample_id; `selected` starts false.
std::vector<ScoredSample> score_all(const TrainingLog& log);

// Ids whose score is strictly greater than theta, in input order.
std::vector<std::string> select_by_threshold(const std::vector<ScoredSample>& scores,
                                             ScoreField field, double theta);

// Top k ids ranked by descending score, ties broken by ascending sample_id.
// k >= |scores| returns every id.
std::vector<std::string> select_top_k(const std::vector<ScoredSample>& scores, ScoreField field,
                                      std::size_t k);

// Uniform sample of `count` ids without replacement, deterministic for a
// fixed seed and identical across platforms. Output keeps the original order
// of `ids`. Throws CountExceedsPopulation when count > |ids|.
std::vector<std::string> select_random(const std::vector<std::string>& ids, std::size_t count,
                                       std::uint64_t seed);

}  // namespace limkit
