#include "limkit/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "limkit/rng.hpp"

namespace limkit {

namespace {

constexpr double kDegenerateDenominator = 1e-12;

double field_value(const ScoredSample& sample, ScoreField field) {
    return field == ScoreField::Lim ? sample.lim_score : sample.linear_score;
}

}  // namespace

void TrainingLog::add(RewardTrajectory trajectory) {
    if (trajectory.sample_id.empty()) {
        throw std::invalid_argument("trajectory needs a sample_id");
    }
    if (trajectory.rewards.empty()) {
        throw std::invalid_argument("trajectory '" + trajectory.sample_id + "' has no epochs");
    }
    if (trajectory.rollouts_per_epoch < 1) {
        throw std::invalid_argument("trajectory '" + trajectory.sample_id +
                                    "' needs a positive rollout count");
    }
    for (double reward : trajectory.rewards) {
        if (!(reward >= 0.0 && reward <= 1.0)) {
            throw std::invalid_argument("trajectory '" + trajectory.sample_id +
                                        "' has a reward outside [0, 1]");
        }
    }
    const int k = static_cast<int>(trajectory.rewards.size());
    if (!trajectories_.empty() && k != epochs_) {
        throw std::invalid_argument("trajectory '" + trajectory.sample_id + "' has " +
                                    std::to_string(k) + " epochs, log has " +
                                    std::to_string(epochs_));
    }
    auto [it, inserted] = trajectories_.emplace(trajectory.sample_id, std::move(trajectory));
    if (!inserted) {
        throw std::invalid_argument("duplicate sample_id '" + it->first + "'");
    }
    epochs_ = k;
}

AverageCurve compute_average_curve(const TrainingLog& log) {
    if (log.empty() || log.epochs() == 0) {
        throw EmptyLog();
    }
    AverageCurve curve;
    curve.values.assign(static_cast<std::size_t>(log.epochs()), 0.0);
    for (const auto& [id, trajectory] : log.trajectories()) {
        for (std::size_t k = 0; k < curve.values.size(); ++k) {
            curve.values[k] += trajectory.rewards[k];
        }
    }
    const double n = static_cast<double>(log.sample_count());
    for (double& value : curve.values) {
        value /= n;
    }
    return curve;
}

double lim_score(const RewardTrajectory& trajectory, const AverageCurve& average) {
    if (trajectory.rewards.size() != average.values.size()) {
        throw std::invalid_argument("trajectory and average curve have different epoch counts");
    }
    double numerator = 0.0;
    double denominator = 0.0;
    for (std::size_t k = 0; k < average.values.size(); ++k) {
        const double deviation = trajectory.rewards[k] - average.values[k];
        const double headroom = 1.0 - average.values[k];
        numerator += deviation * deviation;
        denominator += headroom * headroom;
    }
    if (denominator < kDegenerateDenominator) {
        throw DegenerateAverage();
    }
    return 1.0 - numerator / denominator;
}

double linear_score(const RewardTrajectory& trajectory) {
    const std::size_t k = trajectory.rewards.size();
    if (k < 2) {
        throw TooFewEpochs(k);
    }
    const bool constant = std::all_of(trajectory.rewards.begin(), trajectory.rewards.end(),
                                      [&](double r) { return r == trajectory.rewards.front(); });
    if (constant) {
        return 0.0;
    }
    const double n = static_cast<double>(k);
    const double mean_x = (n + 1.0) / 2.0;  // mean of 1..K
    const double mean_y =
        std::accumulate(trajectory.rewards.begin(), trajectory.rewards.end(), 0.0) / n;
    double covariance = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double dx = static_cast<double>(i + 1) - mean_x;
        const double dy = trajectory.rewards[i] - mean_y;
        covariance += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_y <= 0.0) {
        return 0.0;
    }
    const double rho = covariance / std::sqrt(var_x * var_y);
    return std::clamp(rho, 0.0, 1.0);
}

std::vector<ScoredSample> score_all(const TrainingLog& log) {
    const AverageCurve average = compute_average_curve(log);
    std::vector<ScoredSample> scores;
    scores.reserve(log.sample_count());
    for (const auto& [id, trajectory] : log.trajectories()) {
        ScoredSample scored;
        scored.sample_id = id;
        scored.lim_score = lim_score(trajectory, average);
        scored.linear_score = linear_score(trajectory);
        scores.push_back(std::move(scored));
    }
    return scores;
}

std::vector<std::string> select_by_threshold(const std::vector<ScoredSample>& scores,
                                             ScoreField field, double theta) {
    std::vector<std::string> selected;
    for (const ScoredSample& sample : scores) {
        if (field_value(sample, field) > theta) {
            selected.push_back(sample.sample_id);
        }
    }
    return selected;
}

std::vector<std::string> select_top_k(const std::vector<ScoredSample>& scores, ScoreField field,
                                      std::size_t k) {
    std::vector<const ScoredSample*> ranked;
    ranked.reserve(scores.size());
    for (const ScoredSample& sample : scores) {
        ranked.push_back(&sample);
    }
    std::sort(ranked.begin(), ranked.end(), [&](const ScoredSample* a, const ScoredSample* b) {
        const double va = field_value(*a, field);
        const double vb = field_value(*b, field);
        if (va != vb) {
            return va > vb;
        }
        return a->sample_id < b->sample_id;
    });
    if (k < ranked.size()) {
        ranked.resize(k);
    }
    std::vector<std::string> selected;
    selected.reserve(ranked.size());
    for (const ScoredSample* sample : ranked) {
        selected.push_back(sample->sample_id);
    }
    return selected;
}

std::vector<std::string> select_random(const std::vector<std::string>& ids, std::size_t count,
                                       std::uint64_t seed) {
    if (count > ids.size()) {
        throw CountExceedsPopulation(count, ids.size());
    }
    // Partial Fisher-Yates over an index array; draws go through
    // uniform_below so the result is identical on every platform.
    std::vector<std::size_t> indices(ids.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(uniform_below(rng, static_cast<std::uint64_t>(
                                                                indices.size() - i)));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(count);
    std::sort(indices.begin(), indices.end());
    std::vector<std::string> selected;
    selected.reserve(count);
    for (std::size_t index : indices) {
        selected.push_back(ids[index]);
    }
    return selected;
}

}  // namespace limkit
