#pragma once

#include <cstdint>
#include <vector>

#include "rankprox/network.hpp"
#include "rankprox/tensor.hpp"

namespace rankprox {

// Weights of the two training objectives. The ranking loss sums (not
// averages) over comparable pairs, so lambda absorbs the pair-count scale.
struct RankingConfig {
    double epsilon = 0.0;  // hinge margin, in score units
    double lambda = 1.0;   // weight of the ranking term
    void validate() const;
};

// M x M matrix l with entries in {-1, 0, +1}. l(i,j) = +1 means sample i's
// generating parameter ranks at or below sample j's within the same group,
// so the true target of i cannot exceed the target of j. Samples from
// different groups (or with no group) are never comparable.
class ComparabilityLabels {
public:
    ComparabilityLabels() = default;
    explicit ComparabilityLabels(int m);

    // group_ids: negative = ungrouped. phi: generating parameter per sample,
    // encoded so that larger phi means larger true target. Exact phi ties
    // within a group are treated as not comparable, which keeps the matrix
    // antisymmetric.
    static ComparabilityLabels from_groups(const std::vector<int>& group_ids, const std::vector<double>& phi);

    int size() const { return m_; }
    int operator()(int i, int j) const { return l_[static_cast<size_t>(i) * m_ + j]; }
    void set(int i, int j, int value);

    // Checks entries are in {-1,0,+1}, the diagonal is zero, and
    // l(i,j) == -l(j,i) wherever either is nonzero.
    void validate() const;

    long long comparable_pair_count() const;  // unordered pairs with l != 0
    bool row_or_col_nonzero(int i) const;

private:
    int m_ = 0;
    std::vector<signed char> l_;
};

struct RegressionLossResult {
    double loss = 0.0;
    std::vector<double> grad;  // d loss / d prediction
};

// Mean squared error over a scalar series:
//   loss = (1/N) sum (y_i - yhat_i)^2, gradient (2/N)(yhat_i - y_i).
RegressionLossResult regression_loss(const std::vector<double>& predictions, const std::vector<double>& targets);

// max(0, yhat_i - yhat_j + epsilon): the penalty for a pair whose generating
// parameters say i should score no higher than j.
double pairwise_hinge(double yhat_i, double yhat_j, double epsilon);

struct RankingLossResult {
    double loss = 0.0;
    std::vector<double> grad;       // d loss / d score, length M
    std::vector<int> a;             // M x M pair-coefficient matrix, row-major
    long long comparable_pairs = 0; // unordered pairs with l != 0
    long long active_pairs = 0;     // unordered pairs with positive hinge
};

// All-pairs hinge ranking loss over scores from a single shared forward pass:
//   loss = sum over unordered comparable pairs of the oriented hinge,
//   a(i,j) = l(i,j) if l(i,j)(s_i - s_j) + epsilon > 0 else 0,
//   grad = row sums of a.
RankingLossResult ranking_loss_efficient(const std::vector<double>& scores, const ComparabilityLabels& labels,
                                         double epsilon);

// Oracle: enumerates each comparable pair, evaluates the hinge and both
// branch derivatives independently, and sums. Same result, no shared
// structure exploited.
RankingLossResult ranking_loss_naive(const std::vector<double>& scores, const ComparabilityLabels& labels,
                                     double epsilon);

struct RankingImageResult {
    double loss = 0.0;
    long long forward_passes = 0;   // images pushed through the network
    long long active_pairs = 0;
    std::vector<double> scores;     // ranking-head score per image (efficient mode)
};

// Forwards the M images once, applies the efficient loss to the ranking head,
// and backpropagates; parameter gradients accumulate in the network.
RankingImageResult ranking_loss_efficient_images(Network& net, const Tensor& images, const ComparabilityLabels& labels,
                                                 double epsilon);

// Two-branch oracle: each comparable pair is forwarded as its own two-image
// batch and backpropagated on its own, so a single group of n images costs
// n^2 - n passes.
RankingImageResult ranking_loss_naive_images(Network& net, const Tensor& images, const ComparabilityLabels& labels,
                                             double epsilon);

// A training step's worth of data: an image stack, an optional regression
// target per image (empty tensor = unlabeled), and the comparability matrix.
struct MiniBatch {
    Tensor images;                // [M, ...input shape]
    std::vector<Tensor> targets;  // length M; target shape must match the primary head
    ComparabilityLabels labels;
    std::vector<int> group_ids;   // length M; negative = ungrouped

    int size() const;
    // Every image must carry a target, take part in a comparable pair, or both.
    void validate() const;
};

struct MultitaskResult {
    double loss = 0.0;
    double loss_reg = 0.0;
    double loss_rank = 0.0;
    long long active_pairs = 0;
    std::vector<double> scores;  // ranking-head score per image
};

// L = L_reg + lambda * L_rank over one forward pass of the shared network.
// L_reg averages squared error over the labeled members (all target elements);
// L_rank sums hinge terms over comparable pairs of ranking-head scores.
// Parameter gradients for both terms accumulate into the network.
MultitaskResult multitask_loss(Network& net, const MiniBatch& batch, const RankingConfig& cfg);

}  // namespace rankprox
