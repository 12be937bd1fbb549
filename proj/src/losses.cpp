#include "rankprox/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rankprox/errors.hpp"

namespace rankprox {

void RankingConfig::validate() const {
    if (epsilon < 0) throw ConfigError("ranking margin must be nonnegative");
    if (lambda < 0) throw ConfigError("ranking tradeoff weight must be nonnegative");
}

ComparabilityLabels::ComparabilityLabels(int m) : m_(m) {
    if (m < 0) throw std::invalid_argument("comparability matrix size must be nonnegative");
    l_.assign(static_cast<size_t>(m) * m, 0);
}

ComparabilityLabels ComparabilityLabels::from_groups(const std::vector<int>& group_ids,
                                                     const std::vector<double>& phi) {
    if (group_ids.size() != phi.size())
        throw std::invalid_argument("group id and phi lists differ in length");
    int m = static_cast<int>(group_ids.size());
    ComparabilityLabels out(m);
    for (int i = 0; i < m; ++i) {
        if (group_ids[i] < 0) continue;
        for (int j = i + 1; j < m; ++j) {
            if (group_ids[j] != group_ids[i]) continue;
            if (phi[i] < phi[j]) {
                out.set(i, j, +1);
                out.set(j, i, -1);
            } else if (phi[i] > phi[j]) {
                out.set(i, j, -1);
                out.set(j, i, +1);
            }
        }
    }
    return out;
}

void ComparabilityLabels::set(int i, int j, int value) {
    if (i < 0 || i >= m_ || j < 0 || j >= m_) throw std::out_of_range("comparability index out of range");
    if (value < -1 || value > 1) throw std::invalid_argument("comparability entries must be -1, 0, or +1");
    if (i == j && value != 0) throw std::invalid_argument("comparability diagonal must stay zero");
    l_[static_cast<size_t>(i) * m_ + j] = static_cast<signed char>(value);
}

void ComparabilityLabels::validate() const {
    for (int i = 0; i < m_; ++i) {
        if ((*this)(i, i) != 0)
            throw std::invalid_argument("comparability matrix has nonzero diagonal at " + std::to_string(i));
        for (int j = 0; j < m_; ++j) {
            int v = (*this)(i, j);
            if (v < -1 || v > 1)
                throw std::invalid_argument("comparability entry out of {-1,0,+1} at (" + std::to_string(i) + "," +
                                            std::to_string(j) + ")");
            if (v != -(*this)(j, i))
                throw std::invalid_argument("comparability matrix not antisymmetric at (" + std::to_string(i) + "," +
                                            std::to_string(j) + ")");
        }
    }
}

long long ComparabilityLabels::comparable_pair_count() const {
    long long n = 0;
    for (int i = 0; i < m_; ++i)
        for (int j = i + 1; j < m_; ++j)
            if ((*this)(i, j) != 0) ++n;
    return n;
}

bool ComparabilityLabels::row_or_col_nonzero(int i) const {
    for (int j = 0; j < m_; ++j)
        if ((*this)(i, j) != 0 || (*this)(j, i) != 0) return true;
    return false;
}

RegressionLossResult regression_loss(const std::vector<double>& predictions, const std::vector<double>& targets) {
    if (predictions.empty()) throw std::invalid_argument("regression loss needs at least one sample");
    if (predictions.size() != targets.size())
        throw std::invalid_argument("prediction and target series differ in length");
    size_t n = predictions.size();
    RegressionLossResult out;
    out.grad.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double d = predictions[i] - targets[i];
        out.loss += d * d;
        out.grad[i] = 2.0 * d / static_cast<double>(n);
    }
    out.loss /= static_cast<double>(n);
    return out;
}

double pairwise_hinge(double yhat_i, double yhat_j, double epsilon) {
    return std::max(0.0, yhat_i - yhat_j + epsilon);
}

RankingLossResult ranking_loss_efficient(const std::vector<double>& scores, const ComparabilityLabels& labels,
                                         double epsilon) {
    labels.validate();
    int m = static_cast<int>(scores.size());
    if (labels.size() != m)
        throw std::invalid_argument("score count " + std::to_string(m) + " does not match comparability matrix size " +
                                    std::to_string(labels.size()));
    RankingLossResult out;
    out.a.assign(static_cast<size_t>(m) * m, 0);
    out.grad.assign(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            int l = labels(i, j);
            if (l == 0) continue;
            ++out.comparable_pairs;
            double margin = l * (scores[static_cast<size_t>(i)] - scores[static_cast<size_t>(j)]) + epsilon;
            if (margin > 0) {
                out.loss += margin;
                ++out.active_pairs;
                out.a[static_cast<size_t>(i) * m + j] = l;
                out.a[static_cast<size_t>(j) * m + i] = -l;
            }
        }
    // gradient = P * 1_M: row sums of the coefficient matrix
    for (int i = 0; i < m; ++i) {
        long long acc = 0;
        for (int j = 0; j < m; ++j) acc += out.a[static_cast<size_t>(i) * m + j];
        out.grad[static_cast<size_t>(i)] = static_cast<double>(acc);
    }
    return out;
}

RankingLossResult ranking_loss_naive(const std::vector<double>& scores, const ComparabilityLabels& labels,
                                     double epsilon) {
    labels.validate();
    int m = static_cast<int>(scores.size());
    if (labels.size() != m)
        throw std::invalid_argument("score count " + std::to_string(m) + " does not match comparability matrix size " +
                                    std::to_string(labels.size()));
    RankingLossResult out;
    out.a.assign(static_cast<size_t>(m) * m, 0);
    out.grad.assign(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            if (labels(i, j) == 0) continue;
            ++out.comparable_pairs;
            // orient so the lower-ranked member sits in the first branch
            int lo = labels(i, j) > 0 ? i : j;
            int hi = labels(i, j) > 0 ? j : i;
            double g = pairwise_hinge(scores[static_cast<size_t>(lo)], scores[static_cast<size_t>(hi)], epsilon);
            out.loss += g;
            if (g > 0) {
                ++out.active_pairs;
                // each branch differentiated on its own
                out.grad[static_cast<size_t>(lo)] += 1.0;
                out.grad[static_cast<size_t>(hi)] -= 1.0;
                out.a[static_cast<size_t>(lo) * m + hi] = +1;
                out.a[static_cast<size_t>(hi) * m + lo] = -1;
            }
        }
    return out;
}

namespace {

Tensor slice_pair(const Tensor& images, int i, int j) {
    long long per = images.numel() / images.dim(0);
    std::vector<int> shape = images.shape();
    shape[0] = 2;
    Tensor out(shape);
    const double* src = images.data();
    std::copy(src + i * per, src + (i + 1) * per, out.data());
    std::copy(src + j * per, src + (j + 1) * per, out.data() + per);
    return out;
}

}  // namespace

RankingImageResult ranking_loss_efficient_images(Network& net, const Tensor& images, const ComparabilityLabels& labels,
                                                 double epsilon) {
    long long before = net.images_forwarded();
    ForwardResult fr = net.forward(images);
    RankingLossResult rl = ranking_loss_efficient(fr.rank, labels, epsilon);
    net.backward(Tensor(), rl.grad);
    RankingImageResult out;
    out.loss = rl.loss;
    out.active_pairs = rl.active_pairs;
    out.forward_passes = net.images_forwarded() - before;
    out.scores = std::move(fr.rank);
    return out;
}

RankingImageResult ranking_loss_naive_images(Network& net, const Tensor& images, const ComparabilityLabels& labels,
                                             double epsilon) {
    labels.validate();
    int m = images.dim(0);
    if (labels.size() != m)
        throw std::invalid_argument("image count " + std::to_string(m) + " does not match comparability matrix size " +
                                    std::to_string(labels.size()));
    long long before = net.images_forwarded();
    RankingImageResult out;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            if (labels(i, j) == 0) continue;
            int lo = labels(i, j) > 0 ? i : j;
            int hi = labels(i, j) > 0 ? j : i;
            ForwardResult fr = net.forward(slice_pair(images, lo, hi));
            double g = pairwise_hinge(fr.rank[0], fr.rank[1], epsilon);
            out.loss += g;
            std::vector<double> rank_grad(2, 0.0);
            if (g > 0) {
                ++out.active_pairs;
                rank_grad[0] = +1.0;
                rank_grad[1] = -1.0;
            }
            net.backward(Tensor(), rank_grad);
        }
    out.forward_passes = net.images_forwarded() - before;
    return out;
}

int MiniBatch::size() const { return images.numel() == 0 ? 0 : images.dim(0); }

void MiniBatch::validate() const {
    int m = size();
    if (m == 0) throw DataError("minibatch holds no images");
    if (static_cast<int>(targets.size()) != m)
        throw DataError("minibatch target list length does not match image count");
    if (labels.size() != m) throw DataError("minibatch comparability matrix does not match image count");
    if (!group_ids.empty() && static_cast<int>(group_ids.size()) != m)
        throw DataError("minibatch group id list length does not match image count");
    labels.validate();
    for (int i = 0; i < m; ++i)
        if (targets[static_cast<size_t>(i)].numel() == 0 && !labels.row_or_col_nonzero(i))
            throw DataError("minibatch image " + std::to_string(i) +
                            " has neither a regression target nor a comparable pair");
}

MultitaskResult multitask_loss(Network& net, const MiniBatch& batch, const RankingConfig& cfg) {
    cfg.validate();
    batch.validate();
    int m = batch.size();
    ForwardResult fr = net.forward(batch.images);
    long long per = fr.primary.numel() / m;

    // regression over the labeled members, averaged over that subset
    int labeled = 0;
    for (const auto& t : batch.targets)
        if (t.numel() != 0) ++labeled;

    MultitaskResult out;
    Tensor primary_grad(fr.primary.shape());
    if (labeled > 0) {
        for (int i = 0; i < m; ++i) {
            const Tensor& t = batch.targets[static_cast<size_t>(i)];
            if (t.numel() == 0) continue;
            if (t.numel() != per)
                throw DataError("target for image " + std::to_string(i) + " has " + std::to_string(t.numel()) +
                                " values, network head produces " + std::to_string(per));
            for (long long p = 0; p < per; ++p) {
                double d = fr.primary[i * per + p] - t[p];
                out.loss_reg += d * d;
                primary_grad[i * per + p] = 2.0 * d / static_cast<double>(labeled);
            }
        }
        out.loss_reg /= static_cast<double>(labeled);
    }

    RankingLossResult rl = ranking_loss_efficient(fr.rank, batch.labels, cfg.epsilon);
    out.loss_rank = rl.loss;
    out.active_pairs = rl.active_pairs;
    std::vector<double> rank_grad(rl.grad.size());
    for (size_t i = 0; i < rl.grad.size(); ++i) rank_grad[i] = cfg.lambda * rl.grad[i];

    net.backward(primary_grad, rank_grad);
    out.loss = out.loss_reg + cfg.lambda * out.loss_rank;
    out.scores = std::move(fr.rank);
    return out;
}

}  // namespace rankprox
