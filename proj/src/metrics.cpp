#include "rankprox/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rankprox/errors.hpp"

namespace rankprox {

namespace {

void check_sizes(const std::vector<double>& a, const std::vector<double>& b, size_t min_n) {
    if (a.size() != b.size()) throw std::invalid_argument("series differ in length");
    if (a.size() < min_n)
        throw std::invalid_argument("series needs at least " + std::to_string(min_n) + " entries");
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& values) {
    size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j (0-based) share the averaged 1-based rank
        double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double lcc(const std::vector<double>& truth, const std::vector<double>& predictions) {
    check_sizes(truth, predictions, 2);
    size_t n = truth.size();
    double my = 0.0, mp = 0.0;
    for (size_t i = 0; i < n; ++i) {
        my += truth[i];
        mp += predictions[i];
    }
    my /= static_cast<double>(n);
    mp /= static_cast<double>(n);
    double cov = 0.0, vy = 0.0, vp = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dy = truth[i] - my;
        double dp = predictions[i] - mp;
        cov += dy * dp;
        vy += dy * dy;
        vp += dp * dp;
    }
    if (vy == 0.0 || vp == 0.0) throw NumericError("correlation undefined: a series has zero variance");
    return cov / std::sqrt(vy * vp);
}

double srocc(const std::vector<double>& truth, const std::vector<double>& predictions) {
    check_sizes(truth, predictions, 2);
    return lcc(average_ranks(truth), average_ranks(predictions));
}

ErrorStats mae_mse(const std::vector<double>& truth, const std::vector<double>& predictions) {
    check_sizes(truth, predictions, 1);
    size_t n = truth.size();
    ErrorStats s;
    for (size_t i = 0; i < n; ++i) {
        double d = truth[i] - predictions[i];
        s.mae += std::abs(d);
        s.mse += d * d;
    }
    s.mae /= static_cast<double>(n);
    s.mse = std::sqrt(s.mse / static_cast<double>(n));
    return s;
}

}  // namespace rankprox
