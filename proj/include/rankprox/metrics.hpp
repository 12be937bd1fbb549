#pragma once

#include <vector>

namespace rankprox {

// 1-based ranks with ties assigned the average of the positions they span.
std::vector<double> average_ranks(const std::vector<double>& values);

// Pearson linear correlation. Throws NumericError when either series has
// zero variance.
double lcc(const std::vector<double>& truth, const std::vector<double>& predictions);

// Spearman rank-order correlation: Pearson correlation of averaged ranks.
// Tie-free series reduce exactly to 1 - 6*sum(d^2)/(N(N^2-1)). Throws
// NumericError when either series is constant.
double srocc(const std::vector<double>& truth, const std::vector<double>& predictions);

struct ErrorStats {
    double mae = 0.0;
    // Root of the mean squared error. The field keeps the reporting name
    // "mse" used throughout the experiment CSVs even though the square root
    // is applied.
    double mse = 0.0;
};

ErrorStats mae_mse(const std::vector<double>& truth, const std::vector<double>& predictions);

}  // namespace rankprox
