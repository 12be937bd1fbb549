#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rankprox {

/// Dense n-dimensional array of doubles in row-major order, with an optional
/// gradient buffer of identical shape. This is the value type flowing through
/// the network; all training math is 64-bit.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> values);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double value);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    long long numel() const { return static_cast<long long>(data_.size()); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](long long i) const { return data_[static_cast<size_t>(i)]; }
    double& operator[](long long i) { return data_[static_cast<size_t>(i)]; }

    bool has_grad() const { return !grad_.empty(); }
    /// Allocates the gradient buffer (zero-filled) if absent.
    void ensure_grad();
    void zero_grad();
    void drop_grad() { grad_.clear(); }
    double* grad();
    const double* grad() const;
    std::vector<double>& grad_values();

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    static long long shape_numel(const std::vector<int>& shape);
    static std::string shape_str(const std::vector<int>& shape);

private:
    std::vector<int> shape_;
    std::vector<double> data_;
    std::vector<double> grad_;  // empty when absent, else data_.size()
};

/// Derives an independent 64-bit seed from a master seed, a component tag and
/// an index. Used so that every stochastic component of a run gets its own
/// reproducible stream.
std::uint64_t derive_seed(std::uint64_t master, const std::string& tag, std::uint64_t index = 0);

}  // namespace rankprox
