#include "rankprox/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rankprox {

long long Tensor::shape_numel(const std::vector<int>& shape) {
    long long n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor dimension must be positive, got " + std::to_string(d));
        n *= d;
    }
    return n;
}

std::string Tensor::shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(shape_numel(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
    if (shape_numel(shape_) != static_cast<long long>(data_.size()))
        throw std::invalid_argument("tensor shape " + shape_str(shape_) + " does not match value count " +
                                    std::to_string(data_.size()));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = value;
    return t;
}

void Tensor::ensure_grad() {
    if (grad_.empty()) grad_.assign(data_.size(), 0.0);
}

void Tensor::zero_grad() {
    grad_.assign(data_.size(), 0.0);
}

double* Tensor::grad() {
    if (grad_.empty()) throw std::logic_error("tensor has no gradient buffer");
    return grad_.data();
}

const double* Tensor::grad() const {
    if (grad_.empty()) throw std::logic_error("tensor has no gradient buffer");
    return grad_.data();
}

std::vector<double>& Tensor::grad_values() {
    if (grad_.empty()) throw std::logic_error("tensor has no gradient buffer");
    return grad_;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, const std::string& tag, std::uint64_t index) {
    // FNV-1a over the tag, then splitmix64 mixing with master and index.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(master ^ h) ^ index);
}

}  // namespace rankprox
