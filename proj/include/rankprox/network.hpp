#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rankprox/tensor.hpp"

namespace rankprox {

/// Named view of a parameter tensor owned by a layer.
struct ParamRef {
    std::string name;
    Tensor* tensor = nullptr;
    bool weight_decay = true;
};

/// One layer of the catalog. Layers operate on batch-leading tensors and
/// cache whatever the next backward call needs; one forward supports exactly
/// one backward.
class Layer {
public:
    virtual ~Layer() = default;
    virtual const std::string& name() const = 0;
    /// Per-sample output shape for a per-sample input shape. Throws
    /// std::invalid_argument naming the layer when the input does not fit.
    virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
    virtual Tensor forward(const Tensor& batch) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual void collect_params(std::vector<ParamRef>& out) {}
    virtual void init_params(std::uint64_t /*seed*/) {}
};

struct ForwardResult {
    Tensor primary;            ///< [B, ...] output of the layer stack
    std::vector<double> rank;  ///< length B; per-sample sum of primary
};

/// A layer stack with two outputs sharing all parameters: the primary head
/// (whatever the last layer produces: a scalar per sample or a density map)
/// and a ranking score defined as the per-sample sum of the primary output.
/// For a scalar head the two coincide; for a map head the ranking score is
/// the sum-pooled map.
///
/// Layer spec grammar (comma separated):
///   conv:K:C    KxK convolution to C channels, stride 1, zero padded
///   relu        rectifier
///   pool        2x2 max pooling, stride 2
///   flatten     collapse per-sample dims to a vector
///   dense:N     fully connected to N units (dense:N:nobias omits the bias)
///   gsum        global sum pool to a per-sample scalar
///   gmean       global mean pool to a per-sample scalar
class Network {
public:
    Network(std::vector<int> input_shape, const std::string& layer_spec, std::uint64_t seed);

    const std::vector<int>& input_shape() const { return input_shape_; }
    const std::vector<int>& output_shape() const { return output_shape_; }
    const std::string& layer_spec() const { return layer_spec_; }

    /// Runs the batch through the stack. Counts one forward pass per image.
    ForwardResult forward(const Tensor& batch);

    /// Accumulates dLoss/dtheta into parameter gradients given upstream
    /// gradients for both heads. Either may be empty (treated as zero).
    /// Requires a recorded forward; a second backward without a new forward
    /// is rejected.
    void backward(const Tensor& primary_grad, const std::vector<double>& rank_grad);

    std::vector<ParamRef> params();
    void zero_grads();
    void ensure_grads();

    long long images_forwarded() const { return images_forwarded_; }
    void reset_forward_counter() { images_forwarded_ = 0; }

private:
    std::vector<int> input_shape_;
    std::vector<int> output_shape_;
    std::string layer_spec_;
    std::vector<std::unique_ptr<Layer>> layers_;
    bool forward_recorded_ = false;
    int recorded_batch_ = 0;
    long long images_forwarded_ = 0;
};

/// Stochastic gradient descent schedule: the step size at step t is
/// initial_lr * decay_factor^floor(t / decay_interval).
struct SgdConfig {
    double initial_lr = 1e-4;
    double decay_factor = 0.1;
    long long decay_interval = 10000;
    double weight_decay = 5e-4;
    long long total_steps = 10000;

    void validate() const;
};

double learning_rate_at(const SgdConfig& cfg, long long step);

/// One SGD update: theta <- theta - lr(step) * (grad + weight_decay * theta),
/// with decay applied only to tensors flagged for it. Gradients are zeroed
/// afterwards. Throws std::logic_error if any parameter has no gradient.
void sgd_step(std::vector<ParamRef>& params, const SgdConfig& cfg, long long step);

/// Binary checkpoint: magic "RPK1", then per parameter
/// (u32 name length, name bytes, u32 rank, u32 dims..., f64 values...),
/// all little endian. Round-trips bit exactly.
void save_checkpoint(const std::vector<ParamRef>& params, const std::string& path);
void load_checkpoint(std::vector<ParamRef>& params, const std::string& path);

}  // namespace rankprox
