#include "rankprox/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rankprox/errors.hpp"

namespace rankprox {

namespace {

[[noreturn]] void shape_error(const std::string& layer, const std::string& what) {
    throw std::invalid_argument(layer + ": " + what);
}

std::vector<int> batch_shape(int b, const std::vector<int>& per_sample) {
    std::vector<int> s;
    s.reserve(per_sample.size() + 1);
    s.push_back(b);
    s.insert(s.end(), per_sample.begin(), per_sample.end());
    return s;
}

long long per_sample_numel(const std::vector<int>& shape) {
    long long n = 1;
    for (int d : shape) n *= d;
    return n;
}

class ReluLayer final : public Layer {
public:
    explicit ReluLayer(std::string name) : name_(std::move(name)) {}
    const std::string& name() const override { return name_; }

    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

    Tensor forward(const Tensor& batch) override {
        input_ = batch;
        Tensor out = batch;
        for (long long i = 0; i < out.numel(); ++i)
            if (out[i] < 0.0) out[i] = 0.0;
        return out;
    }

    Tensor backward(const Tensor& g) override {
        Tensor gi = g;
        for (long long i = 0; i < gi.numel(); ++i)
            if (input_[i] <= 0.0) gi[i] = 0.0;
        return gi;
    }

private:
    std::string name_;
    Tensor input_;
};

class FlattenLayer final : public Layer {
public:
    explicit FlattenLayer(std::string name) : name_(std::move(name)) {}
    const std::string& name() const override { return name_; }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        return {static_cast<int>(per_sample_numel(in))};
    }

    Tensor forward(const Tensor& batch) override {
        in_shape_ = batch.shape();
        int b = batch.dim(0);
        int n = static_cast<int>(batch.numel() / b);
        return Tensor({b, n}, batch.values());
    }

    Tensor backward(const Tensor& g) override { return Tensor(in_shape_, g.values()); }

private:
    std::string name_;
    std::vector<int> in_shape_;
};

class GlobalPoolLayer final : public Layer {
public:
    GlobalPoolLayer(std::string name, bool mean) : name_(std::move(name)), mean_(mean) {}
    const std::string& name() const override { return name_; }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        if (in.empty()) shape_error(name_, "input has no per-sample dimensions");
        return {1};
    }

    Tensor forward(const Tensor& batch) override {
        int b = batch.dim(0);
        n_ = batch.numel() / b;
        Tensor out({b, 1});
        const double* src = batch.data();
        for (int i = 0; i < b; ++i) {
            double acc = 0.0;
            for (long long j = 0; j < n_; ++j) acc += src[i * n_ + j];
            out[i] = mean_ ? acc / static_cast<double>(n_) : acc;
        }
        in_shape_ = batch.shape();
        return out;
    }

    Tensor backward(const Tensor& g) override {
        Tensor gi(in_shape_);
        int b = gi.dim(0);
        double scale = mean_ ? 1.0 / static_cast<double>(n_) : 1.0;
        for (int i = 0; i < b; ++i) {
            double v = g[i] * scale;
            for (long long j = 0; j < n_; ++j) gi[i * n_ + j] = v;
        }
        return gi;
    }

private:
    std::string name_;
    bool mean_;
    long long n_ = 0;
    std::vector<int> in_shape_;
};

class MaxPoolLayer final : public Layer {
public:
    explicit MaxPoolLayer(std::string name) : name_(std::move(name)) {}
    const std::string& name() const override { return name_; }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        if (in.size() != 3) shape_error(name_, "expects [C,H,W] input, got " + Tensor::shape_str(in));
        if (in[1] % 2 != 0 || in[2] % 2 != 0)
            shape_error(name_, "input " + Tensor::shape_str(in) + " not divisible by pool size 2");
        return {in[0], in[1] / 2, in[2] / 2};
    }

    Tensor forward(const Tensor& batch) override {
        in_shape_ = batch.shape();
        int b = in_shape_[0], c = in_shape_[1], h = in_shape_[2], w = in_shape_[3];
        int oh = h / 2, ow = w / 2;
        Tensor out({b, c, oh, ow});
        argmax_.assign(static_cast<size_t>(out.numel()), 0);
        const double* src = batch.data();
        double* dst = out.data();
        long long o = 0;
        for (int i = 0; i < b; ++i)
            for (int ch = 0; ch < c; ++ch) {
                const double* plane = src + (static_cast<long long>(i) * c + ch) * h * w;
                long long base = (static_cast<long long>(i) * c + ch) * h * w;
                for (int y = 0; y < oh; ++y)
                    for (int x = 0; x < ow; ++x, ++o) {
                        long long i00 = static_cast<long long>(2 * y) * w + 2 * x;
                        long long cand[4] = {i00, i00 + 1, i00 + w, i00 + w + 1};
                        long long best = cand[0];
                        for (int k = 1; k < 4; ++k)
                            if (plane[cand[k]] > plane[best]) best = cand[k];
                        dst[o] = plane[best];
                        argmax_[static_cast<size_t>(o)] = base + best;
                    }
            }
        return out;
    }

    Tensor backward(const Tensor& g) override {
        Tensor gi(in_shape_);
        for (long long o = 0; o < g.numel(); ++o) gi[argmax_[static_cast<size_t>(o)]] += g[o];
        return gi;
    }

private:
    std::string name_;
    std::vector<int> in_shape_;
    std::vector<long long> argmax_;
};

class DenseLayer final : public Layer {
public:
    DenseLayer(std::string name, int units, bool bias) : name_(std::move(name)), units_(units), has_bias_(bias) {}
    const std::string& name() const override { return name_; }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        if (in.size() != 1) shape_error(name_, "expects flattened [N] input, got " + Tensor::shape_str(in));
        if (weight_.numel() == 0) {
            in_features_ = in[0];
        } else if (in[0] != in_features_) {
            shape_error(name_, "expects " + std::to_string(in_features_) + " features, got " + std::to_string(in[0]));
        }
        return {units_};
    }

    void init_params(std::uint64_t seed) override {
        weight_ = Tensor({units_, in_features_});
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in_features_));
        for (long long i = 0; i < weight_.numel(); ++i) weight_[i] = dist(rng);
        if (has_bias_) bias_ = Tensor({units_});
    }

    Tensor forward(const Tensor& batch) override {
        input_ = batch;
        int b = batch.dim(0);
        Tensor out({b, units_});
        const double* in = batch.data();
        const double* w = weight_.data();
        for (int i = 0; i < b; ++i)
            for (int m = 0; m < units_; ++m) {
                double acc = has_bias_ ? bias_[m] : 0.0;
                const double* wr = w + static_cast<long long>(m) * in_features_;
                const double* xr = in + static_cast<long long>(i) * in_features_;
                for (int n = 0; n < in_features_; ++n) acc += wr[n] * xr[n];
                out[static_cast<long long>(i) * units_ + m] = acc;
            }
        return out;
    }

    Tensor backward(const Tensor& g) override {
        int b = g.dim(0);
        weight_.ensure_grad();
        double* gw = weight_.grad();
        double* gb = nullptr;
        if (has_bias_) {
            bias_.ensure_grad();
            gb = bias_.grad();
        }
        Tensor gi({b, in_features_});
        const double* w = weight_.data();
        for (int i = 0; i < b; ++i) {
            const double* xr = input_.data() + static_cast<long long>(i) * in_features_;
            double* gir = gi.data() + static_cast<long long>(i) * in_features_;
            for (int m = 0; m < units_; ++m) {
                double go = g[static_cast<long long>(i) * units_ + m];
                if (go == 0.0) continue;
                double* gwr = gw + static_cast<long long>(m) * in_features_;
                const double* wr = w + static_cast<long long>(m) * in_features_;
                for (int n = 0; n < in_features_; ++n) {
                    gwr[n] += go * xr[n];
                    gir[n] += go * wr[n];
                }
                if (gb) gb[m] += go;
            }
        }
        return gi;
    }

    void collect_params(std::vector<ParamRef>& out) override {
        out.push_back({name_ + ".w", &weight_, true});
        if (has_bias_) out.push_back({name_ + ".b", &bias_, false});
    }

private:
    std::string name_;
    int units_;
    bool has_bias_;
    mutable int in_features_ = 0;
    Tensor weight_, bias_, input_;
};

class ConvLayer final : public Layer {
public:
    ConvLayer(std::string name, int ksize, int out_channels)
        : name_(std::move(name)), k_(ksize), oc_(out_channels) {
        if (k_ <= 0 || k_ % 2 == 0) shape_error(name_, "kernel size must be odd and positive");
    }
    const std::string& name() const override { return name_; }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        if (in.size() != 3) shape_error(name_, "expects [C,H,W] input, got " + Tensor::shape_str(in));
        if (weight_.numel() == 0) {
            ic_ = in[0];
        } else if (in[0] != ic_) {
            shape_error(name_, "expects " + std::to_string(ic_) + " channels, got " + std::to_string(in[0]));
        }
        return {oc_, in[1], in[2]};
    }

    void init_params(std::uint64_t seed) override {
        weight_ = Tensor({oc_, ic_, k_, k_});
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (ic_ * k_ * k_)));
        for (long long i = 0; i < weight_.numel(); ++i) weight_[i] = dist(rng);
        bias_ = Tensor({oc_});
    }

    Tensor forward(const Tensor& batch) override {
        input_ = batch;
        int b = batch.dim(0), h = batch.dim(2), w = batch.dim(3);
        int p = k_ / 2;
        int ph = h + 2 * p, pw = w + 2 * p;
        Tensor out({b, oc_, h, w});
        std::vector<double> padded(static_cast<size_t>(ic_) * ph * pw);
        for (int i = 0; i < b; ++i) {
            pad_sample(batch, i, p, padded);
            for (int o = 0; o < oc_; ++o) {
                double* dst = out.data() + ((static_cast<long long>(i) * oc_ + o) * h) * w;
                double bv = bias_[o];
                for (long long j = 0; j < static_cast<long long>(h) * w; ++j) dst[j] = bv;
                for (int c = 0; c < ic_; ++c)
                    for (int ky = 0; ky < k_; ++ky)
                        for (int kx = 0; kx < k_; ++kx) {
                            double wv = weight_[((static_cast<long long>(o) * ic_ + c) * k_ + ky) * k_ + kx];
                            if (wv == 0.0) continue;
                            for (int y = 0; y < h; ++y) {
                                const double* src = padded.data() + (static_cast<long long>(c) * ph + y + ky) * pw + kx;
                                double* row = dst + static_cast<long long>(y) * w;
                                for (int x = 0; x < w; ++x) row[x] += wv * src[x];
                            }
                        }
            }
        }
        return out;
    }

    Tensor backward(const Tensor& g) override {
        int b = input_.dim(0), h = input_.dim(2), w = input_.dim(3);
        int p = k_ / 2;
        int ph = h + 2 * p, pw = w + 2 * p;
        weight_.ensure_grad();
        bias_.ensure_grad();
        double* gw = weight_.grad();
        double* gb = bias_.grad();
        Tensor gi({b, ic_, h, w});
        std::vector<double> padded(static_cast<size_t>(ic_) * ph * pw);
        std::vector<double> gpadded(static_cast<size_t>(ic_) * ph * pw);
        for (int i = 0; i < b; ++i) {
            pad_sample(input_, i, p, padded);
            std::fill(gpadded.begin(), gpadded.end(), 0.0);
            for (int o = 0; o < oc_; ++o) {
                const double* go = g.data() + ((static_cast<long long>(i) * oc_ + o) * h) * w;
                double acc = 0.0;
                for (long long j = 0; j < static_cast<long long>(h) * w; ++j) acc += go[j];
                gb[o] += acc;
                for (int c = 0; c < ic_; ++c)
                    for (int ky = 0; ky < k_; ++ky)
                        for (int kx = 0; kx < k_; ++kx) {
                            long long widx = ((static_cast<long long>(o) * ic_ + c) * k_ + ky) * k_ + kx;
                            double wv = weight_[widx];
                            double wacc = 0.0;
                            for (int y = 0; y < h; ++y) {
                                const double* src = padded.data() + (static_cast<long long>(c) * ph + y + ky) * pw + kx;
                                double* gsrc = gpadded.data() + (static_cast<long long>(c) * ph + y + ky) * pw + kx;
                                const double* grow = go + static_cast<long long>(y) * w;
                                for (int x = 0; x < w; ++x) {
                                    wacc += grow[x] * src[x];
                                    gsrc[x] += grow[x] * wv;
                                }
                            }
                            gw[widx] += wacc;
                        }
            }
            // crop the padded input gradient back to [ic,h,w]
            for (int c = 0; c < ic_; ++c)
                for (int y = 0; y < h; ++y) {
                    const double* src = gpadded.data() + (static_cast<long long>(c) * ph + y + p) * pw + p;
                    double* dst = gi.data() + ((static_cast<long long>(i) * ic_ + c) * h + y) * w;
                    std::memcpy(dst, src, sizeof(double) * static_cast<size_t>(w));
                }
        }
        return gi;
    }

    void collect_params(std::vector<ParamRef>& out) override {
        out.push_back({name_ + ".w", &weight_, true});
        out.push_back({name_ + ".b", &bias_, false});
    }

private:
    void pad_sample(const Tensor& batch, int i, int p, std::vector<double>& padded) const {
        int h = batch.dim(2), w = batch.dim(3);
        int ph = h + 2 * p, pw = w + 2 * p;
        std::fill(padded.begin(), padded.end(), 0.0);
        for (int c = 0; c < ic_; ++c)
            for (int y = 0; y < h; ++y) {
                const double* src = batch.data() + ((static_cast<long long>(i) * ic_ + c) * h + y) * w;
                double* dst = padded.data() + (static_cast<long long>(c) * ph + y + p) * pw + p;
                std::memcpy(dst, src, sizeof(double) * static_cast<size_t>(w));
            }
    }

    std::string name_;
    int k_, oc_;
    mutable int ic_ = 0;
    Tensor weight_, bias_, input_;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

int parse_positive_int(const std::string& tok, const std::string& what) {
    try {
        size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid " + what + " '" + tok + "' in layer spec");
    }
}

}  // namespace

Network::Network(std::vector<int> input_shape, const std::string& layer_spec, std::uint64_t seed)
    : input_shape_(std::move(input_shape)), layer_spec_(layer_spec) {
    if (input_shape_.empty()) throw ConfigError("network input shape must have at least one dimension");
    for (int d : input_shape_)
        if (d <= 0) throw ConfigError("network input dimensions must be positive");

    int idx = 0;
    try {
    for (const std::string& tok : split(layer_spec, ',')) {
        if (tok.empty()) continue;
        auto fields = split(tok, ':');
        const std::string& kind = fields[0];
        std::string lname = kind + std::to_string(idx);
        if (kind == "conv") {
            if (fields.size() != 3) throw ConfigError("conv layer needs conv:K:C, got '" + tok + "'");
            layers_.push_back(std::make_unique<ConvLayer>(lname, parse_positive_int(fields[1], "kernel size"),
                                                          parse_positive_int(fields[2], "channel count")));
        } else if (kind == "relu") {
            layers_.push_back(std::make_unique<ReluLayer>(lname));
        } else if (kind == "pool") {
            layers_.push_back(std::make_unique<MaxPoolLayer>(lname));
        } else if (kind == "flatten") {
            layers_.push_back(std::make_unique<FlattenLayer>(lname));
        } else if (kind == "dense") {
            if (fields.size() < 2 || fields.size() > 3 || (fields.size() == 3 && fields[2] != "nobias"))
                throw ConfigError("dense layer needs dense:N or dense:N:nobias, got '" + tok + "'");
            layers_.push_back(
                std::make_unique<DenseLayer>(lname, parse_positive_int(fields[1], "unit count"), fields.size() == 2));
        } else if (kind == "gsum") {
            layers_.push_back(std::make_unique<GlobalPoolLayer>(lname, false));
        } else if (kind == "gmean") {
            layers_.push_back(std::make_unique<GlobalPoolLayer>(lname, true));
        } else {
            throw ConfigError("unknown layer kind '" + kind + "' in layer spec");
        }
        ++idx;
    }

    // Infer shapes through the stack, then initialize parameters.
    std::vector<int> shape = input_shape_;
    int li = 0;
    for (auto& layer : layers_) {
        shape = layer->output_shape(shape);
        layer->init_params(derive_seed(seed, "layer-init", static_cast<std::uint64_t>(li++)));
    }
    output_shape_ = shape;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("layer spec rejected: ") + e.what());
    }
}

ForwardResult Network::forward(const Tensor& batch) {
    if (batch.rank() != static_cast<int>(input_shape_.size()) + 1)
        throw std::invalid_argument("input: batch rank " + std::to_string(batch.rank()) + " does not match input shape " +
                                    Tensor::shape_str(input_shape_) + " with leading batch dimension");
    for (size_t i = 0; i < input_shape_.size(); ++i)
        if (batch.shape()[i + 1] != input_shape_[i])
            throw std::invalid_argument("input: batch shape " + Tensor::shape_str(batch.shape()) +
                                        " does not match declared input " + Tensor::shape_str(input_shape_));

    Tensor cur = batch;
    for (auto& layer : layers_) cur = layer->forward(cur);

    int b = batch.dim(0);
    ForwardResult res;
    res.rank.resize(static_cast<size_t>(b));
    long long n = cur.numel() / b;
    for (int i = 0; i < b; ++i) {
        double acc = 0.0;
        for (long long j = 0; j < n; ++j) acc += cur[i * n + j];
        res.rank[static_cast<size_t>(i)] = acc;
    }
    res.primary = std::move(cur);
    forward_recorded_ = true;
    recorded_batch_ = b;
    images_forwarded_ += b;
    return res;
}

void Network::backward(const Tensor& primary_grad, const std::vector<double>& rank_grad) {
    if (!forward_recorded_) throw std::logic_error("backward called without a recorded forward pass");
    int b = recorded_batch_;
    if (primary_grad.numel() > 0) {
        auto expect = batch_shape(b, output_shape_);
        if (primary_grad.shape() != expect)
            throw std::invalid_argument("primary head gradient shape " + Tensor::shape_str(primary_grad.shape()) +
                                        " does not match output " + Tensor::shape_str(expect));
    }
    if (!rank_grad.empty() && static_cast<int>(rank_grad.size()) != b)
        throw std::invalid_argument("ranking head gradient length " + std::to_string(rank_grad.size()) +
                                    " does not match batch size " + std::to_string(b));

    // Shared parameters: the upstream gradient into the stack is the sum of
    // the primary head gradient and the broadcast ranking head gradient.
    Tensor g(batch_shape(b, output_shape_));
    long long n = g.numel() / b;
    if (primary_grad.numel() > 0)
        for (long long i = 0; i < g.numel(); ++i) g[i] = primary_grad[i];
    if (!rank_grad.empty())
        for (int i = 0; i < b; ++i) {
            double rv = rank_grad[static_cast<size_t>(i)];
            if (rv == 0.0) continue;
            for (long long j = 0; j < n; ++j) g[i * n + j] += rv;
        }

    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    forward_recorded_ = false;
}

std::vector<ParamRef> Network::params() {
    std::vector<ParamRef> out;
    for (auto& layer : layers_) layer->collect_params(out);
    return out;
}

void Network::zero_grads() {
    for (auto& p : params()) p.tensor->zero_grad();
}

void Network::ensure_grads() {
    for (auto& p : params()) p.tensor->ensure_grad();
}

void SgdConfig::validate() const {
    if (!(initial_lr > 0)) throw ConfigError("learning rate must be positive");
    if (!(decay_factor > 0) || decay_factor > 1) throw ConfigError("lr decay factor must be in (0,1]");
    if (decay_interval <= 0) throw ConfigError("lr decay interval must be positive");
    if (weight_decay < 0) throw ConfigError("weight decay must be nonnegative");
    if (total_steps <= 0) throw ConfigError("total steps must be positive");
}

double learning_rate_at(const SgdConfig& cfg, long long step) {
    return cfg.initial_lr * std::pow(cfg.decay_factor, static_cast<double>(step / cfg.decay_interval));
}

void sgd_step(std::vector<ParamRef>& params, const SgdConfig& cfg, long long step) {
    cfg.validate();
    for (auto& p : params)
        if (!p.tensor->has_grad())
            throw std::logic_error("sgd_step: parameter '" + p.name + "' has no gradient");
    double lr = learning_rate_at(cfg, step);
    for (auto& p : params) {
        Tensor& t = *p.tensor;
        double wd = p.weight_decay ? cfg.weight_decay : 0.0;
        double* v = t.data();
        double* g = t.grad();
        long long n = t.numel();
        for (long long i = 0; i < n; ++i) v[i] -= lr * (g[i] + wd * v[i]);
        t.zero_grad();
    }
}

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double d) {
    std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct ByteReader {
    const std::string& buf;
    size_t pos = 0;
    explicit ByteReader(const std::string& b) : buf(b) {}
    void need(size_t n) const {
        if (pos + n > buf.size()) throw DataError("checkpoint truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return std::bit_cast<double>(v);
    }
    std::string bytes(size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
    bool done() const { return pos == buf.size(); }
};

}  // namespace

void save_checkpoint(const std::vector<ParamRef>& params, const std::string& path) {
    std::string buf = "RPK1";
    for (const auto& p : params) {
        const Tensor& t = *p.tensor;
        put_u32(buf, static_cast<std::uint32_t>(p.name.size()));
        buf.append(p.name);
        put_u32(buf, static_cast<std::uint32_t>(t.rank()));
        for (int d : t.shape()) put_u32(buf, static_cast<std::uint32_t>(d));
        for (long long i = 0; i < t.numel(); ++i) put_f64(buf, t[i]);
    }
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write checkpoint: " + path);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw DataError("short write on checkpoint: " + path);
    }
    std::filesystem::rename(tmp, path);
}

void load_checkpoint(std::vector<ParamRef>& params, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(buf);
    if (r.bytes(4) != "RPK1") throw DataError("bad checkpoint magic in " + path);

    std::map<std::string, ParamRef*> by_name;
    for (auto& p : params) by_name[p.name] = &p;
    size_t loaded = 0;
    while (!r.done()) {
        std::string name = r.bytes(r.u32());
        std::uint32_t rank = r.u32();
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(r.u32());
        long long n = Tensor::shape_numel(shape);
        auto it = by_name.find(name);
        if (it == by_name.end()) throw DataError("checkpoint parameter '" + name + "' not present in network");
        Tensor& t = *it->second->tensor;
        if (t.shape() != shape)
            throw DataError("checkpoint parameter '" + name + "' has shape " + Tensor::shape_str(shape) +
                            ", network expects " + Tensor::shape_str(t.shape()));
        for (long long i = 0; i < n; ++i) t[i] = r.f64();
        ++loaded;
    }
    if (loaded != params.size())
        throw DataError("checkpoint holds " + std::to_string(loaded) + " parameters, network has " +
                        std::to_string(params.size()));
}

}  // namespace rankprox
