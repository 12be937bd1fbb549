#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <stdexcept>

#include "rankprox/errors.hpp"
#include "rankprox/network.hpp"

using namespace rankprox;

namespace {

std::map<std::string, Tensor*> params_by_name(Network& net) {
    std::map<std::string, Tensor*> out;
    for (auto& p : net.params()) out[p.name] = p.tensor;
    return out;
}

Tensor random_batch(const std::vector<int>& shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Tensor t(shape);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (long long i = 0; i < t.numel(); ++i) t[i] = dist(rng);
    return t;
}

// Scalar probe loss: a fixed random weighting of the primary output plus the
// ranking scores, so finite differences exercise both backward entry points.
struct ProbeLoss {
    std::vector<double> wp, wr;

    static ProbeLoss make(Network& net, int batch, std::uint64_t seed) {
        long long per = Tensor::shape_numel(net.output_shape());
        ProbeLoss p;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        p.wp.resize(static_cast<size_t>(batch * per));
        p.wr.resize(static_cast<size_t>(batch));
        for (double& v : p.wp) v = dist(rng);
        for (double& v : p.wr) v = dist(rng);
        return p;
    }

    double value(Network& net, const Tensor& batch) const {
        ForwardResult fr = net.forward(batch);
        double acc = 0.0;
        for (size_t i = 0; i < wp.size(); ++i) acc += wp[i] * fr.primary[static_cast<long long>(i)];
        for (size_t i = 0; i < wr.size(); ++i) acc += wr[i] * fr.rank[i];
        return acc;
    }

    // value + analytic parameter gradients via the network's backward pass
    double value_and_backward(Network& net, const Tensor& batch) const {
        ForwardResult fr = net.forward(batch);
        double acc = 0.0;
        Tensor pg(fr.primary.shape());
        for (size_t i = 0; i < wp.size(); ++i) {
            acc += wp[i] * fr.primary[static_cast<long long>(i)];
            pg[static_cast<long long>(i)] = wp[i];
        }
        for (size_t i = 0; i < wr.size(); ++i) acc += wr[i] * fr.rank[i];
        net.zero_grads();
        net.backward(pg, wr);
        return acc;
    }
};

// Central finite differences over every parameter element. Relative error
// uses a floor so exactly-zero gradients are measured absolutely. A failing
// element is retried at h/10: a rectifier or pool argmax flipping inside the
// FD interval is an artifact of the probe, not a gradient bug, and vanishes
// with smaller h while a genuine bug does not.
void fd_check_params(Network& net, const Tensor& batch, const ProbeLoss& probe, double tol = 1e-5) {
    probe.value_and_backward(net, batch);
    std::vector<std::pair<std::string, std::vector<double>>> analytic;
    for (auto& p : net.params()) {
        REQUIRE(p.tensor->has_grad());
        analytic.emplace_back(p.name, std::vector<double>(p.tensor->grad(), p.tensor->grad() + p.tensor->numel()));
    }

    size_t pi = 0;
    for (auto& p : net.params()) {
        const auto& grads = analytic[pi++].second;
        for (long long e = 0; e < p.tensor->numel(); ++e) {
            double a = grads[static_cast<size_t>(e)];
            bool ok = false;
            for (double h : {1e-6, 1e-7}) {
                double saved = (*p.tensor)[e];
                (*p.tensor)[e] = saved + h;
                double up = probe.value(net, batch);
                (*p.tensor)[e] = saved - h;
                double down = probe.value(net, batch);
                (*p.tensor)[e] = saved;
                double n = (up - down) / (2 * h);
                if (std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-2}) <= tol) {
                    ok = true;
                    break;
                }
            }
            if (!ok) {
                CAPTURE(p.name);
                CAPTURE(e);
                REQUIRE(ok);
            }
        }
    }
}

}  // namespace

TEST_CASE("mean-pool head on an all-zero image returns zero") {
    Network net({1, 4, 4}, "gmean", 1);
    ForwardResult fr = net.forward(Tensor({1, 1, 4, 4}));
    CHECK(fr.primary[0] == 0.0);
    CHECK(fr.rank[0] == 0.0);
}

TEST_CASE("dense layer with identity weights passes the input through") {
    Network net({4}, "dense:4", 3);
    auto p = params_by_name(net);
    Tensor& w = *p.at("dense0.w");
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) w[i * 4 + j] = i == j ? 1.0 : 0.0;

    Tensor v({1, 4}, {0.5, -2.0, 3.25, 0.0});
    ForwardResult fr = net.forward(v);
    for (int i = 0; i < 4; ++i) CHECK(fr.primary[i] == v[i]);
}

TEST_CASE("two dense layers match hand-unrolled matrix arithmetic") {
    Network net({8, 8}, "flatten,dense:3,dense:1", 7);
    auto p = params_by_name(net);
    const Tensor& w1 = *p.at("dense1.w");  // [3,64]
    const Tensor& b1 = *p.at("dense1.b");
    const Tensor& w2 = *p.at("dense2.w");  // [1,3]
    const Tensor& b2 = *p.at("dense2.b");

    Tensor x = random_batch({2, 8, 8}, 99);
    ForwardResult fr = net.forward(x);

    for (int s = 0; s < 2; ++s) {
        double hidden[3];
        for (int m = 0; m < 3; ++m) {
            double acc = b1[m];
            for (int n = 0; n < 64; ++n) acc += w1[m * 64 + n] * x[s * 64 + n];
            hidden[m] = acc;
        }
        double out = b2[0];
        for (int m = 0; m < 3; ++m) out += w2[m] * hidden[m];
        CHECK(fr.primary[s] == doctest::Approx(out).epsilon(1e-14));
    }
}

TEST_CASE("convolution matches hand-unrolled zero-padded arithmetic") {
    Network net({2, 3, 3}, "conv:3:2", 5);
    auto p = params_by_name(net);
    const Tensor& w = *p.at("conv0.w");  // [2,2,3,3]
    const Tensor& b = *p.at("conv0.b");

    Tensor x = random_batch({1, 2, 3, 3}, 123);
    ForwardResult fr = net.forward(x);

    for (int o = 0; o < 2; ++o)
        for (int y = 0; y < 3; ++y)
            for (int xx = 0; xx < 3; ++xx) {
                double acc = b[o];
                for (int c = 0; c < 2; ++c)
                    for (int ky = -1; ky <= 1; ++ky)
                        for (int kx = -1; kx <= 1; ++kx) {
                            int sy = y + ky, sx = xx + kx;
                            if (sy < 0 || sy >= 3 || sx < 0 || sx >= 3) continue;
                            acc += w[((o * 2 + c) * 3 + (ky + 1)) * 3 + (kx + 1)] * x[(c * 3 + sy) * 3 + sx];
                        }
                CHECK(fr.primary[(o * 3 + y) * 3 + xx] == doctest::Approx(acc).epsilon(1e-13));
            }
}

TEST_CASE("ranking head equals the per-sample sum of the primary head exactly") {
    Network net({1, 8, 8}, "conv:3:2,relu,pool", 11);
    Tensor x = random_batch({3, 1, 8, 8}, 77);
    ForwardResult fr = net.forward(x);
    long long per = fr.primary.numel() / 3;
    for (int s = 0; s < 3; ++s) {
        double acc = 0.0;
        for (long long j = 0; j < per; ++j) acc += fr.primary[s * per + j];
        CHECK(fr.rank[static_cast<size_t>(s)] == acc);
    }
}

TEST_CASE("shape errors identify the offending layer") {
    auto message_of = [](auto fn) -> std::string {
        try {
            fn();
        } catch (const ConfigError& e) {
            return e.what();
        }
        return "";
    };
    CHECK(message_of([] { Network({1, 8, 8}, "dense:4", 1); }).find("dense0") != std::string::npos);
    CHECK(message_of([] { Network({1, 7, 7}, "pool", 1); }).find("pool0") != std::string::npos);
    CHECK_THROWS_AS(Network({1, 8, 8}, "conv:2:4", 1), ConfigError);
    CHECK_THROWS_AS(Network({1, 8, 8}, "warp", 1), ConfigError);

    Network net({1, 8, 8}, "gsum", 1);
    CHECK_THROWS_AS(net.forward(Tensor({2, 1, 4, 4})), std::invalid_argument);
    CHECK_THROWS_AS(net.forward(Tensor({1, 8, 8})), std::invalid_argument);
}

TEST_CASE("zero upstream gradient produces zero parameter gradients") {
    Network net({1, 6, 6}, "conv:3:2,relu,flatten,dense:2", 13);
    Tensor x = random_batch({2, 1, 6, 6}, 5);
    ForwardResult fr = net.forward(x);
    net.zero_grads();
    net.backward(Tensor(fr.primary.shape()), std::vector<double>(2, 0.0));
    for (auto& p : net.params())
        for (long long i = 0; i < p.tensor->numel(); ++i) CHECK(p.tensor->grad()[i] == 0.0);
}

TEST_CASE("single weight: y = w*x with x=3 gives grad(w) = 3") {
    Network net({1}, "dense:1:nobias", 2);
    Tensor x({1, 1}, {3.0});
    ForwardResult fr = net.forward(x);
    net.zero_grads();
    net.backward(Tensor({1, 1}, {1.0}), {});
    auto p = params_by_name(net);
    CHECK(p.at("dense0.w")->grad()[0] == 3.0);
    CHECK(fr.primary[0] == (*p.at("dense0.w"))[0] * 3.0);
}

TEST_CASE("backward without a recorded forward is rejected") {
    Network net({1, 4, 4}, "gsum", 1);
    CHECK_THROWS_AS(net.backward(Tensor({1, 1}), {0.0}), std::logic_error);
    net.forward(Tensor({1, 1, 4, 4}));
    net.ensure_grads();
    net.backward(Tensor({1, 1}, {1.0}), {});
    CHECK_THROWS_AS(net.backward(Tensor({1, 1}, {1.0}), {}), std::logic_error);
}

TEST_CASE("backward accumulates the sum of both head contributions") {
    Network net({2}, "dense:1:nobias", 4);
    auto p = params_by_name(net);
    Tensor x({1, 2}, {2.0, 5.0});
    net.forward(x);
    net.zero_grads();
    // primary upstream 1 and ranking upstream 1 address the same scalar
    net.backward(Tensor({1, 1}, {1.0}), {1.0});
    CHECK(p.at("dense0.w")->grad()[0] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(p.at("dense0.w")->grad()[1] == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("finite differences per layer kind") {
    // Each spec isolates one layer's backward path behind a parameterized
    // layer whose weights are perturbed.
    struct Case {
        const char* spec;
        std::vector<int> input;
    };
    std::vector<Case> cases = {
        {"conv:3:2", {1, 6, 6}},          {"conv:5:1", {2, 7, 7}},       {"flatten,dense:4", {2, 3, 3}},
        {"flatten,dense:3:nobias", {8}},  {"dense:6,relu", {5}},         {"conv:3:2,pool", {1, 6, 6}},
        {"conv:3:2,flatten", {1, 4, 4}},  {"conv:3:2,gsum", {1, 5, 5}},  {"conv:3:2,gmean", {1, 5, 5}},
        {"conv:3:2,relu,pool,flatten,dense:3", {1, 8, 8}},
    };
    int instance = 0;
    for (const auto& c : cases) {
        CAPTURE(c.spec);
        for (int rep = 0; rep < 4; ++rep) {
            Network net(c.input, c.spec, derive_seed(31, "fd-net", static_cast<std::uint64_t>(instance)));
            std::vector<int> bshape = {2};
            bshape.insert(bshape.end(), c.input.begin(), c.input.end());
            Tensor x = random_batch(bshape, derive_seed(31, "fd-x", static_cast<std::uint64_t>(instance)));
            ProbeLoss probe = ProbeLoss::make(net, 2, derive_seed(31, "fd-probe", static_cast<std::uint64_t>(instance)));
            fd_check_params(net, x, probe);
            ++instance;
        }
    }
}

TEST_CASE("sgd one-step arithmetic") {
    SUBCASE("theta=1, grad=2, lr=0.1, no decay -> 0.8") {
        Tensor t({1}, {1.0});
        t.ensure_grad();
        t.grad()[0] = 2.0;
        std::vector<ParamRef> params{{"t", &t, true}};
        SgdConfig cfg;
        cfg.initial_lr = 0.1;
        cfg.weight_decay = 0.0;
        sgd_step(params, cfg, 0);
        CHECK(t[0] == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(t.grad()[0] == 0.0);  // cleared
    }
    SUBCASE("theta=1, grad=0, lr=0.1, weight decay 0.5 -> 0.95") {
        Tensor t({1}, {1.0});
        t.ensure_grad();
        std::vector<ParamRef> params{{"t", &t, true}};
        SgdConfig cfg;
        cfg.initial_lr = 0.1;
        cfg.weight_decay = 0.5;
        sgd_step(params, cfg, 0);
        CHECK(t[0] == doctest::Approx(0.95).epsilon(1e-15));
    }
    SUBCASE("zero grad, zero decay -> unchanged") {
        Tensor t({2}, {1.5, -2.5});
        t.ensure_grad();
        std::vector<ParamRef> params{{"t", &t, true}};
        SgdConfig cfg;
        cfg.weight_decay = 0.0;
        sgd_step(params, cfg, 0);
        CHECK(t[0] == 1.5);
        CHECK(t[1] == -2.5);
    }
    SUBCASE("decay skips tensors flagged off") {
        Tensor t({1}, {1.0});
        t.ensure_grad();
        std::vector<ParamRef> params{{"t", &t, false}};
        SgdConfig cfg;
        cfg.initial_lr = 0.1;
        cfg.weight_decay = 0.5;
        sgd_step(params, cfg, 0);
        CHECK(t[0] == 1.0);
    }
    SUBCASE("absent gradient is rejected") {
        Tensor t({1}, {1.0});
        std::vector<ParamRef> params{{"t", &t, true}};
        SgdConfig cfg;
        CHECK_THROWS_AS(sgd_step(params, cfg, 0), std::logic_error);
    }
}

TEST_CASE("learning rate schedule steps down at each interval") {
    SgdConfig cfg;
    cfg.initial_lr = 1e-4;
    cfg.decay_factor = 0.1;
    cfg.decay_interval = 10000;
    CHECK(learning_rate_at(cfg, 0) == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(learning_rate_at(cfg, 9999) == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(learning_rate_at(cfg, 10000) == doctest::Approx(1e-5).epsilon(1e-15));
    CHECK(learning_rate_at(cfg, 25000) == doctest::Approx(1e-6).epsilon(1e-15));
}

TEST_CASE("sgd config validation") {
    SgdConfig bad;
    bad.initial_lr = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = SgdConfig{};
    bad.decay_factor = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = SgdConfig{};
    bad.decay_interval = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("identical seeds give bitwise-identical parameter trajectories") {
    auto run = [](std::uint64_t seed) {
        Network net({1, 6, 6}, "conv:3:2,relu,flatten,dense:1", seed);
        auto params = net.params();
        SgdConfig cfg;
        cfg.initial_lr = 1e-2;
        Tensor x = random_batch({4, 1, 6, 6}, 17);
        std::vector<double> trace;
        for (int step = 0; step < 5; ++step) {
            ForwardResult fr = net.forward(x);
            Tensor pg(fr.primary.shape());
            for (long long i = 0; i < pg.numel(); ++i) pg[i] = 1.0;
            net.zero_grads();
            net.backward(pg, {});
            sgd_step(params, cfg, step);
            for (auto& p : params)
                for (long long i = 0; i < p.tensor->numel(); ++i) trace.push_back((*p.tensor)[i]);
        }
        return trace;
    };
    auto a = run(21), b = run(21), c = run(22);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "rankprox_ckpt_test.rpk1";
    fs::remove(path);

    Network net({1, 6, 6}, "conv:3:2,relu,flatten,dense:2", 41);
    auto params = net.params();
    std::vector<std::vector<double>> saved;
    for (auto& p : params) saved.push_back(p.tensor->values());
    save_checkpoint(params, path.string());

    // scramble, reload, compare bitwise
    for (auto& p : params)
        for (long long i = 0; i < p.tensor->numel(); ++i) (*p.tensor)[i] = -7.5;
    load_checkpoint(params, path.string());
    for (size_t i = 0; i < params.size(); ++i) CHECK(params[i].tensor->values() == saved[i]);

    SUBCASE("mismatched architecture is rejected") {
        Network other({1, 6, 6}, "conv:3:3,relu,flatten,dense:2", 41);
        auto oparams = other.params();
        CHECK_THROWS_AS(load_checkpoint(oparams, path.string()), DataError);
    }
    SUBCASE("corrupt magic is rejected") {
        fs::path bad = fs::temp_directory_path() / "rankprox_ckpt_bad.rpk1";
        std::FILE* f = std::fopen(bad.string().c_str(), "wb");
        std::fwrite("NOPE", 1, 4, f);
        std::fclose(f);
        CHECK_THROWS_AS(load_checkpoint(params, bad.string()), DataError);
        fs::remove(bad);
    }
    fs::remove(path);
}
