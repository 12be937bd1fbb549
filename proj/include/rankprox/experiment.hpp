#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rankprox/active.hpp"
#include "rankprox/crops.hpp"
#include "rankprox/distortions.hpp"
#include "rankprox/io.hpp"
#include "rankprox/losses.hpp"
#include "rankprox/network.hpp"

namespace rankprox {

// One experiment run, fully determined by (config file, seed). Defaults are
// sized for minutes-level CPU runs on 64x64 synthetic data.
struct ExperimentConfig {
    std::string task = "counting";  // counting | quality
    std::string arm = "multitask";  // baseline | multitask | active
    std::uint64_t seed = 1;

    // dataset geometry; for the quality task the labeled/pool/test counts
    // are in references, each reference spawning one group per kind
    int image_size = 64;
    int n_labeled = 50;
    int n_pool = 500;
    int n_test = 100;
    double mean_count = 12.0;    // counting: Poisson mean of blobs per scene
    double density_sigma = 4.0;  // counting: target kernel std, pixels
    CropGenConfig crops;
    std::vector<DistortionKind> kinds;  // quality distortion set
    int levels = 4;

    // model and optimization
    std::string net_spec;
    SgdConfig sgd;
    RankingConfig rank;
    int batch_labeled = 25;
    int ranked_groups_per_batch = 5;

    // labeling loop
    ActiveConfig active;
    int active_steps = 300;          // training steps per labeling round
    int active_initial_steps = 600;  // extra budget for the first round

    static ExperimentConfig from_config(const Config& cfg);
    void validate() const;
    std::vector<int> input_shape() const { return {1, image_size, image_size}; }
};

// A generated dataset held in memory. Image ids index `images`; every id has
// a label in the oracle store and a split assignment.
struct Dataset {
    std::string task;
    int image_size = 0;
    std::vector<Image> images;
    std::vector<double> labels;  // exact count (counting) / quality score (quality)
    std::vector<std::vector<std::pair<double, double>>> points;  // counting annotations
    std::vector<int> labeled, pool, test;
    std::vector<RankedGroup> groups;       // pregenerated ranked groups
    std::vector<int> group_split;          // split of each group's members: 0 train-side, 1 test

    int size() const { return static_cast<int>(images.size()); }
};

// Writes images, manifests, oracle labels, and split assignments under
// out_dir (which must not exist yet). Returns the generated group and
// comparable-pair counts.
std::pair<long long, long long> generate_dataset(const ExperimentConfig& cfg, const std::string& out_dir);

Dataset load_dataset(const std::string& dir);

// Density target for one counting image at the network's output resolution.
Tensor counting_target(const Dataset& ds, int id, double sigma, int out_h, int out_w);

struct StepLog {
    long long step = 0;
    double loss_reg = 0.0, loss_rank = 0.0, loss = 0.0;
    long long active_pairs = 0;
};

struct TrainResult {
    Network net;
    std::vector<StepLog> log;
};

// Trains the configured arm on a loaded dataset. The baseline arm runs with
// lambda = 0 and consumes no ranked groups; the multitask arm mixes
// batch_labeled labeled images with ranked_groups_per_batch groups per step.
TrainResult train_arm(const ExperimentConfig& cfg, const Dataset& ds);

struct EvalResult {
    double mae = 0.0, mse = 0.0, lcc = 0.0, srocc = 0.0;
    std::vector<double> truth, predictions;  // ordered by id
};

EvalResult evaluate_split(Network& net, const Dataset& ds, const std::vector<int>& ids);

// Certainty proxy sampler for one dataset image (fresh crops or fresh
// distortion groups depending on the task).
GroupSampler make_proxy_sampler(const ExperimentConfig& cfg, const Dataset& ds, int id);

// Runs the labeling loop for one policy. Training is regression-or-multitask
// per the config; both policies share every code path except selection.
std::vector<ActiveCycleRecord> run_active_arm(const ExperimentConfig& cfg, const Dataset& ds,
                                              SelectionPolicy policy);

// CSV renderers (deterministic bytes; %.17g floats).
std::string train_log_csv(const std::vector<StepLog>& log);
std::string eval_csv(const EvalResult& r);
std::string predictions_csv(const std::vector<int>& ids, const EvalResult& r);
std::string active_csv(const std::vector<std::pair<std::string, std::vector<ActiveCycleRecord>>>& arms);

}  // namespace rankprox
