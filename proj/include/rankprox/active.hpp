#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rankprox/network.hpp"
#include "rankprox/ranked_group.hpp"

namespace rankprox {

enum class SelectionPolicy { certainty, random };

std::string policy_name(SelectionPolicy policy);
SelectionPolicy policy_from_name(const std::string& name);

struct ActiveConfig {
    int pairs_per_image = 100;  // K: proxy comparisons per pool image
    int cycles = 9;             // T: labeling rounds
    int per_cycle = 10;         // S: images moved per round
    SelectionPolicy policy = SelectionPolicy::certainty;
    bool warm_start = true;     // reuse the previous round's parameters

    void validate(int pool_size) const;
};

// Produces a fresh ranked group (for the certainty proxy) from the given seed.
using GroupSampler = std::function<RankedGroup(std::uint64_t seed)>;

struct CertaintyDetail {
    double value = 0.0;
    // sampled comparisons as (score of lower-ranked member, score of higher-
    // ranked member); the value is the fraction with first < second
    std::vector<std::pair<double, double>> comparisons;
};

// Certainty of the network on one image: sample K comparable ordered pairs
// uniformly from freshly generated ranked groups and count how many the
// network orders strictly correctly, divided by K. Equal scores count as
// incorrect, so a constant predictor scores 0.
CertaintyDetail certainty_detail(Network& net, const GroupSampler& sampler, int pairs, std::uint64_t seed);
double certainty(Network& net, const GroupSampler& sampler, int pairs, std::uint64_t seed);

// Ids of the s lowest-scored images; ties broken by ascending id. The result
// is sorted by id.
std::vector<int> select_lowest(std::vector<std::pair<int, double>> scored, int s);

struct ActiveCycleRecord {
    int round = 0;  // 0 = training on the initial labeled set
    double labeled_fraction = 0.0;
    double mae = 0.0;
    double mse = 0.0;
    double lcc = 0.0;
    double srocc = 0.0;
    double mean_certainty = 0.0;  // over the pool scored this round; NaN on the final round
};

struct ActiveHooks {
    // train on the current labeled set; round index provided for seeding
    std::function<void(const std::vector<int>& labeled_ids, int round)> train;
    // certainty score of one pool image under the current model
    std::function<double(int image_id, std::uint64_t seed)> score;
    // test metrics of the current model: {mae, mse, lcc, srocc}
    std::function<std::array<double, 4>()> evaluate;
};

// The labeling loop: T+1 rounds of training and evaluation with a selection
// step after each of the first T. Labels are only ever moved from the pool,
// never invented; the certainty and random policies differ in the selection
// step alone.
std::vector<ActiveCycleRecord> run_active_loop(std::vector<int> labeled_ids, std::vector<int> pool_ids,
                                               const ActiveConfig& cfg, const ActiveHooks& hooks,
                                               std::uint64_t seed);

}  // namespace rankprox
