#include "rankprox/active.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rankprox/errors.hpp"
#include "rankprox/image.hpp"

namespace rankprox {

std::string policy_name(SelectionPolicy policy) {
    return policy == SelectionPolicy::certainty ? "certainty" : "random";
}

SelectionPolicy policy_from_name(const std::string& name) {
    if (name == "certainty") return SelectionPolicy::certainty;
    if (name == "random") return SelectionPolicy::random;
    throw ConfigError("unknown selection policy '" + name + "'");
}

void ActiveConfig::validate(int pool_size) const {
    if (pairs_per_image < 1) throw ConfigError("certainty needs at least one sampled pair per image");
    if (cycles < 1) throw ConfigError("the labeling loop needs at least one cycle");
    if (per_cycle < 1) throw ConfigError("each cycle must label at least one image");
    if (static_cast<long long>(cycles) * per_cycle > pool_size)
        throw DataError("pool of " + std::to_string(pool_size) + " images cannot sustain " + std::to_string(cycles) +
                        " cycles of " + std::to_string(per_cycle) + " labels");
}

CertaintyDetail certainty_detail(Network& net, const GroupSampler& sampler, int pairs, std::uint64_t seed) {
    if (pairs < 1) throw std::invalid_argument("certainty needs at least one pair");
    CertaintyDetail out;
    std::vector<std::pair<double, double>> pool;
    int barren = 0;
    std::uint64_t group_index = 0;
    while (static_cast<int>(pool.size()) < pairs) {
        RankedGroup g = sampler(derive_seed(seed, "proxy-group", group_index++));
        size_t before = pool.size();
        if (!g.members.empty()) {
            std::vector<int> shape = to_tensor(g.members[0]).shape();
            shape.insert(shape.begin(), static_cast<int>(g.members.size()));
            Tensor batch(shape);
            long long per = batch.numel() / static_cast<long long>(g.members.size());
            for (size_t i = 0; i < g.members.size(); ++i) {
                Tensor t = to_tensor(g.members[i]);
                std::copy(t.data(), t.data() + per, batch.data() + static_cast<long long>(i) * per);
            }
            ForwardResult fr = net.forward(batch);
            for (size_t i = 0; i < g.members.size(); ++i)
                for (size_t j = i + 1; j < g.members.size(); ++j) {
                    if (g.phi[i] == g.phi[j]) continue;
                    double lo = g.phi[i] < g.phi[j] ? fr.rank[i] : fr.rank[j];
                    double hi = g.phi[i] < g.phi[j] ? fr.rank[j] : fr.rank[i];
                    pool.emplace_back(lo, hi);
                }
        }
        if (pool.size() == before) {
            if (++barren >= 8)
                throw DataError("pair sampler produced no comparable pairs after " + std::to_string(barren) +
                                " attempts");
        } else {
            barren = 0;
        }
    }

    // uniform draw of exactly `pairs` comparisons from the pooled set
    std::vector<size_t> order(pool.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 rng(derive_seed(seed, "proxy-choice"));
    std::shuffle(order.begin(), order.end(), rng);
    int correct = 0;
    for (int k = 0; k < pairs; ++k) {
        const auto& p = pool[order[static_cast<size_t>(k)]];
        out.comparisons.push_back(p);
        if (p.first < p.second) ++correct;
    }
    out.value = static_cast<double>(correct) / pairs;
    return out;
}

double certainty(Network& net, const GroupSampler& sampler, int pairs, std::uint64_t seed) {
    return certainty_detail(net, sampler, pairs, seed).value;
}

std::vector<int> select_lowest(std::vector<std::pair<int, double>> scored, int s) {
    if (s < 0 || s > static_cast<int>(scored.size()))
        throw std::invalid_argument("selection size out of range");
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    std::vector<int> ids;
    ids.reserve(static_cast<size_t>(s));
    for (int i = 0; i < s; ++i) ids.push_back(scored[static_cast<size_t>(i)].first);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<ActiveCycleRecord> run_active_loop(std::vector<int> labeled_ids, std::vector<int> pool_ids,
                                               const ActiveConfig& cfg, const ActiveHooks& hooks,
                                               std::uint64_t seed) {
    cfg.validate(static_cast<int>(pool_ids.size()));
    if (labeled_ids.empty()) throw DataError("the labeling loop needs a nonempty initial labeled set");
    double total = static_cast<double>(labeled_ids.size() + pool_ids.size());

    std::vector<ActiveCycleRecord> history;
    for (int round = 0; round <= cfg.cycles; ++round) {
        hooks.train(labeled_ids, round);
        ActiveCycleRecord rec;
        rec.round = round;
        rec.labeled_fraction = static_cast<double>(labeled_ids.size()) / total;
        auto m = hooks.evaluate();
        rec.mae = m[0];
        rec.mse = m[1];
        rec.lcc = m[2];
        rec.srocc = m[3];
        rec.mean_certainty = std::numeric_limits<double>::quiet_NaN();

        if (round < cfg.cycles) {
            std::vector<std::pair<int, double>> scored;
            scored.reserve(pool_ids.size());
            double sum = 0.0;
            for (int id : pool_ids) {
                double c = hooks.score(id, derive_seed(seed, "score-round-" + std::to_string(round),
                                                       static_cast<std::uint64_t>(id)));
                scored.emplace_back(id, c);
                sum += c;
            }
            rec.mean_certainty = scored.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                : sum / static_cast<double>(scored.size());

            std::vector<int> picked;
            if (cfg.policy == SelectionPolicy::certainty) {
                picked = select_lowest(scored, cfg.per_cycle);
            } else {
                std::vector<int> shuffled = pool_ids;
                std::mt19937_64 rng(derive_seed(seed, "random-select", static_cast<std::uint64_t>(round)));
                std::shuffle(shuffled.begin(), shuffled.end(), rng);
                picked.assign(shuffled.begin(), shuffled.begin() + cfg.per_cycle);
                std::sort(picked.begin(), picked.end());
            }
            for (int id : picked) {
                labeled_ids.push_back(id);
                pool_ids.erase(std::find(pool_ids.begin(), pool_ids.end(), id));
            }
        }
        history.push_back(rec);
    }
    return history;
}

}  // namespace rankprox
