#include "rankprox/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

#include "rankprox/errors.hpp"
#include "rankprox/metrics.hpp"

namespace fs = std::filesystem;

namespace rankprox {

namespace {

const std::set<std::string> kConfigKeys = {
    "task",          "arm",           "seed",           "image_size",     "n_labeled",
    "n_pool",        "n_test",        "mean_count",     "density_sigma",  "crop_k",
    "crop_s",        "crop_r",        "crop_anchor_area", "kinds",        "levels",
    "net_spec",      "lr",            "lr_decay",       "lr_decay_interval", "weight_decay",
    "steps",         "epsilon",       "lambda",         "batch_labeled",  "ranked_groups",
    "active_pairs",  "active_cycles", "active_per_cycle", "active_warm_start", "active_steps",
    "active_initial_steps", "data_dir", "checkpoint",
};

std::vector<DistortionKind> parse_kinds(const std::string& list) {
    std::vector<DistortionKind> kinds;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            kinds.push_back(distortion_from_name(cur));
            cur.clear();
        }
    };
    for (char c : list) {
        if (c == ',')
            flush();
        else if (!std::isspace(static_cast<unsigned char>(c)))
            cur.push_back(c);
    }
    flush();
    if (kinds.empty()) throw ConfigError("distortion kind list is empty");
    return kinds;
}

std::string kinds_to_string(const std::vector<DistortionKind>& kinds) {
    std::string s;
    for (size_t i = 0; i < kinds.size(); ++i) {
        if (i) s += ",";
        s += distortion_name(kinds[i]);
    }
    return s;
}

std::string image_name(int id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "images/img_%05d.pgm", id);
    return buf;
}

std::string crop_name(long long group, int member) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "crops/g%05lld_m%d.pgm", group, member);
    return buf;
}

std::string annotation_name(int id) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "annotations/img_%05d.csv", id);
    return buf;
}

std::string split_name(int split) { return split == 0 ? "labeled" : split == 1 ? "pool" : "test"; }

// Textured grayscale reference for the quality task: a few oriented gratings
// over a smoothed noise field, normalized into mid-range so distortions stay
// visible after clamping.
Image synth_texture(int size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Image img(size, size, 1, 0.0);
    int gratings = 4;
    for (int g = 0; g < gratings; ++g) {
        double freq = 2.0 + 6.0 * unit(rng);
        double theta = 2.0 * std::numbers::pi * unit(rng);
        double phase = 2.0 * std::numbers::pi * unit(rng);
        double amp = 0.5 + 0.5 * unit(rng);
        double kx = std::cos(theta) * freq / size, ky = std::sin(theta) * freq / size;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                img.at(0, y, x) += amp * std::sin(2.0 * std::numbers::pi * (kx * x + ky * y) + phase);
    }
    Image noise(size, size, 1);
    for (double& v : noise.pix) v = unit(rng) - 0.5;
    noise = gaussian_blur(noise, 1.2);
    for (size_t i = 0; i < img.pix.size(); ++i) img.pix[i] += 6.0 * noise.pix[i];

    auto [lo, hi] = std::minmax_element(img.pix.begin(), img.pix.end());
    double span = *hi - *lo;
    if (span <= 0) span = 1.0;
    for (double& v : img.pix) v = 0.08 + 0.84 * (v - *lo) / span;
    return img;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
    cfg.ensure_known(kConfigKeys);
    ExperimentConfig e;
    e.task = cfg.get_str("task", "counting");
    if (e.task != "counting" && e.task != "quality")
        throw ConfigError("task must be 'counting' or 'quality', got '" + e.task + "'");
    e.arm = cfg.get_str("arm", "multitask");
    if (e.arm != "baseline" && e.arm != "multitask" && e.arm != "active")
        throw ConfigError("arm must be baseline, multitask, or active, got '" + e.arm + "'");
    e.seed = cfg.get_u64("seed", 1);

    bool counting = e.task == "counting";
    e.image_size = static_cast<int>(cfg.get_int("image_size", 64));
    e.n_labeled = static_cast<int>(cfg.get_int("n_labeled", counting ? 50 : 12));
    e.n_pool = static_cast<int>(cfg.get_int("n_pool", counting ? 500 : 24));
    e.n_test = static_cast<int>(cfg.get_int("n_test", counting ? 100 : 8));
    e.mean_count = cfg.get_double("mean_count", 12.0);
    e.density_sigma = cfg.get_double("density_sigma", 4.0);

    e.crops.k = static_cast<int>(cfg.get_int("crop_k", 5));
    e.crops.s = cfg.get_double("crop_s", 0.75);
    e.crops.r = cfg.get_double("crop_r", 8.0);
    e.crops.out_size = e.image_size;
    e.crops.anchor_area = cfg.get_bool("crop_anchor_area", true);

    e.kinds = parse_kinds(cfg.get_str("kinds", "awgn,gaussian_blur,impulse,jpeg"));
    e.levels = static_cast<int>(cfg.get_int("levels", 4));

    e.net_spec = cfg.get_str("net_spec", counting ? "conv:3:8,relu,pool,conv:3:12,relu,pool,conv:3:1"
                                                  : "conv:3:8,relu,pool,conv:3:12,relu,pool,flatten,dense:1");
    e.sgd.initial_lr = cfg.get_double("lr", counting ? 2e-3 : 1e-3);
    e.sgd.decay_factor = cfg.get_double("lr_decay", 0.1);
    e.sgd.decay_interval = cfg.get_int("lr_decay_interval", 8000);
    e.sgd.weight_decay = cfg.get_double("weight_decay", 5e-4);
    e.sgd.total_steps = cfg.get_int("steps", 10000);
    e.rank.epsilon = cfg.get_double("epsilon", counting ? 0.0 : 0.25);
    e.rank.lambda = cfg.get_double("lambda", counting ? 3e-4 : 2e-2);
    e.batch_labeled = static_cast<int>(cfg.get_int("batch_labeled", 25));
    e.ranked_groups_per_batch = static_cast<int>(cfg.get_int("ranked_groups", 5));

    e.active.pairs_per_image = static_cast<int>(cfg.get_int("active_pairs", 100));
    e.active.cycles = static_cast<int>(cfg.get_int("active_cycles", 9));
    e.active.per_cycle = static_cast<int>(cfg.get_int("active_per_cycle", e.n_labeled));
    e.active.warm_start = cfg.get_bool("active_warm_start", true);
    e.active_steps = static_cast<int>(cfg.get_int("active_steps", 300));
    e.active_initial_steps = static_cast<int>(cfg.get_int("active_initial_steps", 600));

    e.validate();
    return e;
}

void ExperimentConfig::validate() const {
    if (image_size <= 0) throw ConfigError("image size must be positive");
    if (n_labeled < 1 || n_pool < 0 || n_test < 2)
        throw ConfigError("dataset needs at least 1 labeled, 0 pool, and 2 test entries");
    if (mean_count < 0) throw ConfigError("mean blob count must be nonnegative");
    if (density_sigma <= 0) throw ConfigError("density kernel std must be positive");
    crops.validate();
    if (crops.out_size != image_size) throw ConfigError("crop output size must equal the network image size");
    if (levels < 2) throw ConfigError("distortion groups need at least 2 levels");
    for (DistortionKind k : kinds)
        if (levels > distortion_level_count(k))
            throw ConfigError("kind " + distortion_name(k) + " offers fewer than " + std::to_string(levels) +
                              " levels");
    sgd.validate();
    rank.validate();
    if (batch_labeled < 1) throw ConfigError("batch needs at least one labeled sample");
    if (ranked_groups_per_batch < 1) throw ConfigError("batch needs at least one ranked group");
    if (active_steps < 1 || active_initial_steps < 1)
        throw ConfigError("labeling rounds need at least one training step");
}

namespace {

Config to_config(const ExperimentConfig& e) {
    Config c;
    c.set("task", e.task);
    c.set("arm", e.arm);
    c.set("seed", std::to_string(e.seed));
    c.set("image_size", std::to_string(e.image_size));
    c.set("n_labeled", std::to_string(e.n_labeled));
    c.set("n_pool", std::to_string(e.n_pool));
    c.set("n_test", std::to_string(e.n_test));
    c.set("mean_count", format_g17(e.mean_count));
    c.set("density_sigma", format_g17(e.density_sigma));
    c.set("crop_k", std::to_string(e.crops.k));
    c.set("crop_s", format_g17(e.crops.s));
    c.set("crop_r", format_g17(e.crops.r));
    c.set("crop_anchor_area", e.crops.anchor_area ? "true" : "false");
    c.set("kinds", kinds_to_string(e.kinds));
    c.set("levels", std::to_string(e.levels));
    c.set("net_spec", e.net_spec);
    c.set("lr", format_g17(e.sgd.initial_lr));
    c.set("lr_decay", format_g17(e.sgd.decay_factor));
    c.set("lr_decay_interval", std::to_string(e.sgd.decay_interval));
    c.set("weight_decay", format_g17(e.sgd.weight_decay));
    c.set("steps", std::to_string(e.sgd.total_steps));
    c.set("epsilon", format_g17(e.rank.epsilon));
    c.set("lambda", format_g17(e.rank.lambda));
    c.set("batch_labeled", std::to_string(e.batch_labeled));
    c.set("ranked_groups", std::to_string(e.ranked_groups_per_batch));
    c.set("active_pairs", std::to_string(e.active.pairs_per_image));
    c.set("active_cycles", std::to_string(e.active.cycles));
    c.set("active_per_cycle", std::to_string(e.active.per_cycle));
    c.set("active_warm_start", e.active.warm_start ? "true" : "false");
    c.set("active_steps", std::to_string(e.active_steps));
    c.set("active_initial_steps", std::to_string(e.active_initial_steps));
    return c;
}

std::string points_csv(const std::vector<std::pair<double, double>>& pts) {
    std::string out = "x,y\n";
    for (const auto& [x, y] : pts) out += format_g17(x) + "," + format_g17(y) + "\n";
    return out;
}

}  // namespace

std::pair<long long, long long> generate_dataset(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (fs::exists(out_dir)) throw DataError("output directory already exists: " + out_dir);
    fs::path staging = out_dir + ".staging";
    fs::remove_all(staging);
    fs::create_directories(staging / "images");
    fs::create_directories(staging / "annotations");
    fs::create_directories(staging / "crops");

    std::string labels = "id,label\n";
    std::string splits = "id,split\n";
    std::string groups = "group_id,member_index,phi,image_path\n";
    long long group_count = 0, pair_count = 0;

    if (cfg.task == "counting") {
        int total = cfg.n_labeled + cfg.n_pool + cfg.n_test;
        std::vector<BlobScene> scenes;
        scenes.reserve(static_cast<size_t>(total));
        for (int id = 0; id < total; ++id) {
            BlobScene scene =
                synth_blob_scene(cfg.mean_count, cfg.image_size, derive_seed(cfg.seed, "scene", static_cast<std::uint64_t>(id)));
            save_image((staging / image_name(id)).string(), scene.image);
            write_file_atomic((staging / annotation_name(id)).string(), points_csv(scene.points));
            labels += std::to_string(id) + "," + format_g17(scene.count()) + "\n";
            int split = id < cfg.n_labeled ? 0 : id < cfg.n_labeled + cfg.n_pool ? 1 : 2;
            splits += std::to_string(id) + "," + split_name(split) + "\n";
            scenes.push_back(std::move(scene));
        }
        // ranked crops from the unlabeled pool
        for (int id = cfg.n_labeled; id < cfg.n_labeled + cfg.n_pool; ++id) {
            CropSet cs = generate_ranked_crops(scenes[static_cast<size_t>(id)].image, cfg.crops,
                                               derive_seed(cfg.seed, "crops", static_cast<std::uint64_t>(id)));
            for (size_t m = 0; m < cs.group.members.size(); ++m) {
                std::string rel = crop_name(group_count, static_cast<int>(m));
                save_image((staging / rel).string(), cs.group.members[m]);
                groups += std::to_string(group_count) + "," + std::to_string(m) + "," + format_g17(cs.group.phi[m]) +
                          "," + rel + "\n";
            }
            pair_count += comparable_pair_count(cs.group);
            ++group_count;
        }
    } else {
        int total_refs = cfg.n_labeled + cfg.n_pool + cfg.n_test;
        int next_id = 0;
        for (int ref = 0; ref < total_refs; ++ref) {
            Image texture = synth_texture(cfg.image_size, derive_seed(cfg.seed, "reference", static_cast<std::uint64_t>(ref)));
            int split = ref < cfg.n_labeled ? 0 : ref < cfg.n_labeled + cfg.n_pool ? 1 : 2;
            for (size_t k = 0; k < cfg.kinds.size(); ++k) {
                RankedGroup g = build_distortion_group(
                    texture, cfg.kinds[k], cfg.levels,
                    derive_seed(cfg.seed, "group", static_cast<std::uint64_t>(ref) * cfg.kinds.size() + k));
                for (size_t m = 0; m < g.members.size(); ++m) {
                    int id = next_id++;
                    std::string rel = image_name(id);
                    save_image((staging / rel).string(), g.members[m]);
                    labels += std::to_string(id) + "," + format_g17(g.phi[m]) + "\n";
                    splits += std::to_string(id) + "," + split_name(split) + "\n";
                    groups += std::to_string(group_count) + "," + std::to_string(m) + "," + format_g17(g.phi[m]) +
                              "," + rel + "\n";
                }
                pair_count += comparable_pair_count(g);
                ++group_count;
            }
        }
    }

    write_file_atomic((staging / "labels.csv").string(), labels);
    write_file_atomic((staging / "splits.csv").string(), splits);
    write_file_atomic((staging / "groups.csv").string(), groups);
    write_file_atomic((staging / "dataset_config.txt").string(), to_config(cfg).serialize());
    fs::rename(staging, out_dir);
    return {group_count, pair_count};
}

Dataset load_dataset(const std::string& dir) {
    fs::path root(dir);
    if (!fs::exists(root / "dataset_config.txt")) throw DataError("not a dataset directory: " + dir);
    Config meta = Config::from_file((root / "dataset_config.txt").string());
    Dataset ds;
    ds.task = meta.require_str("task");
    ds.image_size = static_cast<int>(meta.get_int("image_size", 64));

    auto label_rows = read_csv((root / "labels.csv").string(), 2);
    auto split_rows = read_csv((root / "splits.csv").string(), 2);
    if (label_rows.size() != split_rows.size() || label_rows.size() < 2)
        throw DataError("labels.csv and splits.csv disagree in " + dir);

    int n = static_cast<int>(label_rows.size()) - 1;  // header row
    ds.images.resize(static_cast<size_t>(n));
    ds.labels.resize(static_cast<size_t>(n));
    ds.points.resize(static_cast<size_t>(n));
    for (int i = 1; i <= n; ++i) {
        int id = std::stoi(label_rows[static_cast<size_t>(i)][0]);
        if (id < 0 || id >= n) throw DataError("label id out of range in " + dir);
        ds.labels[static_cast<size_t>(id)] = std::stod(label_rows[static_cast<size_t>(i)][1]);
        ds.images[static_cast<size_t>(id)] = load_image((root / image_name(id)).string());
        const std::string& split = split_rows[static_cast<size_t>(i)][1];
        int sid = std::stoi(split_rows[static_cast<size_t>(i)][0]);
        if (split == "labeled")
            ds.labeled.push_back(sid);
        else if (split == "pool")
            ds.pool.push_back(sid);
        else if (split == "test")
            ds.test.push_back(sid);
        else
            throw DataError("unknown split '" + split + "' in " + dir);

        if (ds.task == "counting") {
            auto rows = read_csv((root / annotation_name(id)).string(), 2);
            for (size_t r = 1; r < rows.size(); ++r)
                ds.points[static_cast<size_t>(id)].emplace_back(std::stod(rows[r][0]), std::stod(rows[r][1]));
        }
    }
    std::sort(ds.labeled.begin(), ds.labeled.end());
    std::sort(ds.pool.begin(), ds.pool.end());
    std::sort(ds.test.begin(), ds.test.end());

    auto group_rows = read_csv((root / "groups.csv").string(), 4);
    std::set<int> test_ids(ds.test.begin(), ds.test.end());
    for (size_t r = 1; r < group_rows.size(); ++r) {
        long long gid = std::stoll(group_rows[r][0]);
        int member = std::stoi(group_rows[r][1]);
        double phi = std::stod(group_rows[r][2]);
        const std::string& rel = group_rows[r][3];
        if (gid != static_cast<long long>(ds.groups.size()) - 1 || member == 0) {
            if (gid != static_cast<long long>(ds.groups.size()))
                throw DataError("groups.csv rows out of order in " + dir);
            ds.groups.emplace_back();
            ds.groups.back().source_id = static_cast<int>(gid);
            ds.group_split.push_back(0);
        }
        RankedGroup& g = ds.groups.back();
        if (member != static_cast<int>(g.members.size()))
            throw DataError("groups.csv member indices out of order in " + dir);
        g.members.push_back(load_image((root / rel).string()));
        g.phi.push_back(phi);
        // members under images/ map back to dataset ids; their split decides
        // whether the group may be used for training
        if (rel.rfind("images/", 0) == 0) {
            int id = std::stoi(rel.substr(rel.size() - 9, 5));
            if (test_ids.count(id)) ds.group_split.back() = 1;
        }
    }
    return ds;
}

Tensor counting_target(const Dataset& ds, int id, double sigma, int out_h, int out_w) {
    if (ds.task != "counting") throw std::logic_error("density targets exist only for the counting task");
    if (ds.image_size % out_h != 0 || ds.image_size % out_w != 0 || ds.image_size / out_h != ds.image_size / out_w)
        throw ConfigError("network output " + std::to_string(out_h) + "x" + std::to_string(out_w) +
                          " does not evenly divide the image size " + std::to_string(ds.image_size));
    BlobScene scene;
    scene.image = ds.images[static_cast<size_t>(id)];
    scene.points = ds.points[static_cast<size_t>(id)];
    return downsample_sum(density_target(scene, sigma), ds.image_size / out_h);
}

namespace {

// Samples training minibatches: labeled images with targets, plus whole
// ranked groups when the ranking term is active.
class BatchAssembler {
public:
    BatchAssembler(const ExperimentConfig& cfg, const Dataset& ds, std::vector<int> labeled_ids, double lambda,
                   const std::vector<int>& out_shape)
        : cfg_(cfg), ds_(ds), labeled_ids_(std::move(labeled_ids)), lambda_(lambda) {
        if (labeled_ids_.empty()) throw DataError("training needs a nonempty labeled set");
        if (lambda_ > 0) {
            for (size_t g = 0; g < ds.groups.size(); ++g)
                if (ds.group_split[g] == 0) train_groups_.push_back(static_cast<int>(g));
            if (train_groups_.empty()) throw DataError("the ranking term needs at least one train-side ranked group");
        }
        if (ds.task == "counting") {
            out_h_ = out_shape.at(1);
            out_w_ = out_shape.at(2);
        }
    }

    const Tensor& target_for(int id) {
        auto it = target_cache_.find(id);
        if (it != target_cache_.end()) return it->second;
        Tensor t = ds_.task == "counting" ? counting_target(ds_, id, cfg_.density_sigma, out_h_, out_w_)
                                          : Tensor({1}, {ds_.labels[static_cast<size_t>(id)]});
        return target_cache_.emplace(id, std::move(t)).first->second;
    }

    MiniBatch make(std::uint64_t step_seed) {
        std::mt19937_64 rng(step_seed);
        std::uniform_int_distribution<size_t> pick_labeled(0, labeled_ids_.size() - 1);
        std::vector<int> ids;
        for (int i = 0; i < cfg_.batch_labeled; ++i) ids.push_back(labeled_ids_[pick_labeled(rng)]);

        std::vector<const RankedGroup*> picked;
        if (lambda_ > 0) {
            std::uniform_int_distribution<size_t> pick_group(0, train_groups_.size() - 1);
            for (int g = 0; g < cfg_.ranked_groups_per_batch; ++g)
                picked.push_back(&ds_.groups[static_cast<size_t>(train_groups_[pick_group(rng)])]);
        }

        int ranked_members = 0;
        for (const RankedGroup* g : picked) ranked_members += static_cast<int>(g->members.size());
        int m = cfg_.batch_labeled + ranked_members;

        MiniBatch batch;
        batch.images = Tensor({m, 1, ds_.image_size, ds_.image_size});
        batch.targets.resize(static_cast<size_t>(m));
        batch.group_ids.assign(static_cast<size_t>(m), -1);
        std::vector<double> phi(static_cast<size_t>(m), 0.0);

        long long per = static_cast<long long>(ds_.image_size) * ds_.image_size;
        int slot = 0;
        for (int id : ids) {
            const Image& img = ds_.images[static_cast<size_t>(id)];
            std::copy(img.pix.begin(), img.pix.end(), batch.images.data() + slot * per);
            batch.targets[static_cast<size_t>(slot)] = target_for(id);
            ++slot;
        }
        int group_tag = 0;
        for (const RankedGroup* g : picked) {
            for (size_t mm = 0; mm < g->members.size(); ++mm) {
                std::copy(g->members[mm].pix.begin(), g->members[mm].pix.end(), batch.images.data() + slot * per);
                batch.group_ids[static_cast<size_t>(slot)] = group_tag;
                phi[static_cast<size_t>(slot)] = g->phi[mm];
                ++slot;
            }
            ++group_tag;
        }
        batch.labels = ComparabilityLabels::from_groups(batch.group_ids, phi);
        return batch;
    }

private:
    const ExperimentConfig& cfg_;
    const Dataset& ds_;
    std::vector<int> labeled_ids_;
    double lambda_;
    std::vector<int> train_groups_;
    int out_h_ = 0, out_w_ = 0;
    std::map<int, Tensor> target_cache_;
};

}  // namespace

TrainResult train_arm(const ExperimentConfig& cfg, const Dataset& ds) {
    double lambda = cfg.arm == "baseline" ? 0.0 : cfg.rank.lambda;
    Network net(cfg.input_shape(), cfg.net_spec, derive_seed(cfg.seed, "net-init"));
    BatchAssembler assembler(cfg, ds, ds.labeled, lambda, net.output_shape());
    RankingConfig rank{cfg.rank.epsilon, lambda};
    auto params = net.params();

    TrainResult result{std::move(net), {}};
    result.log.reserve(static_cast<size_t>(cfg.sgd.total_steps));
    for (long long step = 0; step < cfg.sgd.total_steps; ++step) {
        MiniBatch batch = assembler.make(derive_seed(cfg.seed, "batch", static_cast<std::uint64_t>(step)));
        MultitaskResult r = multitask_loss(result.net, batch, rank);
        if (!std::isfinite(r.loss))
            throw NumericError("training loss became non-finite at step " + std::to_string(step));
        sgd_step(params, cfg.sgd, step);
        result.log.push_back({step, r.loss_reg, r.loss_rank, r.loss, r.active_pairs});
    }
    return result;
}

EvalResult evaluate_split(Network& net, const Dataset& ds, const std::vector<int>& ids) {
    if (ids.size() < 2) throw DataError("evaluation needs at least 2 samples");
    EvalResult r;
    long long per = static_cast<long long>(ds.image_size) * ds.image_size;
    const int chunk = 25;
    for (size_t at = 0; at < ids.size(); at += chunk) {
        size_t n = std::min(ids.size() - at, static_cast<size_t>(chunk));
        Tensor batch({static_cast<int>(n), 1, ds.image_size, ds.image_size});
        for (size_t i = 0; i < n; ++i) {
            const Image& img = ds.images[static_cast<size_t>(ids[at + i])];
            std::copy(img.pix.begin(), img.pix.end(), batch.data() + static_cast<long long>(i) * per);
        }
        ForwardResult fr = net.forward(batch);
        for (size_t i = 0; i < n; ++i) {
            r.truth.push_back(ds.labels[static_cast<size_t>(ids[at + i])]);
            r.predictions.push_back(fr.rank[i]);
        }
    }
    ErrorStats es = mae_mse(r.truth, r.predictions);
    r.mae = es.mae;
    r.mse = es.mse;
    r.lcc = lcc(r.truth, r.predictions);
    r.srocc = srocc(r.truth, r.predictions);
    return r;
}

GroupSampler make_proxy_sampler(const ExperimentConfig& cfg, const Dataset& ds, int id) {
    const Image& img = ds.images.at(static_cast<size_t>(id));
    if (cfg.task == "counting") {
        CropGenConfig crops = cfg.crops;
        return [crops, &img](std::uint64_t seed) { return generate_ranked_crops(img, crops, seed).group; };
    }
    std::vector<DistortionKind> kinds = cfg.kinds;
    int levels = cfg.levels;
    return [kinds, levels, &img](std::uint64_t seed) {
        DistortionKind kind = kinds[derive_seed(seed, "proxy-kind") % kinds.size()];
        return build_distortion_group(img, kind, levels, seed);
    };
}

std::vector<ActiveCycleRecord> run_active_arm(const ExperimentConfig& cfg, const Dataset& ds,
                                              SelectionPolicy policy) {
    double lambda = cfg.rank.lambda;
    Network net(cfg.input_shape(), cfg.net_spec, derive_seed(cfg.seed, "net-init"));
    RankingConfig rank{cfg.rank.epsilon, lambda};
    auto params = net.params();
    long long global_step = 0;

    // The labeling unit is one source item: a scene for counting, a pristine
    // reference for quality (scoring probes fresh distortions of the
    // reference; selecting it labels every stored variant at once).
    int unit = ds.task == "quality" ? static_cast<int>(cfg.kinds.size()) * (cfg.levels + 1) : 1;
    auto to_units = [unit](const std::vector<int>& image_ids) {
        std::vector<int> out;
        for (int id : image_ids)
            if (out.empty() || out.back() != id / unit) out.push_back(id / unit);
        return out;
    };
    auto to_images = [unit](const std::vector<int>& unit_ids) {
        std::vector<int> out;
        for (int u : unit_ids)
            for (int m = 0; m < unit; ++m) out.push_back(u * unit + m);
        return out;
    };

    ActiveHooks hooks;
    hooks.train = [&](const std::vector<int>& labeled_units, int round) {
        if (!cfg.active.warm_start && round > 0) {
            net = Network(cfg.input_shape(), cfg.net_spec, derive_seed(cfg.seed, "net-init"));
            params = net.params();
            global_step = 0;
        }
        BatchAssembler assembler(cfg, ds, to_images(labeled_units), lambda, net.output_shape());
        long long steps = round == 0 ? cfg.active_initial_steps : cfg.active_steps;
        for (long long s = 0; s < steps; ++s, ++global_step) {
            MiniBatch batch =
                assembler.make(derive_seed(cfg.seed, "active-batch", static_cast<std::uint64_t>(global_step)));
            MultitaskResult r = multitask_loss(net, batch, rank);
            if (!std::isfinite(r.loss))
                throw NumericError("training loss became non-finite in labeling round " + std::to_string(round));
            sgd_step(params, cfg.sgd, global_step);
        }
    };
    hooks.score = [&](int unit_id, std::uint64_t seed) {
        return certainty(net, make_proxy_sampler(cfg, ds, unit_id * unit), cfg.active.pairs_per_image, seed);
    };
    hooks.evaluate = [&]() -> std::array<double, 4> {
        EvalResult r = evaluate_split(net, ds, ds.test);
        return {r.mae, r.mse, r.lcc, r.srocc};
    };

    ActiveConfig ac = cfg.active;
    ac.policy = policy;
    return run_active_loop(to_units(ds.labeled), to_units(ds.pool), ac, hooks,
                           derive_seed(cfg.seed, "active-loop"));
}

std::string train_log_csv(const std::vector<StepLog>& log) {
    std::string out = "step,loss_reg,loss_rank,loss,active_pair_count\n";
    for (const StepLog& l : log)
        out += std::to_string(l.step) + "," + format_g17(l.loss_reg) + "," + format_g17(l.loss_rank) + "," +
               format_g17(l.loss) + "," + std::to_string(l.active_pairs) + "\n";
    return out;
}

std::string eval_csv(const EvalResult& r) {
    return "mae,mse,lcc,srocc\n" + format_g17(r.mae) + "," + format_g17(r.mse) + "," + format_g17(r.lcc) + "," +
           format_g17(r.srocc) + "\n";
}

std::string predictions_csv(const std::vector<int>& ids, const EvalResult& r) {
    std::string out = "id,truth,prediction\n";
    for (size_t i = 0; i < ids.size(); ++i)
        out += std::to_string(ids[i]) + "," + format_g17(r.truth[i]) + "," + format_g17(r.predictions[i]) + "\n";
    return out;
}

std::string active_csv(const std::vector<std::pair<std::string, std::vector<ActiveCycleRecord>>>& arms) {
    std::string out = "cycle,labeled_fraction,policy,mae,mse,lcc,srocc,mean_certainty\n";
    for (const auto& [policy, records] : arms)
        for (const ActiveCycleRecord& r : records)
            out += std::to_string(r.round) + "," + format_g17(r.labeled_fraction) + "," + policy + "," +
                   format_g17(r.mae) + "," + format_g17(r.mse) + "," + format_g17(r.lcc) + "," + format_g17(r.srocc) +
                   "," + format_g17(r.mean_certainty) + "\n";
    return out;
}

}  // namespace rankprox
