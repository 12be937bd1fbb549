#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "rankprox/errors.hpp"
#include "rankprox/experiment.hpp"
#include "rankprox/metrics.hpp"

using namespace rankprox;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

// Desk-scale counting setup: 16x16 scenes, a three-layer net with an 8x8
// density output, and single-digit step counts.
Config tiny_counting() {
    return Config::from_string(
        "task=counting\n"
        "seed=5\n"
        "image_size=16\n"
        "n_labeled=3\n"
        "n_pool=4\n"
        "n_test=3\n"
        "mean_count=5\n"
        "crop_k=3\n"
        "net_spec=conv:3:2,relu,pool,conv:3:1\n"
        "steps=5\n"
        "batch_labeled=4\n"
        "ranked_groups=1\n");
}

Config tiny_quality() {
    return Config::from_string(
        "task=quality\n"
        "seed=6\n"
        "image_size=16\n"
        "n_labeled=2\n"
        "n_pool=2\n"
        "n_test=2\n"
        "kinds=awgn,jpeg\n"
        "levels=3\n"
        "net_spec=conv:3:2,relu,pool,flatten,dense:1\n"
        "steps=5\n"
        "batch_labeled=4\n"
        "ranked_groups=1\n");
}

}  // namespace

TEST_CASE("config defaults are sized per task") {
    ExperimentConfig c = ExperimentConfig::from_config(Config::from_string("task=counting\n"));
    CHECK(c.net_spec == "conv:3:8,relu,pool,conv:3:12,relu,pool,conv:3:1");
    CHECK(c.sgd.initial_lr == 2e-3);
    CHECK(c.rank.epsilon == 0.0);
    CHECK(c.rank.lambda == 3e-4);
    CHECK(c.n_pool == 500);
    CHECK(c.crops.out_size == c.image_size);
    CHECK(c.active.per_cycle == c.n_labeled);

    ExperimentConfig q = ExperimentConfig::from_config(Config::from_string("task=quality\n"));
    CHECK(q.net_spec == "conv:3:8,relu,pool,conv:3:12,relu,pool,flatten,dense:1");
    CHECK(q.sgd.initial_lr == 1e-3);
    CHECK(q.rank.epsilon == 0.25);
    CHECK(q.rank.lambda == 2e-2);
    REQUIRE(q.kinds.size() == 4);
    CHECK(q.kinds[0] == DistortionKind::awgn);
    CHECK(q.kinds[1] == DistortionKind::gaussian_blur);
    CHECK(q.kinds[2] == DistortionKind::impulse);
    CHECK(q.kinds[3] == DistortionKind::jpeg);
}

TEST_CASE("config rejects unknown keys and bad values") {
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_string("tusk=counting\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_string("task=segmentation\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_string("arm=ensemble\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_string("kinds=sharpen\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_string("levels=9\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_string("crop_s=1.5\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_string("n_test=1\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_config(Config::from_string("lr=-1\n")), ConfigError);
}

TEST_CASE("counting datasets round-trip through the filesystem") {
    ExperimentConfig cfg = ExperimentConfig::from_config(tiny_counting());
    TempDir dir("rankprox_exp_counting");
    auto [group_count, pair_count] = generate_dataset(cfg, dir.str());
    CHECK(group_count == 4);       // one crop group per pool scene
    CHECK(pair_count == 4 * 3);    // k=3 nested crops, all phi distinct
    CHECK_THROWS_AS(generate_dataset(cfg, dir.str()), DataError);

    Dataset ds = load_dataset(dir.str());
    CHECK(ds.task == "counting");
    CHECK(ds.image_size == 16);
    CHECK(ds.size() == 10);
    CHECK(ds.labeled == std::vector<int>{0, 1, 2});
    CHECK(ds.pool == std::vector<int>{3, 4, 5, 6});
    CHECK(ds.test == std::vector<int>{7, 8, 9});
    REQUIRE(ds.groups.size() == 4);
    for (size_t g = 0; g < ds.groups.size(); ++g) {
        CHECK(ds.group_split[g] == 0);  // crops never touch the test split
        REQUIRE(ds.groups[g].members.size() == 3);
        CHECK(ds.groups[g].phi[0] > ds.groups[g].phi[1]);
        CHECK(ds.groups[g].phi[1] > ds.groups[g].phi[2]);
    }
    for (int id = 0; id < ds.size(); ++id) {
        CHECK(ds.labels[static_cast<size_t>(id)] == static_cast<double>(ds.points[static_cast<size_t>(id)].size()));
        CHECK(ds.images[static_cast<size_t>(id)].width == 16);
    }

    // regeneration reproduces the images bit for bit
    TempDir dir2("rankprox_exp_counting2");
    generate_dataset(cfg, dir2.str());
    Dataset ds2 = load_dataset(dir2.str());
    for (int id = 0; id < ds.size(); ++id)
        CHECK(ds.images[static_cast<size_t>(id)].pix == ds2.images[static_cast<size_t>(id)].pix);

    CHECK_THROWS_AS(load_dataset((fs::temp_directory_path() / "rankprox_not_a_dataset").string()), DataError);
}

TEST_CASE("quality datasets mark test-reference groups as held out") {
    ExperimentConfig cfg = ExperimentConfig::from_config(tiny_quality());
    TempDir dir("rankprox_exp_quality");
    auto [group_count, pair_count] = generate_dataset(cfg, dir.str());
    CHECK(group_count == 6 * 2);       // references times kinds
    CHECK(pair_count == 12 * 6);       // 4 members per group, all phi distinct

    Dataset ds = load_dataset(dir.str());
    CHECK(ds.size() == 6 * 2 * 4);     // refs x kinds x (reference + 3 levels)
    CHECK(ds.labeled.size() == 2 * 2 * 4);
    CHECK(ds.pool.size() == 2 * 2 * 4);
    CHECK(ds.test.size() == 2 * 2 * 4);
    REQUIRE(ds.groups.size() == 12);
    int held_out = 0;
    for (int s : ds.group_split) held_out += s;
    CHECK(held_out == 4);              // the two test references, two kinds each

    // member labels are the construction ranks
    std::set<int> test_ids(ds.test.begin(), ds.test.end());
    for (const RankedGroup& g : ds.groups) {
        REQUIRE(g.members.size() == 4);
        for (size_t m = 0; m < g.phi.size(); ++m) CHECK(g.phi[m] == -static_cast<double>(m));
    }
    for (int id : ds.test) CHECK(ds.labels[static_cast<size_t>(id)] <= 0.0);
}

TEST_CASE("density targets downsample to the network grid without losing mass") {
    ExperimentConfig cfg = ExperimentConfig::from_config(tiny_counting());
    TempDir dir("rankprox_exp_target");
    generate_dataset(cfg, dir.str());
    Dataset ds = load_dataset(dir.str());

    Tensor full = counting_target(ds, 0, cfg.density_sigma, 16, 16);
    Tensor half = counting_target(ds, 0, cfg.density_sigma, 8, 8);
    CHECK(full.shape() == std::vector<int>{1, 16, 16});
    CHECK(half.shape() == std::vector<int>{1, 8, 8});
    double sf = 0.0, sh = 0.0;
    for (long long i = 0; i < full.numel(); ++i) sf += full[i];
    for (long long i = 0; i < half.numel(); ++i) sh += half[i];
    CHECK(sf == doctest::Approx(sh).epsilon(1e-12));
    CHECK(sf <= ds.labels[0] + 1e-9);  // border blobs may lose mass, never gain

    CHECK_THROWS_AS(counting_target(ds, 0, cfg.density_sigma, 5, 5), ConfigError);
    CHECK_THROWS_AS(counting_target(ds, 0, cfg.density_sigma, 8, 4), ConfigError);
}

TEST_CASE("the baseline arm is the multitask arm with the ranking term off") {
    Config base_cfg = tiny_counting();
    TempDir dir("rankprox_exp_arms");
    generate_dataset(ExperimentConfig::from_config(base_cfg), dir.str());
    Dataset ds = load_dataset(dir.str());

    base_cfg.set("arm", "baseline");
    TrainResult baseline = train_arm(ExperimentConfig::from_config(base_cfg), ds);

    base_cfg.set("arm", "multitask");
    base_cfg.set("lambda", "0");
    TrainResult multitask = train_arm(ExperimentConfig::from_config(base_cfg), ds);

    REQUIRE(baseline.log.size() == 5);
    REQUIRE(multitask.log.size() == 5);
    for (size_t i = 0; i < 5; ++i) {
        CHECK(baseline.log[i].loss == multitask.log[i].loss);
        CHECK(baseline.log[i].loss_rank == 0.0);
        CHECK(baseline.log[i].active_pairs == 0);
    }
    auto pb = baseline.net.params();
    auto pm = multitask.net.params();
    REQUIRE(pb.size() == pm.size());
    for (size_t p = 0; p < pb.size(); ++p) {
        REQUIRE(pb[p].name == pm[p].name);
        for (long long i = 0; i < pb[p].tensor->numel(); ++i) CHECK((*pb[p].tensor)[i] == (*pm[p].tensor)[i]);
    }
}

TEST_CASE("the multitask arm mixes ranked groups into every step") {
    Config cfg_text = tiny_counting();
    cfg_text.set("lambda", "0.01");
    ExperimentConfig cfg = ExperimentConfig::from_config(cfg_text);
    TempDir dir("rankprox_exp_multitask");
    generate_dataset(cfg, dir.str());
    Dataset ds = load_dataset(dir.str());

    TrainResult r = train_arm(cfg, ds);
    REQUIRE(r.log.size() == 5);
    for (const StepLog& l : r.log) {
        CHECK(std::isfinite(l.loss));
        CHECK(l.loss == doctest::Approx(l.loss_reg + 0.01 * l.loss_rank).epsilon(1e-12));
        CHECK(l.loss_rank >= 0.0);
        CHECK(l.active_pairs >= 0);
        CHECK(l.active_pairs <= 3);  // one k=3 group per batch
    }

    // a dataset with only held-out groups cannot feed the ranking term
    Dataset crippled = ds;
    for (int& s : crippled.group_split) s = 1;
    CHECK_THROWS_AS(train_arm(cfg, crippled), DataError);
}

TEST_CASE("evaluation reports metrics over ids in order") {
    ExperimentConfig cfg = ExperimentConfig::from_config(tiny_counting());
    TempDir dir("rankprox_exp_eval");
    generate_dataset(cfg, dir.str());
    Dataset ds = load_dataset(dir.str());
    TrainResult r = train_arm(cfg, ds);

    EvalResult ev = evaluate_split(r.net, ds, ds.test);
    REQUIRE(ev.truth.size() == 3);
    for (size_t i = 0; i < 3; ++i) CHECK(ev.truth[i] == ds.labels[static_cast<size_t>(ds.test[i])]);
    ErrorStats es = mae_mse(ev.truth, ev.predictions);
    CHECK(ev.mae == es.mae);
    CHECK(ev.mse == es.mse);
    CHECK_THROWS_AS(evaluate_split(r.net, ds, {0}), DataError);
}

TEST_CASE("proxy samplers draw from the task's generator") {
    TempDir cdir("rankprox_exp_proxy_c");
    ExperimentConfig ccfg = ExperimentConfig::from_config(tiny_counting());
    generate_dataset(ccfg, cdir.str());
    Dataset cds = load_dataset(cdir.str());
    GroupSampler crops = make_proxy_sampler(ccfg, cds, cds.pool[0]);
    RankedGroup g = crops(9);
    REQUIRE(g.members.size() == 3);
    CHECK(g.phi[0] > g.phi[1]);
    CHECK(crops(9).phi == g.phi);

    TempDir qdir("rankprox_exp_proxy_q");
    ExperimentConfig qcfg = ExperimentConfig::from_config(tiny_quality());
    generate_dataset(qcfg, qdir.str());
    Dataset qds = load_dataset(qdir.str());
    GroupSampler dist = make_proxy_sampler(qcfg, qds, qds.pool[0]);
    RankedGroup q = dist(9);
    REQUIRE(q.members.size() == 4);
    for (size_t m = 0; m < q.phi.size(); ++m) CHECK(q.phi[m] == -static_cast<double>(m));
}

TEST_CASE("the labeling arms share everything up to the first selection") {
    Config cfg_text = tiny_counting();
    cfg_text.set("arm", "active");
    cfg_text.set("active_cycles", "2");
    cfg_text.set("active_per_cycle", "2");
    cfg_text.set("active_pairs", "5");
    cfg_text.set("active_steps", "2");
    cfg_text.set("active_initial_steps", "2");
    ExperimentConfig cfg = ExperimentConfig::from_config(cfg_text);
    TempDir dir("rankprox_exp_active");
    generate_dataset(cfg, dir.str());
    Dataset ds = load_dataset(dir.str());

    auto certain = run_active_arm(cfg, ds, SelectionPolicy::certainty);
    auto random = run_active_arm(cfg, ds, SelectionPolicy::random);
    REQUIRE(certain.size() == 3);
    REQUIRE(random.size() == 3);
    for (int r = 0; r < 3; ++r) {
        CHECK(certain[static_cast<size_t>(r)].labeled_fraction ==
              doctest::Approx((3.0 + 2.0 * r) / 7.0).epsilon(1e-15));
        CHECK(random[static_cast<size_t>(r)].labeled_fraction == certain[static_cast<size_t>(r)].labeled_fraction);
    }
    // round 0 trains on the same labeled set with the same seeds
    CHECK(certain[0].mae == random[0].mae);
    CHECK(certain[0].srocc == random[0].srocc);
    for (int r = 0; r < 2; ++r) {
        CHECK(certain[static_cast<size_t>(r)].mean_certainty >= 0.0);
        CHECK(certain[static_cast<size_t>(r)].mean_certainty <= 1.0);
    }
    CHECK(std::isnan(certain[2].mean_certainty));
}

TEST_CASE("csv renderers emit deterministic bytes") {
    std::vector<StepLog> log = {{0, 1.5, 2.0, 1.5 + 0.25 * 2.0, 7}};
    CHECK(train_log_csv(log) == "step,loss_reg,loss_rank,loss,active_pair_count\n0,1.5,2,2,7\n");

    EvalResult ev;
    ev.mae = 0.5;
    ev.mse = 1.25;
    ev.lcc = 0.75;
    ev.srocc = -1.0;
    ev.truth = {3.0, 4.0};
    ev.predictions = {2.5, 4.5};
    CHECK(eval_csv(ev) == "mae,mse,lcc,srocc\n0.5,1.25,0.75,-1\n");
    CHECK(predictions_csv({7, 9}, ev) == "id,truth,prediction\n7,3,2.5\n9,4,4.5\n");

    ActiveCycleRecord rec;
    rec.round = 1;
    rec.labeled_fraction = 0.25;
    rec.mae = 2.0;
    rec.mse = 3.0;
    rec.lcc = 0.5;
    rec.srocc = 0.5;
    rec.mean_certainty = 0.75;
    CHECK(active_csv({{"certainty", {rec}}}) ==
          "cycle,labeled_fraction,policy,mae,mse,lcc,srocc,mean_certainty\n"
          "1,0.25,certainty,2,3,0.5,0.5,0.75\n");
}
