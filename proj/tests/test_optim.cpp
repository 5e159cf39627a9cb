#include <cmath>

#include <doctest.h>

#include "gd/optim.hpp"

using namespace gd;

namespace {

Dataset line_dataset(double slope, int rows = 32) {
    Dataset ds;
    ds.iv_names = {"x"};
    ds.dv_names = {"y"};
    for (int i = 0; i < rows; ++i) {
        double x = -1.0 + 2.0 * i / (rows - 1);
        double iv[1] = {x};
        double dv[1] = {slope * x};
        ds.add_row(iv, dv);
    }
    split_dataset(ds, 7);
    return ds;
}

}  // namespace

TEST_CASE("cosine schedule") {
    CHECK(cosine_lr(0, 500, 0.025, 1e-2) == doctest::Approx(0.025).epsilon(1e-15));
    CHECK(cosine_lr(500, 500, 0.025, 1e-2) == doctest::Approx(1e-2).epsilon(1e-12));
    CHECK(cosine_lr(250, 500, 0.025, 1e-2) == doctest::Approx((0.025 + 1e-2) / 2).epsilon(1e-12));
    CHECK_THROWS_AS(cosine_lr(-1, 500, 0.025, 1e-2), UsageError);
    CHECK_THROWS_AS(cosine_lr(0, 0, 0.025, 1e-2), UsageError);
}

TEST_CASE("sgd step") {
    SUBCASE("no gradient, no decay, no momentum: unchanged") {
        ParamStore store;
        ParamId p = store.add(1.5, ParamRole::OpWeight);
        SgdConfig cfg{0.1, 0.1, 0.0, 0.0, 10};
        sgd_step(store, std::vector<ParamId>{p}, cfg, 0, 10);
        CHECK(store.value(p) == 1.5);
    }
    SUBCASE("single explicit step") {
        ParamStore store;
        ParamId p = store.add(1.0, ParamRole::OpWeight);
        store.entry(p).grad = 1.0;
        SgdConfig cfg{0.1, 0.1, 0.0, 0.0, 10};  // flat schedule at 0.1
        sgd_step(store, std::vector<ParamId>{p}, cfg, 0, 10);
        CHECK(store.value(p) == doctest::Approx(0.9).epsilon(1e-15));
    }
    SUBCASE("two momentum steps with constant gradient") {
        ParamStore store;
        ParamId p = store.add(0.0, ParamRole::OpWeight);
        SgdConfig cfg{0.1, 0.1, 0.9, 0.0, 10};
        store.entry(p).grad = 1.0;
        sgd_step(store, std::vector<ParamId>{p}, cfg, 0, 10);
        CHECK(store.value(p) == doctest::Approx(-0.1).epsilon(1e-15));
        store.entry(p).grad = 1.0;
        sgd_step(store, std::vector<ParamId>{p}, cfg, 1, 10);
        // m = 0.9*1 + 1 = 1.9; p = -0.1 - 0.19 = -0.29
        CHECK(store.value(p) == doctest::Approx(-0.29).epsilon(1e-14));
    }
}

TEST_CASE("gradient norm clipping") {
    ParamStore store;
    ParamId a = store.add(0.0, ParamRole::OpWeight);
    ParamId b = store.add(0.0, ParamRole::OpWeight);
    std::vector<ParamId> ids = {a, b};

    store.entry(a).grad = 3.0;
    store.entry(b).grad = 4.0;  // norm 5: exactly at the limit, untouched
    CHECK(clip_grad_norm(store, ids, 5.0) == doctest::Approx(5.0));
    CHECK(store.grad(a) == 3.0);
    CHECK(store.grad(b) == 4.0);

    store.entry(a).grad = 30.0;
    store.entry(b).grad = 40.0;
    CHECK(clip_grad_norm(store, ids, 5.0) == doctest::Approx(50.0));
    CHECK(store.grad(a) == doctest::Approx(3.0));
    CHECK(store.grad(b) == doctest::Approx(4.0));

    store.entry(a).grad = 0.0;
    store.entry(b).grad = 0.0;
    CHECK(clip_grad_norm(store, ids, 5.0) == 0.0);
    CHECK(store.grad(a) == 0.0);
}

TEST_CASE("training survives a configuration that blows up unclipped") {
    // fair mode on a 3-input case with k=2 diverges without the norm clip
    Dataset ds = gen_exp_learning();
    split_dataset(ds, Rng::substream(4, "data-split"));
    ParamStore store;
    Rng rng = Rng::substream(4, "w-init");
    SuperGraph graph(GraphShape{3, 2, 1, OutputActivation::Identity}, MixtureMode::Fair, store,
                     rng);
    SgdConfig sgd{0.025, 1e-2, 0.9, 3e-4, 120};
    AdamConfig adam{3e-3, 0.5, 0.999, 1e-4, 1e-8, 40};
    BilevelConfig cfg{1, BilevelSchedule::Sequential};
    auto result = bilevel_optimize(graph, store, ds, cfg, sgd, adam, 0.25);
    CHECK(result.trace.size() == 160);
    CHECK(std::isfinite(result.trace.back().loss.total));
}

TEST_CASE("adam step") {
    SUBCASE("no gradient, no decay: unchanged") {
        ParamStore store;
        ParamId p = store.add(0.7, ParamRole::Arch);
        AdamConfig cfg{3e-3, 0.5, 0.999, 0.0, 1e-8, 300};
        adam_step(store, std::vector<ParamId>{p}, cfg, 1);
        CHECK(store.value(p) == 0.7);
    }
    SUBCASE("first step moves by about lr") {
        ParamStore store;
        ParamId p = store.add(0.0, ParamRole::Arch);
        store.entry(p).grad = 1.0;
        AdamConfig cfg{3e-3, 0.5, 0.999, 0.0, 1e-8, 300};
        adam_step(store, std::vector<ParamId>{p}, cfg, 1);
        CHECK(store.value(p) == doctest::Approx(-3e-3).epsilon(1e-6));
    }
    SUBCASE("update opposes the gradient sign") {
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            ParamStore store;
            ParamId p = store.add(rng.uniform(-1, 1), ParamRole::Arch);
            double g = rng.uniform(-2, 2);
            if (g == 0) continue;
            double before = store.value(p);
            store.entry(p).grad = g;
            AdamConfig cfg{3e-3, 0.5, 0.999, 0.0, 1e-8, 300};
            adam_step(store, std::vector<ParamId>{p}, cfg, 1);
            CHECK((store.value(p) - before) * g < 0.0);
        }
    }
    SUBCASE("step count starts at 1") {
        ParamStore store;
        ParamId p = store.add(0.0, ParamRole::Arch);
        AdamConfig cfg;
        CHECK_THROWS_AS(adam_step(store, std::vector<ParamId>{p}, cfg, 0), UsageError);
    }
}

namespace {

struct BilevelFixture {
    Dataset ds = line_dataset(-1.0);
    ParamStore store;
    SuperGraph graph;

    explicit BilevelFixture(MixtureMode mode = MixtureMode::Regular, std::uint64_t seed = 3)
        : graph(make(mode, seed)) {}

    SuperGraph make(MixtureMode mode, std::uint64_t seed) {
        Rng rng(seed);
        return SuperGraph(GraphShape{1, 1, 1, OutputActivation::Identity}, mode, store, rng);
    }
};

}  // namespace

TEST_CASE("bilevel optimize") {
    SgdConfig sgd{0.025, 1e-2, 0.9, 3e-4, 6};
    AdamConfig adam{3e-3, 0.5, 0.999, 1e-4, 1e-8, 4};

    SUBCASE("zero rounds returns alpha at zero with an empty trace") {
        BilevelFixture f;
        BilevelConfig cfg{0, BilevelSchedule::Sequential};
        auto result = bilevel_optimize(f.graph, f.store, f.ds, cfg, sgd, adam, 0.0);
        CHECK(result.trace.empty());
        for (ParamId id : f.graph.alpha_ids()) CHECK(f.store.value(id) == 0.0);
    }
    SUBCASE("sequential trace length is rounds * (w + alpha)") {
        BilevelFixture f;
        BilevelConfig cfg{2, BilevelSchedule::Sequential};
        auto result = bilevel_optimize(f.graph, f.store, f.ds, cfg, sgd, adam, 0.0);
        CHECK(result.trace.size() == 2 * (6 + 4));
        CHECK(result.trace[0].phase == 'w');
        CHECK(result.trace[6].phase == 'a');
    }
    SUBCASE("interleaved trace alternates for max(w, alpha) pairs") {
        BilevelFixture f;
        BilevelConfig cfg{1, BilevelSchedule::Interleaved};
        auto result = bilevel_optimize(f.graph, f.store, f.ds, cfg, sgd, adam, 0.0);
        CHECK(result.trace.size() == 2 * 6);
        for (std::size_t i = 0; i < result.trace.size(); ++i) {
            CHECK(result.trace[i].phase == (i % 2 == 0 ? 'w' : 'a'));
        }
    }
    SUBCASE("w phase leaves alpha bit-unchanged; alpha phase leaves w alone") {
        BilevelFixture f;
        // only w epochs
        BilevelConfig wonly{1, BilevelSchedule::Sequential};
        AdamConfig no_alpha = adam;
        no_alpha.epochs = 0;
        bilevel_optimize(f.graph, f.store, f.ds, wonly, sgd, no_alpha, 0.0);
        for (ParamId id : f.graph.alpha_ids()) CHECK(f.store.value(id) == 0.0);

        // only alpha epochs; w and v must stay put
        BilevelFixture g;
        std::vector<ParamId> w_ids = g.store.ids_of(ParamRole::OpWeight);
        auto v_ids = g.store.ids_of(ParamRole::OutWeight);
        w_ids.insert(w_ids.end(), v_ids.begin(), v_ids.end());
        std::vector<double> before;
        for (ParamId id : w_ids) before.push_back(g.store.value(id));
        SgdConfig no_w = sgd;
        no_w.epochs = 0;
        bilevel_optimize(g.graph, g.store, g.ds, wonly, no_w, adam, 0.0);
        for (std::size_t i = 0; i < w_ids.size(); ++i) {
            CHECK(g.store.value(w_ids[i]) == before[i]);
        }
        bool alpha_moved = false;
        for (ParamId id : g.graph.alpha_ids()) {
            if (g.store.value(id) != 0.0) alpha_moved = true;
        }
        CHECK(alpha_moved);
    }
    SUBCASE("identical seeds and configs give identical traces") {
        BilevelFixture a(MixtureMode::Fair, 11), b(MixtureMode::Fair, 11);
        BilevelConfig cfg{1, BilevelSchedule::Sequential};
        auto ra = bilevel_optimize(a.graph, a.store, a.ds, cfg, sgd, adam, 0.5);
        auto rb = bilevel_optimize(b.graph, b.store, b.ds, cfg, sgd, adam, 0.5);
        REQUIRE(ra.trace.size() == rb.trace.size());
        for (std::size_t i = 0; i < ra.trace.size(); ++i) {
            CHECK(ra.trace[i].loss.total == rb.trace[i].loss.total);
        }
    }
    SUBCASE("training loss is nonincreasing on the convex probe") {
        // single-edge graph fitting y = -x, gentle flat learning rate, no
        // momentum so each full-batch step descends
        BilevelFixture f;
        SgdConfig gentle{0.005, 0.005, 0.0, 0.0, 60};
        AdamConfig no_alpha = adam;
        no_alpha.epochs = 0;
        BilevelConfig cfg{1, BilevelSchedule::Sequential};
        auto result = bilevel_optimize(f.graph, f.store, f.ds, cfg, gentle, no_alpha, 0.0);
        REQUIRE(result.trace.size() == 60);
        CHECK(result.trace.back().loss.total <= result.trace.front().loss.total);
    }
}

TEST_CASE("trace CSV format") {
    std::vector<EpochRecord> trace = {
        {0, 'w', {0.5, 0.1, 0.0, 0.6, 1.0}},
        {1, 'a', {0.25, 0.1, -0.05, 0.3, 1.0}},
    };
    std::string csv = trace_to_csv(trace);
    CHECK(csv.find("epoch,phase,mse,complexity,zero_one,total\n") == 0);
    CHECK(csv.find("0,w,0.5,0.1,0,0.6\n") != std::string::npos);
    CHECK(csv.find("1,a,0.25,0.1,-0.05,0.3\n") != std::string::npos);
}
