#include <benchmark/benchmark.h>

#include "gd/objective.hpp"
#include "gd/search.hpp"

namespace {

// One full-batch relaxed loss evaluation (forward + backward) on the Weber
// training split, the inner loop of the bilevel w phase.
void BM_RelaxedLossEpoch(benchmark::State& state) {
    gd::SearchConfig config = gd::default_search_config();
    config.k = static_cast<int>(state.range(0));
    gd::Problem problem = gd::make_problem(config);

    gd::ParamStore store;
    gd::Rng rng = gd::Rng::substream(0, "w-init");
    gd::GraphShape shape{problem.dataset.num_ivs(), config.k, problem.dataset.num_dvs(),
                         problem.activation};
    gd::SuperGraph graph(shape, gd::MixtureMode::Regular, store, rng);
    auto rows = problem.dataset.rows_of(gd::Split::Train);

    gd::Tape tape(&store);
    for (auto _ : state) {
        auto loss = gd::compute_total_loss(tape, graph, store, problem.dataset, rows, 0.5,
                                           gd::ZeroOneVariant::AsPrinted, true);
        benchmark::DoNotOptimize(loss.total);
    }
    state.counters["tape_nodes"] = static_cast<double>(tape.size());
}
BENCHMARK(BM_RelaxedLossEpoch)->Arg(1)->Arg(2)->Arg(3);

// Discrete-architecture evaluation over the full LCA dataset.
void BM_GenotypeEval(benchmark::State& state) {
    gd::Dataset ds = gd::gen_lca();
    gd::GraphShape shape{3, 1, 1, gd::OutputActivation::Identity};
    std::vector<gd::OpKind> ops = {gd::OpKind::Mul, gd::OpKind::Relu, gd::OpKind::Relu};
    gd::Genotype g = gd::make_genotype_structure(shape, ops);
    g.edges[0].params = {0.3};
    g.out_weights[0][0] = -0.2;
    for (auto _ : state) {
        double acc = 0.0;
        for (int r = 0; r < ds.num_rows(); ++r) {
            acc += gd::eval_genotype(g, ds.iv_row(r))[0];
        }
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_GenotypeEval);

// Scalar tape throughput: build + backward on a deep chain.
void BM_TapeChain(benchmark::State& state) {
    gd::ParamStore store;
    gd::ParamId p = store.add(0.5, gd::ParamRole::OpWeight);
    gd::Tape tape(&store);
    for (auto _ : state) {
        tape.clear();
        int x = tape.param(p);
        for (int i = 0; i < state.range(0); ++i) {
            x = tape.logistic(tape.add(x, tape.constant(0.1)));
        }
        store.zero_grads();
        tape.backward(x, store);
        benchmark::DoNotOptimize(store.grad(p));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TapeChain)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
