#include "gd/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "gd/report.hpp"

namespace gd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string_view method_tag(Method m) {
    switch (m) {
        case Method::Regular: return "regular";
        case Method::Fair: return "fair";
        case Method::Random: return "random";
    }
    return "?";
}

Method method_from_tag(std::string_view tag) {
    if (tag == "regular") return Method::Regular;
    if (tag == "fair") return Method::Fair;
    if (tag == "random") return Method::Random;
    throw UsageError("unknown method '" + std::string(tag) + "' (valid: regular, fair, random)");
}

SearchConfig default_search_config() {
    SearchConfig c;
    c.sgd = SgdConfig{0.025, 1e-2, 0.9, 3e-4, 500};
    c.adam = AdamConfig{3e-3, 0.5, 0.999, 1e-4, 1e-8, 300};
    c.retrain = SgdConfig{0.025, 1e-3, 0.9, 3e-4, 1000};
    c.retrain_inits = 5;
    return c;
}

Problem make_problem(const SearchConfig& config) {
    const CaseSpec& spec = find_case(config.case_id);
    Problem p;
    p.case_id = spec.id;
    p.dataset = spec.generate();
    p.activation = spec.activation;
    split_dataset(p.dataset, Rng::substream(config.seed, "data-split"));
    return p;
}

Genotype make_genotype_structure(const GraphShape& shape, std::span<const OpKind> ops) {
    int expected = edge_count(shape.inputs, shape.intermediates);
    if (static_cast<int>(ops.size()) != expected)
        throw UsageError("expected " + std::to_string(expected) + " edge ops");
    Genotype g;
    g.shape = shape;
    int idx = 0;
    for (int j = 0; j < shape.intermediates; ++j) {
        int target = shape.inputs + j;
        for (int i = 0; i < shape.inputs + j; ++i) {
            GenotypeEdge e;
            e.from = i;
            e.to = target;
            e.op = ops[idx++];
            e.params.assign(op_param_count(e.op), 0.0);
            g.edges.push_back(std::move(e));
        }
    }
    g.out_weights.assign(shape.intermediates, std::vector<double>(shape.outputs, 0.0));
    return g;
}

namespace {

// A discrete architecture bound to a live parameter store for training.
struct GenotypeModel {
    Genotype structure;
    ParamStore store;
    std::vector<OpInstance> edge_ops;
    std::vector<std::vector<ParamId>> out_w;

    GenotypeModel(const Genotype& proto, Rng& rng) : structure(proto) {
        edge_ops.reserve(proto.edges.size());
        for (const auto& e : proto.edges) edge_ops.push_back(make_op(e.op, store, rng));
        out_w.resize(proto.shape.intermediates);
        for (int i = 0; i < proto.shape.intermediates; ++i) {
            out_w[i].resize(proto.shape.outputs);
            for (int j = 0; j < proto.shape.outputs; ++j) {
                out_w[i][j] = store.add(rng.uniform(-1.0, 1.0), ParamRole::OutWeight);
            }
        }
    }

    std::vector<int> forward(Tape& tape, std::span<const double> inputs) const {
        const auto& shape = structure.shape;
        std::vector<int> node_ids(shape.inputs + shape.intermediates, -1);
        for (int i = 0; i < shape.inputs; ++i) node_ids[i] = tape.constant(inputs[i]);
        // Intermediates with no non-zero inflow stay at 0.
        for (int i = 0; i < shape.intermediates; ++i)
            node_ids[shape.inputs + i] = tape.constant(0.0);
        for (std::size_t e = 0; e < structure.edges.size(); ++e) {
            const auto& edge = structure.edges[e];
            if (edge.op == OpKind::Zero) continue;
            int term = apply_op(tape, edge_ops[e], node_ids[edge.from]);
            node_ids[edge.to] = tape.add(node_ids[edge.to], term);
        }
        std::vector<int> outputs(shape.outputs, -1);
        for (int j = 0; j < shape.outputs; ++j) {
            int acc = -1;
            for (int i = 0; i < shape.intermediates; ++i) {
                int term = tape.mul(tape.param(out_w[i][j]), node_ids[shape.inputs + i]);
                acc = acc < 0 ? term : tape.add(acc, term);
            }
            if (shape.activation == OutputActivation::Logistic) acc = tape.logistic(acc);
            outputs[j] = acc;
        }
        return outputs;
    }

    int build_train_mse(Tape& tape, const Dataset& ds, const std::vector<int>& rows) const {
        int se_acc = -1;
        for (int r : rows) {
            auto outputs = forward(tape, ds.iv_row(r));
            auto targets = ds.dv_row(r);
            for (std::size_t j = 0; j < outputs.size(); ++j) {
                int diff = tape.add(outputs[j], tape.constant(-targets[j]));
                int sq = tape.mul(diff, diff);
                se_acc = se_acc < 0 ? sq : tape.add(se_acc, sq);
            }
        }
        double inv_n = 1.0 / (static_cast<double>(rows.size()) * structure.shape.outputs);
        return tape.mul(se_acc, tape.constant(inv_n));
    }

    Genotype snapshot() const {
        Genotype g = structure;
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            auto& params = g.edges[e].params;
            params.clear();
            if (edge_ops[e].a >= 0) params.push_back(store.value(edge_ops[e].a));
            if (edge_ops[e].b >= 0) params.push_back(store.value(edge_ops[e].b));
        }
        for (int i = 0; i < g.shape.intermediates; ++i) {
            for (int j = 0; j < g.shape.outputs; ++j) {
                g.out_weights[i][j] = store.value(out_w[i][j]);
            }
        }
        return g;
    }
};

}  // namespace

FitResult fit_genotype(const Genotype& structure, const Dataset& ds, const SgdConfig& cfg,
                       Rng init_rng) {
    FitResult result;
    try {
        GenotypeModel model(structure, init_rng);
        std::vector<ParamId> trainable = model.store.ids_of(ParamRole::OpWeight);
        {
            auto v_ids = model.store.ids_of(ParamRole::OutWeight);
            trainable.insert(trainable.end(), v_ids.begin(), v_ids.end());
        }
        std::vector<int> train_rows = ds.rows_of(Split::Train);
        Tape tape(&model.store);
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            tape.clear();
            int loss = model.build_train_mse(tape, ds, train_rows);
            model.store.zero_grads();
            tape.backward(loss, model.store);
            clip_grad_norm(model.store, trainable, kGradClipNorm);
            sgd_step(model.store, trainable, cfg, epoch, cfg.epochs);
        }
        result.genotype = model.snapshot();
        result.train_mse = genotype_mse(result.genotype, ds, train_rows);
        result.val_mse = genotype_mse(result.genotype, ds, ds.rows_of(Split::Val));
        result.ok = true;
    } catch (const NumericError& e) {
        result.ok = false;
        result.error = e.what();
    }
    return result;
}

RetrainOutcome final_retrain(const Genotype& structure, const Dataset& ds, const SgdConfig& cfg,
                             int num_inits, std::uint64_t seed) {
    if (num_inits < 1) throw UsageError("final_retrain requires at least one init");
    RetrainOutcome outcome;
    int best = -1;
    for (int i = 0; i < num_inits; ++i) {
        Rng rng = Rng::substream(seed, "retrain-init", static_cast<std::uint64_t>(i));
        FitResult fit = fit_genotype(structure, ds, cfg, rng);
        RetrainInit rec;
        rec.init = i;
        rec.ok = fit.ok;
        rec.train_mse = fit.train_mse;
        rec.val_mse = fit.val_mse;
        outcome.inits.push_back(rec);
        if (fit.ok && (best < 0 || fit.val_mse < outcome.inits[best].val_mse)) {
            best = i;
            outcome.best = fit.genotype;
        }
    }
    if (best >= 0) {
        outcome.ok = true;
        outcome.inits[best].selected = true;
    }
    return outcome;
}

namespace {

void finalize_losses(SearchResult& r, const Problem& problem) {
    const Dataset& ds = problem.dataset;
    r.train_loss = genotype_loss(r.genotype, ds, ds.rows_of(Split::Train), r.config.gamma);
    r.val_loss = genotype_loss(r.genotype, ds, ds.rows_of(Split::Val), r.config.gamma);
    r.test_loss = genotype_loss(r.genotype, ds, ds.rows_of(Split::Test), r.config.gamma);
    r.equation = render_equation(r.genotype, ds.iv_names, ds.dv_names, 2);
}

GraphShape problem_shape(const Problem& problem, int k) {
    GraphShape shape;
    shape.inputs = problem.dataset.num_ivs();
    shape.intermediates = k;
    shape.outputs = problem.dataset.num_dvs();
    shape.activation = problem.activation;
    return shape;
}

}  // namespace

RunOutput run_darts(const SearchConfig& config) { return run_darts(config, make_problem(config)); }

RunOutput run_darts(const SearchConfig& config, const Problem& problem) {
    if (config.method != Method::Regular && config.method != Method::Fair)
        throw UsageError("run_darts requires method regular or fair");
    auto start = Clock::now();
    RunOutput out;
    out.result.config = config;

    MixtureMode mode = config.method == Method::Regular ? MixtureMode::Regular : MixtureMode::Fair;
    ParamStore store;
    Rng rng = Rng::substream(config.seed, "w-init");
    SuperGraph graph(problem_shape(problem, config.k), mode, store, rng);

    try {
        BilevelResult bilevel =
            bilevel_optimize(graph, store, problem.dataset, config.bilevel, config.sgd,
                             config.adam, config.gamma, config.zero_one_variant);
        out.trace = std::move(bilevel.trace);
        out.result.exp_clamp_events = bilevel.exp_clamp_events;

        Genotype sampled = graph.discretize(store);
        RetrainOutcome retrain = final_retrain(sampled, problem.dataset, config.retrain,
                                               config.retrain_inits, config.seed);
        out.result.retrain_summary = retrain.inits;
        if (!retrain.ok) {
            out.result.status = RunStatus::Failed;
            out.result.error = "all retrain inits failed numerically";
            out.result.genotype = sampled;
        } else {
            out.result.genotype = retrain.best;
            finalize_losses(out.result, problem);
        }
    } catch (const NumericError& e) {
        out.result.status = RunStatus::Failed;
        out.result.error = e.what();
    }
    out.result.wall_time_s = seconds_since(start);
    return out;
}

RunOutput run_random(const SearchConfig& config) {
    return run_random(config, make_problem(config));
}

RunOutput run_random(const SearchConfig& config, const Problem& problem) {
    if (config.method != Method::Random) throw UsageError("run_random requires method random");
    if (!config.time_budget_s || *config.time_budget_s <= 0.0)
        throw UsageError("random search requires a positive --time-budget-s");
    auto start = Clock::now();
    RunOutput out;
    out.result.config = config;

    GraphShape shape = problem_shape(problem, config.k);
    int edges = edge_count(shape.inputs, shape.intermediates);
    SpaceSize space = search_space_size(shape.inputs, shape.intermediates, kNumOps);

    Rng draw_rng = Rng::substream(config.seed, "random-search");
    std::unordered_set<std::uint64_t> seen;
    bool have_best = false;
    Genotype best_structure;
    double best_val_total = 0.0;
    std::uint64_t candidate_index = 0;

    // The first draw always runs; afterwards the budget is checked between
    // candidates, so a candidate in flight finishes.
    while (candidate_index == 0 || seconds_since(start) < *config.time_budget_s) {
        if (space.exact && seen.size() >= space.value) break;  // space exhausted
        // Rejection-sample an unseen op assignment.
        std::vector<OpKind> ops(edges);
        std::uint64_t key = 0;
        do {
            key = 0;
            for (int e = 0; e < edges; ++e) {
                ops[e] = op_from_index(static_cast<int>(draw_rng.below(kNumOps)));
                key = (key << 3) | static_cast<std::uint64_t>(op_index(ops[e]));
            }
        } while (seen.contains(key));
        seen.insert(key);
        out.result.sampled_keys.push_back(key);

        Genotype structure = make_genotype_structure(shape, ops);
        Rng init_rng = Rng::substream(config.seed, "random-search-init", candidate_index);
        ++candidate_index;
        FitResult fit = fit_genotype(structure, problem.dataset, config.sgd, init_rng);
        ++out.result.candidates;
        if (!fit.ok) continue;
        double val_total = fit.val_mse + complexity_loss(structure, config.gamma);
        if (!have_best || val_total < best_val_total) {
            have_best = true;
            best_val_total = val_total;
            best_structure = structure;
        }
    }
    out.result.budget_used_s = seconds_since(start);

    if (!have_best) {
        out.result.status = RunStatus::Failed;
        out.result.error = "no candidate completed within the time budget";
        out.result.wall_time_s = seconds_since(start);
        return out;
    }

    RetrainOutcome retrain = final_retrain(best_structure, problem.dataset, config.retrain,
                                           config.retrain_inits, config.seed);
    out.result.retrain_summary = retrain.inits;
    if (!retrain.ok) {
        out.result.status = RunStatus::Failed;
        out.result.error = "all retrain inits failed numerically";
        out.result.genotype = best_structure;
    } else {
        out.result.genotype = retrain.best;
        finalize_losses(out.result, problem);
    }
    out.result.wall_time_s = seconds_since(start);
    return out;
}

RunOutput run_search(const SearchConfig& config) {
    if (config.method == Method::Random) return run_random(config);
    return run_darts(config);
}

Summary summarize_results(std::span<const SearchResult> results) {
    Summary summary;

    struct Key {
        std::string case_id;
        int method;
        int k;
        double gamma;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& c = results[i].config;
        groups[Key{c.case_id, static_cast<int>(c.method), c.k, c.gamma}].push_back(i);
    }

    // Best-by-validation run per method (ok runs only, validation total).
    std::map<int, std::size_t> best_idx;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].status != RunStatus::Ok) continue;
        int m = static_cast<int>(results[i].config.method);
        auto it = best_idx.find(m);
        if (it == best_idx.end() || results[i].val_loss.total < results[it->second].val_loss.total) {
            best_idx[m] = i;
        }
    }

    for (const auto& [key, indices] : groups) {
        SummaryRow row;
        row.case_id = key.case_id;
        row.method = static_cast<Method>(key.method);
        row.k = key.k;
        row.gamma = key.gamma;
        std::vector<double> test_mses;
        for (std::size_t i : indices) {
            if (results[i].status == RunStatus::Ok) {
                test_mses.push_back(results[i].test_loss.mse);
            } else {
                ++row.excluded;
            }
            auto it = best_idx.find(key.method);
            if (it != best_idx.end() && it->second == i) row.best_val_flag = true;
        }
        row.n = static_cast<int>(test_mses.size());
        if (row.n > 0) {
            double mean = 0.0;
            for (double v : test_mses) mean += v;
            mean /= row.n;
            row.mean_test_mse = mean;
            if (row.n > 1) {
                double var = 0.0;
                for (double v : test_mses) var += (v - mean) * (v - mean);
                var /= (row.n - 1);
                row.sem_test_mse = std::sqrt(var / row.n);
            } else {
                row.sem_test_mse = 0.0;  // single-seed group, n=1 marker in the row
            }
        }
        summary.rows.push_back(row);
    }

    for (const auto& [m, idx] : best_idx) {
        summary.best_by_method[std::string(method_tag(static_cast<Method>(m)))] = idx;
    }
    return summary;
}

namespace {

void run_jobs(std::vector<std::function<void()>>& jobs, int workers) {
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 4;
    }
    workers = std::min<int>(workers, static_cast<int>(jobs.size()));
    if (workers <= 1) {
        for (auto& job : jobs) job();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) break;
                jobs[i]();
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

GridOutcome run_grid(const GridSpec& spec, const ResultSink& sink) {
    if (spec.methods.empty() || spec.ks.empty() || spec.gammas.empty() || spec.seeds.empty())
        throw UsageError("grid axes must be nonempty");
    find_case(spec.case_id);  // validate early

    bool want_random = false;
    std::vector<Method> darts_methods;
    for (Method m : spec.methods) {
        if (m == Method::Random) {
            want_random = true;
        } else {
            darts_methods.push_back(m);
        }
    }
    if (want_random && darts_methods.empty())
        throw UsageError("random search in a grid needs a regular or fair run to match budgets");

    auto cell_config = [&](Method m, int k, double gamma, std::uint64_t seed) {
        SearchConfig c = spec.base;
        c.method = m;
        c.case_id = spec.case_id;
        c.k = k;
        c.gamma = gamma;
        c.seed = seed;
        return c;
    };

    GridOutcome outcome;
    std::mutex sink_mutex;
    auto deliver = [&](SearchResult& slot, RunOutput&& run) {
        std::lock_guard<std::mutex> lock(sink_mutex);
        slot = std::move(run.result);
        if (sink) sink(slot, run.trace);
    };

    // Phase 1: DARTS cells.
    struct Cell {
        int k;
        double gamma;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int k : spec.ks)
        for (double gamma : spec.gammas)
            for (std::uint64_t seed : spec.seeds) cells.push_back(Cell{k, gamma, seed});

    std::size_t darts_total = darts_methods.size() * cells.size();
    std::size_t random_total = want_random ? cells.size() : 0;
    outcome.results.resize(darts_total + random_total);

    std::vector<std::function<void()>> jobs;
    std::size_t slot = 0;
    for (Method m : darts_methods) {
        for (const Cell& cell : cells) {
            std::size_t idx = slot++;
            SearchConfig config = cell_config(m, cell.k, cell.gamma, cell.seed);
            jobs.push_back([&, idx, config] {
                deliver(outcome.results[idx], run_darts(config));
            });
        }
    }
    run_jobs(jobs, spec.workers);

    // Phase 2: random cells, budget-matched to the slowest DARTS run of the
    // same (k, gamma, seed) cell. Failed runs still count toward wall time.
    if (want_random) {
        jobs.clear();
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const Cell& cell = cells[ci];
            double budget = 0.0;
            for (std::size_t m = 0; m < darts_methods.size(); ++m) {
                budget = std::max(budget, outcome.results[m * cells.size() + ci].wall_time_s);
            }
            std::size_t idx = darts_total + ci;
            SearchConfig config = cell_config(Method::Random, cell.k, cell.gamma, cell.seed);
            config.time_budget_s = budget;
            jobs.push_back([&, idx, config] {
                deliver(outcome.results[idx], run_random(config));
            });
        }
        run_jobs(jobs, spec.workers);
    }

    outcome.summary = summarize_results(outcome.results);
    return outcome;
}

}  // namespace gd
