// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failed criteria. Runs everything by default; --only N runs a
// single criterion.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gd/objective.hpp"
#include "gd/report.hpp"
#include "gd/search.hpp"

using namespace gd;
namespace fs = std::filesystem;

namespace {

#ifndef GDISC_CLI_PATH
#define GDISC_CLI_PATH "gdisc"
#endif
std::string g_cli = GDISC_CLI_PATH;

struct Failure : std::runtime_error {
    explicit Failure(const std::string& msg) : std::runtime_error(msg) {}
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw Failure(msg);
}

double sigma(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient correctness
// ---------------------------------------------------------------------------

void check_store_grads(ParamStore& store, const std::function<double(ParamStore&)>& loss_fn,
                       const std::vector<double>& analytic, const std::string& context) {
    for (std::size_t i = 0; i < store.size(); ++i) {
        double fd = finite_diff(loss_fn, store, static_cast<ParamId>(i), 1e-5);
        double denom = std::max(std::abs(analytic[i]), std::abs(fd));
        bool ok = denom < 1e-3 ? std::abs(analytic[i] - fd) < 1e-6
                               : std::abs(analytic[i] - fd) / denom < 1e-4;
        if (!ok) {
            throw Failure(context + ": param " + std::to_string(i) + " analytic " +
                          fmt(analytic[i]) + " vs fd " + fmt(fd));
        }
    }
}

void per_op_gradcheck() {
    for (int m = 0; m < kNumOps; ++m) {
        OpKind kind = op_from_index(m);
        ParamStore store;
        Rng rng(100 + m);
        ParamId x = store.add(0.37, ParamRole::OpWeight);
        OpInstance op = make_op(kind, store, rng);
        auto loss_fn = [&](ParamStore& s) {
            Tape t(&s);
            int out = apply_op(t, op, t.param(x));
            int diff = t.add(out, t.constant(-0.4));
            return t.value(t.mul(diff, diff));
        };
        Tape t(&store);
        int out = apply_op(t, op, t.param(x));
        int diff = t.add(out, t.constant(-0.4));
        int loss = t.mul(diff, diff);
        store.zero_grads();
        t.backward(loss, store);
        std::vector<double> analytic(store.size());
        for (std::size_t i = 0; i < store.size(); ++i)
            analytic[i] = store.grad(static_cast<ParamId>(i));
        check_store_grads(store, loss_fn, analytic, "op " + std::string(op_tag(kind)));
    }
}

Dataset random_rows(int ivs, int rows, Rng& rng) {
    Dataset ds;
    for (int i = 0; i < ivs; ++i) ds.iv_names.push_back("x" + std::to_string(i));
    ds.dv_names = {"y"};
    for (int r = 0; r < rows; ++r) {
        std::vector<double> iv(ivs);
        for (auto& v : iv) v = rng.uniform(-1.5, 1.5);
        double dv[1] = {rng.uniform(-1.0, 1.0)};
        ds.add_row(iv, dv);
    }
    return ds;
}

bool near_nondiff_region(const Tape& tape) {
    for (const auto& n : tape.nodes()) {
        if (n.kind == NodeKind::Relu && std::abs(tape.nodes()[n.a].value) < 5e-3) return true;
        if (n.kind == NodeKind::Exp && tape.nodes()[n.a].value > kExpArgClamp - 0.5) return true;
    }
    return false;
}

std::string criterion_1() {
    auto start = std::chrono::steady_clock::now();
    per_op_gradcheck();

    int checked = 0;
    std::uint64_t seed = 0;
    int resampled = 0;
    while (checked < 100) {
        Rng rng = Rng::substream(seed++, "acceptance-gradcheck");
        GraphShape shape;
        shape.inputs = 1 + static_cast<int>(rng.below(3));
        shape.intermediates = 1 + static_cast<int>(rng.below(3));
        shape.outputs = 1;
        shape.activation =
            rng.below(2) == 0 ? OutputActivation::Identity : OutputActivation::Logistic;
        MixtureMode mode = checked % 2 == 0 ? MixtureMode::Regular : MixtureMode::Fair;
        double gamma = checked % 4 < 2 ? 0.0 : 1.0;

        ParamStore store;
        SuperGraph graph(shape, mode, store, rng);
        for (ParamId id : graph.alpha_ids()) store.set_value(id, rng.uniform(-1.5, 1.5));
        Dataset ds = random_rows(shape.inputs, 6, rng);
        std::vector<int> rows(ds.num_rows());
        for (int r = 0; r < ds.num_rows(); ++r) rows[r] = r;

        Tape probe(&store);
        build_total_loss(probe, graph, ds, rows, gamma, ZeroOneVariant::AsPrinted);
        if (near_nondiff_region(probe)) {
            ++resampled;
            continue;  // deterministic resample away from relu/clamp kinks
        }

        Tape tape(&store);
        compute_total_loss(tape, graph, store, ds, rows, gamma, ZeroOneVariant::AsPrinted, true);
        std::vector<double> analytic(store.size());
        for (std::size_t i = 0; i < store.size(); ++i)
            analytic[i] = store.grad(static_cast<ParamId>(i));
        auto loss_fn = [&](ParamStore& s) {
            Tape t(&s);
            return compute_total_loss(t, graph, s, ds, rows, gamma, ZeroOneVariant::AsPrinted,
                                      false)
                .total;
        };
        check_store_grads(store, loss_fn, analytic, "graph " + std::to_string(checked));
        ++checked;
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(elapsed < 30.0, "criterion 1 exceeded 30 s");
    return "8 ops + 100 random graphs, all w/v/alpha gradients match FD (" +
           std::to_string(resampled) + " kink resamples)";
}

// ---------------------------------------------------------------------------
// Criterion 2: mixture normalization
// ---------------------------------------------------------------------------

std::string criterion_2() {
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> alpha(kNumOps);
        for (auto& a : alpha) a = rng.uniform(-30.0, 30.0);
        auto w = mixture_weights(alpha, MixtureMode::Regular);
        double sum = 0.0;
        for (double x : w) sum += x;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    require(worst <= 1e-12, "softmax sum deviates by " + fmt(worst));

    std::vector<double> zeros(kNumOps, 0.0);
    auto regular = mixture_weights(zeros, MixtureMode::Regular);
    auto fair = mixture_weights(zeros, MixtureMode::Fair);
    for (int m = 0; m < kNumOps; ++m) {
        require(regular[m] == 0.125, "alpha=0 regular weight not exactly 1/8");
        require(fair[m] == 0.5, "alpha=0 fair weight not exactly 0.5");
    }
    return "1000 softmax sums within 1e-12; alpha=0 exactly uniform / 0.5";
}

// ---------------------------------------------------------------------------
// Criterion 3: structure arithmetic
// ---------------------------------------------------------------------------

std::string criterion_3() {
    require(edge_count(3, 2) == 7, "edge_count(3,2) != 7");
    require(search_space_size(3, 2, 8).value == 2097152ULL, "8^7 mismatch");
    require(edge_count(3, 3) == 12, "edge_count(3,3) != 12");
    require(search_space_size(3, 3, 8).value == 68719476736ULL, "8^12 mismatch");
    return "edge_count(3,2)=7 with 8^7=2097152; edge_count(3,3)=12 with 8^12=68719476736";
}

// ---------------------------------------------------------------------------
// Criterion 4: generator oracles
// ---------------------------------------------------------------------------

std::string criterion_4() {
    auto relu = [](double x) { return x > 0 ? x : 0.0; };

    Dataset weber = gen_weber();
    require(weber.num_rows() == 210, "weber row count");
    for (int r = 0; r < weber.num_rows(); ++r) {
        auto iv = weber.iv_row(r);
        double expected = sigma((iv[1] - iv[0]) - iv[0]);
        require(std::abs(weber.dv_row(r)[0] - expected) <= 1e-12, "weber row mismatch");
    }

    Dataset learn = gen_exp_learning();
    require(learn.num_rows() == 512, "exp_learning row count");
    for (int r = 0; r < learn.num_rows(); ++r) {
        auto iv = learn.iv_row(r);
        double expected = iv[2] - (iv[2] - iv[1]) * std::exp(-5.0 * iv[0]);
        require(std::abs(learn.dv_row(r)[0] - expected) <= 1e-12, "exp_learning row mismatch");
    }

    Dataset lca = gen_lca();
    require(lca.num_rows() == 512, "lca row count");
    for (int r = 0; r < lca.num_rows(); ++r) {
        auto iv = lca.iv_row(r);
        double expected = -0.4 * iv[0] + 0.2 * relu(iv[0]) - 0.2 * (relu(iv[1]) + relu(iv[2]));
        require(std::abs(lca.dv_row(r)[0] - expected) <= 1e-12, "lca row mismatch");
    }

    split_dataset(weber, 5);
    require(weber.rows_of(Split::Train).size() == 84 && weber.rows_of(Split::Val).size() == 21 &&
                weber.rows_of(Split::Test).size() == 105,
            "weber split sizes");
    split_dataset(lca, 5);
    require(lca.rows_of(Split::Train).size() == 204 && lca.rows_of(Split::Val).size() == 51 &&
                lca.rows_of(Split::Test).size() == 257,
            "512-row split sizes");
    return "210+512+512 rows match straight-line oracles to 1e-12; splits (84,21,105)/(204,51,257)";
}

// ---------------------------------------------------------------------------
// Criterion 5: brute-force equivalence on the tiny space
// ---------------------------------------------------------------------------

Problem negx_problem() {
    Dataset ds;
    ds.iv_names = {"x"};
    ds.dv_names = {"y"};
    for (int i = 0; i < 64; ++i) {
        double x = -1.0 + 2.0 * i / 63.0;
        double iv[1] = {x};
        double dv[1] = {-x};
        ds.add_row(iv, dv);
    }
    split_dataset(ds, Rng::substream(0, "data-split"));
    return Problem{"probe_negx", std::move(ds), OutputActivation::Identity};
}

std::string criterion_5() {
    auto start = std::chrono::steady_clock::now();
    Problem problem = negx_problem();
    GraphShape shape{1, 1, 1, OutputActivation::Identity};

    // Exhaustive enumeration with reduced 200-epoch retraining.
    SgdConfig retrain{0.025, 1e-3, 0.9, 3e-4, 200};
    std::vector<double> train_mse(kNumOps);
    for (int m = 0; m < kNumOps; ++m) {
        std::vector<OpKind> ops = {op_from_index(m)};
        RetrainOutcome out =
            final_retrain(make_genotype_structure(shape, ops), problem.dataset, retrain, 5, 0);
        require(out.ok, "enumeration retrain failed");
        for (const auto& init : out.inits) {
            if (init.selected) train_mse[m] = init.train_mse;
        }
    }
    for (OpKind k : {OpKind::Sub, OpKind::Mul, OpKind::Linear}) {
        require(train_mse[op_index(k)] < 1e-4, std::string(op_tag(k)) +
                                                   " did not reach zero MSE: " +
                                                   fmt(train_mse[op_index(k)]));
    }
    for (OpKind k : {OpKind::Zero, OpKind::Exp, OpKind::Relu, OpKind::Logistic}) {
        require(train_mse[op_index(k)] >= 1e-4,
                std::string(op_tag(k)) + " unexpectedly reached zero MSE");
    }
    // "add" also reaches zero MSE: the trainable output weight absorbs the
    // sign. Reported for visibility, not a failure.
    bool add_zero = train_mse[op_index(OpKind::Add)] < 1e-4;

    // DARTS at the reduced 100/60 schedule discretizes to a stated kind.
    int hits = 0;
    std::string picks;
    for (int seed = 0; seed < 10; ++seed) {
        SearchConfig c = default_search_config();
        c.method = Method::Regular;
        c.case_id = "probe_negx";
        c.k = 1;
        c.gamma = 0.0;
        c.seed = seed;
        c.sgd.epochs = 100;
        c.adam.epochs = 60;
        c.retrain.epochs = 200;
        c.bilevel.schedule = BilevelSchedule::Interleaved;
        RunOutput out = run_darts(c, problem);
        require(out.result.status == RunStatus::Ok, "darts probe run failed");
        OpKind chosen = out.result.genotype.edges[0].op;
        picks += std::string(op_tag(chosen)) + " ";
        if (chosen == OpKind::Sub || chosen == OpKind::Mul || chosen == OpKind::Linear) ++hits;
    }
    require(hits >= 8, "darts picked {sub,mul,linear} only " + std::to_string(hits) + "/10 [" +
                           picks + "]");
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(elapsed < 300.0, "criterion 5 exceeded 5 minutes");
    return "zero-MSE kinds confirmed (add also fits via v sign flip: " +
           std::string(add_zero ? "yes" : "no") + "); darts hits " + std::to_string(hits) +
           "/10 [" + picks + "]";
}

// ---------------------------------------------------------------------------
// Criterion 6: scaled Weber recovery against a matched-budget oracle
// ---------------------------------------------------------------------------

struct OracleModel {
    double w1 = 0.0, w0 = 0.0, b = 0.0;
};

// Straight-line fit of sigma(w1 I1 + w0 I0 + b) with the same procedure and
// budget as the pipeline's final retraining; independent of the graph engine.
double oracle_test_mse(const Dataset& ds, const SgdConfig& cfg, int inits, std::uint64_t seed) {
    auto train = ds.rows_of(Split::Train);
    auto val = ds.rows_of(Split::Val);
    auto test = ds.rows_of(Split::Test);
    auto mse_of = [&](const OracleModel& m, const std::vector<int>& rows) {
        double acc = 0.0;
        for (int r : rows) {
            auto iv = ds.iv_row(r);
            double d = sigma(m.w1 * iv[1] + m.w0 * iv[0] + m.b) - ds.dv_row(r)[0];
            acc += d * d;
        }
        return acc / rows.size();
    };
    OracleModel best;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < inits; ++i) {
        Rng rng = Rng::substream(seed, "oracle-init", static_cast<std::uint64_t>(i));
        OracleModel m{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0};
        double mom[3] = {0, 0, 0};
        for (int t = 0; t < cfg.epochs; ++t) {
            double g[3] = {0, 0, 0};
            for (int r : train) {
                auto iv = ds.iv_row(r);
                double s = sigma(m.w1 * iv[1] + m.w0 * iv[0] + m.b);
                double common = 2.0 / train.size() * (s - ds.dv_row(r)[0]) * s * (1.0 - s);
                g[0] += common * iv[1];
                g[1] += common * iv[0];
                g[2] += common;
            }
            double lr = cosine_lr(t, cfg.epochs, cfg.lr_init, cfg.lr_min);
            double* p[3] = {&m.w1, &m.w0, &m.b};
            for (int k = 0; k < 3; ++k) {
                double gg = g[k] + cfg.weight_decay * *p[k];
                mom[k] = cfg.momentum * mom[k] + gg;
                *p[k] -= lr * mom[k];
            }
        }
        double v = mse_of(m, val);
        if (v < best_val) {
            best_val = v;
            best = m;
        }
    }
    return mse_of(best, test);
}

double mean_partial(const Genotype& g, const Dataset& ds, const std::vector<int>& rows,
                    int input_index) {
    const double h = 1e-4;
    double acc = 0.0;
    for (int r : rows) {
        std::vector<double> iv(ds.iv_row(r).begin(), ds.iv_row(r).end());
        iv[input_index] += h;
        double up = eval_genotype(g, iv)[0];
        iv[input_index] -= 2 * h;
        double down = eval_genotype(g, iv)[0];
        acc += (up - down) / (2 * h);
    }
    return acc / rows.size();
}

std::string criterion_6() {
    auto start = std::chrono::steady_clock::now();
    SearchResult best;
    bool have_best = false;
    for (int seed = 0; seed < 10; ++seed) {
        SearchConfig c = default_search_config();
        c.method = Method::Regular;
        c.case_id = "weber";
        c.k = 1;
        c.gamma = 0.0;
        c.seed = seed;
        c.sgd.epochs = 200;
        c.adam.epochs = 150;
        c.retrain.epochs = 400;
        c.bilevel.schedule = BilevelSchedule::Interleaved;
        RunOutput out = run_darts(c);
        if (out.result.status != RunStatus::Ok) continue;
        if (!have_best || out.result.val_loss.total < best.val_loss.total) {
            best = out.result;
            have_best = true;
        }
    }
    require(have_best, "all weber runs failed");

    Problem problem = make_problem(best.config);
    auto test_rows = problem.dataset.rows_of(Split::Test);
    double dI1 = mean_partial(best.genotype, problem.dataset, test_rows, 1);
    double dI0 = mean_partial(best.genotype, problem.dataset, test_rows, 0);
    require(dI1 > 0.0, "net dependence on I1 is not positive: " + fmt(dI1));
    require(dI0 < 0.0, "net dependence on I0 is not negative: " + fmt(dI0));

    double oracle = oracle_test_mse(problem.dataset, best.config.retrain,
                                    best.config.retrain_inits, best.config.seed);
    require(best.test_loss.mse <= 2.0 * oracle,
            "test MSE " + fmt(best.test_loss.mse) + " exceeds 2x oracle " + fmt(oracle));
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(elapsed < 900.0, "criterion 6 exceeded 15 minutes");
    return "best seed " + std::to_string(best.config.seed) + ": dI1=" + fmt(dI1) +
           " dI0=" + fmt(dI0) + ", test " + fmt(best.test_loss.mse) + " vs oracle " +
           fmt(oracle) + " | " + best.equation;
}

// ---------------------------------------------------------------------------
// Criterion 7: random-search baseline protocol
// ---------------------------------------------------------------------------

std::string criterion_7() {
    GridSpec spec;
    spec.case_id = "weber";
    spec.methods = {Method::Regular, Method::Random};
    spec.ks = {2};
    spec.gammas = {0.0};
    spec.seeds = {0, 1};
    spec.workers = 1;
    spec.base = default_search_config();
    spec.base.sgd.epochs = 200;
    spec.base.adam.epochs = 150;
    // Retraining dominates the DARTS wall time, so one 200-epoch candidate
    // stays well under 10% of the matched budget.
    spec.base.retrain.epochs = 800;
    spec.base.bilevel.schedule = BilevelSchedule::Interleaved;

    GridOutcome outcome = run_grid(spec, nullptr);
    std::string detail;
    int random_runs = 0;
    for (const auto& r : outcome.results) {
        if (r.config.method != Method::Random) continue;
        ++random_runs;
        require(r.status == RunStatus::Ok, "random cell failed");
        double budget = r.config.time_budget_s.value_or(0.0);
        require(budget > 0.0, "random cell has no budget");
        double dev = std::abs(r.budget_used_s - budget) / budget;
        require(dev <= 0.10, "budget deviation " + fmt(100 * dev) + "% for seed " +
                                 std::to_string(r.config.seed));
        // without-replacement: every sampled key unique and in range
        std::set<std::uint64_t> unique(r.sampled_keys.begin(), r.sampled_keys.end());
        require(unique.size() == r.sampled_keys.size(), "duplicate genotype sampled");
        require(static_cast<long>(r.sampled_keys.size()) == r.candidates,
                "sampled key count mismatch");
        SpaceSize space = search_space_size(2, r.config.k, kNumOps);
        for (auto key : r.sampled_keys) require(key < space.value, "sampled key out of range");

        // stored test loss round-trips against the stored genotype and split
        SearchConfig cfg = r.config;
        Problem problem = make_problem(cfg);
        double recomputed =
            genotype_mse(r.genotype, problem.dataset, problem.dataset.rows_of(Split::Test));
        require(std::abs(recomputed - r.test_loss.mse) <= 1e-9,
                "test loss does not round-trip: " + fmt(recomputed) + " vs " +
                    fmt(r.test_loss.mse));
        detail += "seed " + std::to_string(r.config.seed) + ": budget " + fmt(budget) +
                  "s used " + fmt(r.budget_used_s) + "s, " + std::to_string(r.candidates) +
                  " candidates; ";
    }
    require(random_runs == 2, "expected 2 random cells");
    return detail;
}

// ---------------------------------------------------------------------------
// Criterion 8: LCA motif (statistical, retried once)
// ---------------------------------------------------------------------------

int lca_motif_hits(int seed_lo, int seed_hi, std::string& picks) {
    int hits = 0;
    for (int seed = seed_lo; seed < seed_hi; ++seed) {
        SearchConfig c = default_search_config();
        c.method = Method::Regular;
        c.case_id = "lca";
        c.k = 1;
        c.gamma = 0.0;
        c.seed = seed;
        c.sgd.epochs = 200;
        c.adam.epochs = 150;
        c.retrain.epochs = 400;
        c.bilevel.schedule = BilevelSchedule::Interleaved;
        RunOutput out = run_darts(c);
        if (out.result.status != RunStatus::Ok) continue;
        bool motif = false;
        for (const auto& e : out.result.genotype.edges) {
            // k=1: nodes 0..2 are x1..x3; the competitors are x2 and x3
            if ((e.from == 1 || e.from == 2) && e.op == OpKind::Relu) motif = true;
        }
        picks += motif ? "Y" : ".";
        hits += motif;
    }
    return hits;
}

std::string criterion_8() {
    std::string picks1, picks2;
    int hits = lca_motif_hits(0, 10, picks1);
    std::string detail = "seeds 0-9: " + std::to_string(hits) + "/10 [" + picks1 + "]";
    if (hits < 1) {
        hits = lca_motif_hits(10, 20, picks2);
        detail += "; retry seeds 10-19: " + std::to_string(hits) + "/10 [" + picks2 + "]";
    }
    require(hits >= 1, "no seed recovered relu on a competitor edge; " + detail);
    return detail;
}

// ---------------------------------------------------------------------------
// Criterion 9: CLI determinism
// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot read " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string criterion_9() {
    fs::path dir = fs::temp_directory_path() / ("gdisc_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string flags =
        " search --method regular --case weber --k 1 --gamma 0 --seed 1"
        " --w-epochs 60 --alpha-epochs 40 --retrain-epochs 80 --out ";
    for (const char* sub : {"a", "b"}) {
        std::string cmd = g_cli + flags + (dir / sub).string() + " > /dev/null 2>&1";
        int status = std::system(cmd.c_str());
        require(WEXITSTATUS(status) == 0, "cli run failed");
    }
    std::string ja = slurp((dir / "a/weber_regular_k1_g0_s1.json").string());
    std::string jb = slurp((dir / "b/weber_regular_k1_g0_s1.json").string());

    // Byte-identical except the timing fields.
    std::istringstream sa(ja), sb(jb);
    std::string la, lb;
    int diffs = 0;
    while (std::getline(sa, la) && std::getline(sb, lb)) {
        if (la == lb) continue;
        bool timing = la.find("wall_time_s") != std::string::npos ||
                      la.find("budget_used_s") != std::string::npos;
        require(timing, "difference outside timing fields: " + la + " vs " + lb);
        ++diffs;
    }
    require(sa.eof() == sb.eof(), "files have different line counts");
    fs::remove_all(dir);
    return "byte-identical except " + std::to_string(diffs) + " timing line(s)";
}

// ---------------------------------------------------------------------------
// Criterion 10: loss identities
// ---------------------------------------------------------------------------

std::string criterion_10() {
    std::vector<double> zeros(16, 0.0);
    require(zero_one_loss(zeros, 1.0) == 0.0, "zero_one(alpha=0) != 0");

    ParamStore store;
    Rng rng(77);
    SuperGraph single(GraphShape{1, 1, 1, OutputActivation::Identity}, MixtureMode::Regular,
                      store, rng);
    require(complexity_loss(single, store, 0.0) == 0.0, "complexity(gamma=0) != 0");
    for (double gamma : {0.25, 0.5, 1.0}) {
        double expected = 1.5 * gamma;
        require(std::abs(complexity_loss(single, store, gamma) - expected) <= 1e-12,
                "uniform single-edge complexity != 1.5 gamma");
    }

    for (MixtureMode mode : {MixtureMode::Regular, MixtureMode::Fair}) {
        ParamStore s;
        Rng r(78);
        SuperGraph g(GraphShape{2, 2, 1, OutputActivation::Logistic}, mode, s, r);
        Rng ar(79);
        for (ParamId id : g.alpha_ids()) s.set_value(id, ar.uniform(-1.0, 1.0));
        Dataset ds = random_rows(2, 10, r);
        std::vector<int> rows(ds.num_rows());
        for (int i = 0; i < ds.num_rows(); ++i) rows[i] = i;
        Tape tape(&s);
        auto lb = compute_total_loss(tape, g, s, ds, rows, 0.75, ZeroOneVariant::AsPrinted, false);
        require(std::abs(lb.total - (lb.mse + lb.complexity + lb.zero_one)) <= 1e-12,
                "total != mse + complexity + zero_one");
        if (mode == MixtureMode::Regular) {
            require(lb.zero_one == 0.0, "regular mode reported nonzero zero_one");
        } else {
            require(lb.zero_one != 0.0, "fair mode zero_one unexpectedly zero");
        }
    }
    return "zero_one(0)=0; complexity(gamma=0)=0; uniform edge = 1.5*gamma; additive totals";
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
        if (arg == "--cli" && i + 1 < argc) g_cli = argv[++i];
    }

    struct Criterion {
        int id;
        const char* name;
        std::function<std::string()> run;
    };
    std::vector<Criterion> criteria = {
        {1, "gradient-correctness", criterion_1},
        {2, "mixture-normalization", criterion_2},
        {3, "structure-arithmetic", criterion_3},
        {4, "generator-oracles", criterion_4},
        {5, "tiny-space-brute-force", criterion_5},
        {6, "weber-recovery", criterion_6},
        {7, "random-baseline-protocol", criterion_7},
        {8, "lca-relu-motif", criterion_8},
        {9, "cli-determinism", criterion_9},
        {10, "loss-identities", criterion_10},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = c.run();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  criterion %2d  %-26s (%.1fs)  %s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    secs, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
