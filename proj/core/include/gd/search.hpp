#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gd/cases.hpp"
#include "gd/optim.hpp"

namespace gd {

enum class Method : std::uint8_t { Regular, Fair, Random };

std::string_view method_tag(Method m);
Method method_from_tag(std::string_view tag);

struct SearchConfig {
    Method method = Method::Regular;
    std::string case_id = "weber";
    int k = 1;
    double gamma = 0.0;
    std::uint64_t seed = 0;

    BilevelConfig bilevel;
    SgdConfig sgd;             // w phase; also trains random-search candidates
    AdamConfig adam;           // alpha phase
    SgdConfig retrain;         // final retraining (lr floor 1e-3)
    int retrain_inits = 5;
    ZeroOneVariant zero_one_variant = ZeroOneVariant::AsPrinted;

    // Random search only: sampling stops once this much wall time has
    // elapsed (a candidate in flight finishes).
    std::optional<double> time_budget_s;

    bool operator==(const SearchConfig&) const = default;
};

SearchConfig default_search_config();

enum class RunStatus : std::uint8_t { Ok, Failed };

struct RetrainInit {
    int init = 0;
    bool ok = false;
    double train_mse = 0.0;
    double val_mse = 0.0;
    bool selected = false;

    bool operator==(const RetrainInit&) const = default;
};

struct SearchResult {
    SearchConfig config;
    RunStatus status = RunStatus::Ok;
    std::string error;
    Genotype genotype;
    std::string equation;
    LossBreakdown train_loss;
    LossBreakdown val_loss;
    LossBreakdown test_loss;  // computed once, after final retraining
    std::vector<RetrainInit> retrain_summary;
    double wall_time_s = 0.0;
    double budget_used_s = 0.0;  // random: elapsed sampling time
    long candidates = 0;         // random: candidates evaluated
    std::vector<std::uint64_t> sampled_keys;  // random: draw order, no repeats
    long exp_clamp_events = 0;

    bool operator==(const SearchResult&) const = default;
};

// A search problem: a split dataset plus the graph's output activation.
// Built-in cases come from make_problem; tests may construct their own.
struct Problem {
    std::string case_id;
    Dataset dataset;
    OutputActivation activation = OutputActivation::Identity;
};

// Generates the case's data and applies the seeded 40/10/50 split using the
// run's "data-split" substream.
Problem make_problem(const SearchConfig& config);

// Discrete-architecture structure with the given op per edge (canonical
// edge order); parameters zeroed, ready for fitting.
Genotype make_genotype_structure(const GraphShape& shape, std::span<const OpKind> ops);

struct FitResult {
    Genotype genotype;
    bool ok = false;
    std::string error;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

// Re-initializes the structure's parameters (a ~ U(-1,1), b = 0,
// v ~ U(-1,1)) and trains them on the training split with full-batch
// momentum SGD under the cosine schedule. Pure MSE objective.
FitResult fit_genotype(const Genotype& structure, const Dataset& ds, const SgdConfig& cfg,
                       Rng init_rng);

struct RetrainOutcome {
    bool ok = false;
    Genotype best;
    std::vector<RetrainInit> inits;
};

// Trains `num_inits` random re-initializations of the sampled architecture
// and keeps the one with the lowest validation MSE (ties: first init).
RetrainOutcome final_retrain(const Genotype& structure, const Dataset& ds, const SgdConfig& cfg,
                             int num_inits, std::uint64_t seed);

struct RunOutput {
    SearchResult result;
    std::vector<EpochRecord> trace;  // bilevel loss trace (DARTS methods)
};

RunOutput run_darts(const SearchConfig& config);
RunOutput run_darts(const SearchConfig& config, const Problem& problem);
RunOutput run_random(const SearchConfig& config);
RunOutput run_random(const SearchConfig& config, const Problem& problem);
RunOutput run_search(const SearchConfig& config);  // dispatch on method

struct GridSpec {
    std::string case_id = "weber";
    std::vector<Method> methods;
    std::vector<int> ks;
    std::vector<double> gammas;
    std::vector<std::uint64_t> seeds;
    int workers = 0;  // 0: hardware concurrency
    SearchConfig base;  // epochs, optimizers; method/case/k/gamma/seed set per cell
};

struct SummaryRow {
    std::string case_id;
    Method method = Method::Regular;
    int k = 0;
    double gamma = 0.0;
    int n = 0;         // ok runs aggregated
    int excluded = 0;  // failed runs
    double mean_test_mse = 0.0;
    double sem_test_mse = 0.0;
    bool best_val_flag = false;  // group holds the method's best-by-validation run
};

struct Summary {
    std::vector<SummaryRow> rows;
    // method tag -> index into the result list passed to summarize_results
    std::map<std::string, std::size_t> best_by_method;
};

Summary summarize_results(std::span<const SearchResult> results);

using ResultSink = std::function<void(const SearchResult&, const std::vector<EpochRecord>&)>;

struct GridOutcome {
    std::vector<SearchResult> results;
    Summary summary;
};

// Runs every (method, k, gamma, seed) combination. DARTS cells run first;
// each random cell then gets the max DARTS wall time of its (k, gamma,
// seed) cell as its budget. Cells run in parallel up to `workers`; the sink
// is invoked serially. Individual failures are recorded, not fatal.
GridOutcome run_grid(const GridSpec& spec, const ResultSink& sink = nullptr);

}  // namespace gd
