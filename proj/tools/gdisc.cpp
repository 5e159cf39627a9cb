#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gd/cases.hpp"
#include "gd/report.hpp"
#include "gd/search.hpp"
#include "gd/version.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw gd::ConfigError("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw gd::ConfigError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gd::ConfigError("cannot read: " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(text)) {
        auto dots = item.find("..");
        if (dots != std::string::npos) {
            std::uint64_t lo = std::stoull(item.substr(0, dots));
            std::uint64_t hi = std::stoull(item.substr(dots + 2));
            if (hi < lo) throw gd::UsageError("bad seed range: " + item);
            for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
        } else {
            out.push_back(std::stoull(item));
        }
    }
    if (out.empty()) throw gd::UsageError("no seeds given");
    return out;
}

int effective_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("GD_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 0;  // run_grid falls back to hardware concurrency
}

std::string manifest_json(const std::string& command, const std::string& case_id,
                          const ordered_json& config) {
    gd::Dataset ds = gd::find_case(case_id).generate();
    ordered_json j;
    j["tool"] = "gdisc";
    j["version"] = gd::kVersion;
    j["command"] = command;
    j["case"] = case_id;
    j["dataset_checksum"] = gd::checksum_hex(gd::dataset_checksum(ds));
    j["config"] = config;
    j["created_utc"] = gd::iso8601_utc_now();
    j["host"] = gd::hostname_string();
    return j.dump(2);
}

void print_losses(const gd::SearchResult& r) {
    auto line = [](const char* name, const gd::LossBreakdown& l) {
        std::cout << "  " << name << ": mse=" << l.mse << " complexity=" << l.complexity
                  << " zero_one=" << l.zero_one << " total=" << l.total << "\n";
    };
    line("train", r.train_loss);
    line("val", r.val_loss);
    line("test", r.test_loss);
}

struct SearchFlags {
    std::string method = "regular";
    std::string case_id = "weber";
    int k = 1;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    double time_budget_s = -1.0;
    std::string schedule = "sequential";
    int rounds = 1;
    int w_epochs = 500;
    int alpha_epochs = 300;
    int retrain_epochs = 1000;
    int retrain_inits = 5;
    std::string zero_one_variant = "as-printed";
    std::string trace_path;
};

void add_epoch_flags(CLI::App* cmd, SearchFlags& f) {
    cmd->add_option("--schedule", f.schedule, "Bilevel schedule: sequential|interleaved");
    cmd->add_option("--rounds", f.rounds, "Bilevel rounds");
    cmd->add_option("--w-epochs", f.w_epochs, "SGD epochs per w phase");
    cmd->add_option("--alpha-epochs", f.alpha_epochs, "Adam epochs per alpha phase");
    cmd->add_option("--retrain-epochs", f.retrain_epochs, "Final retraining epochs");
    cmd->add_option("--retrain-inits", f.retrain_inits, "Final retraining random inits");
    cmd->add_option("--zero-one-variant", f.zero_one_variant,
                    "Fair-mode zero-one loss: as-printed|magnitude");
}

gd::SearchConfig config_from_flags(const SearchFlags& f) {
    gd::SearchConfig c = gd::default_search_config();
    c.method = gd::method_from_tag(f.method);
    c.case_id = f.case_id;
    c.k = f.k;
    c.gamma = f.gamma;
    c.seed = f.seed;
    c.bilevel.rounds = f.rounds;
    c.bilevel.schedule = gd::schedule_from_tag(f.schedule);
    c.sgd.epochs = f.w_epochs;
    c.adam.epochs = f.alpha_epochs;
    c.retrain.epochs = f.retrain_epochs;
    c.retrain_inits = f.retrain_inits;
    c.zero_one_variant = gd::zero_one_from_tag(f.zero_one_variant);
    if (f.time_budget_s > 0) c.time_budget_s = f.time_budget_s;
    if (c.method == gd::Method::Random && !c.time_budget_s)
        throw gd::UsageError("--time-budget-s is required when --method random");
    if (c.method != gd::Method::Random && f.time_budget_s > 0)
        throw gd::UsageError("--time-budget-s only applies to --method random");
    if (c.gamma < 0) throw gd::UsageError("--gamma must be nonnegative");
    if (c.k < 1) throw gd::UsageError("--k must be >= 1");
    gd::find_case(c.case_id);
    return c;
}

int cmd_generate(const std::string& case_id, std::uint64_t seed, const std::string& out_dir) {
    const gd::CaseSpec& spec = gd::find_case(case_id);
    gd::Dataset ds = spec.generate();
    gd::split_dataset(ds, gd::Rng::substream(seed, "data-split"));
    fs::path out = fs::path(out_dir) / (case_id + ".csv");
    write_file(out, gd::dataset_to_csv(ds));
    std::cout << "wrote " << out.string() << "\n";
    std::cout << "rows: " << ds.num_rows() << " (train " << ds.rows_of(gd::Split::Train).size()
              << ", val " << ds.rows_of(gd::Split::Val).size() << ", test "
              << ds.rows_of(gd::Split::Test).size() << ")\n";
    return 0;
}

int cmd_search(const SearchFlags& flags) {
    gd::SearchConfig config = config_from_flags(flags);
    gd::RunOutput run = gd::run_search(config);

    fs::path out = fs::path(flags.out_dir) / gd::run_file_name(config);
    write_file(out, gd::search_result_to_json(run.result));
    write_file(fs::path(flags.out_dir) / "manifest.json",
               manifest_json("search", config.case_id,
                             ordered_json::parse(gd::search_config_to_json(config))));
    if (!flags.trace_path.empty()) write_file(flags.trace_path, gd::trace_to_csv(run.trace));

    std::cout << "wrote " << out.string() << "\n";
    if (run.result.status == gd::RunStatus::Ok) {
        std::cout << run.result.equation << "\n";
        print_losses(run.result);
    } else {
        std::cout << "run failed: " << run.result.error << "\n";
    }
    std::cout << "wall_time_s: " << run.result.wall_time_s << "\n";
    return 0;
}

struct GridFlags {
    std::string case_id = "weber";
    std::string methods = "regular,fair,random";
    std::string k_set = "1,2,3";
    std::string gamma_set = "0,0.25,0.5,0.75,1";
    std::string seeds = "0..9";
    int workers = 0;
    std::string out_dir = "grid_out";
    SearchFlags base;
};

int cmd_grid(const GridFlags& flags) {
    gd::GridSpec spec;
    spec.case_id = flags.case_id;
    for (const auto& m : split_list(flags.methods)) spec.methods.push_back(gd::method_from_tag(m));
    for (const auto& k : split_list(flags.k_set)) spec.ks.push_back(std::stoi(k));
    for (const auto& g : split_list(flags.gamma_set)) spec.gammas.push_back(std::stod(g));
    spec.seeds = parse_seeds(flags.seeds);
    spec.workers = effective_workers(flags.workers);

    SearchFlags base = flags.base;
    base.case_id = flags.case_id;
    base.method = "regular";  // per-cell method set by the grid
    spec.base = config_from_flags(base);

    fs::create_directories(flags.out_dir);

    auto sink = [&](const gd::SearchResult& r, const std::vector<gd::EpochRecord>&) {
        fs::path out = fs::path(flags.out_dir) / gd::run_file_name(r.config);
        write_file(out, gd::search_result_to_json(r));
        std::cout << gd::run_file_name(r.config) << " "
                  << (r.status == gd::RunStatus::Ok ? "ok" : "FAILED") << " wall_time_s="
                  << r.wall_time_s << "\n";
    };
    gd::GridOutcome outcome = gd::run_grid(spec, sink);

    write_file(fs::path(flags.out_dir) / "summary.csv", gd::summary_to_csv(outcome.summary));
    for (const auto& [method, idx] : outcome.summary.best_by_method) {
        write_file(fs::path(flags.out_dir) / ("best_" + method + ".json"),
                   gd::search_result_to_json(outcome.results[idx]));
    }
    ordered_json axes;
    axes["methods"] = split_list(flags.methods);
    axes["k_set"] = spec.ks;
    axes["gamma_set"] = spec.gammas;
    axes["seeds"] = spec.seeds;
    axes["workers"] = spec.workers;
    axes["base"] = ordered_json::parse(gd::search_config_to_json(spec.base));
    write_file(fs::path(flags.out_dir) / "manifest.json",
               manifest_json("grid", flags.case_id, axes));

    int failed = 0;
    for (const auto& r : outcome.results) {
        if (r.status != gd::RunStatus::Ok) ++failed;
    }
    std::cout << "runs: " << outcome.results.size() << " (" << failed << " failed)\n";
    std::cout << "summary: " << (fs::path(flags.out_dir) / "summary.csv").string() << "\n";
    return 0;
}

gd::ScalarModel genotype_model(const gd::Genotype& g) {
    return [g](std::span<const double> iv) { return gd::eval_genotype(g, iv)[0]; };
}

int cmd_export(const std::string& run_path, const std::string& format, std::string out_path,
               const std::string& baselines, const std::string& x0_text, int steps, double dt,
               int points) {
    gd::SearchResult result = gd::search_result_from_json(read_file(run_path));
    if (result.status != gd::RunStatus::Ok)
        throw gd::UsageError("cannot export from a failed run: " + run_path);
    const gd::CaseSpec& spec = gd::find_case(result.config.case_id);
    gd::Dataset ds = spec.generate();

    fs::path base(run_path);
    std::string stem = base.parent_path() / base.stem();

    if (format == "equation") {
        if (out_path.empty()) out_path = stem + "_equation.txt";
        std::string eq = gd::render_equation(result.genotype, ds.iv_names, ds.dv_names, 2);
        write_file(out_path, eq + "\n");
        std::cout << eq << "\n";
    } else if (format == "dot") {
        if (out_path.empty()) out_path = stem + ".dot";
        write_file(out_path, gd::genotype_to_dot(result.genotype, ds.iv_names, ds.dv_names, 2));
    } else if (format == "curves") {
        if (out_path.empty()) out_path = stem + "_curves.csv";
        gd::ScalarModel truth = [&spec](std::span<const double> iv) {
            return spec.ground_truth(iv);
        };
        gd::ScalarModel recovered = genotype_model(result.genotype);
        gd::CurveTable table;
        if (result.config.case_id == "weber") {
            std::vector<double> bl;
            for (const auto& b : split_list(baselines)) bl.push_back(std::stod(b));
            table = gd::emit_psychometric(truth, bl, "model", points);
            gd::append_curves(table, gd::emit_psychometric(recovered, bl, "recovered", points));
        } else if (result.config.case_id == "exp_learning") {
            std::vector<std::pair<double, double>> conditions = {
                {0.0, 1.0}, {0.2, 0.8}, {0.4, 0.9}};
            table = gd::emit_learning_curves(truth, conditions, "model", points);
            gd::append_curves(table,
                              gd::emit_learning_curves(recovered, conditions, "recovered", points));
        } else if (result.config.case_id == "lca") {
            std::vector<double> x0;
            for (const auto& v : split_list(x0_text)) x0.push_back(std::stod(v));
            auto truth_run = gd::simulate_lca(truth, x0, steps, dt, "model");
            auto rec_run = gd::simulate_lca(recovered, x0, steps, dt, "recovered");
            table = truth_run.table;
            gd::append_curves(table, rec_run.table);
            if (truth_run.diverged || rec_run.diverged)
                std::cout << "warning: trajectory diverged, truncated\n";
        } else {
            throw gd::UsageError("curves export not defined for case " + result.config.case_id);
        }
        write_file(out_path, gd::curves_to_csv(table));
    } else {
        throw gd::UsageError("unknown export format '" + format +
                             "' (valid: equation, dot, curves)");
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_summarize(const std::string& runs_dir, std::string out_path) {
    std::vector<gd::SearchResult> results;
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::string name = entry.path().filename().string();
        if (name == "manifest.json" || name.rfind("best_", 0) == 0) continue;
        try {
            results.push_back(gd::search_result_from_json(read_file(entry.path())));
        } catch (const std::exception& e) {
            std::cerr << "skipping " << name << ": " << e.what() << "\n";
        }
    }
    if (results.empty()) throw gd::UsageError("no run files found in " + runs_dir);
    gd::Summary summary = gd::summarize_results(results);
    if (out_path.empty()) out_path = (fs::path(runs_dir) / "summary.csv").string();
    write_file(out_path, gd::summary_to_csv(summary));
    for (const auto& [method, idx] : summary.best_by_method) {
        write_file(fs::path(runs_dir) / ("best_" + method + ".json"),
                   gd::search_result_to_json(results[idx]));
    }
    std::cout << gd::summary_to_csv(summary);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gdisc: recover interpretable computation-graph models from tabular data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", gd::kVersion);

    // generate
    std::string gen_case = "weber", gen_out = ".";
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("generate", "Generate a test-case dataset CSV");
    gen->add_option("--case", gen_case, "Test case id")->required();
    gen->add_option("--seed", gen_seed, "Split seed");
    gen->add_option("--out", gen_out, "Output directory");

    // search
    SearchFlags sf;
    auto* search = app.add_subcommand("search", "Run one architecture search");
    search->add_option("--method", sf.method, "regular|fair|random")->required();
    search->add_option("--case", sf.case_id, "Test case id")->required();
    search->add_option("--k", sf.k, "Intermediate nodes");
    search->add_option("--gamma", sf.gamma, "Complexity penalty");
    search->add_option("--seed", sf.seed, "Run seed");
    search->add_option("--out", sf.out_dir, "Output directory");
    search->add_option("--time-budget-s", sf.time_budget_s, "Random-search budget (seconds)");
    search->add_option("--trace", sf.trace_path, "Write the bilevel loss trace CSV here");
    add_epoch_flags(search, sf);

    // grid
    GridFlags gf;
    auto* grid = app.add_subcommand("grid", "Run a (method, k, gamma, seed) grid");
    grid->add_option("--case", gf.case_id, "Test case id")->required();
    grid->add_option("--methods", gf.methods, "Comma list of methods");
    grid->add_option("--k-set", gf.k_set, "Comma list of k values");
    grid->add_option("--gamma-set", gf.gamma_set, "Comma list of gamma values");
    grid->add_option("--seeds", gf.seeds, "Comma list / ranges, e.g. 0..9");
    grid->add_option("--workers", gf.workers, "Parallel cells (GD_WORKERS overrides default)");
    grid->add_option("--out", gf.out_dir, "Output directory")->required();
    add_epoch_flags(grid, gf.base);

    // export
    std::string exp_run, exp_format, exp_out, exp_baselines = "0,2,4", exp_x0 = "1,0.5,0";
    int exp_steps = 100, exp_points = 100;
    double exp_dt = 0.1;
    auto* exp = app.add_subcommand("export", "Export equation, DOT, or curves from a run file");
    exp->add_option("--run", exp_run, "Run JSON file")->required();
    exp->add_option("--format", exp_format, "equation|dot|curves")->required();
    exp->add_option("--out", exp_out, "Output path");
    exp->add_option("--baselines", exp_baselines, "Weber baseline intensities");
    exp->add_option("--x0", exp_x0, "LCA initial state");
    exp->add_option("--steps", exp_steps, "LCA Euler steps");
    exp->add_option("--dt", exp_dt, "LCA Euler step size");
    exp->add_option("--points", exp_points, "Curve samples per sweep");

    // summarize
    std::string sum_runs, sum_out;
    auto* sum = app.add_subcommand("summarize", "Aggregate run JSONs into a summary CSV");
    sum->add_option("--runs", sum_runs, "Directory of run JSONs")->required();
    sum->add_option("--out", sum_out, "Summary CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(gen_case, gen_seed, gen_out);
        if (search->parsed()) return cmd_search(sf);
        if (grid->parsed()) return cmd_grid(gf);
        if (exp->parsed()) return cmd_export(exp_run, exp_format, exp_out, exp_baselines, exp_x0,
                                             exp_steps, exp_dt, exp_points);
        if (sum->parsed()) return cmd_summarize(sum_runs, sum_out);
    } catch (const gd::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
