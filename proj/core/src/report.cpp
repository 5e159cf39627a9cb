#include "gd/report.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>

#include <unistd.h>

#include <nlohmann/json.hpp>

namespace gd {

using ordered_json = nlohmann::ordered_json;

namespace {

// Atomic if there is no top-level operator, i.e. no space outside parens.
bool is_atom(const std::string& expr) {
    int depth = 0;
    for (char c : expr) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ' ' && depth == 0) return false;
    }
    return true;
}

std::string join_terms(const std::vector<std::string>& terms) {
    if (terms.empty()) return "0";
    std::string out = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) {
        const std::string& t = terms[i];
        if (!t.empty() && t[0] == '-') {
            out += " - " + t.substr(1);
        } else {
            out += " + " + t;
        }
    }
    return out;
}

// Expressions for all intermediate nodes, fully substituted.
std::vector<std::string> intermediate_exprs(const Genotype& g,
                                            const std::vector<std::string>& iv_names,
                                            int decimals) {
    const auto& shape = g.shape;
    std::vector<std::string> exprs(shape.intermediates);
    for (int j = 0; j < shape.intermediates; ++j) {
        int node = shape.inputs + j;
        std::vector<std::string> terms;
        for (const auto& e : g.edges) {
            if (e.to != node || e.op == OpKind::Zero) continue;
            std::string arg;
            if (e.from < shape.inputs) {
                arg = iv_names[e.from];
            } else {
                const std::string& src = exprs[e.from - shape.inputs];
                arg = is_atom(src) ? src : "(" + src + ")";
            }
            terms.push_back(render_op_values(e.op, e.params, arg, decimals));
        }
        exprs[j] = join_terms(terms);
    }
    return exprs;
}

}  // namespace

std::string render_equation(const Genotype& g, const std::vector<std::string>& iv_names,
                            const std::vector<std::string>& dv_names, int decimals) {
    auto exprs = intermediate_exprs(g, iv_names, decimals);
    std::string out;
    for (int j = 0; j < g.shape.outputs; ++j) {
        std::vector<std::string> terms;
        for (int i = 0; i < g.shape.intermediates; ++i) {
            if (exprs[i] == "0") continue;  // zero-op branch, dropped
            std::string arg = is_atom(exprs[i]) ? exprs[i] : "(" + exprs[i] + ")";
            terms.push_back(format_coeff(g.out_weights[i][j], decimals) + " * " + arg);
        }
        std::string rhs = join_terms(terms);
        if (g.shape.activation == OutputActivation::Logistic) rhs = "logistic(" + rhs + ")";
        if (!out.empty()) out += "\n";
        out += dv_names[j] + " = " + rhs;
    }
    return out;
}

std::string genotype_to_dot(const Genotype& g, const std::vector<std::string>& iv_names,
                            const std::vector<std::string>& dv_names, int decimals) {
    const auto& shape = g.shape;
    auto node_name = [&](int node) -> std::string {
        if (node < shape.inputs) return iv_names[node];
        return "h" + std::to_string(node - shape.inputs + 1);
    };
    std::string out = "digraph genotype {\n  rankdir=LR;\n";
    for (int i = 0; i < shape.inputs; ++i) {
        out += "  \"" + iv_names[i] + "\" [shape=box];\n";
    }
    for (int i = 0; i < shape.intermediates; ++i) {
        out += "  \"h" + std::to_string(i + 1) + "\" [shape=circle];\n";
    }
    for (int j = 0; j < shape.outputs; ++j) {
        out += "  \"" + dv_names[j] + "\" [shape=doublecircle];\n";
    }
    for (const auto& e : g.edges) {
        if (e.op == OpKind::Zero) continue;  // no connection
        std::string label = render_op_values(e.op, e.params, "x", decimals);
        out += "  \"" + node_name(e.from) + "\" -> \"" + node_name(e.to) + "\" [label=\"" +
               label + "\"];\n";
    }
    for (int i = 0; i < shape.intermediates; ++i) {
        for (int j = 0; j < shape.outputs; ++j) {
            out += "  \"h" + std::to_string(i + 1) + "\" -> \"" + dv_names[j] + "\" [label=\"" +
                   format_coeff(g.out_weights[i][j], decimals) + "\"];\n";
        }
    }
    out += "}\n";
    return out;
}

namespace {

ordered_json sgd_to_json(const SgdConfig& c) {
    return {{"lr_init", c.lr_init},
            {"lr_min", c.lr_min},
            {"momentum", c.momentum},
            {"weight_decay", c.weight_decay},
            {"epochs", c.epochs}};
}

SgdConfig sgd_from_json(const ordered_json& j) {
    SgdConfig c;
    c.lr_init = j.at("lr_init").get<double>();
    c.lr_min = j.at("lr_min").get<double>();
    c.momentum = j.at("momentum").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.epochs = j.at("epochs").get<int>();
    return c;
}

ordered_json adam_to_json(const AdamConfig& c) {
    return {{"lr", c.lr},          {"beta1", c.beta1}, {"beta2", c.beta2},
            {"weight_decay", c.weight_decay}, {"eps", c.eps},     {"epochs", c.epochs}};
}

AdamConfig adam_from_json(const ordered_json& j) {
    AdamConfig c;
    c.lr = j.at("lr").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.eps = j.at("eps").get<double>();
    c.epochs = j.at("epochs").get<int>();
    return c;
}

ordered_json config_to_json_obj(const SearchConfig& c) {
    ordered_json j;
    j["method"] = method_tag(c.method);
    j["case"] = c.case_id;
    j["k"] = c.k;
    j["gamma"] = c.gamma;
    j["seed"] = c.seed;
    j["bilevel"] = {{"rounds", c.bilevel.rounds}, {"schedule", schedule_tag(c.bilevel.schedule)}};
    j["sgd"] = sgd_to_json(c.sgd);
    j["adam"] = adam_to_json(c.adam);
    j["retrain"] = sgd_to_json(c.retrain);
    j["retrain_inits"] = c.retrain_inits;
    j["zero_one_variant"] = zero_one_tag(c.zero_one_variant);
    if (c.time_budget_s) {
        j["time_budget_s"] = *c.time_budget_s;
    } else {
        j["time_budget_s"] = nullptr;
    }
    return j;
}

SearchConfig config_from_json_obj(const ordered_json& j) {
    SearchConfig c;
    c.method = method_from_tag(j.at("method").get<std::string>());
    c.case_id = j.at("case").get<std::string>();
    c.k = j.at("k").get<int>();
    c.gamma = j.at("gamma").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.bilevel.rounds = j.at("bilevel").at("rounds").get<int>();
    c.bilevel.schedule = schedule_from_tag(j.at("bilevel").at("schedule").get<std::string>());
    c.sgd = sgd_from_json(j.at("sgd"));
    c.adam = adam_from_json(j.at("adam"));
    c.retrain = sgd_from_json(j.at("retrain"));
    c.retrain_inits = j.at("retrain_inits").get<int>();
    c.zero_one_variant = zero_one_from_tag(j.at("zero_one_variant").get<std::string>());
    if (!j.at("time_budget_s").is_null()) c.time_budget_s = j.at("time_budget_s").get<double>();
    return c;
}

ordered_json loss_to_json(const LossBreakdown& l) {
    return {{"mse", l.mse},
            {"complexity", l.complexity},
            {"zero_one", l.zero_one},
            {"total", l.total},
            {"gamma", l.gamma}};
}

LossBreakdown loss_from_json(const ordered_json& j) {
    LossBreakdown l;
    l.mse = j.at("mse").get<double>();
    l.complexity = j.at("complexity").get<double>();
    l.zero_one = j.at("zero_one").get<double>();
    l.total = j.at("total").get<double>();
    l.gamma = j.at("gamma").get<double>();
    return l;
}

ordered_json genotype_to_json_obj(const Genotype& g) {
    return ordered_json::parse(genotype_to_json(g));
}

}  // namespace

std::string search_config_to_json(const SearchConfig& c) { return config_to_json_obj(c).dump(2); }

SearchConfig search_config_from_json(const std::string& text) {
    return config_from_json_obj(ordered_json::parse(text));
}

std::string search_result_to_json(const SearchResult& r) {
    ordered_json j;
    j["config"] = config_to_json_obj(r.config);
    j["status"] = r.status == RunStatus::Ok ? "ok" : "failed";
    j["error"] = r.error;
    j["genotype"] = genotype_to_json_obj(r.genotype);
    j["equation"] = r.equation;
    j["losses"] = {{"train", loss_to_json(r.train_loss)},
                   {"val", loss_to_json(r.val_loss)},
                   {"test", loss_to_json(r.test_loss)}};
    j["retrain_summary"] = ordered_json::array();
    for (const auto& init : r.retrain_summary) {
        j["retrain_summary"].push_back({{"init", init.init},
                                        {"ok", init.ok},
                                        {"train_mse", init.train_mse},
                                        {"val_mse", init.val_mse},
                                        {"selected", init.selected}});
    }
    j["candidates"] = r.candidates;
    j["sampled_keys"] = r.sampled_keys;
    j["exp_clamp_events"] = r.exp_clamp_events;
    j["budget_used_s"] = r.budget_used_s;
    j["wall_time_s"] = r.wall_time_s;
    return j.dump(2);
}

SearchResult search_result_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    SearchResult r;
    r.config = config_from_json_obj(j.at("config"));
    std::string status = j.at("status").get<std::string>();
    if (status != "ok" && status != "failed")
        throw ConfigError("unknown run status: " + status);
    r.status = status == "ok" ? RunStatus::Ok : RunStatus::Failed;
    r.error = j.at("error").get<std::string>();
    r.genotype = genotype_from_json(j.at("genotype").dump());
    r.equation = j.at("equation").get<std::string>();
    r.train_loss = loss_from_json(j.at("losses").at("train"));
    r.val_loss = loss_from_json(j.at("losses").at("val"));
    r.test_loss = loss_from_json(j.at("losses").at("test"));
    for (const auto& ji : j.at("retrain_summary")) {
        RetrainInit init;
        init.init = ji.at("init").get<int>();
        init.ok = ji.at("ok").get<bool>();
        init.train_mse = ji.at("train_mse").get<double>();
        init.val_mse = ji.at("val_mse").get<double>();
        init.selected = ji.at("selected").get<bool>();
        r.retrain_summary.push_back(init);
    }
    r.candidates = j.at("candidates").get<long>();
    r.sampled_keys = j.at("sampled_keys").get<std::vector<std::uint64_t>>();
    r.exp_clamp_events = j.at("exp_clamp_events").get<long>();
    r.budget_used_s = j.at("budget_used_s").get<double>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    return r;
}

std::string format_gamma(double gamma) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), gamma);
    (void)ec;
    return std::string(buf, ptr);
}

std::string run_file_name(const SearchConfig& c) {
    return c.case_id + "_" + std::string(method_tag(c.method)) + "_k" + std::to_string(c.k) +
           "_g" + format_gamma(c.gamma) + "_s" + std::to_string(c.seed) + ".json";
}

std::string summary_to_csv(const Summary& summary) {
    std::string out = "case,method,k,gamma,n,mean_test_mse,sem_test_mse,best_val_flag,excluded\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        (void)ec;
        return std::string(buf, ptr);
    };
    for (const auto& row : summary.rows) {
        out += row.case_id + "," + std::string(method_tag(row.method)) + "," +
               std::to_string(row.k) + "," + format_gamma(row.gamma) + "," +
               std::to_string(row.n) + "," + fmt(row.mean_test_mse) + "," +
               fmt(row.sem_test_mse) + "," + (row.best_val_flag ? "1" : "0") + "," +
               std::to_string(row.excluded) + "\n";
    }
    return out;
}

std::string iso8601_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hostname_string() {
    char buf[256] = {0};
    if (gethostname(buf, sizeof(buf) - 1) != 0) return "unknown";
    return buf;
}

std::string checksum_hex(std::uint64_t checksum) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(checksum));
    return buf;
}

}  // namespace gd
