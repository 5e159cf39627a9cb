#include "gd/cases.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "gd/errors.hpp"

namespace gd {

std::string_view split_tag(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

void Dataset::add_row(std::span<const double> ivs, std::span<const double> dvs) {
    if (ivs.size() != iv_names.size() || dvs.size() != dv_names.size())
        throw UsageError("row arity does not match dataset columns");
    iv_data_.insert(iv_data_.end(), ivs.begin(), ivs.end());
    dv_data_.insert(dv_data_.end(), dvs.begin(), dvs.end());
    split_.push_back(Split::Train);
}

std::vector<int> Dataset::rows_of(Split s) const {
    std::vector<int> out;
    for (int r = 0; r < num_rows(); ++r) {
        if (split_[r] == s) out.push_back(r);
    }
    return out;
}

void Dataset::assign_splits(const std::vector<Split>& assignment) {
    if (assignment.size() != split_.size())
        throw UsageError("split assignment length does not match row count");
    split_ = assignment;
}

void split_dataset(Dataset& ds, Rng rng) {
    int n = ds.num_rows();
    if (n < 10) throw UsageError("dataset too small to split (need at least 10 rows)");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with our own bounded draw so the shuffle is identical
    // across standard libraries.
    for (int i = n - 1; i > 0; --i) {
        auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }
    int n_train = static_cast<int>(0.4 * n);
    int n_val = static_cast<int>(0.1 * n);
    std::vector<Split> assignment(n, Split::Test);
    for (int i = 0; i < n_train; ++i) assignment[order[i]] = Split::Train;
    for (int i = n_train; i < n_train + n_val; ++i) assignment[order[i]] = Split::Val;
    ds.assign_splits(assignment);
}

void split_dataset(Dataset& ds, std::uint64_t seed) { split_dataset(ds, Rng(seed)); }

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    return out;
}

double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double weber_truth(std::span<const double> iv) {
    // P(detected) = logistic((I1 - I0) - c*I0), c = 1.
    return logistic((iv[1] - iv[0]) - iv[0]);
}

double exp_learning_truth(std::span<const double> iv) {
    // Pn = Pinf - (Pinf - P0) * exp(-eps*t), eps = 5; iv = (t, P0, Pinf).
    return iv[2] - (iv[2] - iv[1]) * std::exp(-5.0 * iv[0]);
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

double lca_truth(std::span<const double> iv) {
    // dx1 for dt = 1.
    return -0.4 * iv[0] + 0.2 * relu(iv[0]) - 0.2 * (relu(iv[1]) + relu(iv[2]));
}

}  // namespace

Dataset gen_weber() {
    Dataset ds;
    ds.iv_names = {"I0", "I1"};
    ds.dv_names = {"P_detected"};
    auto grid = linspace(0.0, 5.0, 20);
    for (int a = 0; a < 20; ++a) {
        for (int b = a; b < 20; ++b) {
            double iv[2] = {grid[a], grid[b]};
            double dv[1] = {weber_truth(iv)};
            ds.add_row(iv, dv);
        }
    }
    return ds;
}

Dataset gen_exp_learning() {
    Dataset ds;
    ds.iv_names = {"t", "P0", "Pinf"};
    ds.dv_names = {"Pn"};
    auto ts = linspace(0.0, 1.0, 8);
    auto p0s = linspace(0.0, 0.4, 8);
    auto pinfs = linspace(0.5, 1.0, 8);
    for (double t : ts) {
        for (double p0 : p0s) {
            for (double pinf : pinfs) {
                double iv[3] = {t, p0, pinf};
                double dv[1] = {exp_learning_truth(iv)};
                ds.add_row(iv, dv);
            }
        }
    }
    return ds;
}

Dataset gen_lca() {
    Dataset ds;
    ds.iv_names = {"x1", "x2", "x3"};
    ds.dv_names = {"dx1"};
    auto grid = linspace(-1.0, 1.0, 8);
    for (double x1 : grid) {
        for (double x2 : grid) {
            for (double x3 : grid) {
                double iv[3] = {x1, x2, x3};
                double dv[1] = {lca_truth(iv)};
                ds.add_row(iv, dv);
            }
        }
    }
    return ds;
}

const std::vector<CaseSpec>& builtin_cases() {
    static const std::vector<CaseSpec> cases = {
        {"weber", 2, 1, OutputActivation::Logistic, &gen_weber, &weber_truth},
        {"exp_learning", 3, 1, OutputActivation::Identity, &gen_exp_learning,
         &exp_learning_truth},
        {"lca", 3, 1, OutputActivation::Identity, &gen_lca, &lca_truth},
    };
    return cases;
}

std::string valid_case_ids() {
    std::string out;
    for (const auto& c : builtin_cases()) {
        if (!out.empty()) out += ", ";
        out += c.id;
    }
    return out;
}

const CaseSpec& find_case(const std::string& id) {
    for (const auto& c : builtin_cases()) {
        if (c.id == id) return c;
    }
    throw UsageError("unknown case '" + id + "' (valid: " + valid_case_ids() + ")");
}

CurveTable emit_psychometric(const ScalarModel& model, std::span<const double> baselines,
                             std::string_view source, int points) {
    CurveTable t;
    t.columns = {"I0", "I1", "P"};
    for (double i0 : baselines) {
        auto sweep = linspace(i0, 5.0, points);
        for (double i1 : sweep) {
            double iv[2] = {i0, i1};
            t.rows.push_back({i0, i1, model(iv)});
            t.sources.emplace_back(source);
        }
    }
    return t;
}

CurveTable emit_learning_curves(const ScalarModel& model,
                                std::span<const std::pair<double, double>> conditions,
                                std::string_view source, int points) {
    CurveTable t;
    t.columns = {"t", "P0", "Pinf", "Pn"};
    for (const auto& [p0, pinf] : conditions) {
        auto sweep = linspace(0.0, 1.0, points);
        for (double tt : sweep) {
            double iv[3] = {tt, p0, pinf};
            t.rows.push_back({tt, p0, pinf, model(iv)});
            t.sources.emplace_back(source);
        }
    }
    return t;
}

TrajectoryResult simulate_lca(const ScalarModel& dx_model, std::span<const double> x0, int steps,
                              double dt, std::string_view source) {
    if (x0.size() != 3) throw UsageError("simulate_lca expects a 3-unit initial state");
    if (steps < 1 || dt <= 0.0) throw UsageError("simulate_lca requires steps >= 1 and dt > 0");
    TrajectoryResult result;
    result.table.columns = {"step", "x1", "x2", "x3"};
    double x[3] = {x0[0], x0[1], x0[2]};
    auto record = [&](int step) {
        result.table.rows.push_back({static_cast<double>(step), x[0], x[1], x[2]});
        result.table.sources.emplace_back(source);
    };
    record(0);
    for (int s = 1; s <= steps; ++s) {
        // Unit i takes the first-argument role; the others follow in
        // ascending index order.
        double in1[3] = {x[0], x[1], x[2]};
        double in2[3] = {x[1], x[0], x[2]};
        double in3[3] = {x[2], x[0], x[1]};
        double dx[3] = {dx_model(in1), dx_model(in2), dx_model(in3)};
        for (int i = 0; i < 3; ++i) x[i] += dt * dx[i];
        if (std::abs(x[0]) > 1e6 || std::abs(x[1]) > 1e6 || std::abs(x[2]) > 1e6) {
            result.diverged = true;
            record(s);
            break;
        }
        record(s);
    }
    return result;
}

void append_curves(CurveTable& into, const CurveTable& more) {
    if (into.columns.empty()) {
        into.columns = more.columns;
    } else if (into.columns != more.columns) {
        throw UsageError("cannot append curve tables with different columns");
    }
    into.rows.insert(into.rows.end(), more.rows.begin(), more.rows.end());
    into.sources.insert(into.sources.end(), more.sources.begin(), more.sources.end());
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

std::string dataset_to_csv(const Dataset& ds) {
    std::string out = "row_id";
    for (const auto& n : ds.iv_names) out += "," + n;
    for (const auto& n : ds.dv_names) out += "," + n;
    out += ",split\n";
    for (int r = 0; r < ds.num_rows(); ++r) {
        out += std::to_string(r);
        for (double v : ds.iv_row(r)) out += "," + format_double(v);
        for (double v : ds.dv_row(r)) out += "," + format_double(v);
        out += ",";
        out += split_tag(ds.split_of(r));
        out += "\n";
    }
    return out;
}

std::uint64_t dataset_checksum(const Dataset& ds) {
    std::string canon;
    for (const auto& n : ds.iv_names) canon += n + ";";
    for (const auto& n : ds.dv_names) canon += n + ";";
    for (int r = 0; r < ds.num_rows(); ++r) {
        for (double v : ds.iv_row(r)) canon += format_double(v) + ",";
        for (double v : ds.dv_row(r)) canon += format_double(v) + ",";
        canon += "\n";
    }
    return fnv1a64(canon);
}

std::string curves_to_csv(const CurveTable& t) {
    std::string out;
    for (const auto& c : t.columns) {
        out += c;
        out += ",";
    }
    out += "source\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (double v : t.rows[r]) {
            out += format_double(v);
            out += ",";
        }
        out += t.sources[r];
        out += "\n";
    }
    return out;
}

}  // namespace gd
