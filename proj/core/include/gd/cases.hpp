#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gd/graph.hpp"
#include "gd/rng.hpp"

namespace gd {

enum class Split : std::uint8_t { Train, Val, Test };

std::string_view split_tag(Split s);

// Named IV/DV columns with a deterministic 40/10/50 row partition.
// Rows keep generation order; row_id records it explicitly.
class Dataset {
public:
    std::vector<std::string> iv_names;
    std::vector<std::string> dv_names;

    int num_rows() const { return static_cast<int>(split_.size()); }
    int num_ivs() const { return static_cast<int>(iv_names.size()); }
    int num_dvs() const { return static_cast<int>(dv_names.size()); }

    void add_row(std::span<const double> ivs, std::span<const double> dvs);

    std::span<const double> iv_row(int r) const {
        return {iv_data_.data() + static_cast<std::size_t>(r) * iv_names.size(), iv_names.size()};
    }
    std::span<const double> dv_row(int r) const {
        return {dv_data_.data() + static_cast<std::size_t>(r) * dv_names.size(), dv_names.size()};
    }
    Split split_of(int r) const { return split_[r]; }

    std::vector<int> rows_of(Split s) const;
    void assign_splits(const std::vector<Split>& assignment);

private:
    std::vector<double> iv_data_;
    std::vector<double> dv_data_;
    std::vector<Split> split_;  // defaults to Train until split() runs
};

// Seeded uniform shuffle, then contiguous assignment: first floor(0.4 n)
// rows train, next floor(0.1 n) validation, remainder test.
void split_dataset(Dataset& ds, Rng rng);
void split_dataset(Dataset& ds, std::uint64_t seed);

// Weber's law detection probabilities: all pairs of 20 evenly spaced
// intensities in [0, 5] with I0 <= I1; P = logistic((I1 - I0) - I0).
Dataset gen_weber();

// Exponential learning: full 8x8x8 crossing of t in [0,1], P0 in [0,0.4],
// Pinf in [0.5,1]; Pn = Pinf - (Pinf - P0) * exp(-5 t).
Dataset gen_exp_learning();

// Leaky competing accumulator drift for unit 1: full 8x8x8 crossing of
// x1,x2,x3 in [-1,1]; dx1 = -0.4 x1 + 0.2 relu(x1) - 0.2 (relu(x2) + relu(x3)).
Dataset gen_lca();

// A built-in test case: generator plus ground-truth closure for exports.
struct CaseSpec {
    std::string id;
    int ivs = 1;
    int dvs = 1;
    OutputActivation activation = OutputActivation::Identity;
    Dataset (*generate)() = nullptr;
    double (*ground_truth)(std::span<const double>) = nullptr;
};

const std::vector<CaseSpec>& builtin_cases();
const CaseSpec& find_case(const std::string& id);  // UsageError lists valid ids
std::string valid_case_ids();

// Scalar model used by the curve emitters.
using ScalarModel = std::function<double(std::span<const double>)>;

struct CurveTable {
    std::vector<std::string> columns;  // numeric columns; a source tag follows
    std::vector<std::vector<double>> rows;
    std::vector<std::string> sources;  // per row
};

// Psychometric curves: for each baseline I0, sweep I1 over [I0, 5] with
// `points` samples. Columns (I0, I1, P).
CurveTable emit_psychometric(const ScalarModel& model, std::span<const double> baselines,
                             std::string_view source, int points = 100);

// Learning curves: per (P0, Pinf) condition, sweep t over [0, 1].
// Columns (t, P0, Pinf, Pn).
CurveTable emit_learning_curves(const ScalarModel& model,
                                std::span<const std::pair<double, double>> conditions,
                                std::string_view source, int points = 100);

// Explicit Euler rollout of the three-unit dynamics; the dx model is applied
// to each unit by rotating it into the first-argument role. Truncates with
// diverged=true once any |x| exceeds 1e6. Columns (step, x1, x2, x3).
struct TrajectoryResult {
    CurveTable table;
    bool diverged = false;
};
TrajectoryResult simulate_lca(const ScalarModel& dx_model, std::span<const double> x0, int steps,
                              double dt, std::string_view source);

void append_curves(CurveTable& into, const CurveTable& more);

// CSV with header row_id, IV names, DV names, split.
std::string dataset_to_csv(const Dataset& ds);

// Checksum of the generated rows (before any split), for run manifests.
std::uint64_t dataset_checksum(const Dataset& ds);

std::string curves_to_csv(const CurveTable& t);

}  // namespace gd
