#pragma once

#include <span>
#include <vector>

#include "gd/cases.hpp"
#include "gd/graph.hpp"

namespace gd {

// The printed form of the zero-one loss is linear in sigma(alpha) and pulls
// every weight toward 1; the magnitude form pulls away from 0.5 in both
// directions. Default is as-printed; the variant is a config switch.
enum class ZeroOneVariant : std::uint8_t { AsPrinted, Magnitude };

std::string_view zero_one_tag(ZeroOneVariant v);
ZeroOneVariant zero_one_from_tag(std::string_view tag);

inline constexpr double kZeroOneWeight = 1.0;  // w_{0-1}

struct LossBreakdown {
    double mse = 0.0;
    double complexity = 0.0;
    double zero_one = 0.0;
    double total = 0.0;
    double gamma = 0.0;

    bool operator==(const LossBreakdown&) const = default;
};

// Mean of squared differences over all (row, output) pairs.
double mse(std::span<const double> predictions, std::span<const double> targets);

// Mixture-weighted expected complexity, differentiable in alpha:
// gamma * sum_edges sum_m g_m(alpha) * p(o_m).
double complexity_loss(const SuperGraph& graph, const ParamStore& store, double gamma);

// For a discrete architecture the penalty is exact: gamma * sum p(chosen).
double complexity_loss(const Genotype& genotype, double gamma);

// -w01 * (1/N) * sum_l (sigma(alpha_l) - 0.5), or the magnitude variant.
double zero_one_loss(std::span<const double> alphas, double w01,
                     ZeroOneVariant variant = ZeroOneVariant::AsPrinted);

struct LossNodes {
    int mse = -1;
    int complexity = -1;
    int zero_one = -1;
    int total = -1;
};

// Builds the full total-loss expression for the given rows on one tape:
// data MSE, expected complexity, and (fair mode) the zero-one term. All
// terms share the edge mixture-weight subgraphs, so gradients wrt alpha
// flow through every component.
LossNodes build_total_loss(Tape& tape, const SuperGraph& graph, const Dataset& ds,
                           const std::vector<int>& rows, double gamma,
                           ZeroOneVariant variant = ZeroOneVariant::AsPrinted);

// Evaluates the breakdown (and optionally gradients) on a scratch tape.
// With gradients=true the store's grads are zeroed and then accumulated
// from d(total)/d(param).
LossBreakdown compute_total_loss(Tape& tape, const SuperGraph& graph, ParamStore& store,
                                 const Dataset& ds, const std::vector<int>& rows, double gamma,
                                 ZeroOneVariant variant, bool gradients);

LossBreakdown total_loss(const SuperGraph& graph, ParamStore& store, const Dataset& ds,
                         Split split, double gamma,
                         ZeroOneVariant variant = ZeroOneVariant::AsPrinted);

// Plain-double losses of a discrete architecture on a set of rows.
double genotype_mse(const Genotype& g, const Dataset& ds, const std::vector<int>& rows);
LossBreakdown genotype_loss(const Genotype& g, const Dataset& ds, const std::vector<int>& rows,
                            double gamma);

}  // namespace gd
