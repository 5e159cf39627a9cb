#include "gd/objective.hpp"

#include <cmath>

namespace gd {

std::string_view zero_one_tag(ZeroOneVariant v) {
    return v == ZeroOneVariant::AsPrinted ? "as-printed" : "magnitude";
}

ZeroOneVariant zero_one_from_tag(std::string_view tag) {
    if (tag == "as-printed") return ZeroOneVariant::AsPrinted;
    if (tag == "magnitude") return ZeroOneVariant::Magnitude;
    throw ConfigError("unknown zero-one variant: " + std::string(tag));
}

double mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size() || predictions.empty())
        throw UsageError("mse requires equal, nonzero prediction/target lengths");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double d = predictions[i] - targets[i];
        acc += d * d;
    }
    return acc / static_cast<double>(predictions.size());
}

double complexity_loss(const SuperGraph& graph, const ParamStore& store, double gamma) {
    if (gamma < 0.0) throw UsageError("gamma must be nonnegative");
    if (gamma == 0.0) return 0.0;
    double acc = 0.0;
    for (int e = 0; e < graph.num_edges(); ++e) {
        double alpha[kNumOps];
        for (int m = 0; m < kNumOps; ++m) alpha[m] = store.value(graph.alpha(e)[m]);
        auto weights = mixture_weights(alpha, graph.mode());
        for (int m = 0; m < kNumOps; ++m) {
            acc += weights[m] * op_complexity(op_from_index(m));
        }
    }
    return gamma * acc;
}

double complexity_loss(const Genotype& genotype, double gamma) {
    if (gamma < 0.0) throw UsageError("gamma must be nonnegative");
    return gamma * genotype.total_complexity();
}

namespace {

double sigma(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

double zero_one_loss(std::span<const double> alphas, double w01, ZeroOneVariant variant) {
    if (alphas.empty()) throw UsageError("zero_one_loss requires at least one weight");
    double acc = 0.0;
    for (double a : alphas) {
        double d = sigma(a) - 0.5;
        acc += variant == ZeroOneVariant::AsPrinted ? d : std::abs(d);
    }
    return -w01 * acc / static_cast<double>(alphas.size());
}

LossNodes build_total_loss(Tape& tape, const SuperGraph& graph, const Dataset& ds,
                           const std::vector<int>& rows, double gamma, ZeroOneVariant variant) {
    if (rows.empty()) throw UsageError("loss over an empty split");
    const int num_outputs = graph.shape().outputs;
    if (ds.num_dvs() != num_outputs || ds.num_ivs() != graph.shape().inputs)
        throw ConfigError("dataset columns do not match graph shape");

    std::vector<std::array<int, kNumOps>> weights;
    weights.reserve(graph.num_edges());
    for (int e = 0; e < graph.num_edges(); ++e) {
        weights.push_back(graph.build_mixture_weights(tape, e));
    }

    LossNodes nodes;

    int se_acc = -1;
    for (int r : rows) {
        auto outputs = graph.forward(tape, ds.iv_row(r), weights);
        auto targets = ds.dv_row(r);
        for (int j = 0; j < num_outputs; ++j) {
            int diff = tape.add(outputs[j], tape.constant(-targets[j]));
            int sq = tape.mul(diff, diff);
            se_acc = se_acc < 0 ? sq : tape.add(se_acc, sq);
        }
    }
    double inv_n = 1.0 / (static_cast<double>(rows.size()) * num_outputs);
    nodes.mse = tape.mul(se_acc, tape.constant(inv_n));

    if (gamma > 0.0) {
        int comp_acc = -1;
        for (int e = 0; e < graph.num_edges(); ++e) {
            for (int m = 0; m < kNumOps; ++m) {
                int p = op_complexity(op_from_index(m));
                if (p == 0) continue;
                int term = tape.mul(weights[e][m], tape.constant(static_cast<double>(p)));
                comp_acc = comp_acc < 0 ? term : tape.add(comp_acc, term);
            }
        }
        nodes.complexity = tape.mul(comp_acc, tape.constant(gamma));
    } else {
        nodes.complexity = tape.constant(0.0);
    }

    if (graph.mode() == MixtureMode::Fair) {
        // In fair mode the mixture weights are exactly sigma(alpha); reuse
        // those nodes for the zero-one term.
        int acc = -1;
        int count = 0;
        int half = tape.constant(-0.5);
        for (int e = 0; e < graph.num_edges(); ++e) {
            for (int m = 0; m < kNumOps; ++m) {
                int dev = tape.add(weights[e][m], half);
                if (variant == ZeroOneVariant::Magnitude) {
                    dev = tape.add(tape.relu(dev), tape.relu(tape.neg(dev)));
                }
                acc = acc < 0 ? dev : tape.add(acc, dev);
                ++count;
            }
        }
        nodes.zero_one = tape.mul(acc, tape.constant(-kZeroOneWeight / count));
    } else {
        nodes.zero_one = tape.constant(0.0);
    }

    nodes.total = tape.add(tape.add(nodes.mse, nodes.complexity), nodes.zero_one);
    return nodes;
}

LossBreakdown compute_total_loss(Tape& tape, const SuperGraph& graph, ParamStore& store,
                                 const Dataset& ds, const std::vector<int>& rows, double gamma,
                                 ZeroOneVariant variant, bool gradients) {
    tape.clear();
    LossNodes nodes = build_total_loss(tape, graph, ds, rows, gamma, variant);
    LossBreakdown out;
    out.mse = tape.value(nodes.mse);
    out.complexity = tape.value(nodes.complexity);
    out.zero_one = tape.value(nodes.zero_one);
    out.total = tape.value(nodes.total);
    out.gamma = gamma;
    if (gradients) {
        store.zero_grads();
        tape.backward(nodes.total, store);
    }
    return out;
}

LossBreakdown total_loss(const SuperGraph& graph, ParamStore& store, const Dataset& ds,
                         Split split, double gamma, ZeroOneVariant variant) {
    Tape tape(&store);
    return compute_total_loss(tape, graph, store, ds, ds.rows_of(split), gamma, variant, false);
}

double genotype_mse(const Genotype& g, const Dataset& ds, const std::vector<int>& rows) {
    if (rows.empty()) throw UsageError("loss over an empty split");
    double acc = 0.0;
    for (int r : rows) {
        auto out = eval_genotype(g, ds.iv_row(r));
        auto targets = ds.dv_row(r);
        for (std::size_t j = 0; j < out.size(); ++j) {
            double d = out[j] - targets[j];
            acc += d * d;
        }
    }
    return acc / (static_cast<double>(rows.size()) * g.shape.outputs);
}

LossBreakdown genotype_loss(const Genotype& g, const Dataset& ds, const std::vector<int>& rows,
                            double gamma) {
    LossBreakdown out;
    out.mse = genotype_mse(g, ds, rows);
    out.complexity = complexity_loss(g, gamma);
    out.zero_one = 0.0;
    out.total = out.mse + out.complexity;
    out.gamma = gamma;
    return out;
}

}  // namespace gd
