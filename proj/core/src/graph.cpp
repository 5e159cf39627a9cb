#include "gd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace gd {

using ordered_json = nlohmann::ordered_json;

std::string_view activation_tag(OutputActivation a) {
    return a == OutputActivation::Identity ? "identity" : "logistic";
}

OutputActivation activation_from_tag(std::string_view tag) {
    if (tag == "identity") return OutputActivation::Identity;
    if (tag == "logistic") return OutputActivation::Logistic;
    throw ConfigError("unknown output activation: " + std::string(tag));
}

std::string_view mixture_tag(MixtureMode m) {
    return m == MixtureMode::Regular ? "regular" : "fair";
}

int edge_count(int inputs, int intermediates) {
    if (inputs < 1 || intermediates < 1)
        throw UsageError("edge_count requires at least one input and one intermediate node");
    int total = 0;
    for (int j = 1; j <= intermediates; ++j) total += inputs + j - 1;
    return total;
}

SpaceSize search_space_size(int inputs, int intermediates, int num_ops) {
    if (num_ops < 1) throw UsageError("search_space_size requires at least one op");
    int edges = edge_count(inputs, intermediates);
    SpaceSize out{1, true};
    for (int e = 0; e < edges; ++e) {
        std::uint64_t m = static_cast<std::uint64_t>(num_ops);
        if (out.value > std::numeric_limits<std::uint64_t>::max() / m) {
            out.value = std::numeric_limits<std::uint64_t>::max();
            out.exact = false;
            return out;
        }
        out.value *= m;
    }
    return out;
}

std::array<double, kNumOps> mixture_weights(std::span<const double> alpha, MixtureMode mode) {
    if (alpha.size() != kNumOps) throw UsageError("mixture_weights expects 8 architecture weights");
    std::array<double, kNumOps> w{};
    if (mode == MixtureMode::Fair) {
        for (int m = 0; m < kNumOps; ++m) {
            double a = alpha[m];
            w[m] = a >= 0.0 ? 1.0 / (1.0 + std::exp(-a)) : std::exp(a) / (1.0 + std::exp(a));
        }
        return w;
    }
    double maxv = *std::max_element(alpha.begin(), alpha.end());
    double sum = 0.0;
    for (int m = 0; m < kNumOps; ++m) {
        w[m] = std::exp(alpha[m] - maxv);
        sum += w[m];
    }
    for (int m = 0; m < kNumOps; ++m) w[m] /= sum;
    return w;
}

SuperGraph::SuperGraph(GraphShape shape, MixtureMode mode, ParamStore& store, Rng& rng)
    : shape_(shape), mode_(mode) {
    if (shape.inputs < 1 || shape.intermediates < 1 || shape.outputs < 1)
        throw UsageError("graph shape must have S, K, D >= 1");
    // Canonical edge order: intermediates in sequence, predecessors by index.
    for (int j = 0; j < shape.intermediates; ++j) {
        int target = shape.inputs + j;
        for (int i = 0; i < shape.inputs + j; ++i) {
            edges_.push_back(Edge{i, target});
        }
    }
    alpha_.reserve(edges_.size());
    ops_.reserve(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        std::array<ParamId, kNumOps> a{};
        for (int m = 0; m < kNumOps; ++m) a[m] = store.add(0.0, ParamRole::Arch);
        alpha_.push_back(a);
        std::array<OpInstance, kNumOps> ops{};
        for (int m = 0; m < kNumOps; ++m) ops[m] = make_op(op_from_index(m), store, rng);
        ops_.push_back(ops);
    }
    out_w_.resize(shape.intermediates);
    for (int i = 0; i < shape.intermediates; ++i) {
        out_w_[i].resize(shape.outputs);
        for (int j = 0; j < shape.outputs; ++j) {
            out_w_[i][j] = store.add(rng.uniform(-1.0, 1.0), ParamRole::OutWeight);
        }
    }
}

std::vector<ParamId> SuperGraph::alpha_ids() const {
    std::vector<ParamId> ids;
    ids.reserve(alpha_.size() * kNumOps);
    for (const auto& a : alpha_) ids.insert(ids.end(), a.begin(), a.end());
    return ids;
}

std::array<int, kNumOps> SuperGraph::build_mixture_weights(Tape& tape, int edge) const {
    std::array<int, kNumOps> nodes{};
    const auto& a = alpha_[edge];
    if (mode_ == MixtureMode::Fair) {
        for (int m = 0; m < kNumOps; ++m) nodes[m] = tape.logistic(tape.param(a[m]));
        return nodes;
    }
    // Softmax with max subtraction. The max is a constant on the tape; the
    // softmax value (and gradient) is invariant to that shift.
    std::array<int, kNumOps> param_nodes{};
    double maxv = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < kNumOps; ++m) {
        param_nodes[m] = tape.param(a[m]);
        maxv = std::max(maxv, tape.value(param_nodes[m]));
    }
    std::array<int, kNumOps> exps{};
    int shift = tape.constant(-maxv);
    for (int m = 0; m < kNumOps; ++m) {
        exps[m] = tape.exp(tape.add(param_nodes[m], shift));
    }
    int sum = exps[0];
    for (int m = 1; m < kNumOps; ++m) sum = tape.add(sum, exps[m]);
    int inv = tape.recip(sum);
    for (int m = 0; m < kNumOps; ++m) nodes[m] = tape.mul(exps[m], inv);
    return nodes;
}

std::vector<int> SuperGraph::forward(
    Tape& tape, std::span<const double> row_inputs,
    const std::vector<std::array<int, kNumOps>>& edge_weight_nodes) const {
    if (static_cast<int>(row_inputs.size()) != shape_.inputs)
        throw ConfigError("row has wrong number of inputs");
    std::vector<int> node_ids(shape_.inputs + shape_.intermediates, -1);
    for (int i = 0; i < shape_.inputs; ++i) node_ids[i] = tape.constant(row_inputs[i]);

    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& edge = edges_[e];
        int x = node_ids[edge.from];
        int mixed = -1;
        for (int m = 0; m < kNumOps; ++m) {
            if (op_from_index(m) == OpKind::Zero) continue;  // contributes w * 0
            int term = tape.mul(edge_weight_nodes[e][m], apply_op(tape, ops_[e][m], x));
            mixed = mixed < 0 ? term : tape.add(mixed, term);
        }
        int& target = node_ids[edge.to];
        target = target < 0 ? mixed : tape.add(target, mixed);
    }

    std::vector<int> outputs(shape_.outputs, -1);
    for (int j = 0; j < shape_.outputs; ++j) {
        int acc = -1;
        for (int i = 0; i < shape_.intermediates; ++i) {
            int term = tape.mul(tape.param(out_w_[i][j]), node_ids[shape_.inputs + i]);
            acc = acc < 0 ? term : tape.add(acc, term);
        }
        if (shape_.activation == OutputActivation::Logistic) acc = tape.logistic(acc);
        outputs[j] = acc;
    }
    return outputs;
}

std::vector<double> SuperGraph::forward_values(const ParamStore& store,
                                               std::span<const double> row_inputs) const {
    Tape tape(&store);
    std::vector<std::array<int, kNumOps>> weights;
    weights.reserve(edges_.size());
    for (int e = 0; e < num_edges(); ++e) weights.push_back(build_mixture_weights(tape, e));
    std::vector<int> out = forward(tape, row_inputs, weights);
    std::vector<double> values(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) values[j] = tape.value(out[j]);
    return values;
}

Genotype SuperGraph::discretize(const ParamStore& store) const {
    Genotype g;
    g.shape = shape_;
    g.edges.reserve(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        // Argmax over raw alpha; softmax and sigmoid are monotone so the
        // choice coincides. Ties break toward the lowest op index.
        int best = 0;
        double best_v = store.value(alpha_[e][0]);
        for (int m = 1; m < kNumOps; ++m) {
            double v = store.value(alpha_[e][m]);
            if (v > best_v) {
                best = m;
                best_v = v;
            }
        }
        GenotypeEdge ge;
        ge.from = edges_[e].from;
        ge.to = edges_[e].to;
        ge.op = op_from_index(best);
        const OpInstance& inst = ops_[e][best];
        if (inst.a >= 0) ge.params.push_back(store.value(inst.a));
        if (inst.b >= 0) ge.params.push_back(store.value(inst.b));
        g.edges.push_back(std::move(ge));
    }
    g.out_weights.resize(shape_.intermediates);
    for (int i = 0; i < shape_.intermediates; ++i) {
        g.out_weights[i].resize(shape_.outputs);
        for (int j = 0; j < shape_.outputs; ++j) {
            g.out_weights[i][j] = store.value(out_w_[i][j]);
        }
    }
    return g;
}

int Genotype::total_complexity() const {
    int total = 0;
    for (const auto& e : edges) total += op_complexity(e.op);
    return total;
}

std::vector<double> eval_genotype(const Genotype& g, std::span<const double> inputs) {
    if (static_cast<int>(inputs.size()) != g.shape.inputs)
        throw ConfigError("row has wrong number of inputs");
    std::vector<double> values(g.shape.inputs + g.shape.intermediates, 0.0);
    for (int i = 0; i < g.shape.inputs; ++i) values[i] = inputs[i];
    for (const auto& e : g.edges) {
        values[e.to] += apply_op_value(e.op, e.params, values[e.from]);
    }
    std::vector<double> out(g.shape.outputs, 0.0);
    for (int j = 0; j < g.shape.outputs; ++j) {
        double acc = 0.0;
        for (int i = 0; i < g.shape.intermediates; ++i) {
            acc += g.out_weights[i][j] * values[g.shape.inputs + i];
        }
        if (g.shape.activation == OutputActivation::Logistic) {
            acc = acc >= 0.0 ? 1.0 / (1.0 + std::exp(-acc)) : std::exp(acc) / (1.0 + std::exp(acc));
        }
        out[j] = acc;
    }
    return out;
}

std::uint64_t genotype_key(const Genotype& g) {
    std::uint64_t key = 0;
    for (const auto& e : g.edges) {
        key = (key << 3) | static_cast<std::uint64_t>(op_index(e.op));
    }
    return key;
}

std::string genotype_to_json(const Genotype& g) {
    ordered_json j;
    j["shape"] = {{"S", g.shape.inputs},
                  {"K", g.shape.intermediates},
                  {"D", g.shape.outputs},
                  {"activation", activation_tag(g.shape.activation)}};
    j["edges"] = ordered_json::array();
    for (const auto& e : g.edges) {
        ordered_json je;
        je["from"] = e.from;
        je["to"] = e.to;
        je["op"] = op_tag(e.op);
        je["params"] = e.params;
        j["edges"].push_back(je);
    }
    j["out_weights"] = g.out_weights;
    return j.dump(2);
}

static Genotype genotype_from_parsed(const ordered_json& j) {
    Genotype g;
    g.shape.inputs = j.at("shape").at("S").get<int>();
    g.shape.intermediates = j.at("shape").at("K").get<int>();
    g.shape.outputs = j.at("shape").at("D").get<int>();
    g.shape.activation = activation_from_tag(j.at("shape").at("activation").get<std::string>());
    for (const auto& je : j.at("edges")) {
        GenotypeEdge e;
        e.from = je.at("from").get<int>();
        e.to = je.at("to").get<int>();
        auto kind = op_from_tag(je.at("op").get<std::string>());
        if (!kind) throw ConfigError("unknown op tag in genotype: " + je.at("op").dump());
        e.op = *kind;
        e.params = je.at("params").get<std::vector<double>>();
        g.edges.push_back(std::move(e));
    }
    g.out_weights = j.at("out_weights").get<std::vector<std::vector<double>>>();
    return g;
}

Genotype genotype_from_json(const std::string& text) {
    return genotype_from_parsed(ordered_json::parse(text));
}

}  // namespace gd
