#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gd/ops.hpp"

namespace gd {

enum class OutputActivation : std::uint8_t { Identity, Logistic };

std::string_view activation_tag(OutputActivation a);
OutputActivation activation_from_tag(std::string_view tag);

// How edge mixtures are weighted: competitive softmax over the edge's
// architecture weights, or independent per-op sigmoids.
enum class MixtureMode : std::uint8_t { Regular, Fair };

std::string_view mixture_tag(MixtureMode m);

struct GraphShape {
    int inputs = 1;         // S
    int intermediates = 1;  // K
    int outputs = 1;        // D
    OutputActivation activation = OutputActivation::Identity;

    bool operator==(const GraphShape&) const = default;
};

// Node j receives one edge from every input and every earlier intermediate:
// sum_{j=1..K} (S + j - 1).
int edge_count(int inputs, int intermediates);

struct SpaceSize {
    std::uint64_t value = 0;
    bool exact = true;  // false when saturated at uint64 max
};

// M^edge_count(S, K), saturating on overflow.
SpaceSize search_space_size(int inputs, int intermediates, int num_ops);

// Per-edge mixture weights from the 8 architecture weights. Regular mode is
// a max-subtracted softmax (sums to 1); fair mode is elementwise logistic.
std::array<double, kNumOps> mixture_weights(std::span<const double> alpha, MixtureMode mode);

struct Edge {
    int from = 0;  // node index: inputs are 0..S-1, intermediates S..S+K-1
    int to = 0;    // always an intermediate node
};

// The relaxed search cell. Node values are scalars; every intermediate mixes
// all candidate operations on each incoming edge, outputs linearly combine
// the intermediates (no output bias).
class SuperGraph {
public:
    SuperGraph(GraphShape shape, MixtureMode mode, ParamStore& store, Rng& rng);

    const GraphShape& shape() const { return shape_; }
    MixtureMode mode() const { return mode_; }
    const std::vector<Edge>& edges() const { return edges_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    const std::array<ParamId, kNumOps>& alpha(int edge) const { return alpha_[edge]; }
    const std::array<OpInstance, kNumOps>& edge_ops(int edge) const { return ops_[edge]; }
    ParamId out_weight(int intermediate, int output) const {
        return out_w_[intermediate][output];
    }

    std::vector<ParamId> alpha_ids() const;

    // Nodes for the mixture weights of one edge; built once per tape and
    // shared across all rows evaluated on that tape.
    std::array<int, kNumOps> build_mixture_weights(Tape& tape, int edge) const;

    // Full relaxed forward pass for one row; returns the D output node ids.
    // edge_weight_nodes must come from build_mixture_weights on the same tape.
    std::vector<int> forward(Tape& tape, std::span<const double> row_inputs,
                             const std::vector<std::array<int, kNumOps>>& edge_weight_nodes) const;

    // Convenience single-row evaluation on a scratch tape (values only).
    std::vector<double> forward_values(const ParamStore& store,
                                       std::span<const double> row_inputs) const;

    struct Genotype discretize(const ParamStore& store) const;

private:
    GraphShape shape_;
    MixtureMode mode_;
    std::vector<Edge> edges_;
    std::vector<std::array<ParamId, kNumOps>> alpha_;
    std::vector<std::array<OpInstance, kNumOps>> ops_;
    std::vector<std::vector<ParamId>> out_w_;  // [intermediate][output]
};

struct GenotypeEdge {
    int from = 0;
    int to = 0;
    OpKind op = OpKind::Zero;
    std::vector<double> params;  // values for the chosen op only

    bool operator==(const GenotypeEdge&) const = default;
};

// A discrete architecture: one operation per edge plus fitted parameters.
struct Genotype {
    GraphShape shape;
    std::vector<GenotypeEdge> edges;
    std::vector<std::vector<double>> out_weights;  // [intermediate][output]

    int total_complexity() const;
    bool operator==(const Genotype&) const = default;
};

// Plain-double forward pass of a discrete architecture. Deterministic and
// bit-stable; shares the exp clamp with the tape path.
std::vector<double> eval_genotype(const Genotype& g, std::span<const double> inputs);

// Canonical encoding of the edge-op choices (3 bits per edge); used by
// random search to sample without replacement.
std::uint64_t genotype_key(const Genotype& g);

// JSON round-trip: {shape: {S,K,D,activation}, edges: [...], out_weights: [[...]]}.
std::string genotype_to_json(const Genotype& g);
Genotype genotype_from_json(const std::string& text);

}  // namespace gd
