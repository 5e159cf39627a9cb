#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gd/errors.hpp"

namespace gd {

using ParamId = std::int32_t;

// Which half of the bi-level objective owns a parameter. Op weights (a, b)
// and output weights v train on the training split; architecture weights
// train on the validation split. An update step touches exactly one side.
enum class ParamRole : std::uint8_t { OpWeight, Arch, OutWeight };

struct ParamEntry {
    double value = 0.0;
    double grad = 0.0;
    ParamRole role = ParamRole::OpWeight;
    // Optimizer scratch.
    double momentum = 0.0;
    double adam_m = 0.0;
    double adam_v = 0.0;
};

class ParamStore {
public:
    ParamId add(double value, ParamRole role) {
        entries_.push_back(ParamEntry{value, 0.0, role, 0.0, 0.0, 0.0});
        return static_cast<ParamId>(entries_.size() - 1);
    }

    std::size_t size() const { return entries_.size(); }

    ParamEntry& entry(ParamId id) { return entries_[check(id)]; }
    const ParamEntry& entry(ParamId id) const { return entries_[check(id)]; }

    double value(ParamId id) const { return entries_[check(id)].value; }
    void set_value(ParamId id, double v) { entries_[check(id)].value = v; }
    double grad(ParamId id) const { return entries_[check(id)].grad; }

    void zero_grads() {
        for (auto& e : entries_) e.grad = 0.0;
    }
    void reset_optimizer_state() {
        for (auto& e : entries_) e.momentum = e.adam_m = e.adam_v = 0.0;
    }

    std::vector<ParamId> ids_of(ParamRole role) const;

private:
    std::size_t check(ParamId id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= entries_.size())
            throw ConfigError("parameter id " + std::to_string(id) + " not in store");
        return static_cast<std::size_t>(id);
    }
    std::vector<ParamEntry> entries_;
};

enum class NodeKind : std::uint8_t {
    Constant,
    Param,
    Add,
    Mul,
    Neg,
    Exp,
    Relu,
    Logistic,
    Recip,
};

// One scalar expression node. Parents always precede the node, so the node
// list is a topological order by construction. Local partials wrt parents
// are filled during the (eager) forward pass.
struct TapeNode {
    NodeKind kind = NodeKind::Constant;
    std::int32_t a = -1;
    std::int32_t b = -1;
    ParamId param = -1;
    double value = 0.0;
    double da = 0.0;
    double db = 0.0;
};

// Arguments above this are clamped before exp to keep early, badly scaled
// graphs finite; the tape records that it happened so callers can log it.
inline constexpr double kExpArgClamp = 20.0;

// Dynamically built scalar expression DAG with reverse-mode gradients.
// Values are computed when nodes are created; backward() fills adjoints and
// accumulates dRoot/dParam into the bound ParamStore's grad fields.
class Tape {
public:
    explicit Tape(const ParamStore* params) : params_(params) {}

    int constant(double v);
    int param(ParamId id);
    int add(int x, int y);
    int mul(int x, int y);
    int neg(int x);
    int exp(int x);
    int relu(int x);
    int logistic(int x);
    int recip(int x);

    double value(int id) const { return nodes_[check(id)].value; }
    std::size_t size() const { return nodes_.size(); }
    bool exp_clamped() const { return exp_clamp_count_ > 0; }
    long exp_clamp_count() const { return exp_clamp_count_; }

    // Seeds adjoint[root] = 1 and runs the chain rule in reverse topological
    // order. Parameters not reachable from root keep grad contributions of 0.
    void backward(int root, ParamStore& params) const;

    // Keeps capacity so per-epoch rebuilds do not reallocate.
    void clear() {
        nodes_.clear();
        exp_clamp_count_ = 0;
    }

    const std::vector<TapeNode>& nodes() const { return nodes_; }

private:
    int push(TapeNode n);
    int check(int id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
            throw UsageError("tape node id " + std::to_string(id) + " out of range");
        return id;
    }

    const ParamStore* params_;
    std::vector<TapeNode> nodes_;
    long exp_clamp_count_ = 0;
    mutable std::vector<double> adjoints_;
};

// Named inputs for builder-style evaluation.
class Inputs {
public:
    Inputs() = default;
    Inputs(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

    void set(const std::string& name, double v) { values_[name] = v; }
    double get(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw ConfigError("missing input variable: " + name);
        return it->second;
    }

private:
    std::map<std::string, double> values_;
};

struct EvalResult {
    Tape tape;
    std::vector<int> outputs;
};

using TapeBuilder = std::function<std::vector<int>(Tape&, const Inputs&)>;

// Runs a builder against named inputs and a parameter store. Deterministic
// for identical inputs; every node value is computed by construction.
EvalResult eval(const TapeBuilder& builder, const Inputs& inputs, const ParamStore& params);

// Central finite difference of an arbitrary scalar loss wrt one parameter:
// (L(p+h) - L(p-h)) / (2h). Restores the parameter afterwards. Test oracle;
// independent of Tape::backward.
double finite_diff(const std::function<double(ParamStore&)>& loss, ParamStore& params,
                   ParamId id, double h);

}  // namespace gd
