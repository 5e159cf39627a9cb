#include "gd/autodiff.hpp"

#include <cmath>

namespace gd {

std::vector<ParamId> ParamStore::ids_of(ParamRole role) const {
    std::vector<ParamId> out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].role == role) out.push_back(static_cast<ParamId>(i));
    }
    return out;
}

int Tape::push(TapeNode n) {
    if (!std::isfinite(n.value)) {
        int id = static_cast<int>(nodes_.size());
        throw NumericError("non-finite value at tape node " + std::to_string(id), id);
    }
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size() - 1);
}

int Tape::constant(double v) {
    TapeNode n;
    n.kind = NodeKind::Constant;
    n.value = v;
    return push(n);
}

int Tape::param(ParamId id) {
    if (params_ == nullptr) throw ConfigError("tape has no parameter store bound");
    TapeNode n;
    n.kind = NodeKind::Param;
    n.param = id;
    n.value = params_->value(id);  // throws ConfigError on unknown id
    return push(n);
}

int Tape::add(int x, int y) {
    TapeNode n;
    n.kind = NodeKind::Add;
    n.a = check(x);
    n.b = check(y);
    n.value = nodes_[x].value + nodes_[y].value;
    n.da = 1.0;
    n.db = 1.0;
    return push(n);
}

int Tape::mul(int x, int y) {
    TapeNode n;
    n.kind = NodeKind::Mul;
    n.a = check(x);
    n.b = check(y);
    n.value = nodes_[x].value * nodes_[y].value;
    n.da = nodes_[y].value;
    n.db = nodes_[x].value;
    return push(n);
}

int Tape::neg(int x) {
    TapeNode n;
    n.kind = NodeKind::Neg;
    n.a = check(x);
    n.value = -nodes_[x].value;
    n.da = -1.0;
    return push(n);
}

int Tape::exp(int x) {
    TapeNode n;
    n.kind = NodeKind::Exp;
    n.a = check(x);
    double arg = nodes_[x].value;
    if (arg > kExpArgClamp) {
        ++exp_clamp_count_;
        n.value = std::exp(kExpArgClamp);
        n.da = 0.0;  // hard clamp: flat beyond the boundary
    } else {
        n.value = std::exp(arg);
        n.da = n.value;
    }
    return push(n);
}

int Tape::relu(int x) {
    TapeNode n;
    n.kind = NodeKind::Relu;
    n.a = check(x);
    double v = nodes_[x].value;
    // Subgradient at exactly 0 is 0.
    n.value = v > 0.0 ? v : 0.0;
    n.da = v > 0.0 ? 1.0 : 0.0;
    return push(n);
}

int Tape::logistic(int x) {
    TapeNode n;
    n.kind = NodeKind::Logistic;
    n.a = check(x);
    double v = nodes_[x].value;
    double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    n.value = s;
    n.da = s * (1.0 - s);
    return push(n);
}

int Tape::recip(int x) {
    TapeNode n;
    n.kind = NodeKind::Recip;
    n.a = check(x);
    double v = nodes_[x].value;
    n.value = 1.0 / v;
    n.da = -1.0 / (v * v);
    return push(n);
}

void Tape::backward(int root, ParamStore& params) const {
    check(root);
    adjoints_.assign(nodes_.size(), 0.0);
    adjoints_[root] = 1.0;
    for (int i = root; i >= 0; --i) {
        double adj = adjoints_[i];
        if (adj == 0.0) continue;
        const TapeNode& n = nodes_[i];
        switch (n.kind) {
            case NodeKind::Constant:
                break;
            case NodeKind::Param:
                params.entry(n.param).grad += adj;
                break;
            case NodeKind::Add:
            case NodeKind::Mul:
                adjoints_[n.a] += adj * n.da;
                adjoints_[n.b] += adj * n.db;
                break;
            default:
                adjoints_[n.a] += adj * n.da;
                break;
        }
    }
}

EvalResult eval(const TapeBuilder& builder, const Inputs& inputs, const ParamStore& params) {
    EvalResult result{Tape(&params), {}};
    result.outputs = builder(result.tape, inputs);
    for (int id : result.outputs) {
        if (id < 0 || static_cast<std::size_t>(id) >= result.tape.size())
            throw UsageError("builder returned invalid output node id");
    }
    return result;
}

double finite_diff(const std::function<double(ParamStore&)>& loss, ParamStore& params,
                   ParamId id, double h) {
    if (h <= 0.0) throw UsageError("finite_diff step h must be positive");
    const double original = params.value(id);
    params.set_value(id, original + h);
    const double up = loss(params);
    params.set_value(id, original - h);
    const double down = loss(params);
    params.set_value(id, original);
    return (up - down) / (2.0 * h);
}

}  // namespace gd
