#include "gd/ops.hpp"

#include <cmath>
#include <cstdio>

namespace gd {

const std::array<OpMeta, kNumOps>& op_table() {
    static const std::array<OpMeta, kNumOps> table = {{
        {OpKind::Zero, "zero", 0, 0},
        {OpKind::Add, "add", 0, 1},
        {OpKind::Sub, "sub", 0, 1},
        {OpKind::Mul, "mul", 1, 2},
        {OpKind::Linear, "linear", 2, 3},
        {OpKind::Exp, "exp", 2, 3},
        {OpKind::Relu, "relu", 0, 1},
        {OpKind::Logistic, "logistic", 0, 1},
    }};
    return table;
}

int op_param_count(OpKind kind) { return op_table()[op_index(kind)].param_count; }
int op_complexity(OpKind kind) { return op_table()[op_index(kind)].complexity; }
std::string_view op_tag(OpKind kind) { return op_table()[op_index(kind)].tag; }

std::optional<OpKind> op_from_tag(std::string_view tag) {
    for (const auto& meta : op_table()) {
        if (tag == meta.tag) return meta.kind;
    }
    return std::nullopt;
}

OpInstance make_op(OpKind kind, ParamStore& store, Rng& rng) {
    OpInstance op;
    op.kind = kind;
    int count = op_param_count(kind);
    if (count >= 1) op.a = store.add(rng.uniform(-1.0, 1.0), ParamRole::OpWeight);
    if (count >= 2) op.b = store.add(0.0, ParamRole::OpWeight);
    return op;
}

int apply_op(Tape& tape, const OpInstance& op, int x) {
    switch (op.kind) {
        case OpKind::Zero:
            return tape.constant(0.0);
        case OpKind::Add:
            return x;
        case OpKind::Sub:
            return tape.neg(x);
        case OpKind::Mul:
            return tape.mul(tape.param(op.a), x);
        case OpKind::Linear:
            return tape.add(tape.mul(tape.param(op.a), x), tape.param(op.b));
        case OpKind::Exp:
            return tape.exp(tape.add(tape.mul(tape.param(op.a), x), tape.param(op.b)));
        case OpKind::Relu:
            return tape.relu(x);
        case OpKind::Logistic:
            return tape.logistic(x);
    }
    throw ConfigError("unknown op kind");
}

double apply_op_value(OpKind kind, std::span<const double> params, double x) {
    switch (kind) {
        case OpKind::Zero:
            return 0.0;
        case OpKind::Add:
            return x;
        case OpKind::Sub:
            return -x;
        case OpKind::Mul:
            return params[0] * x;
        case OpKind::Linear:
            return params[0] * x + params[1];
        case OpKind::Exp: {
            double arg = params[0] * x + params[1];
            return std::exp(arg > kExpArgClamp ? kExpArgClamp : arg);
        }
        case OpKind::Relu:
            return x > 0.0 ? x : 0.0;
        case OpKind::Logistic:
            return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    throw ConfigError("unknown op kind");
}

std::string format_coeff(double v, int decimals) {
    double scale = std::pow(10.0, decimals);
    double rounded = std::round(v * scale) / scale;  // std::round: half away from zero
    if (rounded == 0.0) rounded = 0.0;               // normalize -0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, rounded);
    return buf;
}

namespace {

// "a * x + b" with the sign folded into the operator: "a * x - |b|".
std::string affine_term(double a, double b, std::string_view arg, int decimals) {
    std::string bs = format_coeff(b, decimals);
    if (!bs.empty() && bs[0] == '-') {
        return format_coeff(a, decimals) + " * " + std::string(arg) + " - " + bs.substr(1);
    }
    return format_coeff(a, decimals) + " * " + std::string(arg) + " + " + bs;
}

}  // namespace

std::string render_op_values(OpKind kind, std::span<const double> params, std::string_view arg,
                             int decimals) {
    std::string name(arg);
    switch (kind) {
        case OpKind::Zero:
            return "0";
        case OpKind::Add:
            return name;
        case OpKind::Sub:
            return "-" + name;
        case OpKind::Mul:
            return format_coeff(params[0], decimals) + " * " + name;
        case OpKind::Linear:
            return affine_term(params[0], params[1], arg, decimals);
        case OpKind::Exp:
            return "exp(" + affine_term(params[0], params[1], arg, decimals) + ")";
        case OpKind::Relu:
            return "relu(" + name + ")";
        case OpKind::Logistic:
            return "logistic(" + name + ")";
    }
    throw ConfigError("unknown op kind");
}

std::string render_op(const OpInstance& op, std::string_view arg, const ParamStore& store,
                      int decimals) {
    double params[2] = {0.0, 0.0};
    if (op.a >= 0) params[0] = store.value(op.a);
    if (op.b >= 0) params[1] = store.value(op.b);
    return render_op_values(op.kind, std::span<const double>(params, 2), arg, decimals);
}

}  // namespace gd
