#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "gd/autodiff.hpp"
#include "gd/rng.hpp"

namespace gd {

// Candidate operations, one of which ends up on every edge. The index order
// is fixed: it defines tie-breaking at discretization and the on-disk tags.
enum class OpKind : std::uint8_t {
    Zero = 0,
    Add,
    Sub,
    Mul,
    Linear,
    Exp,
    Relu,
    Logistic,
};

inline constexpr int kNumOps = 8;

struct OpMeta {
    OpKind kind;
    const char* tag;      // serialization tag
    int param_count;      // trainable parameters (a, b)
    int complexity;       // p(o): one plus param count, except zero
};

const std::array<OpMeta, kNumOps>& op_table();

inline OpKind op_from_index(int i) { return static_cast<OpKind>(i); }
inline int op_index(OpKind k) { return static_cast<int>(k); }

int op_param_count(OpKind kind);
int op_complexity(OpKind kind);
std::string_view op_tag(OpKind kind);
std::optional<OpKind> op_from_tag(std::string_view tag);

// An operation bound to its per-edge parameters. Parameters are owned per
// edge per operation; kinds without parameters carry id -1.
struct OpInstance {
    OpKind kind = OpKind::Zero;
    ParamId a = -1;
    ParamId b = -1;
};

// Allocates fresh parameters in the store: a ~ Uniform(-1, 1), b = 0.
OpInstance make_op(OpKind kind, ParamStore& store, Rng& rng);

// Builds the expression o(x) on the tape and returns its node id.
int apply_op(Tape& tape, const OpInstance& op, int x);

// Closed-form o(x) on plain doubles; shares the exp clamp with the tape path.
double apply_op_value(OpKind kind, std::span<const double> params, double x);

// Human-readable term, e.g. "0.50 * x1", "exp(1.00 * x1 + 0.00)", "-x1".
// Coefficients are rounded half-away-from-zero to `decimals` places.
std::string render_op(const OpInstance& op, std::string_view arg, const ParamStore& store,
                      int decimals);
std::string render_op_values(OpKind kind, std::span<const double> params, std::string_view arg,
                             int decimals);

// Shared coefficient formatting for equation and DOT exports.
std::string format_coeff(double v, int decimals);

}  // namespace gd
