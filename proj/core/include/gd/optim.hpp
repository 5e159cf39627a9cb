#pragma once

#include <span>
#include <string>
#include <vector>

#include "gd/objective.hpp"

namespace gd {

struct SgdConfig {
    double lr_init = 0.025;
    double lr_min = 1e-2;  // 1e-3 during final retraining
    double momentum = 0.9;
    double weight_decay = 3e-4;
    int epochs = 500;

    bool operator==(const SgdConfig&) const = default;
};

struct AdamConfig {
    double lr = 3e-3;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double weight_decay = 1e-4;
    double eps = 1e-8;
    int epochs = 300;

    bool operator==(const AdamConfig&) const = default;
};

enum class BilevelSchedule : std::uint8_t { Sequential, Interleaved };

std::string_view schedule_tag(BilevelSchedule s);
BilevelSchedule schedule_from_tag(std::string_view tag);

// Epoch counts live in the optimizer configs: the w-phase runs
// SgdConfig::epochs, the alpha-phase AdamConfig::epochs.
struct BilevelConfig {
    int rounds = 1;
    BilevelSchedule schedule = BilevelSchedule::Sequential;

    bool operator==(const BilevelConfig&) const = default;
};

// lr_min + 0.5 (lr_init - lr_min) (1 + cos(pi t / T)).
double cosine_lr(int t, int total_epochs, double lr_init, double lr_min);

// Training loops clip the global gradient norm of the stepped parameter set
// before each update; early fair-mode epochs can otherwise blow up through
// the exp ops. Returns the pre-clip norm.
inline constexpr double kGradClipNorm = 5.0;
double clip_grad_norm(ParamStore& store, std::span<const ParamId> ids, double max_norm);

// Classic momentum SGD with L2 decay folded into the gradient:
// g <- grad + wd p;  m <- momentum m + g;  p <- p - lr(t) m.
void sgd_step(ParamStore& store, std::span<const ParamId> ids, const SgdConfig& cfg, int epoch,
              int total_epochs);

// Bias-corrected Adam, L2 decay folded into the gradient. step starts at 1.
void adam_step(ParamStore& store, std::span<const ParamId> ids, const AdamConfig& cfg, int step);

struct EpochRecord {
    int epoch = 0;
    char phase = 'w';  // 'w' or 'a'
    LossBreakdown loss;
};

struct BilevelResult {
    std::vector<EpochRecord> trace;
    long exp_clamp_events = 0;
};

// First-order coordinate descent on the two parameter partitions.
// Sequential (default): per round, SgdConfig::epochs full-batch SGD epochs
// minimizing the training loss over {w, v}, then AdamConfig::epochs Adam
// epochs minimizing the validation loss over alpha. Interleaved: alternate
// one w epoch and one alpha epoch for max(w, alpha) pairs per round.
// Numeric overflow propagates as NumericError; callers record the failure.
BilevelResult bilevel_optimize(SuperGraph& graph, ParamStore& store, const Dataset& ds,
                               const BilevelConfig& bilevel, const SgdConfig& sgd,
                               const AdamConfig& adam, double gamma,
                               ZeroOneVariant variant = ZeroOneVariant::AsPrinted);

// CSV: epoch, phase, mse, complexity, zero_one, total.
std::string trace_to_csv(const std::vector<EpochRecord>& trace);

}  // namespace gd
