#include "gd/optim.hpp"

#include <charconv>
#include <cmath>

namespace gd {

std::string_view schedule_tag(BilevelSchedule s) {
    return s == BilevelSchedule::Sequential ? "sequential" : "interleaved";
}

BilevelSchedule schedule_from_tag(std::string_view tag) {
    if (tag == "sequential") return BilevelSchedule::Sequential;
    if (tag == "interleaved") return BilevelSchedule::Interleaved;
    throw ConfigError("unknown bilevel schedule: " + std::string(tag));
}

double cosine_lr(int t, int total_epochs, double lr_init, double lr_min) {
    if (total_epochs < 1 || t < 0 || t > total_epochs)
        throw UsageError("cosine_lr requires 0 <= t <= T and T >= 1");
    double pi = std::acos(-1.0);
    return lr_min + 0.5 * (lr_init - lr_min) * (1.0 + std::cos(pi * t / total_epochs));
}

double clip_grad_norm(ParamStore& store, std::span<const ParamId> ids, double max_norm) {
    double sq = 0.0;
    for (ParamId id : ids) {
        double g = store.grad(id);
        sq += g * g;
    }
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double scale = max_norm / norm;
        for (ParamId id : ids) store.entry(id).grad *= scale;
    }
    return norm;
}

void sgd_step(ParamStore& store, std::span<const ParamId> ids, const SgdConfig& cfg, int epoch,
              int total_epochs) {
    double lr = cosine_lr(epoch, total_epochs, cfg.lr_init, cfg.lr_min);
    for (ParamId id : ids) {
        auto& e = store.entry(id);
        double g = e.grad + cfg.weight_decay * e.value;
        e.momentum = cfg.momentum * e.momentum + g;
        e.value -= lr * e.momentum;
    }
}

void adam_step(ParamStore& store, std::span<const ParamId> ids, const AdamConfig& cfg, int step) {
    if (step < 1) throw UsageError("adam step count starts at 1");
    double bc1 = 1.0 - std::pow(cfg.beta1, step);
    double bc2 = 1.0 - std::pow(cfg.beta2, step);
    for (ParamId id : ids) {
        auto& e = store.entry(id);
        double g = e.grad + cfg.weight_decay * e.value;
        e.adam_m = cfg.beta1 * e.adam_m + (1.0 - cfg.beta1) * g;
        e.adam_v = cfg.beta2 * e.adam_v + (1.0 - cfg.beta2) * g * g;
        double m_hat = e.adam_m / bc1;
        double v_hat = e.adam_v / bc2;
        e.value -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

BilevelResult bilevel_optimize(SuperGraph& graph, ParamStore& store, const Dataset& ds,
                               const BilevelConfig& bilevel, const SgdConfig& sgd,
                               const AdamConfig& adam, double gamma, ZeroOneVariant variant) {
    if (bilevel.rounds < 0) throw UsageError("bilevel rounds must be >= 0");
    BilevelResult result;

    std::vector<ParamId> w_ids = store.ids_of(ParamRole::OpWeight);
    {
        auto v_ids = store.ids_of(ParamRole::OutWeight);
        w_ids.insert(w_ids.end(), v_ids.begin(), v_ids.end());
    }
    std::vector<ParamId> alpha_ids = store.ids_of(ParamRole::Arch);

    std::vector<int> train_rows = ds.rows_of(Split::Train);
    std::vector<int> val_rows = ds.rows_of(Split::Val);

    Tape tape(&store);
    int adam_steps = 0;
    int trace_epoch = 0;

    auto w_epoch = [&](int t, int total) {
        auto loss =
            compute_total_loss(tape, graph, store, ds, train_rows, gamma, variant, true);
        result.exp_clamp_events += tape.exp_clamp_count();
        clip_grad_norm(store, w_ids, kGradClipNorm);
        sgd_step(store, w_ids, sgd, t, total);
        result.trace.push_back(EpochRecord{trace_epoch++, 'w', loss});
    };
    auto alpha_epoch = [&](int t, int total) {
        (void)t;
        (void)total;
        auto loss = compute_total_loss(tape, graph, store, ds, val_rows, gamma, variant, true);
        result.exp_clamp_events += tape.exp_clamp_count();
        clip_grad_norm(store, alpha_ids, kGradClipNorm);
        adam_step(store, alpha_ids, adam, ++adam_steps);
        result.trace.push_back(EpochRecord{trace_epoch++, 'a', loss});
    };

    for (int round = 0; round < bilevel.rounds; ++round) {
        if (bilevel.schedule == BilevelSchedule::Sequential) {
            for (int t = 0; t < sgd.epochs; ++t) w_epoch(t, sgd.epochs);
            for (int t = 0; t < adam.epochs; ++t) alpha_epoch(t, adam.epochs);
        } else {
            // The cosine schedule spans the interleaved pair count.
            int pairs = std::max(sgd.epochs, adam.epochs);
            for (int t = 0; t < pairs; ++t) {
                w_epoch(t, pairs);
                alpha_epoch(t, pairs);
            }
        }
    }
    return result;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

std::string trace_to_csv(const std::vector<EpochRecord>& trace) {
    std::string out = "epoch,phase,mse,complexity,zero_one,total\n";
    for (const auto& rec : trace) {
        out += std::to_string(rec.epoch);
        out += ',';
        out += rec.phase;
        out += ',' + format_double(rec.loss.mse);
        out += ',' + format_double(rec.loss.complexity);
        out += ',' + format_double(rec.loss.zero_one);
        out += ',' + format_double(rec.loss.total);
        out += '\n';
    }
    return out;
}

}  // namespace gd
