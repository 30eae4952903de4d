#include "simchan/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "simchan/rng.hpp"

namespace simchan::train {

namespace {

constexpr std::uint64_t kShuffleTag = 0x53485546ULL;
const double kLn2 = std::log(2.0);

}  // namespace

void TrainConfig::validate() const {
    num::check(learning_rate >= 0.0, "TrainConfig: learning_rate must be >= 0");
    num::check(std::isfinite(learning_rate), "TrainConfig: learning_rate must be finite");
    num::check(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
    num::check(adam_beta1 > 0.0 && adam_beta1 < 1.0, "TrainConfig: adam_beta1 must be in (0, 1)");
    num::check(adam_beta2 > 0.0 && adam_beta2 < 1.0, "TrainConfig: adam_beta2 must be in (0, 1)");
    num::check(adam_eps > 0.0, "TrainConfig: adam_eps must be > 0");
}

NonFiniteLossError::NonFiniteLossError(std::size_t epoch, std::size_t batch)
    : std::runtime_error("fine_tune: non-finite loss at epoch " + std::to_string(epoch) +
                         ", batch " + std::to_string(batch)),
      epoch_(epoch),
      batch_(batch) {}

double se_loss(const ChannelVector& h_true, const RVec& h_hat_stacked) {
    const std::size_t n = h_true.n_antennas;
    const std::size_t s_count = h_true.n_subcarriers;
    const std::size_t ns = n * s_count;
    num::check(h_hat_stacked.size() == 2 * ns, "se_loss: estimate length mismatch");

    double total = 0.0;
    for (std::size_t s = 0; s < s_count; ++s) {
        double zr = 0.0, zi = 0.0, r = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t idx = a * s_count + s;
            const double hr = h_true.values[idx].real();
            const double hi = h_true.values[idx].imag();
            const double er = h_hat_stacked[idx];
            const double ei = h_hat_stacked[ns + idx];
            zr += hr * er + hi * ei;
            zi += hr * ei - hi * er;
            r += er * er + ei * ei;
        }
        if (r > 0.0) {
            total += std::log2(1.0 + (zr * zr + zi * zi) / r);
        }
    }
    return -total / static_cast<double>(s_count);
}

void se_loss_grad(const ChannelVector& h_true, const RVec& h_hat_stacked, RVec& grad) {
    const std::size_t n = h_true.n_antennas;
    const std::size_t s_count = h_true.n_subcarriers;
    const std::size_t ns = n * s_count;
    num::check(h_hat_stacked.size() == 2 * ns, "se_loss_grad: estimate length mismatch");
    grad.assign(2 * ns, 0.0);

    for (std::size_t s = 0; s < s_count; ++s) {
        double zr = 0.0, zi = 0.0, r = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t idx = a * s_count + s;
            const double hr = h_true.values[idx].real();
            const double hi = h_true.values[idx].imag();
            const double er = h_hat_stacked[idx];
            const double ei = h_hat_stacked[ns + idx];
            zr += hr * er + hi * ei;
            zi += hr * ei - hi * er;
            r += er * er + ei * ei;
        }
        if (r <= 0.0) continue;
        const double q = zr * zr + zi * zi;
        const double scale = -2.0 / (static_cast<double>(s_count) * kLn2 * (1.0 + q / r));
        const double qr2 = q / (r * r);
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t idx = a * s_count + s;
            const double hr = h_true.values[idx].real();
            const double hi = h_true.values[idx].imag();
            const double er = h_hat_stacked[idx];
            const double ei = h_hat_stacked[ns + idx];
            grad[idx] = scale * ((zr * hr - zi * hi) / r - qr2 * er);
            grad[ns + idx] = scale * ((zr * hi + zi * hr) / r - qr2 * ei);
        }
    }
}

double se_upper_bound(const ChannelVector& h_true) {
    const std::size_t n = h_true.n_antennas;
    const std::size_t s_count = h_true.n_subcarriers;
    double total = 0.0;
    for (std::size_t s = 0; s < s_count; ++s) {
        double r = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t idx = a * s_count + s;
            r += std::norm(h_true.values[idx]);
        }
        total += std::log2(1.0 + r);
    }
    return total / static_cast<double>(s_count);
}

double pos_loss(const RVec& p, const RVec& p_hat) {
    num::check(p.size() == p_hat.size(), "pos_loss: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p_hat[i] - p[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void pos_loss_grad(const RVec& p, const RVec& p_hat, RVec& grad) {
    const double dist = pos_loss(p, p_hat);
    grad.assign(p.size(), 0.0);
    if (dist == 0.0) return;
    for (std::size_t i = 0; i < p.size(); ++i) {
        grad[i] = (p_hat[i] - p[i]) / dist;
    }
}

void adam_step(RVec& params, const RVec& grads, AdamState& state, const TrainConfig& cfg) {
    num::check(params.size() == grads.size(), "adam_step: gradient length mismatch");
    if (state.first_moment.empty() && state.second_moment.empty() && state.step_count == 0) {
        state.first_moment.assign(params.size(), 0.0);
        state.second_moment.assign(params.size(), 0.0);
    }
    num::check(state.first_moment.size() == params.size() &&
                   state.second_moment.size() == params.size(),
               "adam_step: moment length mismatch");

    state.step_count += 1;
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.first_moment[i] = b1 * state.first_moment[i] + (1.0 - b1) * g;
        state.second_moment[i] = b2 * state.second_moment[i] + (1.0 - b2) * g * g;
        const double m_hat = state.first_moment[i] / corr1;
        const double v_hat = state.second_moment[i] / corr2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
}

ChannelVector unstack_channel(const RVec& stacked, std::size_t n_antennas,
                              std::size_t n_subcarriers) {
    const std::size_t ns = n_antennas * n_subcarriers;
    num::check(stacked.size() == 2 * ns, "unstack_channel: length mismatch");
    ChannelVector h;
    h.n_antennas = n_antennas;
    h.n_subcarriers = n_subcarriers;
    h.values.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        h.values[i] = num::cplx(stacked[i], stacked[ns + i]);
    }
    return h;
}

namespace {

// For mapping datasets the target is a stacked downlink channel over the
// full array; its antenna count is recovered from the target length.
std::size_t target_antennas(const scene::LabeledDataset& ds) {
    const std::size_t s_count = ds.inputs.front().n_subcarriers;
    const std::size_t t = ds.target_dim();
    num::check(s_count > 0 && t % (2 * s_count) == 0,
               "sample_loss: mapping target length is not 2 * N * S");
    return t / (2 * s_count);
}

}  // namespace

double sample_loss(LossKind kind, const scene::LabeledDataset& ds, std::size_t index,
                   const RVec& t_hat) {
    num::check(index < ds.size(), "sample_loss: index out of range");
    if (kind == LossKind::positioning) {
        return pos_loss(ds.targets[index], t_hat);
    }
    const ChannelVector h =
        unstack_channel(ds.targets[index], target_antennas(ds), ds.inputs.front().n_subcarriers);
    return se_loss(h, t_hat);
}

double sample_loss_grad(LossKind kind, const scene::LabeledDataset& ds, std::size_t index,
                        const RVec& t_hat, RVec& grad) {
    num::check(index < ds.size(), "sample_loss_grad: index out of range");
    if (kind == LossKind::positioning) {
        pos_loss_grad(ds.targets[index], t_hat, grad);
        return pos_loss(ds.targets[index], t_hat);
    }
    const ChannelVector h =
        unstack_channel(ds.targets[index], target_antennas(ds), ds.inputs.front().n_subcarriers);
    se_loss_grad(h, t_hat, grad);
    return se_loss(h, t_hat);
}

RVec fine_tune(net::SimilarityModel& m, const scene::LabeledDataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    num::check(ds.n_train > 0 && ds.n_train <= ds.size(), "fine_tune: empty training split");
    const std::size_t n = ds.n_train;
    for (std::size_t i = 0; i < n; ++i) {
        num::check(ds.inputs[i].values.size() == m.input_dim,
                   "fine_tune: input dimension mismatch");
        num::check(ds.targets[i].size() == m.target_dim, "fine_tune: target dimension mismatch");
    }

    // Each training sample that seeded a dictionary column would trivially
    // select itself; exclusion keeps the nearest-neighbor problem honest.
    const bool exclusion = m.from_dataset && m.n_columns == n && m.init_dataset_size == n;
    if (exclusion) {
        num::check(m.k + 1 <= m.n_columns,
                   "fine_tune: k must be <= L - 1 when training on the dictionary's own samples");
    }

    RVec params;
    m.get_params(params);
    AdamState state;
    RVec grad(params.size(), 0.0);
    RVec dl_dthat;
    RVec epoch_loss(n, 0.0);
    RVec history;
    history.reserve(cfg.epochs);

    std::vector<net::ForwardTrace> traces;
    std::vector<const CVec*> batch_inputs;
    std::vector<std::optional<std::size_t>> batch_excludes;
    net::SimGradients sgrads;
    std::vector<std::size_t> perm(n);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng::Prng shuffle_rng = rng::Prng::from_path(cfg.shuffle_seed, {kShuffleTag, epoch});
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = shuffle_rng.next_index(i);
            std::swap(perm[i - 1], perm[j]);
        }

        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t stop = std::min(start + cfg.batch_size, n);
            const double weight = 1.0 / static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);

            batch_inputs.clear();
            batch_excludes.clear();
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = perm[b];
                batch_inputs.push_back(&ds.inputs[idx].values);
                if (exclusion) batch_excludes.push_back(idx);
            }
            net::forward_batch_into(m, batch_inputs, batch_excludes, traces);

            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = perm[b];
                net::ForwardTrace& trace = traces[b - start];
                const double loss =
                    sample_loss_grad(cfg.loss_kind, ds, idx, trace.t_hat, dl_dthat);
                if (!std::isfinite(loss)) {
                    throw NonFiniteLossError(epoch, batch_index);
                }
                epoch_loss[idx] = loss;
                net::backward_into(m, trace, ds.inputs[idx].values, dl_dthat, sgrads);
                net::accumulate_param_grad(m, sgrads, weight, grad);
            }

            adam_step(params, grad, state, cfg);
            m.set_params(params);
        }

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += epoch_loss[i];
        history.push_back(total / static_cast<double>(n));
    }
    return history;
}

}  // namespace simchan::train
