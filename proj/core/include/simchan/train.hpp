#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "simchan/chanscene.hpp"
#include "simchan/simnet.hpp"

namespace simchan::train {

using num::CVec;
using num::RVec;
using scene::ChannelVector;

enum class LossKind { spectral_efficiency, positioning };

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 100;
    std::size_t epochs = 0;
    LossKind loss_kind = LossKind::positioning;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t shuffle_seed = 0;

    void validate() const;
};

struct AdamState {
    RVec first_moment;
    RVec second_moment;
    std::uint64_t step_count = 0;
};

class NonFiniteLossError : public std::runtime_error {
  public:
    NonFiniteLossError(std::size_t epoch, std::size_t batch);
    std::size_t epoch() const { return epoch_; }
    std::size_t batch() const { return batch_; }

  private:
    std::size_t epoch_;
    std::size_t batch_;
};

// Negative downlink spectral efficiency averaged over subcarriers when the
// estimate is used as precoder:
//   -(1/S) sum_s log2(1 + |h_s^H hhat_s|^2 / ||hhat_s||^2).
// The estimate is real-stacked [Re | Im] over the antenna-major layout; a
// subcarrier with a zero-norm estimate contributes 0.
double se_loss(const ChannelVector& h_true, const RVec& h_hat_stacked);

// Gradient of se_loss with respect to the stacked estimate (overwrites grad).
void se_loss_grad(const ChannelVector& h_true, const RVec& h_hat_stacked, RVec& grad);

// (1/S) sum_s log2(1 + ||h_s||^2), attained by using the true channel.
double se_upper_bound(const ChannelVector& h_true);

// Euclidean localization error and its gradient in the estimate.
double pos_loss(const RVec& p, const RVec& p_hat);
void pos_loss_grad(const RVec& p, const RVec& p_hat, RVec& grad);

// Standard bias-corrected Adam update, in place. Moment vectors are
// allocated on first use and must match the parameter length afterwards.
void adam_step(RVec& params, const RVec& grads, AdamState& state, const TrainConfig& cfg);

// Minibatch fine-tuning of the (D, P) parameters. Trains on the first
// ds.n_train samples. Each epoch shuffles with a seeded permutation,
// partitions into minibatches (last short batch kept), averages sample
// gradients, and applies one adam_step on the concatenated parameter
// vector. While the model still has one column per training sample, each
// sample's own column is excluded from the support. Returns the per-epoch
// mean training loss.
RVec fine_tune(net::SimilarityModel& m, const scene::LabeledDataset& ds, const TrainConfig& cfg);

// Loss value and dL/dt_hat for one sample of a dataset (used by fine_tune
// and the evaluation harness).
double sample_loss(LossKind kind, const scene::LabeledDataset& ds, std::size_t index,
                   const RVec& t_hat);
double sample_loss_grad(LossKind kind, const scene::LabeledDataset& ds, std::size_t index,
                        const RVec& t_hat, RVec& grad);

// Reassembles the complex downlink channel from a stacked mapping target.
ChannelVector unstack_channel(const RVec& stacked, std::size_t n_antennas,
                              std::size_t n_subcarriers);

}  // namespace simchan::train
