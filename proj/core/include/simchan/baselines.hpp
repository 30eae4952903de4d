#pragma once

#include <cstdint>
#include <vector>

#include "simchan/chanscene.hpp"
#include "simchan/train.hpp"

namespace simchan::baselines {

using num::CVec;
using num::RVec;

// Phase-normalized dominant left singular vector of the N x S channel
// matrix, length N. Shared input reduction for the positioning baselines.
CVec reduce_input(const scene::ChannelVector& ch);

// [Re | Im] stacking of a complex vector, length 2N.
RVec stack_complex(const CVec& v);

// Applies reduce_input to every sample. Reduced inputs are stored as
// single-subcarrier channel vectors of length N; targets pass through.
scene::LabeledDataset reduce_dataset(const scene::LabeledDataset& ds);

// input_dim -> 112 -> 112 -> 3 with rectified-linear hidden activations
// and a linear output layer. Weight matrices are row-major.
struct MlpModel {
    static constexpr std::size_t kHidden = 112;

    std::size_t input_dim = 0;
    RVec w1, b1;
    RVec w2, b2;
    RVec w3, b3;

    std::size_t param_count() const;
    void get_params(RVec& out) const;
    void set_params(const RVec& params);
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
MlpModel mlp_init(std::size_t input_dim, std::uint64_t seed);

// Minibatch Adam training with the positioning loss. Trains on the first
// ds.n_train samples with the same shuffling and batching conventions as
// the similarity network. Returns the per-epoch mean training loss.
RVec mlp_train(MlpModel& m, const scene::LabeledDataset& ds, const train::TrainConfig& cfg);

// Fixed random hidden layer z = relu(W x); output weights solve the
// ridge-regularized least squares fit in closed form.
struct ElmModel {
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    RVec w;     // hidden x input_dim, row-major, immutable after training
    RVec beta;  // hidden x 3, row-major
};

// Draws W from seeded Uniform(-1, 1), builds the hidden features of the
// first ds.n_train samples, and solves (Z Z^T + lambda I) B = Z T with
// lambda = ridge * trace(Z Z^T) / hidden.
ElmModel elm_train(const scene::LabeledDataset& ds, std::size_t hidden, double ridge,
                   std::uint64_t seed);

RVec baseline_predict(const MlpModel& m, const RVec& x);
RVec baseline_predict(const ElmModel& m, const RVec& x);

}  // namespace simchan::baselines
