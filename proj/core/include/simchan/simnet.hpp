#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "simchan/chanscene.hpp"
#include "simchan/numkernel.hpp"

namespace simchan::net {

using num::CVec;
using num::RVec;
using num::cplx;

// Two-layer similarity network. The dictionary is logically the complex
// matrix D (input_dim x L) but is stored as separate real and imaginary
// planes, row-major with the column index fastest:
//   d_re[i * L + j] = Re D(i, j),  d_im[i * L + j] = Im D(i, j).
// The prediction matrix P (target_dim x L) is real, row-major. The trainable
// parameter vector is the concatenation [d_re | d_im | p].
struct SimilarityModel {
    RVec d_re;
    RVec d_im;
    RVec p;
    std::size_t input_dim = 0;   // complex entries per column
    std::size_t target_dim = 0;  // real entries per target
    std::size_t n_columns = 0;   // L
    std::size_t k = 1;           // sparsity level of the hard threshold

    // Sample -> column mapping for training-time self-exclusion: identity
    // while the model still has one column per sample of the dataset it was
    // initialized from.
    bool from_dataset = false;
    std::size_t init_dataset_size = 0;

    std::size_t param_count() const { return n_columns * (2 * input_dim + target_dim); }
    void get_params(RVec& out) const;
    void set_params(const RVec& params);

    cplx dict_entry(std::size_t i, std::size_t j) const {
        return cplx(d_re[i * n_columns + j], d_im[i * n_columns + j]);
    }
    CVec dict_column(std::size_t j) const;
};

// Intermediate activations of one forward pass, kept for backpropagation.
// Buffers are reused when the trace object is passed back in.
struct ForwardTrace {
    CVec c;                           // correlations, length L
    std::vector<std::size_t> support; // k selected indices, ascending
    CVec s;                           // thresholded correlations, zero off support
    RVec y;                           // normalized moduli, zero off support
    RVec t_hat;                       // estimated target, length target_dim

    RVec scratch_re, scratch_im;      // correlation accumulators
    std::vector<std::size_t> scratch_idx;
};

// Gradients of one sample; only the support columns are nonzero, so only
// those are materialized. Column j of the dictionary gradient is packed the
// same way the dictionary is (re + i*im pairs per entry).
struct SimGradients {
    std::vector<std::size_t> support;
    std::vector<CVec> d_cols;  // per support column, length input_dim
    std::vector<RVec> p_cols;  // per support column, length target_dim
};

// D column i := ds.inputs[i], P column i := ds.targets[i].
SimilarityModel init_from_dataset(const scene::LabeledDataset& ds, std::size_t k);

// Keeps the k largest-modulus entries (ties -> lowest index), zeroes the rest.
std::pair<CVec, std::vector<std::size_t>> hard_threshold(const CVec& c, std::size_t k);

// |h_i^H h| when selected, 0 otherwise.
double kernel(const CVec& h, const CVec& h_i, bool selected);

// c = D^H h; (s, support) = HT_k(c) with `exclude` forced out of the
// support; y = |s| / ||s||_1; t_hat = P y. When ||s||_1 = 0, y and t_hat
// are zero.
void forward_into(const SimilarityModel& m, const CVec& h, std::optional<std::size_t> exclude,
                  ForwardTrace& trace);
ForwardTrace forward(const SimilarityModel& m, const CVec& h,
                     std::optional<std::size_t> exclude = std::nullopt);

// Forward passes for a batch of inputs sharing one model. The dictionary is
// streamed once per chunk of samples instead of once per sample, which is
// what makes desk-scale training fit in its time budget; each c_j is still
// accumulated in ascending entry order, so per-sample results are
// bit-identical to forward_into. `excludes` is either empty or one entry
// per input.
void forward_batch_into(const SimilarityModel& m, const std::vector<const CVec*>& inputs,
                        const std::vector<std::optional<std::size_t>>& excludes,
                        std::vector<ForwardTrace>& traces);

// Backpropagates dL/dt_hat to the dictionary and prediction matrices. The
// support is held fixed (subgradient through HT_k), columns with |s_i| = 0
// get a zero dictionary gradient.
void backward_into(const SimilarityModel& m, const ForwardTrace& trace, const CVec& h,
                   const RVec& dL_dthat, SimGradients& grads);
SimGradients backward(const SimilarityModel& m, const ForwardTrace& trace, const CVec& h,
                      const RVec& dL_dthat);

// out += weight * grad, in the [d_re | d_im | p] parameter layout.
void accumulate_param_grad(const SimilarityModel& m, const SimGradients& grads, double weight,
                           RVec& out);

// Elementwise forward without exclusion, order preserved.
std::vector<RVec> predict_batch(const SimilarityModel& m, const std::vector<CVec>& channels);

}  // namespace simchan::net
