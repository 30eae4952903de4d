#include "simchan/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace simchan::net {

void SimilarityModel::get_params(RVec& out) const {
    out.resize(param_count());
    std::copy(d_re.begin(), d_re.end(), out.begin());
    std::copy(d_im.begin(), d_im.end(), out.begin() + d_re.size());
    std::copy(p.begin(), p.end(), out.begin() + d_re.size() + d_im.size());
}

void SimilarityModel::set_params(const RVec& params) {
    num::check(params.size() == param_count(), "set_params: wrong parameter count");
    std::copy(params.begin(), params.begin() + d_re.size(), d_re.begin());
    std::copy(params.begin() + d_re.size(), params.begin() + d_re.size() + d_im.size(),
              d_im.begin());
    std::copy(params.begin() + d_re.size() + d_im.size(), params.end(), p.begin());
}

CVec SimilarityModel::dict_column(std::size_t j) const {
    CVec col(input_dim);
    for (std::size_t i = 0; i < input_dim; ++i) {
        col[i] = dict_entry(i, j);
    }
    return col;
}

SimilarityModel init_from_dataset(const scene::LabeledDataset& ds, std::size_t k) {
    if (ds.size() == 0) {
        throw std::invalid_argument("init_from_dataset: empty dataset");
    }
    if (k < 1 || k > ds.size()) {
        throw std::invalid_argument("init_from_dataset: k must satisfy 1 <= k <= L");
    }

    SimilarityModel m;
    m.input_dim = ds.input_dim();
    m.target_dim = ds.target_dim();
    m.n_columns = ds.size();
    m.k = k;
    m.from_dataset = true;
    m.init_dataset_size = ds.size();
    m.d_re.assign(m.input_dim * m.n_columns, 0.0);
    m.d_im.assign(m.input_dim * m.n_columns, 0.0);
    m.p.assign(m.target_dim * m.n_columns, 0.0);

    const std::size_t L = m.n_columns;
    for (std::size_t j = 0; j < L; ++j) {
        const CVec& h = ds.inputs[j].values;
        if (h.size() != m.input_dim || ds.targets[j].size() != m.target_dim) {
            throw std::invalid_argument("init_from_dataset: ragged dataset");
        }
        if (num::norm2(h) == 0.0) {
            throw std::invalid_argument("init_from_dataset: all-zero channel column");
        }
        for (std::size_t i = 0; i < m.input_dim; ++i) {
            m.d_re[i * L + j] = h[i].real();
            m.d_im[i * L + j] = h[i].imag();
        }
        for (std::size_t t = 0; t < m.target_dim; ++t) {
            m.p[t * L + j] = ds.targets[j][t];
        }
    }
    return m;
}

namespace {

// Top-k indices by modulus, descending, ties broken by lowest index.
// `moduli` has one entry per candidate column; `exclude` is skipped.
void select_support(const RVec& moduli, std::size_t k, std::optional<std::size_t> exclude,
                    std::vector<std::size_t>& idx, std::vector<std::size_t>& support) {
    idx.clear();
    for (std::size_t i = 0; i < moduli.size(); ++i) {
        if (exclude && *exclude == i) {
            continue;
        }
        idx.push_back(i);
    }
    const auto better = [&moduli](std::size_t a, std::size_t b) {
        if (moduli[a] != moduli[b]) {
            return moduli[a] > moduli[b];
        }
        return a < b;
    };
    if (k < idx.size()) {
        std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), better);
    }
    support.assign(idx.begin(), idx.begin() + std::min(k, idx.size()));
    std::sort(support.begin(), support.end());
}

}  // namespace

std::pair<CVec, std::vector<std::size_t>> hard_threshold(const CVec& c, std::size_t k) {
    if (k < 1 || k > c.size()) {
        throw std::invalid_argument("hard_threshold: k out of range");
    }
    RVec moduli(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        moduli[i] = std::abs(c[i]);
    }
    std::vector<std::size_t> idx;
    std::vector<std::size_t> support;
    select_support(moduli, k, std::nullopt, idx, support);

    CVec s(c.size(), cplx(0.0, 0.0));
    for (std::size_t i : support) {
        s[i] = c[i];
    }
    return {std::move(s), std::move(support)};
}

double kernel(const CVec& h, const CVec& h_i, bool selected) {
    num::check(h.size() == h_i.size(), "kernel: dimension mismatch");
    if (!selected) {
        return 0.0;
    }
    return std::abs(num::cdot(h_i, h));
}

namespace {

void check_forward_args(const SimilarityModel& m, const CVec& h,
                        std::optional<std::size_t> exclude) {
    num::check(h.size() == m.input_dim, "forward: input dimension mismatch");
    if (exclude) {
        num::check(*exclude < m.n_columns, "forward: exclude index out of range");
        num::check(m.k <= m.n_columns - 1, "forward: k must be <= L-1 when excluding a column");
    }
}

// Everything after the correlations: assumes trace.scratch_re/scratch_im
// hold c = D^H h.
void finish_forward(const SimilarityModel& m, std::optional<std::size_t> exclude,
                    ForwardTrace& trace) {
    const std::size_t L = m.n_columns;
    const double* cr = trace.scratch_re.data();
    const double* ci = trace.scratch_im.data();
    trace.c.resize(L);
    for (std::size_t j = 0; j < L; ++j) {
        trace.c[j] = cplx(cr[j], ci[j]);
    }

    // Moduli reuse the y buffer until normalization replaces it.
    trace.y.resize(L);
    for (std::size_t j = 0; j < L; ++j) {
        trace.y[j] = std::abs(trace.c[j]);
    }
    select_support(trace.y, m.k, exclude, trace.scratch_idx, trace.support);

    trace.s.assign(L, cplx(0.0, 0.0));
    double l1 = 0.0;
    for (std::size_t j : trace.support) {
        trace.s[j] = trace.c[j];
        l1 += trace.y[j];
    }

    trace.t_hat.assign(m.target_dim, 0.0);
    if (l1 > 0.0) {
        RVec weights(trace.support.size());
        for (std::size_t q = 0; q < trace.support.size(); ++q) {
            weights[q] = trace.y[trace.support[q]] / l1;
        }
        std::fill(trace.y.begin(), trace.y.end(), 0.0);
        for (std::size_t q = 0; q < trace.support.size(); ++q) {
            trace.y[trace.support[q]] = weights[q];
        }
        for (std::size_t t = 0; t < m.target_dim; ++t) {
            const double* prow = m.p.data() + t * L;
            double acc = 0.0;
            for (std::size_t q = 0; q < trace.support.size(); ++q) {
                acc += prow[trace.support[q]] * weights[q];
            }
            trace.t_hat[t] = acc;
        }
    } else {
        std::fill(trace.y.begin(), trace.y.end(), 0.0);
    }
}

}  // namespace

void forward_into(const SimilarityModel& m, const CVec& h, std::optional<std::size_t> exclude,
                  ForwardTrace& trace) {
    check_forward_args(m, h, exclude);
    const std::size_t L = m.n_columns;

    // Correlation c = D^H h. Row-outer accumulation over the two planes keeps
    // each c_j summed in ascending entry order (identical rounding to the
    // per-column cdot) while letting the inner loop vectorize.
    trace.scratch_re.assign(L, 0.0);
    trace.scratch_im.assign(L, 0.0);
    double* cr = trace.scratch_re.data();
    double* ci = trace.scratch_im.data();
    for (std::size_t i = 0; i < m.input_dim; ++i) {
        const double u = h[i].real();
        const double v = h[i].imag();
        const double* pr = m.d_re.data() + i * L;
        const double* pi = m.d_im.data() + i * L;
        for (std::size_t j = 0; j < L; ++j) {
            cr[j] += pr[j] * u + pi[j] * v;
            ci[j] += pr[j] * v - pi[j] * u;
        }
    }
    finish_forward(m, exclude, trace);
}

ForwardTrace forward(const SimilarityModel& m, const CVec& h, std::optional<std::size_t> exclude) {
    ForwardTrace trace;
    forward_into(m, h, exclude, trace);
    return trace;
}

void forward_batch_into(const SimilarityModel& m, const std::vector<const CVec*>& inputs,
                        const std::vector<std::optional<std::size_t>>& excludes,
                        std::vector<ForwardTrace>& traces) {
    const std::size_t count = inputs.size();
    num::check(excludes.empty() || excludes.size() == count,
               "forward_batch: excludes must be empty or match the batch size");
    traces.resize(count);
    if (count == 0) {
        return;
    }
    const std::size_t L = m.n_columns;
    for (std::size_t b = 0; b < count; ++b) {
        check_forward_args(m, *inputs[b], excludes.empty() ? std::nullopt : excludes[b]);
        traces[b].scratch_re.assign(L, 0.0);
        traces[b].scratch_im.assign(L, 0.0);
    }

    // Column tiles keep a chunk's accumulators cache-resident while each
    // dictionary row tile is reused across the chunk's samples. For a fixed
    // (sample, column) the entry index still ascends, so every correlation
    // rounds exactly as in forward_into.
    constexpr std::size_t kChunk = 64;
    constexpr std::size_t kTile = 256;
    for (std::size_t b0 = 0; b0 < count; b0 += kChunk) {
        const std::size_t b1 = std::min(b0 + kChunk, count);
        for (std::size_t j0 = 0; j0 < L; j0 += kTile) {
            const std::size_t j1 = std::min(j0 + kTile, L);
            for (std::size_t i = 0; i < m.input_dim; ++i) {
                const double* pr = m.d_re.data() + i * L;
                const double* pi = m.d_im.data() + i * L;
                for (std::size_t b = b0; b < b1; ++b) {
                    const cplx hb = (*inputs[b])[i];
                    const double u = hb.real();
                    const double v = hb.imag();
                    double* cr = traces[b].scratch_re.data();
                    double* ci = traces[b].scratch_im.data();
                    for (std::size_t j = j0; j < j1; ++j) {
                        cr[j] += pr[j] * u + pi[j] * v;
                        ci[j] += pr[j] * v - pi[j] * u;
                    }
                }
            }
        }
    }

    for (std::size_t b = 0; b < count; ++b) {
        finish_forward(m, excludes.empty() ? std::nullopt : excludes[b], traces[b]);
    }
}

void backward_into(const SimilarityModel& m, const ForwardTrace& trace, const CVec& h,
                   const RVec& dL_dthat, SimGradients& grads) {
    num::check(h.size() == m.input_dim, "backward: input dimension mismatch");
    num::check(dL_dthat.size() == m.target_dim, "backward: loss gradient dimension mismatch");
    num::check(trace.c.size() == m.n_columns, "backward: trace does not match model");

    const std::size_t L = m.n_columns;
    const std::size_t nk = trace.support.size();
    grads.support = trace.support;
    grads.d_cols.resize(nk);
    grads.p_cols.resize(nk);

    double l1 = 0.0;
    for (std::size_t j : trace.support) {
        l1 += std::abs(trace.s[j]);
    }
    if (l1 <= 0.0) {
        for (std::size_t q = 0; q < nk; ++q) {
            grads.d_cols[q].assign(m.input_dim, cplx(0.0, 0.0));
            grads.p_cols[q].assign(m.target_dim, 0.0);
        }
        return;
    }

    // dL/dy on the support, then the L1-normalization pullback
    // dL/da_j = (dL/dy_j - sum_i dL/dy_i y_i) / ||s||_1.
    RVec dl_dy(nk, 0.0);
    for (std::size_t q = 0; q < nk; ++q) {
        const std::size_t j = trace.support[q];
        double acc = 0.0;
        for (std::size_t t = 0; t < m.target_dim; ++t) {
            acc += m.p[t * L + j] * dL_dthat[t];
        }
        dl_dy[q] = acc;
    }
    double inner = 0.0;
    for (std::size_t q = 0; q < nk; ++q) {
        inner += dl_dy[q] * trace.y[trace.support[q]];
    }

    for (std::size_t q = 0; q < nk; ++q) {
        const std::size_t j = trace.support[q];
        grads.p_cols[q].resize(m.target_dim);
        const double yj = trace.y[j];
        for (std::size_t t = 0; t < m.target_dim; ++t) {
            grads.p_cols[q][t] = dL_dthat[t] * yj;
        }

        grads.d_cols[q].assign(m.input_dim, cplx(0.0, 0.0));
        const double aj = std::abs(trace.s[j]);
        if (aj == 0.0) {
            continue;  // modulus kink: zero subgradient for this column
        }
        const double dl_da = (dl_dy[q] - inner) / l1;
        // Through |s_j| on the re/im stacking, then through the correlation:
        // grad of column j is conj(w) * h with w = dl_da * s_j / |s_j|.
        const cplx w = (dl_da / aj) * trace.s[j];
        const cplx wc = std::conj(w);
        for (std::size_t i = 0; i < m.input_dim; ++i) {
            grads.d_cols[q][i] = wc * h[i];
        }
    }
}

SimGradients backward(const SimilarityModel& m, const ForwardTrace& trace, const CVec& h,
                      const RVec& dL_dthat) {
    SimGradients grads;
    backward_into(m, trace, h, dL_dthat, grads);
    return grads;
}

void accumulate_param_grad(const SimilarityModel& m, const SimGradients& grads, double weight,
                           RVec& out) {
    num::check(out.size() == m.param_count(), "accumulate_param_grad: wrong output size");
    const std::size_t L = m.n_columns;
    const std::size_t re_base = 0;
    const std::size_t im_base = m.input_dim * L;
    const std::size_t p_base = 2 * m.input_dim * L;
    for (std::size_t q = 0; q < grads.support.size(); ++q) {
        const std::size_t j = grads.support[q];
        for (std::size_t i = 0; i < m.input_dim; ++i) {
            out[re_base + i * L + j] += weight * grads.d_cols[q][i].real();
            out[im_base + i * L + j] += weight * grads.d_cols[q][i].imag();
        }
        for (std::size_t t = 0; t < m.target_dim; ++t) {
            out[p_base + t * L + j] += weight * grads.p_cols[q][t];
        }
    }
}

std::vector<RVec> predict_batch(const SimilarityModel& m, const std::vector<CVec>& channels) {
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (channels[i].size() != m.input_dim) {
            throw std::runtime_error("predict_batch: sample " + std::to_string(i) +
                                     ": input dimension mismatch");
        }
    }
    std::vector<RVec> out;
    out.reserve(channels.size());
    std::vector<ForwardTrace> traces;
    const std::vector<std::optional<std::size_t>> no_excludes;
    constexpr std::size_t kEvalChunk = 128;
    for (std::size_t start = 0; start < channels.size(); start += kEvalChunk) {
        const std::size_t stop = std::min(start + kEvalChunk, channels.size());
        std::vector<const CVec*> inputs;
        inputs.reserve(stop - start);
        for (std::size_t i = start; i < stop; ++i) {
            inputs.push_back(&channels[i]);
        }
        forward_batch_into(m, inputs, no_excludes, traces);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            out.push_back(traces[i].t_hat);
        }
    }
    return out;
}

}  // namespace simchan::net
