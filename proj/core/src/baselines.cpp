#include "simchan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "simchan/numkernel.hpp"
#include "simchan/rng.hpp"

namespace simchan::baselines {

namespace {

constexpr std::uint64_t kMlpInitTag = 0x4d4c50ULL;
constexpr std::uint64_t kMlpShuffleTag = 0x4d535546ULL;
constexpr std::uint64_t kElmTag = 0x454c4dULL;

void fill_uniform(rng::Prng& prng, RVec& v, double lo, double hi) {
    for (double& x : v) x = prng.uniform(lo, hi);
}

// out = W x + b for a row-major rows x cols weight matrix.
void affine(const RVec& w, const RVec& b, const RVec& x, RVec& out) {
    const std::size_t rows = b.size();
    const std::size_t cols = x.size();
    out.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const double* row = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

void relu(const RVec& z, RVec& a) {
    a.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

struct MlpTrace {
    RVec z1, a1, z2, a2, y;
};

void mlp_forward(const MlpModel& m, const RVec& x, MlpTrace& t) {
    affine(m.w1, m.b1, x, t.z1);
    relu(t.z1, t.a1);
    affine(m.w2, m.b2, t.a1, t.z2);
    relu(t.z2, t.a2);
    affine(m.w3, m.b3, t.a2, t.y);
}

struct MlpGrads {
    RVec w1, b1, w2, b2, w3, b3;

    void resize_like(const MlpModel& m) {
        w1.assign(m.w1.size(), 0.0);
        b1.assign(m.b1.size(), 0.0);
        w2.assign(m.w2.size(), 0.0);
        b2.assign(m.b2.size(), 0.0);
        w3.assign(m.w3.size(), 0.0);
        b3.assign(m.b3.size(), 0.0);
    }
};

// Accumulates weight * dL/dparams for one sample into g. gy is dL/dy.
void mlp_backward(const MlpModel& m, const RVec& x, const MlpTrace& t, const RVec& gy,
                  double weight, MlpGrads& g) {
    const std::size_t h = MlpModel::kHidden;
    RVec gz2(h, 0.0), gz1(h, 0.0);

    for (std::size_t r = 0; r < gy.size(); ++r) {
        const double go = weight * gy[r];
        g.b3[r] += go;
        double* row = g.w3.data() + r * h;
        for (std::size_t c = 0; c < h; ++c) row[c] += go * t.a2[c];
    }
    for (std::size_t c = 0; c < h; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < gy.size(); ++r) acc += m.w3[r * h + c] * gy[r];
        gz2[c] = t.z2[c] > 0.0 ? acc : 0.0;
    }
    for (std::size_t r = 0; r < h; ++r) {
        const double go = weight * gz2[r];
        g.b2[r] += go;
        double* row = g.w2.data() + r * h;
        for (std::size_t c = 0; c < h; ++c) row[c] += go * t.a1[c];
    }
    for (std::size_t c = 0; c < h; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < h; ++r) acc += m.w2[r * h + c] * gz2[r];
        gz1[c] = t.z1[c] > 0.0 ? acc : 0.0;
    }
    const std::size_t in = x.size();
    for (std::size_t r = 0; r < h; ++r) {
        const double go = weight * gz1[r];
        g.b1[r] += go;
        double* row = g.w1.data() + r * in;
        for (std::size_t c = 0; c < in; ++c) row[c] += go * x[c];
    }
}

void append(RVec& out, const RVec& v) { out.insert(out.end(), v.begin(), v.end()); }

}  // namespace

CVec reduce_input(const scene::ChannelVector& ch) {
    num::CMat h(ch.n_antennas, ch.n_subcarriers);
    num::check(ch.values.size() == h.rows * h.cols, "reduce_input: channel layout mismatch");
    h.data = ch.values;
    return num::dominant_left_sv(h).u;
}

RVec stack_complex(const CVec& v) {
    RVec out(2 * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = v[i].real();
        out[v.size() + i] = v[i].imag();
    }
    return out;
}

scene::LabeledDataset reduce_dataset(const scene::LabeledDataset& ds) {
    scene::LabeledDataset out;
    out.task = ds.task;
    out.antenna_subset = ds.antenna_subset;
    out.n_train = ds.n_train;
    out.targets = ds.targets;
    out.inputs.reserve(ds.inputs.size());
    for (const auto& ch : ds.inputs) {
        scene::ChannelVector reduced;
        reduced.n_antennas = ch.n_antennas;
        reduced.n_subcarriers = 1;
        reduced.values = reduce_input(ch);
        out.inputs.push_back(std::move(reduced));
    }
    return out;
}

std::size_t MlpModel::param_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
}

void MlpModel::get_params(RVec& out) const {
    out.clear();
    out.reserve(param_count());
    append(out, w1);
    append(out, b1);
    append(out, w2);
    append(out, b2);
    append(out, w3);
    append(out, b3);
}

void MlpModel::set_params(const RVec& params) {
    num::check(params.size() == param_count(), "MlpModel::set_params: length mismatch");
    auto it = params.begin();
    for (RVec* v : {&w1, &b1, &w2, &b2, &w3, &b3}) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(v->size()), v->begin());
        it += static_cast<std::ptrdiff_t>(v->size());
    }
}

MlpModel mlp_init(std::size_t input_dim, std::uint64_t seed) {
    num::check(input_dim >= 1, "mlp_init: input_dim must be >= 1");
    const std::size_t h = MlpModel::kHidden;
    MlpModel m;
    m.input_dim = input_dim;
    m.w1.resize(h * input_dim);
    m.b1.assign(h, 0.0);
    m.w2.resize(h * h);
    m.b2.assign(h, 0.0);
    m.w3.resize(3 * h);
    m.b3.assign(3, 0.0);

    rng::Prng prng = rng::Prng::from_path(seed, {kMlpInitTag});
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
    fill_uniform(prng, m.w1, -s1, s1);
    fill_uniform(prng, m.w2, -s2, s2);
    fill_uniform(prng, m.w3, -s2, s2);
    return m;
}

RVec mlp_train(MlpModel& m, const scene::LabeledDataset& ds, const train::TrainConfig& cfg) {
    cfg.validate();
    num::check(ds.n_train > 0 && ds.n_train <= ds.size(), "mlp_train: empty training split");
    const std::size_t n = ds.n_train;
    std::vector<RVec> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = stack_complex(ds.inputs[i].values);
        num::check(xs[i].size() == m.input_dim, "mlp_train: input dimension mismatch");
        num::check(ds.targets[i].size() == 3, "mlp_train: positioning targets must have length 3");
    }

    RVec params;
    m.get_params(params);
    train::AdamState state;
    RVec flat_grad(params.size(), 0.0);
    RVec gy;
    RVec epoch_loss(n, 0.0);
    RVec history;
    history.reserve(cfg.epochs);

    MlpTrace trace;
    MlpGrads grads;
    std::vector<std::size_t> perm(n);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng::Prng shuffle_rng = rng::Prng::from_path(cfg.shuffle_seed, {kMlpShuffleTag, epoch});
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = shuffle_rng.next_index(i);
            std::swap(perm[i - 1], perm[j]);
        }

        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t stop = std::min(start + cfg.batch_size, n);
            const double weight = 1.0 / static_cast<double>(stop - start);
            grads.resize_like(m);

            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = perm[b];
                mlp_forward(m, xs[idx], trace);
                const double loss = train::pos_loss(ds.targets[idx], trace.y);
                if (!std::isfinite(loss)) {
                    throw train::NonFiniteLossError(epoch, batch_index);
                }
                epoch_loss[idx] = loss;
                train::pos_loss_grad(ds.targets[idx], trace.y, gy);
                mlp_backward(m, xs[idx], trace, gy, weight, grads);
            }

            flat_grad.clear();
            append(flat_grad, grads.w1);
            append(flat_grad, grads.b1);
            append(flat_grad, grads.w2);
            append(flat_grad, grads.b2);
            append(flat_grad, grads.w3);
            append(flat_grad, grads.b3);
            train::adam_step(params, flat_grad, state, cfg);
            m.set_params(params);
        }

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += epoch_loss[i];
        history.push_back(total / static_cast<double>(n));
    }
    return history;
}

ElmModel elm_train(const scene::LabeledDataset& ds, std::size_t hidden, double ridge,
                   std::uint64_t seed) {
    num::check(hidden >= 1, "elm_train: hidden must be >= 1");
    num::check(ridge >= 0.0, "elm_train: ridge must be >= 0");
    num::check(ds.n_train > 0 && ds.n_train <= ds.size(), "elm_train: empty training split");
    const std::size_t n = ds.n_train;
    const std::size_t in = 2 * ds.inputs.front().values.size();

    ElmModel m;
    m.input_dim = in;
    m.hidden = hidden;
    m.w.resize(hidden * in);
    rng::Prng prng = rng::Prng::from_path(seed, {kElmTag});
    fill_uniform(prng, m.w, -1.0, 1.0);

    num::RMat gram(hidden, hidden);
    num::RMat rhs(hidden, 3);
    RVec z(hidden);
    for (std::size_t i = 0; i < n; ++i) {
        const RVec x = stack_complex(ds.inputs[i].values);
        num::check(x.size() == in, "elm_train: input dimension mismatch");
        num::check(ds.targets[i].size() == 3, "elm_train: positioning targets must have length 3");
        for (std::size_t r = 0; r < hidden; ++r) {
            double acc = 0.0;
            const double* row = m.w.data() + r * in;
            for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
            z[r] = acc > 0.0 ? acc : 0.0;
        }
        for (std::size_t r = 0; r < hidden; ++r) {
            const double zr = z[r];
            if (zr == 0.0) continue;
            double* row = gram.data.data() + r * hidden;
            for (std::size_t c = r; c < hidden; ++c) row[c] += zr * z[c];
            for (std::size_t t = 0; t < 3; ++t) rhs.at(r, t) += zr * ds.targets[i][t];
        }
    }
    for (std::size_t r = 1; r < hidden; ++r) {
        for (std::size_t c = 0; c < r; ++c) gram.at(r, c) = gram.at(c, r);
    }

    double trace = 0.0;
    for (std::size_t r = 0; r < hidden; ++r) trace += gram.at(r, r);
    const double lambda = ridge * trace / static_cast<double>(hidden);
    for (std::size_t r = 0; r < hidden; ++r) gram.at(r, r) += lambda;

    num::RMat beta;
    try {
        beta = num::cholesky_solve_spd(std::move(gram), std::move(rhs));
    } catch (const std::runtime_error&) {
        throw std::runtime_error("elm_train: normal matrix not positive definite; use ridge > 0");
    }
    m.beta = std::move(beta.data);
    return m;
}

RVec baseline_predict(const MlpModel& m, const RVec& x) {
    num::check(x.size() == m.input_dim, "baseline_predict: input dimension mismatch");
    MlpTrace t;
    mlp_forward(m, x, t);
    return t.y;
}

RVec baseline_predict(const ElmModel& m, const RVec& x) {
    num::check(x.size() == m.input_dim, "baseline_predict: input dimension mismatch");
    RVec out(3, 0.0);
    for (std::size_t r = 0; r < m.hidden; ++r) {
        double acc = 0.0;
        const double* row = m.w.data() + r * m.input_dim;
        for (std::size_t c = 0; c < m.input_dim; ++c) acc += row[c] * x[c];
        if (acc <= 0.0) continue;
        for (std::size_t t = 0; t < 3; ++t) out[t] += acc * m.beta[r * 3 + t];
    }
    return out;
}

}  // namespace simchan::baselines
