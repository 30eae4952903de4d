#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "oracles.hpp"
#include "simchan/baselines.hpp"
#include "simchan/rng.hpp"

using namespace simchan;
using baselines::ElmModel;
using baselines::MlpModel;
using num::CVec;
using num::RVec;
using num::cplx;
using scene::ChannelVector;

namespace {

ChannelVector make_channel(std::size_t n_ant, std::size_t n_sub, std::uint64_t seed) {
    rng::Prng prng(seed);
    ChannelVector h;
    h.n_antennas = n_ant;
    h.n_subcarriers = n_sub;
    for (std::size_t i = 0; i < n_ant * n_sub; ++i) {
        h.values.push_back(cplx(prng.uniform(-1.0, 1.0), prng.uniform(-1.0, 1.0)));
    }
    return h;
}

scene::LabeledDataset positioning_dataset(std::size_t l, std::size_t n_ant, std::size_t n_sub,
                                          std::uint64_t seed) {
    rng::Prng prng(seed);
    scene::LabeledDataset ds;
    ds.task = scene::Task::positioning;
    ds.n_train = l;
    for (std::size_t i = 0; i < l; ++i) {
        ds.inputs.push_back(make_channel(n_ant, n_sub, seed * 1000 + i));
        ds.targets.push_back(RVec{prng.uniform(0.0, 4.0), prng.uniform(0.0, 4.0), 1.5});
    }
    return ds;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("reduce_input is the dominant left singular vector") {
    const ChannelVector ch = make_channel(4, 6, 3);
    const CVec u = baselines::reduce_input(ch);
    REQUIRE(u.size() == 4);
    CHECK(num::norm2(u) == doctest::Approx(1.0).epsilon(1e-12));

    // Independent eigensolver on the Gram matrix H H^H.
    num::CMat gram(4, 4);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            cplx acc = 0.0;
            for (std::size_t s = 0; s < 6; ++s) {
                acc += ch.values[r * 6 + s] * std::conj(ch.values[c * 6 + s]);
            }
            gram.at(r, c) = acc;
        }
    }
    const auto eig = oracles::jacobi_hermitian_eig(gram);
    cplx overlap = 0.0;
    for (std::size_t r = 0; r < 4; ++r) {
        overlap += std::conj(eig.vectors.at(r, 3)) * u[r];
    }
    CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("reduce_input is invariant to a global phase up to normalization") {
    const ChannelVector ch = make_channel(3, 5, 9);
    ChannelVector rotated = ch;
    const cplx phase = std::polar(1.0, 1.234);
    for (auto& v : rotated.values) {
        v *= phase;
    }
    const CVec a = baselines::reduce_input(ch);
    const CVec b = baselines::reduce_input(rotated);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a[i] - b[i]) < 1e-9);
    }
}

TEST_CASE("stack_complex splits into real then imaginary halves") {
    const CVec v{cplx(1.0, 2.0), cplx(-3.0, 4.0)};
    CHECK(baselines::stack_complex(v) == RVec{1.0, -3.0, 2.0, 4.0});
}

TEST_CASE("reduce_dataset reduces inputs and passes targets through") {
    const auto ds = positioning_dataset(5, 4, 6, 21);
    const auto red = baselines::reduce_dataset(ds);
    REQUIRE(red.size() == 5);
    CHECK(red.n_train == 5);
    CHECK(red.targets == ds.targets);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(red.inputs[i].n_antennas == 4);
        CHECK(red.inputs[i].n_subcarriers == 1);
        CHECK(red.inputs[i].values == baselines::reduce_input(ds.inputs[i]));
    }
}

TEST_CASE("mlp_init draws bounded weights and zero biases") {
    const auto m = baselines::mlp_init(8, 4);
    CHECK(m.input_dim == 8);
    CHECK(m.w1.size() == 112 * 8);
    CHECK(m.w2.size() == 112 * 112);
    CHECK(m.w3.size() == 3 * 112);
    CHECK(m.b1 == RVec(112, 0.0));
    CHECK(m.b2 == RVec(112, 0.0));
    CHECK(m.b3 == RVec(3, 0.0));

    const double bound1 = 1.0 / std::sqrt(8.0);
    for (double w : m.w1) {
        CHECK(std::abs(w) <= bound1);
    }
    const double bound2 = 1.0 / std::sqrt(112.0);
    for (double w : m.w2) {
        CHECK(std::abs(w) <= bound2);
    }

    const auto again = baselines::mlp_init(8, 4);
    CHECK(again.w1 == m.w1);
    const auto other = baselines::mlp_init(8, 5);
    CHECK(other.w1 != m.w1);
}

TEST_CASE("MlpModel parameter vector round-trips") {
    auto m = baselines::mlp_init(6, 7);
    RVec params;
    m.get_params(params);
    REQUIRE(params.size() == m.param_count());
    CHECK(m.param_count() == 112 * 6 + 112 + 112 * 112 + 112 + 3 * 112 + 3);

    auto other = baselines::mlp_init(6, 8);
    other.set_params(params);
    CHECK(other.w1 == m.w1);
    CHECK(other.w3 == m.w3);
    CHECK(other.b2 == m.b2);

    params.pop_back();
    CHECK_THROWS_AS(other.set_params(params), std::invalid_argument);
}

TEST_CASE("an all-zero MLP predicts its output bias") {
    MlpModel m = baselines::mlp_init(4, 1);
    RVec params(m.param_count(), 0.0);
    m.set_params(params);
    m.b3 = {1.5, -2.0, 0.25};
    const RVec y = baselines::baseline_predict(m, RVec{1.0, 2.0, 3.0, 4.0});
    CHECK(y == RVec{1.5, -2.0, 0.25});
}

TEST_CASE("mlp_train lowers the loss and is seed-deterministic") {
    const auto ds = positioning_dataset(40, 3, 2, 13);
    train::TrainConfig cfg;
    cfg.learning_rate = 3e-3;
    cfg.batch_size = 10;
    cfg.epochs = 40;
    cfg.loss_kind = train::LossKind::positioning;
    cfg.shuffle_seed = 2;

    auto m = baselines::mlp_init(12, 6);
    const RVec history = baselines::mlp_train(m, ds, cfg);
    REQUIRE(history.size() == 40);
    CHECK(history.back() < 0.5 * history.front());

    auto m2 = baselines::mlp_init(12, 6);
    const RVec h2 = baselines::mlp_train(m2, ds, cfg);
    CHECK(h2 == history);
    CHECK(m2.w1 == m.w1);
    CHECK(m2.b3 == m.b3);
}

TEST_CASE("mlp_train with zero learning rate keeps the weights") {
    const auto ds = positioning_dataset(10, 3, 2, 14);
    train::TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.batch_size = 5;
    cfg.epochs = 2;
    cfg.loss_kind = train::LossKind::positioning;
    auto m = baselines::mlp_init(12, 3);
    const auto before = m.w1;
    baselines::mlp_train(m, ds, cfg);
    CHECK(m.w1 == before);
}

TEST_CASE("mlp_train rejects non-positioning targets") {
    auto ds = positioning_dataset(4, 3, 2, 15);
    ds.targets[2] = RVec{1.0, 2.0};
    auto m = baselines::mlp_init(12, 3);
    train::TrainConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_WITH_AS(baselines::mlp_train(m, ds, cfg),
                         doctest::Contains("targets must have length 3"), std::invalid_argument);
}

TEST_CASE("elm_train satisfies its normal equations") {
    const auto ds = positioning_dataset(12, 3, 2, 29);
    const std::size_t hidden = 20;
    const double ridge = 1e-4;
    const ElmModel m = baselines::elm_train(ds, hidden, ridge, 7);
    REQUIRE(m.w.size() == hidden * 12);
    REQUIRE(m.beta.size() == hidden * 3);

    // Rebuild Z, the Gram matrix, and the regularizer straight from the
    // definition and check (Z Z^T + lambda I) B = Z T.
    std::vector<RVec> zs;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const RVec x = baselines::stack_complex(ds.inputs[i].values);
        RVec z(hidden, 0.0);
        for (std::size_t r = 0; r < hidden; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < 12; ++c) {
                acc += m.w[r * 12 + c] * x[c];
            }
            z[r] = std::max(acc, 0.0);
        }
        zs.push_back(std::move(z));
    }
    double trace = 0.0;
    for (std::size_t r = 0; r < hidden; ++r) {
        for (const auto& z : zs) {
            trace += z[r] * z[r];
        }
    }
    const double lambda = ridge * trace / hidden;

    double worst = 0.0;
    for (std::size_t r = 0; r < hidden; ++r) {
        for (std::size_t t = 0; t < 3; ++t) {
            double lhs = lambda * m.beta[r * 3 + t];
            for (std::size_t c = 0; c < hidden; ++c) {
                double g = 0.0;
                for (const auto& z : zs) {
                    g += z[r] * z[c];
                }
                lhs += g * m.beta[c * 3 + t];
            }
            double rhs = 0.0;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                rhs += zs[i][r] * ds.targets[i][t];
            }
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1.0));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("elm_train is seed-deterministic and prediction matches the features") {
    const auto ds = positioning_dataset(10, 2, 3, 31);
    const ElmModel a = baselines::elm_train(ds, 16, 1e-3, 3);
    const ElmModel b = baselines::elm_train(ds, 16, 1e-3, 3);
    CHECK(a.w == b.w);
    CHECK(a.beta == b.beta);
    const ElmModel c = baselines::elm_train(ds, 16, 1e-3, 4);
    CHECK(c.w != a.w);

    const RVec x = baselines::stack_complex(ds.inputs[0].values);
    const RVec y = baselines::baseline_predict(a, x);
    RVec expect(3, 0.0);
    for (std::size_t r = 0; r < 16; ++r) {
        double acc = 0.0;
        for (std::size_t cidx = 0; cidx < x.size(); ++cidx) {
            acc += a.w[r * x.size() + cidx] * x[cidx];
        }
        const double z = std::max(acc, 0.0);
        for (std::size_t t = 0; t < 3; ++t) {
            expect[t] += z * a.beta[r * 3 + t];
        }
    }
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(y[t] == doctest::Approx(expect[t]).epsilon(1e-12));
    }
}

TEST_CASE("elm_train without ridge fails on a rank-deficient gram matrix") {
    const auto ds = positioning_dataset(3, 2, 2, 37);
    // hidden > samples makes Z Z^T singular; with ridge = 0 the solve fails.
    CHECK_THROWS_WITH_AS(baselines::elm_train(ds, 8, 0.0, 5),
                         doctest::Contains("use ridge > 0"), std::runtime_error);
}

TEST_CASE("baseline_predict validates input length") {
    const auto ds = positioning_dataset(5, 2, 2, 41);
    const ElmModel m = baselines::elm_train(ds, 8, 1e-3, 5);
    CHECK_THROWS_AS(baselines::baseline_predict(m, RVec{1.0}), std::invalid_argument);
    const MlpModel mm = baselines::mlp_init(8, 2);
    CHECK_THROWS_AS(baselines::baseline_predict(mm, RVec{1.0}), std::invalid_argument);
}

}  // TEST_SUITE
