#pragma once

// Independent re-implementations used as test oracles. These deliberately
// avoid the library's algorithms and storage layouts: eigen decomposition by
// cyclic Jacobi instead of power iteration, kernel regression by the direct
// weighted-average formula instead of the staged forward pass.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "simchan/numkernel.hpp"

namespace oracles {

using simchan::num::CMat;
using simchan::num::CVec;
using simchan::num::RVec;
using simchan::num::cplx;

struct HermitianEig {
    RVec values;   // ascending
    CMat vectors;  // column i pairs with values[i]
};

// Cyclic Jacobi diagonalization of a Hermitian matrix. Each sweep rotates
// every (p, q) pair through the unitary that zeroes A(p, q): a diagonal
// phase joined with a real Givens rotation.
inline HermitianEig jacobi_hermitian_eig(CMat a, int max_sweeps = 60, double tol = 1e-14) {
    const std::size_t n = a.rows;
    CMat v(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        v.at(i, i) = 1.0;
    }

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += std::norm(a.at(p, q));
            }
        }
        double diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diag += std::abs(a.at(i, i));
        }
        if (std::sqrt(off) <= tol * std::max(diag, 1.0)) {
            break;
        }

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a.at(p, q);
                const double b = std::abs(apq);
                if (b == 0.0) {
                    continue;
                }
                const cplx phase = apq / b;  // e^{i phi}
                const double app = a.at(p, p).real();
                const double aqq = a.at(q, q).real();
                const double theta = 0.5 * std::atan2(2.0 * b, app - aqq);
                const double c = std::cos(theta);
                const double s = std::sin(theta);

                // Unitary restricted to (p, q):
                //   column p ->  c * e_p + s * conj(phase) * e_q
                //   column q -> -s * phase * e_p + c * e_q
                const cplx up_q = s * std::conj(phase);
                const cplx uq_p = -s * phase;

                for (std::size_t r = 0; r < n; ++r) {  // A <- A U
                    const cplx arp = a.at(r, p);
                    const cplx arq = a.at(r, q);
                    a.at(r, p) = c * arp + up_q * arq;
                    a.at(r, q) = uq_p * arp + c * arq;
                }
                for (std::size_t r = 0; r < n; ++r) {  // A <- U^H A
                    const cplx apr = a.at(p, r);
                    const cplx aqr = a.at(q, r);
                    a.at(p, r) = c * apr + std::conj(up_q) * aqr;
                    a.at(q, r) = std::conj(uq_p) * apr + c * aqr;
                }
                for (std::size_t r = 0; r < n; ++r) {  // V <- V U
                    const cplx vrp = v.at(r, p);
                    const cplx vrq = v.at(r, q);
                    v.at(r, p) = c * vrp + up_q * vrq;
                    v.at(r, q) = uq_p * vrp + c * vrq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a.at(i, i).real() < a.at(j, j).real();
    });

    HermitianEig out;
    out.values.resize(n);
    out.vectors = CMat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = a.at(order[i], order[i]).real();
        for (std::size_t r = 0; r < n; ++r) {
            out.vectors.at(r, i) = v.at(r, order[i]);
        }
    }
    return out;
}

// Indices of the k largest |h_i^H h|, largest first, ties -> lowest index.
inline std::vector<std::size_t> top_k_by_correlation(const std::vector<CVec>& columns,
                                                     const CVec& h, std::size_t k) {
    std::vector<double> score(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) {
            acc += std::conj(columns[i][j]) * h[j];
        }
        score[i] = std::abs(acc);
    }
    std::vector<std::size_t> idx(columns.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = i;
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    idx.resize(std::min(k, idx.size()));
    return idx;
}

// Kernel-weighted average of the selected targets:
//   t_hat = sum_i w_i t_i / sum_i w_i,  w_i = |h_i^H h|
// computed directly from the definition, all k neighbors when k = L.
inline RVec nadaraya_watson_direct(const std::vector<CVec>& columns,
                                   const std::vector<RVec>& targets, const CVec& h,
                                   std::size_t k) {
    const auto chosen = top_k_by_correlation(columns, h, k);
    RVec t_hat(targets.empty() ? 0 : targets.front().size(), 0.0);
    double total = 0.0;
    for (std::size_t i : chosen) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) {
            acc += std::conj(columns[i][j]) * h[j];
        }
        total += std::abs(acc);
    }
    if (total == 0.0) {
        return t_hat;
    }
    for (std::size_t i : chosen) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) {
            acc += std::conj(columns[i][j]) * h[j];
        }
        const double w = std::abs(acc) / total;
        for (std::size_t t = 0; t < t_hat.size(); ++t) {
            t_hat[t] += w * targets[i][t];
        }
    }
    return t_hat;
}

}  // namespace oracles
