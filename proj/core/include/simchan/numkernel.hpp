#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace simchan::num {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

// Dense complex matrix, row-major.
struct CMat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    CVec data;

    CMat() = default;
    CMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    cplx& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const cplx& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Dense real matrix, row-major.
struct RMat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    RVec data;

    RMat() = default;
    RMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const double& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Thrown when an iterative routine runs out of iterations; carries the
// last iterate so callers can inspect how far it got.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(std::string msg, CVec last_iterate, double last_sigma)
        : std::runtime_error(std::move(msg)),
          last_iterate_(std::move(last_iterate)),
          last_sigma_(last_sigma) {}

    const CVec& last_iterate() const { return last_iterate_; }
    double last_sigma() const { return last_sigma_; }

  private:
    CVec last_iterate_;
    double last_sigma_;
};

// Hermitian inner product sum_j conj(a_j) * b_j, accumulated in ascending
// index order so the result is bit-reproducible.
cplx cdot(const CVec& a, const CVec& b);

double norm2(const CVec& a);
double norm2(const RVec& a);

// y = M^H x; entry j equals cdot(column_j(M), x) with the same summation order.
CVec matvec_adjoint(const CMat& m, const CVec& x);

// y = M x, row-wise inner products in ascending column order.
CVec matvec(const CMat& m, const CVec& x);

// Dominant left singular vector of H by power iteration on H * H^H.
// Start vector is the normalized all-ones vector; restarts once with e_0 if
// the Rayleigh quotient stagnates at zero. The returned u has unit 2-norm
// and is phase-normalized: its largest-modulus entry (ties -> lowest index)
// is rotated to be real nonnegative. sigma = ||H^H u||_2.
struct DominantSv {
    CVec u;
    double sigma = 0.0;
    int iterations = 0;
};
DominantSv dominant_left_sv(const CMat& h, double tol = 1e-10, int max_iter = 10000);

// Central finite differences (f(x + h e_j) - f(x - h e_j)) / (2h). Test oracle
// for the hand-derived backward passes.
RVec finite_diff_grad(const std::function<double(const RVec&)>& f, const RVec& x, double h);

// Solves A X = B for symmetric positive definite A by Cholesky; A and B are
// overwritten. Throws std::runtime_error on a nonpositive pivot.
RMat cholesky_solve_spd(RMat a, RMat b);

inline void check(bool cond, const char* msg) {
    if (!cond) {
        throw std::invalid_argument(msg);
    }
}

}  // namespace simchan::num
