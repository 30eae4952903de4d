#include "simchan/numkernel.hpp"

#include <cmath>
#include <limits>

namespace simchan::num {

cplx cdot(const CVec& a, const CVec& b) {
    check(a.size() == b.size(), "cdot: dimension mismatch");
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) {
        acc += std::conj(a[j]) * b[j];
    }
    return acc;
}

double norm2(const CVec& a) {
    double acc = 0.0;
    for (const cplx& v : a) {
        acc += v.real() * v.real() + v.imag() * v.imag();
    }
    return std::sqrt(acc);
}

double norm2(const RVec& a) {
    double acc = 0.0;
    for (double v : a) {
        acc += v * v;
    }
    return std::sqrt(acc);
}

CVec matvec_adjoint(const CMat& m, const CVec& x) {
    check(m.rows == x.size(), "matvec_adjoint: dimension mismatch");
    CVec y(m.cols, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < m.cols; ++j) {
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i < m.rows; ++i) {
            acc += std::conj(m.at(i, j)) * x[i];
        }
        y[j] = acc;
    }
    return y;
}

CVec matvec(const CMat& m, const CVec& x) {
    check(m.cols == x.size(), "matvec: dimension mismatch");
    CVec y(m.rows, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < m.rows; ++i) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < m.cols; ++j) {
            acc += m.at(i, j) * x[j];
        }
        y[i] = acc;
    }
    return y;
}

namespace {

void normalize_phase(CVec& u) {
    std::size_t best = 0;
    double best_mod = -1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double mod = std::abs(u[i]);
        if (mod > best_mod) {
            best_mod = mod;
            best = i;
        }
    }
    if (best_mod <= 0.0) {
        return;
    }
    const cplx rot = std::conj(u[best]) / best_mod;
    for (cplx& v : u) {
        v *= rot;
    }
}

void scale(CVec& u, double s) {
    for (cplx& v : u) {
        v *= s;
    }
}

}  // namespace

DominantSv dominant_left_sv(const CMat& h, double tol, int max_iter) {
    check(tol > 0.0, "dominant_left_sv: tol must be > 0");
    check(max_iter >= 1, "dominant_left_sv: max_iter must be >= 1");
    check(h.rows >= 1 && h.cols >= 1, "dominant_left_sv: empty matrix");

    bool all_zero = true;
    for (const cplx& v : h.data) {
        if (v != cplx(0.0, 0.0)) {
            all_zero = false;
            break;
        }
    }
    if (all_zero) {
        throw std::invalid_argument("dominant_left_sv: zero matrix");
    }

    CVec u(h.rows, cplx(1.0 / std::sqrt(static_cast<double>(h.rows)), 0.0));
    bool restarted = false;

    CVec gu;  // (H H^H) u
    double rho = 0.0;
    for (int iter = 1; iter <= max_iter; ++iter) {
        const CVec w = matvec_adjoint(h, u);
        gu = matvec(h, w);
        rho = 0.0;  // u^H (H H^H) u = ||w||^2, real and >= 0
        for (const cplx& v : w) {
            rho += v.real() * v.real() + v.imag() * v.imag();
        }

        if (rho == 0.0) {
            if (!restarted) {
                // Start vector orthogonal to the row space; restart once.
                restarted = true;
                u.assign(h.rows, cplx(0.0, 0.0));
                u[0] = cplx(1.0, 0.0);
                continue;
            }
            CVec last = u;
            normalize_phase(last);
            throw ConvergenceError("dominant_left_sv: stagnated at zero Rayleigh quotient", last,
                                   0.0);
        }

        // Eigenvector residual ||G u - rho u|| relative to rho bounds the
        // angle to the dominant eigenspace of G = H H^H.
        double resid = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const cplx d = gu[i] - rho * u[i];
            resid += d.real() * d.real() + d.imag() * d.imag();
        }
        resid = std::sqrt(resid);

        if (resid <= tol * rho) {
            normalize_phase(u);
            DominantSv out;
            out.u = std::move(u);
            out.sigma = std::sqrt(rho);
            out.iterations = iter;
            return out;
        }

        double gu_norm = 0.0;
        for (const cplx& v : gu) {
            gu_norm += v.real() * v.real() + v.imag() * v.imag();
        }
        gu_norm = std::sqrt(gu_norm);
        u = gu;
        scale(u, 1.0 / gu_norm);
    }

    CVec last = u;
    normalize_phase(last);
    throw ConvergenceError("dominant_left_sv: no convergence after max_iter iterations", last,
                           std::sqrt(rho));
}

RVec finite_diff_grad(const std::function<double(const RVec&)>& f, const RVec& x, double h) {
    check(h > 0.0, "finite_diff_grad: step must be > 0");
    RVec grad(x.size(), 0.0);
    RVec probe = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double saved = probe[j];
        probe[j] = saved + h;
        const double fp = f(probe);
        probe[j] = saved - h;
        const double fm = f(probe);
        probe[j] = saved;
        grad[j] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

RMat cholesky_solve_spd(RMat a, RMat b) {
    check(a.rows == a.cols, "cholesky_solve_spd: matrix not square");
    check(a.rows == b.rows, "cholesky_solve_spd: dimension mismatch");
    const std::size_t n = a.rows;
    const std::size_t m = b.cols;

    // In-place lower Cholesky factor.
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a.at(j, j);
        for (std::size_t p = 0; p < j; ++p) {
            diag -= a.at(j, p) * a.at(j, p);
        }
        if (!(diag > 0.0)) {
            throw std::runtime_error(
                "cholesky_solve_spd: matrix is singular or indefinite; use ridge > 0");
        }
        const double root = std::sqrt(diag);
        a.at(j, j) = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a.at(i, j);
            for (std::size_t p = 0; p < j; ++p) {
                v -= a.at(i, p) * a.at(j, p);
            }
            a.at(i, j) = v / root;
        }
    }

    // Forward then back substitution, one right-hand side at a time.
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = b.at(i, c);
            for (std::size_t p = 0; p < i; ++p) {
                v -= a.at(i, p) * b.at(p, c);
            }
            b.at(i, c) = v / a.at(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double v = b.at(ii, c);
            for (std::size_t p = ii + 1; p < n; ++p) {
                v -= a.at(p, ii) * b.at(p, c);
            }
            b.at(ii, c) = v / a.at(ii, ii);
        }
    }
    return b;
}

}  // namespace simchan::num
