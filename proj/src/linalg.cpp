#include "fmchan/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace fmchan::linalg {

ComplexMatrix identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = cplx(1.0, 0.0);
    return m;
}

ComplexMatrix adjoint(const ComplexMatrix& a) {
    ComplexMatrix r(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(j, i) = std::conj(a.at(i, j));
    return r;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw StructuralError("matmul: inner dimensions disagree");
    ComplexMatrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const cplx aik = a.at(i, k);
            if (aik == cplx(0.0, 0.0)) continue;
            const cplx* brow = b.data() + static_cast<std::size_t>(k) * b.cols();
            cplx* crow = c.data() + static_cast<std::size_t>(i) * c.cols();
            for (int j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

ComplexMatrix matmul_abh(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.cols()) throw StructuralError("matmul_abh: inner dimensions disagree");
    ComplexMatrix c(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i) {
        const cplx* arow = a.data() + static_cast<std::size_t>(i) * a.cols();
        for (int j = 0; j < b.rows(); ++j) {
            const cplx* brow = b.data() + static_cast<std::size_t>(j) * b.cols();
            cplx s(0.0, 0.0);
            for (int k = 0; k < a.cols(); ++k) s += arow[k] * std::conj(brow[k]);
            c.at(i, j) = s;
        }
    }
    return c;
}

namespace {

double offdiag_norm_sq(const ComplexMatrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a.at(i, j));
    return s;
}

} // namespace

HermitianEig hermitian_eig(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw StructuralError("hermitian_eig: matrix must be square");
    const int n = a.rows();
    ComplexMatrix m = a;
    // Symmetrize against caller rounding.
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const cplx avg = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));
            m.at(i, j) = avg;
            m.at(j, i) = std::conj(avg);
        }
    ComplexMatrix v = identity(n);

    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) total += std::norm(m.at(i, j));
    const double stop = 1e-26 * (total > 0.0 ? total : 1.0);

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (offdiag_norm_sq(m) <= stop) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cplx b = m.at(p, q);
                const double mag = std::abs(b);
                if (mag == 0.0) continue;
                // Strip the phase of the pivot, then a real Jacobi rotation:
                // zeroing needs t^2 - 2*tau*t - 1 = 0 with the small root.
                const double tau = (m.at(q, q).real() - m.at(p, p).real()) / (2.0 * mag);
                const double t =
                    -std::copysign(1.0, tau) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx phase = b / mag;
                const cplx gp(c, 0.0);            // G[p][p] = G[q][q] = c
                const cplx gqp = s * std::conj(phase);  // G[q][p]
                const cplx gpq = -s * phase;            // G[p][q]
                // Columns: A <- A G, V <- V G
                for (int i = 0; i < n; ++i) {
                    const cplx mp = m.at(i, p), mq = m.at(i, q);
                    m.at(i, p) = gp * mp + gqp * mq;
                    m.at(i, q) = gpq * mp + gp * mq;
                    const cplx vp = v.at(i, p), vq = v.at(i, q);
                    v.at(i, p) = gp * vp + gqp * vq;
                    v.at(i, q) = gpq * vp + gp * vq;
                }
                // Rows: A <- G^H A
                for (int j = 0; j < n; ++j) {
                    const cplx mp = m.at(p, j), mq = m.at(q, j);
                    m.at(p, j) = std::conj(gp) * mp + std::conj(gqp) * mq;
                    m.at(q, j) = std::conj(gpq) * mp + std::conj(gp) * mq;
                }
            }
        }
    }

    HermitianEig out;
    out.values.resize(n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = m.at(i, i).real();
    std::sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] < diag[y]; });
    out.vectors = ComplexMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.values[k] = diag[order[k]];
        for (int i = 0; i < n; ++i) out.vectors.at(i, k) = v.at(i, order[k]);
    }
    return out;
}

ComplexMatrix pinv_hermitian(const ComplexMatrix& a, double rel_tol) {
    HermitianEig eig = hermitian_eig(a);
    double lmax = 0.0;
    for (double l : eig.values) lmax = std::max(lmax, std::abs(l));
    const double cut = rel_tol * lmax;
    const int n = a.rows();
    ComplexMatrix r(n, n);
    for (int k = 0; k < n; ++k) {
        if (std::abs(eig.values[k]) <= cut) continue;
        const double inv = 1.0 / eig.values[k];
        for (int i = 0; i < n; ++i) {
            const cplx vik = eig.vectors.at(i, k) * inv;
            for (int j = 0; j < n; ++j) r.at(i, j) += vik * std::conj(eig.vectors.at(j, k));
        }
    }
    return r;
}

ComplexMatrix cholesky_solve(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != a.cols()) throw StructuralError("cholesky_solve: matrix must be square");
    if (a.rows() != b.rows()) throw StructuralError("cholesky_solve: rhs rows disagree");
    const int n = a.rows();
    ComplexMatrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = a.at(j, j).real();
        for (int k = 0; k < j; ++k) d -= std::norm(l.at(j, k));
        if (!(d > 0.0)) throw DomainError("cholesky_solve: matrix not positive definite");
        const double ljj = std::sqrt(d);
        l.at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            cplx s = a.at(i, j);
            for (int k = 0; k < j; ++k) s -= l.at(i, k) * std::conj(l.at(j, k));
            l.at(i, j) = s / ljj;
        }
    }
    // L y = b, then L^H x = y.
    ComplexMatrix x = b;
    for (int col = 0; col < b.cols(); ++col) {
        for (int i = 0; i < n; ++i) {
            cplx s = x.at(i, col);
            for (int k = 0; k < i; ++k) s -= l.at(i, k) * x.at(k, col);
            x.at(i, col) = s / l.at(i, i).real();
        }
        for (int i = n - 1; i >= 0; --i) {
            cplx s = x.at(i, col);
            for (int k = i + 1; k < n; ++k) s -= std::conj(l.at(k, i)) * x.at(k, col);
            x.at(i, col) = s / l.at(i, i).real();
        }
    }
    return x;
}

} // namespace fmchan::linalg
