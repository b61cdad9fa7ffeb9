#include "fmchan/tensor.hpp"

#include <cmath>
#include <limits>

namespace fmchan {

ComplexMatrix::ComplexMatrix(int rows, int cols, cplx fill) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0)
        throw StructuralError("ComplexMatrix dimensions must be positive, got " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

bool ComplexMatrix::all_finite() const {
    for (const cplx& z : data_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

namespace {

// Kahan compensated sum so norms agree across summation orders to a few ulp.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

} // namespace

double ComplexMatrix::frobenius_sq() const {
    CompensatedSum s;
    for (const cplx& z : data_) {
        s.add(z.real() * z.real());
        s.add(z.imag() * z.imag());
    }
    return s.sum;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
    if (!same_shape(o)) throw StructuralError("matrix shape mismatch in +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
    if (!same_shape(o)) throw StructuralError("matrix shape mismatch in -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx a) {
    for (cplx& z : data_) z *= a;
    return *this;
}

RealTensor3::RealTensor3(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0)
        throw StructuralError("RealTensor3 dimensions must be positive, got " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    data_.assign(2 * static_cast<std::size_t>(rows) * cols, fill);
}

double RealTensor3::sum_sq() const {
    CompensatedSum s;
    for (double v : data_) s.add(v * v);
    return s.sum;
}

RealTensor3 stack(const ComplexMatrix& h) {
    RealTensor3 x(h.rows(), h.cols());
    const std::size_t n = static_cast<std::size_t>(h.rows()) * h.cols();
    const cplx* src = h.data();
    double* re = x.data();
    double* im = x.data() + n;
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = src[i].real();
        im[i] = src[i].imag();
    }
    return x;
}

ComplexMatrix unstack(const RealTensor3& x) {
    ComplexMatrix h(x.rows(), x.cols());
    const std::size_t n = static_cast<std::size_t>(x.rows()) * x.cols();
    const double* re = x.data();
    const double* im = x.data() + n;
    cplx* dst = h.data();
    for (std::size_t i = 0; i < n; ++i) dst[i] = cplx(re[i], im[i]);
    return h;
}

double nmse_db(const ComplexMatrix& h_hat, const ComplexMatrix& h) {
    if (!h_hat.same_shape(h)) throw StructuralError("nmse_db: shape mismatch");
    const double denom = h.frobenius_sq();
    if (denom == 0.0) throw DomainError("nmse_db: reference channel has zero norm");
    const double num = (h_hat - h).frobenius_sq();
    if (num == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(num / denom);
}

RealTensor3 draw_gaussian_tensor(Rng& rng, int rows, int cols) {
    RealTensor3 x(rows, cols);
    double* p = x.data();
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = rng.next_gaussian();
    return x;
}

ComplexMatrix draw_complex_gaussian_matrix(Rng& rng, int rows, int cols,
                                           double per_entry_variance) {
    if (!(per_entry_variance > 0.0))
        throw DomainError("draw_complex_gaussian_matrix: variance must be positive");
    ComplexMatrix m(rows, cols);
    const double s = std::sqrt(per_entry_variance / 2.0);
    cplx* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i)
        p[i] = cplx(s * rng.next_gaussian(), s * rng.next_gaussian());
    return m;
}

ComplexMatrix draw_qpsk_pilots(Rng& rng, int n_t, int n_p) {
    static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    ComplexMatrix p(n_t, n_p);
    cplx* dst = p.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::uint64_t bits = rng.next_u64();
        const double re = (bits & 1) ? inv_sqrt2 : -inv_sqrt2;
        const double im = (bits & 2) ? inv_sqrt2 : -inv_sqrt2;
        dst[i] = cplx(re, im);
    }
    return p;
}

} // namespace fmchan
