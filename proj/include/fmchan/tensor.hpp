#ifndef FMCHAN_TENSOR_HPP
#define FMCHAN_TENSOR_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "fmchan/errors.hpp"
#include "fmchan/mem.hpp"
#include "fmchan/rng.hpp"

namespace fmchan {

using cplx = std::complex<double>;

template <class T>
using tracked_vector = std::vector<T, mem::TrackingAllocator<T>>;

// Dense row-major complex matrix. Channels, pilots and observations live here.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(int rows, int cols, cplx fill = cplx(0.0, 0.0));

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    cplx& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const cplx& at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }

    bool same_shape(const ComplexMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;

    double frobenius_sq() const;

    ComplexMatrix& operator+=(const ComplexMatrix& o);
    ComplexMatrix& operator-=(const ComplexMatrix& o);
    ComplexMatrix& operator*=(cplx a);
    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(cplx a, ComplexMatrix m) { return m *= a; }

private:
    int rows_ = 0;
    int cols_ = 0;
    tracked_vector<cplx> data_;
};

// Real 2 x rows x cols tensor: plane 0 is the real part, plane 1 the
// imaginary part. This is the network-facing view of a complex matrix.
class RealTensor3 {
public:
    RealTensor3() = default;
    RealTensor3(int rows, int cols, double fill = 0.0);

    static constexpr int channels() { return 2; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& at(int ch, int r, int c) {
        return data_[(static_cast<std::size_t>(ch) * rows_ + r) * cols_ + c];
    }
    const double& at(int ch, int r, int c) const {
        return data_[(static_cast<std::size_t>(ch) * rows_ + r) * cols_ + c];
    }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const RealTensor3& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double sum_sq() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    tracked_vector<double> data_;
};

// Stack a complex matrix into its real/imaginary planes. Bijective with
// unstack and norm-preserving.
RealTensor3 stack(const ComplexMatrix& h);
ComplexMatrix unstack(const RealTensor3& x);

// 10*log10(|h_hat - h|^2 / |h|^2). An exact recovery returns -infinity so
// aggregation layers can count it instead of choking on it.
double nmse_db(const ComplexMatrix& h_hat, const ComplexMatrix& h);

// Entries i.i.d. N(0,1).
RealTensor3 draw_gaussian_tensor(Rng& rng, int rows, int cols);

// Entries i.i.d. circular complex Gaussian: real and imaginary parts each
// N(0, per_entry_variance/2).
ComplexMatrix draw_complex_gaussian_matrix(Rng& rng, int rows, int cols,
                                           double per_entry_variance);

// Entries i.i.d. uniform over the unit-power QPSK constellation (+-1 +-i)/sqrt(2).
ComplexMatrix draw_qpsk_pilots(Rng& rng, int n_t, int n_p);

} // namespace fmchan

#endif
