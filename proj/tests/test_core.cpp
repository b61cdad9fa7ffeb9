#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "fmchan/linalg.hpp"
#include "fmchan/tensor.hpp"

using namespace fmchan;

namespace {

ComplexMatrix random_matrix(Rng& rng, int rows, int cols) {
    return draw_complex_gaussian_matrix(rng, rows, cols, 1.0);
}

} // namespace

TEST_CASE("rng: identical seed and stream reproduce draws bitwise") {
    Rng a(42, Stream::Noise), b(42, Stream::Noise);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(42, Stream::Noise), d(42, Stream::Pilots);
    bool all_equal = true;
    for (int i = 0; i < 64; ++i) all_equal &= (c.next_u64() == d.next_u64());
    CHECK_FALSE(all_equal);
}

TEST_CASE("rng: forks depend on the key, not the parent's position") {
    Rng a(7, Stream::Dataset);
    Rng before = a.fork(13);
    for (int i = 0; i < 100; ++i) a.next_u64();
    Rng after = a.fork(13);
    for (int i = 0; i < 100; ++i) CHECK(before.next_u64() == after.next_u64());

    Rng other = a.fork(14);
    Rng thirteen = a.fork(13);
    bool differ = false;
    for (int i = 0; i < 16; ++i) differ |= (other.next_u64() != thirteen.next_u64());
    CHECK(differ);
}

TEST_CASE("rng: gaussian moments") {
    Rng rng(0, Stream::Dataset);
    const RealTensor3 small = draw_gaussian_tensor(rng, 4, 4);
    double mean = 0.0;
    for (std::size_t i = 0; i < small.size(); ++i) mean += small.data()[i];
    mean /= static_cast<double>(small.size());
    CHECK(std::abs(mean) < 0.6); // 3 sigma at n=32

    Rng rng2(1, Stream::Dataset);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng2.next_gaussian();
        sum += v;
        sum2 += v * v;
    }
    const double var = sum2 / n - (sum / n) * (sum / n);
    CHECK(var > 0.97);
    CHECK(var < 1.03);
}

TEST_CASE("complex gaussian: per-entry power and plane variance") {
    Rng rng(3, Stream::Noise);
    const ComplexMatrix m = draw_complex_gaussian_matrix(rng, 250, 400, 1.0);
    const double power = m.frobenius_sq() / static_cast<double>(m.size());
    CHECK(power > 0.97);
    CHECK(power < 1.03);

    Rng rng2(4, Stream::Noise);
    const ComplexMatrix m2 = draw_complex_gaussian_matrix(rng2, 250, 400, 2.0);
    const RealTensor3 planes = stack(m2);
    double re_var = 0.0, im_var = 0.0;
    const std::size_t n = m2.size();
    for (int r = 0; r < planes.rows(); ++r)
        for (int c = 0; c < planes.cols(); ++c) {
            re_var += planes.at(0, r, c) * planes.at(0, r, c);
            im_var += planes.at(1, r, c) * planes.at(1, r, c);
        }
    CHECK(re_var / n == doctest::Approx(1.0).epsilon(0.03));
    CHECK(im_var / n == doctest::Approx(1.0).epsilon(0.03));

    Rng r1(9, Stream::Noise), r2(9, Stream::Noise);
    const ComplexMatrix a = draw_complex_gaussian_matrix(r1, 8, 8, 1.0);
    const ComplexMatrix b = draw_complex_gaussian_matrix(r2, 8, 8, 1.0);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(cplx)) == 0);

    Rng r3(1, Stream::Noise);
    CHECK_THROWS_AS(draw_complex_gaussian_matrix(r3, 2, 2, 0.0), DomainError);
    CHECK_THROWS_AS(draw_complex_gaussian_matrix(r3, 2, 2, -1.0), DomainError);
}

TEST_CASE("qpsk pilots: unit power, uniform constellation") {
    Rng rng(5, Stream::Pilots);
    const ComplexMatrix p = draw_qpsk_pilots(rng, 64, 64);
    CHECK(p.rows() == 64);
    CHECK(p.cols() == 64);
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(std::abs(std::norm(p.data()[i]) - 1.0) < 1e-12);

    Rng rng2(6, Stream::Pilots);
    const ComplexMatrix big = draw_qpsk_pilots(rng2, 250, 400);
    int counts[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < big.size(); ++i) {
        const cplx z = big.data()[i];
        counts[(z.real() > 0 ? 1 : 0) + (z.imag() > 0 ? 2 : 0)]++;
    }
    for (int k = 0; k < 4; ++k) {
        const double f = counts[k] / static_cast<double>(big.size());
        CHECK(f > 0.24);
        CHECK(f < 0.26);
    }
}

TEST_CASE("stack/unstack: plane semantics and examples") {
    ComplexMatrix h(1, 1);
    h.at(0, 0) = cplx(1.0, 2.0);
    const RealTensor3 x = stack(h);
    CHECK(x.at(0, 0, 0) == 1.0);
    CHECK(x.at(1, 0, 0) == 2.0);

    const ComplexMatrix zero(4, 4);
    const RealTensor3 zx = stack(zero);
    for (std::size_t i = 0; i < zx.size(); ++i) CHECK(zx.data()[i] == 0.0);

    RealTensor3 t(1, 1);
    t.at(0, 0, 0) = 0.0;
    t.at(1, 0, 0) = 1.0;
    const ComplexMatrix u = unstack(t);
    CHECK(u.at(0, 0) == cplx(0.0, 1.0));

    RealTensor3 t2(1, 1);
    t2.at(0, 0, 0) = 3.0;
    t2.at(1, 0, 0) = -4.0;
    const ComplexMatrix u2 = unstack(t2);
    CHECK(u2.at(0, 0) == cplx(3.0, -4.0));
    CHECK(std::abs(u2.at(0, 0)) == doctest::Approx(5.0));
}

TEST_CASE("stack/unstack: bijection and isometry over random shapes") {
    Rng rng(11, Stream::Dataset);
    for (int trial = 0; trial < 200; ++trial) {
        const int rows = 1 + static_cast<int>(rng.next_u64() % 16);
        const int cols = 1 + static_cast<int>(rng.next_u64() % 64);
        const ComplexMatrix h = random_matrix(rng, rows, cols);
        const RealTensor3 x = stack(h);
        const ComplexMatrix back = unstack(x);
        CHECK(std::memcmp(h.data(), back.data(), h.size() * sizeof(cplx)) == 0);
        const RealTensor3 again = stack(back);
        CHECK(std::memcmp(x.data(), again.data(), x.size() * sizeof(double)) == 0);

        const double ulps = 4.0 * std::numeric_limits<double>::epsilon() * h.frobenius_sq();
        CHECK(std::abs(x.sum_sq() - h.frobenius_sq()) <= ulps);
    }
}

TEST_CASE("nmse_db: definition, sentinel, shift law") {
    Rng rng(12, Stream::Dataset);
    const ComplexMatrix h = random_matrix(rng, 4, 6);

    CHECK(nmse_db(h, h) == -std::numeric_limits<double>::infinity());

    const ComplexMatrix zero(4, 6);
    CHECK(nmse_db(zero, h) == doctest::Approx(0.0).epsilon(1e-12));

    ComplexMatrix twice = h;
    twice *= cplx(2.0, 0.0);
    CHECK(nmse_db(twice, h) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(nmse_db(h, zero), DomainError);

    const ComplexMatrix h_hat = random_matrix(rng, 4, 6);
    const double base = nmse_db(h_hat, h);
    const cplx a(0.3, -1.7);
    ComplexMatrix ah_hat = h_hat, ah = h;
    ah_hat *= a;
    ah *= a;
    CHECK(std::abs(nmse_db(ah_hat, ah) - base) < 1e-10);
}

TEST_CASE("matmul and adjoint basics") {
    ComplexMatrix a(2, 3), b(3, 2);
    int v = 1;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) a.at(i, j) = cplx(v++, 0.5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) b.at(i, j) = cplx(0.0, v++);

    const ComplexMatrix c = linalg::matmul(a, b);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            cplx want(0.0, 0.0);
            for (int k = 0; k < 3; ++k) want += a.at(i, k) * b.at(k, j);
            CHECK(std::abs(c.at(i, j) - want) < 1e-12);
        }

    const ComplexMatrix abh = linalg::matmul_abh(a, a);
    const ComplexMatrix ref = linalg::matmul(a, linalg::adjoint(a));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(abh.at(i, j) - ref.at(i, j)) < 1e-12);
}

TEST_CASE("hermitian_eig: reconstruction and orthonormal vectors") {
    Rng rng(13, Stream::Dataset);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 3 + static_cast<int>(rng.next_u64() % 14);
        const ComplexMatrix g = random_matrix(rng, n, n);
        const ComplexMatrix a = linalg::matmul_abh(g, g); // Hermitian PSD

        const linalg::HermitianEig eig = linalg::hermitian_eig(a);
        REQUIRE(static_cast<int>(eig.values.size()) == n);
        for (int k = 1; k < n; ++k) CHECK(eig.values[k] >= eig.values[k - 1]);

        // V diag V^H == A
        ComplexMatrix vd = eig.vectors;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) vd.at(i, j) *= eig.values[j];
        const ComplexMatrix rec = linalg::matmul_abh(vd, eig.vectors);
        double err = 0.0, scale = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                err += std::norm(rec.at(i, j) - a.at(i, j));
                scale += std::norm(a.at(i, j));
            }
        CHECK(std::sqrt(err / scale) < 1e-10);

        const ComplexMatrix vhv = linalg::matmul(linalg::adjoint(eig.vectors), eig.vectors);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(std::abs(vhv.at(i, j) - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
}

TEST_CASE("pinv_hermitian: Moore-Penrose identities on rank-deficient input") {
    Rng rng(14, Stream::Dataset);
    const int n = 8, r = 3;
    const ComplexMatrix g = random_matrix(rng, n, r);
    const ComplexMatrix a = linalg::matmul_abh(g, g); // rank 3

    const ComplexMatrix ap = linalg::pinv_hermitian(a, 1e-10);
    const ComplexMatrix aapa = linalg::matmul(linalg::matmul(a, ap), a);
    const ComplexMatrix apaap = linalg::matmul(linalg::matmul(ap, a), ap);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            CHECK(std::abs(aapa.at(i, j) - a.at(i, j)) < 1e-9);
            CHECK(std::abs(apaap.at(i, j) - ap.at(i, j)) < 1e-9);
        }
}

TEST_CASE("cholesky_solve: solves Hermitian positive definite systems") {
    Rng rng(15, Stream::Dataset);
    const int n = 12;
    const ComplexMatrix g = random_matrix(rng, n, n);
    ComplexMatrix a = linalg::matmul_abh(g, g);
    for (int i = 0; i < n; ++i) a.at(i, i) += 1.0;

    const ComplexMatrix x_true = random_matrix(rng, n, 3);
    const ComplexMatrix b = linalg::matmul(a, x_true);
    const ComplexMatrix x = linalg::cholesky_solve(a, b);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(x.at(i, j) - x_true.at(i, j)) < 1e-9);

    ComplexMatrix not_pd(2, 2);
    not_pd.at(0, 0) = cplx(-1.0, 0.0);
    CHECK_THROWS_AS(linalg::cholesky_solve(not_pd, ComplexMatrix(2, 1)), DomainError);
}

TEST_CASE("structural errors on malformed shapes") {
    CHECK_THROWS_AS(ComplexMatrix(0, 3), StructuralError);
    CHECK_THROWS_AS(RealTensor3(-1, 2), StructuralError);
    ComplexMatrix a(2, 2), b(3, 3);
    CHECK_THROWS_AS(a += b, StructuralError);
    CHECK_THROWS_AS(linalg::matmul(a, b), StructuralError);
    CHECK_THROWS_AS(nmse_db(a, b), StructuralError);
}
