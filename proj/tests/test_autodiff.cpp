#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fd_check.hpp"
#include "fmchan/autodiff.hpp"

using namespace fmchan;
using namespace fmchan::fdtest;
using ad::Shape;
using ad::Tape;
using ad::Tensor;

namespace {

int rand_in(Rng& rng, int lo, int hi) { // inclusive
    return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

} // namespace

TEST_CASE("conv2d gradients match finite differences across random shapes") {
    Rng rng(100, Stream::Dataset);
    for (int trial = 0; trial < 24; ++trial) {
        const int n = rand_in(rng, 1, 2), ci = rand_in(rng, 1, 4), co = rand_in(rng, 1, 4);
        const int h = rand_in(rng, 1, 6), w = rand_in(rng, 1, 6);
        const int k = (rng.next_u64() & 1) ? 3 : 1;
        std::vector<Tensor> in;
        in.push_back(random_tensor(Shape::t4(n, ci, h, w), rng));
        in.push_back(random_tensor(Shape::t4(co, ci, k, k), rng, 0.5));
        in.push_back(random_tensor(Shape::vec(co), rng, 0.2));
        const auto rep = fd_check(
            std::move(in),
            [](Tape& t, const std::vector<int>& ids) {
                return t.sum_squares(t.conv2d(ids[0], ids[1], ids[2]));
            },
            rng, 8);
        CHECK(rep.max_rel_err < 1e-5);
    }
}

TEST_CASE("dense gradients match finite differences") {
    Rng rng(101, Stream::Dataset);
    for (int trial = 0; trial < 22; ++trial) {
        const int n = rand_in(rng, 1, 4), di = rand_in(rng, 1, 8), dout = rand_in(rng, 1, 8);
        std::vector<Tensor> in;
        in.push_back(random_tensor(Shape::mat(n, di), rng));
        in.push_back(random_tensor(Shape::mat(dout, di), rng, 0.5));
        in.push_back(random_tensor(Shape::vec(dout), rng, 0.2));
        const auto rep = fd_check(
            std::move(in),
            [](Tape& t, const std::vector<int>& ids) {
                return t.sum_squares(t.dense(ids[0], ids[1], ids[2]));
            },
            rng, 8);
        CHECK(rep.max_rel_err < 1e-5);
    }
}

TEST_CASE("pool, upsample, concat, bias-add gradients match finite differences") {
    Rng rng(102, Stream::Dataset);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rand_in(rng, 1, 2), c = rand_in(rng, 1, 3);
        const int h = 2 * rand_in(rng, 1, 3), w = 2 * rand_in(rng, 1, 3);

        auto rep = fd_check(
            {random_tensor(Shape::t4(n, c, h, w), rng)},
            [](Tape& t, const std::vector<int>& ids) {
                return t.sum_squares(t.avg_pool2(ids[0]));
            },
            rng, 6);
        CHECK(rep.max_rel_err < 1e-5);

        rep = fd_check(
            {random_tensor(Shape::t4(n, c, h, w), rng)},
            [](Tape& t, const std::vector<int>& ids) {
                return t.sum_squares(t.upsample2(ids[0]));
            },
            rng, 6);
        CHECK(rep.max_rel_err < 1e-5);

        const int c2 = rand_in(rng, 1, 3);
        rep = fd_check(
            {random_tensor(Shape::t4(n, c, h, w), rng),
             random_tensor(Shape::t4(n, c2, h, w), rng)},
            [](Tape& t, const std::vector<int>& ids) {
                return t.sum_squares(t.concat_channel(ids[0], ids[1]));
            },
            rng, 6);
        CHECK(rep.max_rel_err < 1e-5);

        rep = fd_check(
            {random_tensor(Shape::t4(n, c, h, w), rng), random_tensor(Shape::mat(n, c), rng)},
            [](Tape& t, const std::vector<int>& ids) {
                return t.sum_squares(t.bias_add_channel(ids[0], ids[1]));
            },
            rng, 6);
        CHECK(rep.max_rel_err < 1e-5);
    }
}

TEST_CASE("elementwise and reduction gradients match finite differences") {
    Rng rng(103, Stream::Dataset);
    for (int trial = 0; trial < 20; ++trial) {
        const Shape s = Shape::t3(rand_in(rng, 1, 3), rand_in(rng, 1, 4), rand_in(rng, 1, 4));

        auto rep = fd_check(
            {random_tensor(s, rng)},
            [](Tape& t, const std::vector<int>& ids) { return t.sum_squares(t.silu(ids[0])); },
            rng, 6);
        CHECK(rep.max_rel_err < 1e-5);

        rep = fd_check(
            {random_tensor(s, rng), random_tensor(s, rng)},
            [](Tape& t, const std::vector<int>& ids) {
                return t.sum_squares(t.add(ids[0], ids[1]));
            },
            rng, 5);
        CHECK(rep.max_rel_err < 1e-5);

        rep = fd_check(
            {random_tensor(s, rng), random_tensor(s, rng)},
            [](Tape& t, const std::vector<int>& ids) {
                return t.sum_squares(t.mul(ids[0], ids[1]));
            },
            rng, 5);
        CHECK(rep.max_rel_err < 1e-5);

        rep = fd_check(
            {random_tensor(s, rng), random_tensor(s, rng)},
            [](Tape& t, const std::vector<int>& ids) {
                return t.sum_squares(t.sub(ids[0], ids[1]));
            },
            rng, 5);
        CHECK(rep.max_rel_err < 1e-5);

        rep = fd_check(
            {random_tensor(s, rng)},
            [](Tape& t, const std::vector<int>& ids) { return t.sum(ids[0]); }, rng, 5);
        CHECK(rep.max_rel_err < 1e-5);

        rep = fd_check(
            {random_tensor(s, rng)},
            [](Tape& t, const std::vector<int>& ids) { return t.sum_squares(ids[0]); }, rng,
            5);
        CHECK(rep.max_rel_err < 1e-5);

        rep = fd_check(
            {random_tensor(s, rng)},
            [](Tape& t, const std::vector<int>& ids) {
                return t.scale(t.sum_squares(t.scale(ids[0], -1.7)), 0.25);
            },
            rng, 5);
        CHECK(rep.max_rel_err < 1e-5);
    }
}

TEST_CASE("loss = sum of leaves has unit gradients") {
    Tape tape;
    Tensor v(Shape::vec(7));
    for (int i = 0; i < 7; ++i) v.ptr()[i] = 0.3 * i - 1.0;
    const int leaf = tape.leaf(std::move(v));
    tape.backward(tape.sum(leaf));
    for (int i = 0; i < 7; ++i) CHECK(tape.grad(leaf).ptr()[i] == 1.0);
}

TEST_CASE("adjoints of branches that do not reach the loss stay zero") {
    Rng rng(104, Stream::Dataset);
    Tape tape;
    const int a = tape.leaf(random_tensor(Shape::mat(2, 3), rng));
    const int b = tape.leaf(random_tensor(Shape::mat(2, 3), rng));
    const int dead = tape.silu(tape.mul(a, a)); // never used by the loss
    const int live = tape.sum_squares(tape.add(a, b));
    tape.backward(live);
    for (std::size_t i = 0; i < tape.grad(dead).size(); ++i)
        CHECK(tape.grad(dead).ptr()[i] == 0.0);
    // a still gets its gradient through the live path
    bool any = false;
    for (std::size_t i = 0; i < tape.grad(a).size(); ++i) any |= (tape.grad(a).ptr()[i] != 0.0);
    CHECK(any);
}

TEST_CASE("backward requires a scalar loss; ops validate shapes") {
    Rng rng(105, Stream::Dataset);
    Tape tape;
    const int a = tape.leaf(random_tensor(Shape::mat(2, 2), rng));
    CHECK_THROWS_AS(tape.backward(a), StructuralError);

    const int b = tape.leaf(random_tensor(Shape::mat(3, 2), rng));
    CHECK_THROWS_AS(tape.add(a, b), StructuralError);

    const int x = tape.leaf(random_tensor(Shape::t4(1, 2, 3, 3), rng));
    const int w = tape.leaf(random_tensor(Shape::t4(4, 3, 3, 3), rng));
    const int bias = tape.leaf(random_tensor(Shape::vec(4), rng));
    CHECK_THROWS_AS(tape.conv2d(x, w, bias), StructuralError); // channel mismatch

    const int odd = tape.leaf(random_tensor(Shape::t4(1, 1, 3, 4), rng));
    CHECK_THROWS_AS(tape.avg_pool2(odd), StructuralError);
}
