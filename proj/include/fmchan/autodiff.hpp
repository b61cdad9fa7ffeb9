#ifndef FMCHAN_AUTODIFF_HPP
#define FMCHAN_AUTODIFF_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "fmchan/errors.hpp"
#include "fmchan/mem.hpp"

namespace fmchan::ad {

template <class T>
using tracked_vector = std::vector<T, mem::TrackingAllocator<T>>;

// Dense real tensor of rank 0..4, row-major in the trailing dimensions.
struct Shape {
    std::array<int, 4> d{1, 1, 1, 1};
    int rank = 0;

    static Shape scalar() { return Shape{}; }
    static Shape vec(int a) { return Shape{{a, 1, 1, 1}, 1}; }
    static Shape mat(int a, int b) { return Shape{{a, b, 1, 1}, 2}; }
    static Shape t3(int a, int b, int c) { return Shape{{a, b, c, 1}, 3}; }
    static Shape t4(int a, int b, int c, int e) { return Shape{{a, b, c, e}, 4}; }

    std::size_t numel() const {
        std::size_t n = 1;
        for (int i = 0; i < rank; ++i) n *= static_cast<std::size_t>(d[i]);
        return n;
    }
    bool operator==(const Shape& o) const { return rank == o.rank && d == o.d; }
    bool operator!=(const Shape& o) const { return !(*this == o); }
};

struct Tensor {
    Shape shape;
    tracked_vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0) : shape(s), data(s.numel(), fill) {}

    double* ptr() { return data.data(); }
    const double* ptr() const { return data.data(); }
    std::size_t size() const { return data.size(); }
};

enum class Op {
    Leaf,
    Conv2d,        // a: x (N,Ci,H,W), b: w (Co,Ci,K,K), c: bias (Co); pad K/2, stride 1
    Dense,         // a: x (N,Di), b: w (Do,Di), c: bias (Do)
    BiasAddChannel,// a: x (N,C,H,W), b: s (N,C) broadcast over H,W
    AvgPool2,      // 2x2 mean, H and W must be even
    Upsample2,     // nearest-neighbor 2x
    ConcatChannel, // a,b: (N,*,H,W) along dim 1
    Silu,          // x * sigmoid(x)
    Add,
    Mul,
    Sub,
    Scale,         // value * aux
    Sum,           // -> scalar
    SumSquares,    // -> scalar
};

// Append-only record of primitive operations. Backward walks the record in
// reverse; inputs always precede their consumers by construction.
class Tape {
public:
    int leaf(Tensor value);
    int conv2d(int x, int w, int b);
    int dense(int x, int w, int b);
    int bias_add_channel(int x, int s);
    int avg_pool2(int x);
    int upsample2(int x);
    int concat_channel(int a, int b);
    int silu(int x);
    int add(int a, int b);
    int mul(int a, int b);
    int sub(int a, int b);
    int scale(int a, double factor);
    int sum(int a);
    int sum_squares(int a);

    const Tensor& value(int node) const { return nodes_[node].value; }
    const Tensor& grad(int node) const { return nodes_[node].grad; }
    std::size_t size() const { return nodes_.size(); }

    // Seeds d(loss)/d(loss) = 1 and accumulates adjoints for every node.
    // The loss node must be scalar.
    void backward(int loss_node);

private:
    struct Node {
        Op op = Op::Leaf;
        int a = -1, b = -1, c = -1;
        double aux = 0.0;
        Tensor value;
        Tensor grad;
    };

    int push(Node n) {
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }
    const Tensor& val(int i) const { return nodes_[i].value; }
    void check_index(int i) const;

    std::vector<Node> nodes_;
};

} // namespace fmchan::ad

#endif
