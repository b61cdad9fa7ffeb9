#include "fmchan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fmchan::ad {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw StructuralError(msg);
}

// Shared loop skeleton for conv2d forward/backward. Calls fn(out_row,
// in_row, len) for every valid (row, kernel-offset) pair, where the rows are
// already shifted so the overlap is a contiguous run of `len` elements.
template <class PtrIn, class PtrOut, class F>
void conv_rows(int height, int width, int ky, int kx, int pad, PtrIn in_plane,
               PtrOut out_plane, F&& fn) {
    const int dy = ky - pad;
    const int dx = kx - pad;
    const int h_lo = std::max(0, -dy);
    const int h_hi = std::min(height, height - dy);
    const int w_lo = std::max(0, -dx);
    const int w_hi = std::min(width, width - dx);
    const int len = w_hi - w_lo;
    if (len <= 0) return;
    for (int h = h_lo; h < h_hi; ++h) {
        auto* out_row = out_plane + static_cast<std::size_t>(h) * width + w_lo;
        auto* in_row = in_plane + static_cast<std::size_t>(h + dy) * width + (w_lo + dx);
        fn(out_row, in_row, len);
    }
}

// out_row[w] += w0*in_row[w-1] + w1*in_row[w] + w2*in_row[w+1], zero-padded.
inline void row_3tap(double* out_row, const double* in_row, int width, double w0, double w1,
                     double w2) {
    if (width == 1) {
        out_row[0] += w1 * in_row[0];
        return;
    }
    out_row[0] += w1 * in_row[0] + w2 * in_row[1];
    for (int w = 1; w < width - 1; ++w)
        out_row[w] += w0 * in_row[w - 1] + w1 * in_row[w] + w2 * in_row[w + 1];
    out_row[width - 1] += w0 * in_row[width - 2] + w1 * in_row[width - 1];
}

// acc[kx] += sum_w g_row[w] * x_row[w + kx - 1]: the three per-tap dots of
// the weight gradient, accumulated in one pass.
inline void row_3dot(const double* g_row, const double* x_row, int width, double acc[3]) {
    if (width == 1) {
        acc[1] += g_row[0] * x_row[0];
        return;
    }
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    a1 += g_row[0] * x_row[0];
    a2 += g_row[0] * x_row[1];
    for (int w = 1; w < width - 1; ++w) {
        a0 += g_row[w] * x_row[w - 1];
        a1 += g_row[w] * x_row[w];
        a2 += g_row[w] * x_row[w + 1];
    }
    a0 += g_row[width - 1] * x_row[width - 2];
    a1 += g_row[width - 1] * x_row[width - 1];
    acc[0] += a0;
    acc[1] += a1;
    acc[2] += a2;
}

void conv3_forward_plane(const double* in_plane, double* out_plane, const double* wk,
                         int height, int width) {
    for (int h = 0; h < height; ++h) {
        double* out_row = out_plane + static_cast<std::size_t>(h) * width;
        for (int ky = 0; ky < 3; ++ky) {
            const int ih = h + ky - 1;
            if (ih < 0 || ih >= height) continue;
            const double* in_row = in_plane + static_cast<std::size_t>(ih) * width;
            row_3tap(out_row, in_row, width, wk[3 * ky], wk[3 * ky + 1], wk[3 * ky + 2]);
        }
    }
}

} // namespace

void Tape::check_index(int i) const {
    if (i < 0 || i >= static_cast<int>(nodes_.size()))
        throw StructuralError("tape: node index out of range");
}

int Tape::leaf(Tensor value) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

int Tape::conv2d(int x, int w, int b) {
    check_index(x);
    check_index(w);
    check_index(b);
    const Shape& xs = val(x).shape;
    const Shape& ws = val(w).shape;
    const Shape& bs = val(b).shape;
    require(xs.rank == 4 && ws.rank == 4 && bs.rank == 1, "conv2d: bad ranks");
    require(ws.d[1] == xs.d[1], "conv2d: input channels disagree");
    require(ws.d[2] == ws.d[3] && (ws.d[2] == 1 || ws.d[2] == 3),
            "conv2d: kernel must be 1x1 or 3x3");
    require(bs.d[0] == ws.d[0], "conv2d: bias size disagrees");

    const int batch = xs.d[0], cin = xs.d[1], height = xs.d[2], width = xs.d[3];
    const int cout = ws.d[0], k = ws.d[2], pad = k / 2;
    Node n;
    n.op = Op::Conv2d;
    n.a = x;
    n.b = w;
    n.c = b;
    n.value = Tensor(Shape::t4(batch, cout, height, width));

    const std::size_t plane = static_cast<std::size_t>(height) * width;
    const double* xp = val(x).ptr();
    const double* wp = val(w).ptr();
    const double* bp = val(b).ptr();
    double* op = n.value.ptr();
    for (int nb = 0; nb < batch; ++nb) {
        for (int co = 0; co < cout; ++co) {
            double* out_plane = op + (static_cast<std::size_t>(nb) * cout + co) * plane;
            std::fill(out_plane, out_plane + plane, bp[co]);
            for (int ci = 0; ci < cin; ++ci) {
                const double* in_plane = xp + (static_cast<std::size_t>(nb) * cin + ci) * plane;
                const double* wk =
                    wp + ((static_cast<std::size_t>(co) * cin + ci) * k) * k;
                if (k == 3) {
                    conv3_forward_plane(in_plane, out_plane, wk, height, width);
                    continue;
                }
                const double wgt = wk[0];
                conv_rows(height, width, 0, 0, pad, in_plane, out_plane,
                          [wgt](double* out_row, const double* in_row, int len) {
                              for (int i = 0; i < len; ++i) out_row[i] += wgt * in_row[i];
                          });
            }
        }
    }
    return push(std::move(n));
}

int Tape::dense(int x, int w, int b) {
    check_index(x);
    check_index(w);
    check_index(b);
    const Shape& xs = val(x).shape;
    const Shape& ws = val(w).shape;
    const Shape& bs = val(b).shape;
    require(xs.rank == 2 && ws.rank == 2 && bs.rank == 1, "dense: bad ranks");
    require(ws.d[1] == xs.d[1], "dense: input width disagrees");
    require(bs.d[0] == ws.d[0], "dense: bias size disagrees");

    const int batch = xs.d[0], din = xs.d[1], dout = ws.d[0];
    Node n;
    n.op = Op::Dense;
    n.a = x;
    n.b = w;
    n.c = b;
    n.value = Tensor(Shape::mat(batch, dout));
    const double* xp = val(x).ptr();
    const double* wp = val(w).ptr();
    const double* bp = val(b).ptr();
    double* op = n.value.ptr();
    for (int nb = 0; nb < batch; ++nb)
        for (int o = 0; o < dout; ++o) {
            const double* xrow = xp + static_cast<std::size_t>(nb) * din;
            const double* wrow = wp + static_cast<std::size_t>(o) * din;
            double s = bp[o];
            for (int i = 0; i < din; ++i) s += wrow[i] * xrow[i];
            op[static_cast<std::size_t>(nb) * dout + o] = s;
        }
    return push(std::move(n));
}

int Tape::bias_add_channel(int x, int s) {
    check_index(x);
    check_index(s);
    const Shape& xs = val(x).shape;
    const Shape& ss = val(s).shape;
    require(xs.rank == 4 && ss.rank == 2, "bias_add_channel: bad ranks");
    require(ss.d[0] == xs.d[0] && ss.d[1] == xs.d[1],
            "bias_add_channel: batch/channel sizes disagree");

    Node n;
    n.op = Op::BiasAddChannel;
    n.a = x;
    n.b = s;
    n.value = val(x);
    const std::size_t plane = static_cast<std::size_t>(xs.d[2]) * xs.d[3];
    const double* sp = val(s).ptr();
    double* op = n.value.ptr();
    const std::size_t nc = static_cast<std::size_t>(xs.d[0]) * xs.d[1];
    for (std::size_t i = 0; i < nc; ++i) {
        const double add = sp[i];
        double* plane_ptr = op + i * plane;
        for (std::size_t j = 0; j < plane; ++j) plane_ptr[j] += add;
    }
    return push(std::move(n));
}

int Tape::avg_pool2(int x) {
    check_index(x);
    const Shape& xs = val(x).shape;
    require(xs.rank == 4, "avg_pool2: rank must be 4");
    require(xs.d[2] % 2 == 0 && xs.d[3] % 2 == 0, "avg_pool2: spatial dims must be even");

    const int batch = xs.d[0], ch = xs.d[1], height = xs.d[2], width = xs.d[3];
    const int oh = height / 2, ow = width / 2;
    Node n;
    n.op = Op::AvgPool2;
    n.a = x;
    n.value = Tensor(Shape::t4(batch, ch, oh, ow));
    const double* xp = val(x).ptr();
    double* op = n.value.ptr();
    const std::size_t planes = static_cast<std::size_t>(batch) * ch;
    for (std::size_t p = 0; p < planes; ++p) {
        const double* in_plane = xp + p * height * width;
        double* out_plane = op + p * static_cast<std::size_t>(oh) * ow;
        for (int h = 0; h < oh; ++h)
            for (int w = 0; w < ow; ++w) {
                const double* r0 = in_plane + (2 * h) * width + 2 * w;
                const double* r1 = r0 + width;
                out_plane[h * ow + w] = 0.25 * (r0[0] + r0[1] + r1[0] + r1[1]);
            }
    }
    return push(std::move(n));
}

int Tape::upsample2(int x) {
    check_index(x);
    const Shape& xs = val(x).shape;
    require(xs.rank == 4, "upsample2: rank must be 4");
    const int batch = xs.d[0], ch = xs.d[1], height = xs.d[2], width = xs.d[3];
    Node n;
    n.op = Op::Upsample2;
    n.a = x;
    n.value = Tensor(Shape::t4(batch, ch, 2 * height, 2 * width));
    const double* xp = val(x).ptr();
    double* op = n.value.ptr();
    const std::size_t planes = static_cast<std::size_t>(batch) * ch;
    for (std::size_t p = 0; p < planes; ++p) {
        const double* in_plane = xp + p * height * width;
        double* out_plane = op + p * static_cast<std::size_t>(4) * height * width;
        for (int h = 0; h < height; ++h)
            for (int w = 0; w < width; ++w) {
                const double v = in_plane[h * width + w];
                double* o0 = out_plane + (2 * h) * (2 * width) + 2 * w;
                double* o1 = o0 + 2 * width;
                o0[0] = o0[1] = o1[0] = o1[1] = v;
            }
    }
    return push(std::move(n));
}

int Tape::concat_channel(int a, int b) {
    check_index(a);
    check_index(b);
    const Shape& as = val(a).shape;
    const Shape& bs = val(b).shape;
    require(as.rank == 4 && bs.rank == 4, "concat_channel: rank must be 4");
    require(as.d[0] == bs.d[0] && as.d[2] == bs.d[2] && as.d[3] == bs.d[3],
            "concat_channel: batch/spatial dims disagree");
    const int batch = as.d[0], ca = as.d[1], cb = bs.d[1];
    const std::size_t plane = static_cast<std::size_t>(as.d[2]) * as.d[3];
    Node n;
    n.op = Op::ConcatChannel;
    n.a = a;
    n.b = b;
    n.value = Tensor(Shape::t4(batch, ca + cb, as.d[2], as.d[3]));
    const double* ap = val(a).ptr();
    const double* bp = val(b).ptr();
    double* op = n.value.ptr();
    for (int nb = 0; nb < batch; ++nb) {
        std::copy(ap + static_cast<std::size_t>(nb) * ca * plane,
                  ap + static_cast<std::size_t>(nb + 1) * ca * plane,
                  op + static_cast<std::size_t>(nb) * (ca + cb) * plane);
        std::copy(bp + static_cast<std::size_t>(nb) * cb * plane,
                  bp + static_cast<std::size_t>(nb + 1) * cb * plane,
                  op + (static_cast<std::size_t>(nb) * (ca + cb) + ca) * plane);
    }
    return push(std::move(n));
}

int Tape::silu(int x) {
    check_index(x);
    Node n;
    n.op = Op::Silu;
    n.a = x;
    n.value = Tensor(val(x).shape);
    const double* xp = val(x).ptr();
    double* op = n.value.ptr();
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-xp[i]));
        op[i] = xp[i] * s;
    }
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    check_index(a);
    check_index(b);
    require(val(a).shape == val(b).shape, "add: shapes disagree");
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.value = val(a);
    const double* bp = val(b).ptr();
    double* op = n.value.ptr();
    for (std::size_t i = 0; i < n.value.size(); ++i) op[i] += bp[i];
    return push(std::move(n));
}

int Tape::mul(int a, int b) {
    check_index(a);
    check_index(b);
    require(val(a).shape == val(b).shape, "mul: shapes disagree");
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.value = val(a);
    const double* bp = val(b).ptr();
    double* op = n.value.ptr();
    for (std::size_t i = 0; i < n.value.size(); ++i) op[i] *= bp[i];
    return push(std::move(n));
}

int Tape::sub(int a, int b) {
    check_index(a);
    check_index(b);
    require(val(a).shape == val(b).shape, "sub: shapes disagree");
    Node n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.value = val(a);
    const double* bp = val(b).ptr();
    double* op = n.value.ptr();
    for (std::size_t i = 0; i < n.value.size(); ++i) op[i] -= bp[i];
    return push(std::move(n));
}

int Tape::scale(int a, double factor) {
    check_index(a);
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.aux = factor;
    n.value = val(a);
    double* op = n.value.ptr();
    for (std::size_t i = 0; i < n.value.size(); ++i) op[i] *= factor;
    return push(std::move(n));
}

int Tape::sum(int a) {
    check_index(a);
    Node n;
    n.op = Op::Sum;
    n.a = a;
    n.value = Tensor(Shape::scalar());
    const double* ap = val(a).ptr();
    double s = 0.0;
    for (std::size_t i = 0; i < val(a).size(); ++i) s += ap[i];
    n.value.ptr()[0] = s;
    return push(std::move(n));
}

int Tape::sum_squares(int a) {
    check_index(a);
    Node n;
    n.op = Op::SumSquares;
    n.a = a;
    n.value = Tensor(Shape::scalar());
    const double* ap = val(a).ptr();
    double s = 0.0;
    for (std::size_t i = 0; i < val(a).size(); ++i) s += ap[i] * ap[i];
    n.value.ptr()[0] = s;
    return push(std::move(n));
}

void Tape::backward(int loss_node) {
    check_index(loss_node);
    if (nodes_[loss_node].value.shape.rank != 0)
        throw StructuralError("backward: loss node must be scalar");

    for (Node& n : nodes_) n.grad = Tensor(n.value.shape);
    nodes_[loss_node].grad.ptr()[0] = 1.0;

    for (int idx = loss_node; idx >= 0; --idx) {
        Node& n = nodes_[idx];
        const double* g = n.grad.ptr();
        switch (n.op) {
        case Op::Leaf:
            break;
        case Op::Conv2d: {
            const Shape& xs = val(n.a).shape;
            const Shape& ws = val(n.b).shape;
            const int batch = xs.d[0], cin = xs.d[1], height = xs.d[2], width = xs.d[3];
            const int cout = ws.d[0], k = ws.d[2], pad = k / 2;
            const std::size_t plane = static_cast<std::size_t>(height) * width;
            const double* xp = val(n.a).ptr();
            const double* wp = val(n.b).ptr();
            double* dx = nodes_[n.a].grad.ptr();
            double* dw = nodes_[n.b].grad.ptr();
            double* db = nodes_[n.c].grad.ptr();
            for (int nb = 0; nb < batch; ++nb) {
                for (int co = 0; co < cout; ++co) {
                    const double* g_plane =
                        g + (static_cast<std::size_t>(nb) * cout + co) * plane;
                    double bsum = 0.0;
                    for (std::size_t i = 0; i < plane; ++i) bsum += g_plane[i];
                    db[co] += bsum;
                    for (int ci = 0; ci < cin; ++ci) {
                        const double* x_plane =
                            xp + (static_cast<std::size_t>(nb) * cin + ci) * plane;
                        double* dx_plane =
                            dx + (static_cast<std::size_t>(nb) * cin + ci) * plane;
                        const double* wk =
                            wp + ((static_cast<std::size_t>(co) * cin + ci) * k) * k;
                        double* dwk =
                            dw + ((static_cast<std::size_t>(co) * cin + ci) * k) * k;
                        if (k == 3) {
                            // dx is the correlation of the adjoint with the
                            // flipped kernel; same 3-tap row kernel.
                            for (int h = 0; h < height; ++h) {
                                double* dx_row = dx_plane + static_cast<std::size_t>(h) * width;
                                for (int ky = 0; ky < 3; ++ky) {
                                    const int gh = h + 1 - ky;
                                    if (gh < 0 || gh >= height) continue;
                                    const double* g_row =
                                        g_plane + static_cast<std::size_t>(gh) * width;
                                    row_3tap(dx_row, g_row, width, wk[3 * ky + 2],
                                             wk[3 * ky + 1], wk[3 * ky]);
                                }
                            }
                            for (int ky = 0; ky < 3; ++ky) {
                                double acc[3] = {0.0, 0.0, 0.0};
                                for (int h = 0; h < height; ++h) {
                                    const int xh = h + ky - 1;
                                    if (xh < 0 || xh >= height) continue;
                                    row_3dot(g_plane + static_cast<std::size_t>(h) * width,
                                             x_plane + static_cast<std::size_t>(xh) * width,
                                             width, acc);
                                }
                                dwk[3 * ky] += acc[0];
                                dwk[3 * ky + 1] += acc[1];
                                dwk[3 * ky + 2] += acc[2];
                            }
                            continue;
                        }
                        const double wgt = wk[0];
                        double acc = 0.0;
                        conv_rows(height, width, 0, 0, pad, x_plane, g_plane,
                                  [&](const double* g_row, const double* x_row, int len) {
                                      for (int i = 0; i < len; ++i) acc += g_row[i] * x_row[i];
                                  });
                        conv_rows(height, width, 0, 0, pad, dx_plane, g_plane,
                                  [wgt](const double* g_row, double* dx_row, int len) {
                                      for (int i = 0; i < len; ++i)
                                          dx_row[i] += wgt * g_row[i];
                                  });
                        dwk[0] += acc;
                    }
                }
            }
            break;
        }
        case Op::Dense: {
            const Shape& xs = val(n.a).shape;
            const int batch = xs.d[0], din = xs.d[1];
            const int dout = val(n.b).shape.d[0];
            const double* xp = val(n.a).ptr();
            const double* wp = val(n.b).ptr();
            double* dx = nodes_[n.a].grad.ptr();
            double* dw = nodes_[n.b].grad.ptr();
            double* db = nodes_[n.c].grad.ptr();
            for (int nb = 0; nb < batch; ++nb)
                for (int o = 0; o < dout; ++o) {
                    const double go = g[static_cast<std::size_t>(nb) * dout + o];
                    if (go == 0.0) continue;
                    db[o] += go;
                    const double* xrow = xp + static_cast<std::size_t>(nb) * din;
                    const double* wrow = wp + static_cast<std::size_t>(o) * din;
                    double* dxrow = dx + static_cast<std::size_t>(nb) * din;
                    double* dwrow = dw + static_cast<std::size_t>(o) * din;
                    for (int i = 0; i < din; ++i) {
                        dxrow[i] += go * wrow[i];
                        dwrow[i] += go * xrow[i];
                    }
                }
            break;
        }
        case Op::BiasAddChannel: {
            const Shape& xs = val(n.a).shape;
            const std::size_t plane = static_cast<std::size_t>(xs.d[2]) * xs.d[3];
            const std::size_t nc = static_cast<std::size_t>(xs.d[0]) * xs.d[1];
            double* dx = nodes_[n.a].grad.ptr();
            double* ds = nodes_[n.b].grad.ptr();
            for (std::size_t i = 0; i < nc; ++i) {
                const double* g_plane = g + i * plane;
                double s = 0.0;
                for (std::size_t j = 0; j < plane; ++j) s += g_plane[j];
                ds[i] += s;
            }
            for (std::size_t i = 0; i < n.value.size(); ++i) dx[i] += g[i];
            break;
        }
        case Op::AvgPool2: {
            const Shape& xs = val(n.a).shape;
            const int height = xs.d[2], width = xs.d[3];
            const int oh = height / 2, ow = width / 2;
            const std::size_t planes = static_cast<std::size_t>(xs.d[0]) * xs.d[1];
            double* dx = nodes_[n.a].grad.ptr();
            for (std::size_t p = 0; p < planes; ++p) {
                const double* g_plane = g + p * static_cast<std::size_t>(oh) * ow;
                double* dx_plane = dx + p * static_cast<std::size_t>(height) * width;
                for (int h = 0; h < oh; ++h)
                    for (int w = 0; w < ow; ++w) {
                        const double gv = 0.25 * g_plane[h * ow + w];
                        double* r0 = dx_plane + (2 * h) * width + 2 * w;
                        double* r1 = r0 + width;
                        r0[0] += gv;
                        r0[1] += gv;
                        r1[0] += gv;
                        r1[1] += gv;
                    }
            }
            break;
        }
        case Op::Upsample2: {
            const Shape& xs = val(n.a).shape;
            const int height = xs.d[2], width = xs.d[3];
            const std::size_t planes = static_cast<std::size_t>(xs.d[0]) * xs.d[1];
            double* dx = nodes_[n.a].grad.ptr();
            for (std::size_t p = 0; p < planes; ++p) {
                const double* g_plane = g + p * static_cast<std::size_t>(4) * height * width;
                double* dx_plane = dx + p * static_cast<std::size_t>(height) * width;
                for (int h = 0; h < height; ++h)
                    for (int w = 0; w < width; ++w) {
                        const double* g0 = g_plane + (2 * h) * (2 * width) + 2 * w;
                        const double* g1 = g0 + 2 * width;
                        dx_plane[h * width + w] += g0[0] + g0[1] + g1[0] + g1[1];
                    }
            }
            break;
        }
        case Op::ConcatChannel: {
            const Shape& as = val(n.a).shape;
            const Shape& bs = val(n.b).shape;
            const int batch = as.d[0], ca = as.d[1], cb = bs.d[1];
            const std::size_t plane = static_cast<std::size_t>(as.d[2]) * as.d[3];
            double* da = nodes_[n.a].grad.ptr();
            double* db = nodes_[n.b].grad.ptr();
            for (int nb = 0; nb < batch; ++nb) {
                const double* g_nb = g + static_cast<std::size_t>(nb) * (ca + cb) * plane;
                double* da_nb = da + static_cast<std::size_t>(nb) * ca * plane;
                double* db_nb = db + static_cast<std::size_t>(nb) * cb * plane;
                for (std::size_t i = 0; i < static_cast<std::size_t>(ca) * plane; ++i)
                    da_nb[i] += g_nb[i];
                for (std::size_t i = 0; i < static_cast<std::size_t>(cb) * plane; ++i)
                    db_nb[i] += g_nb[static_cast<std::size_t>(ca) * plane + i];
            }
            break;
        }
        case Op::Silu: {
            const double* xp = val(n.a).ptr();
            double* dx = nodes_[n.a].grad.ptr();
            for (std::size_t i = 0; i < n.value.size(); ++i) {
                const double s = 1.0 / (1.0 + std::exp(-xp[i]));
                dx[i] += g[i] * s * (1.0 + xp[i] * (1.0 - s));
            }
            break;
        }
        case Op::Add: {
            double* da = nodes_[n.a].grad.ptr();
            double* db = nodes_[n.b].grad.ptr();
            for (std::size_t i = 0; i < n.value.size(); ++i) {
                da[i] += g[i];
                db[i] += g[i];
            }
            break;
        }
        case Op::Mul: {
            const double* ap = val(n.a).ptr();
            const double* bp = val(n.b).ptr();
            double* da = nodes_[n.a].grad.ptr();
            double* db = nodes_[n.b].grad.ptr();
            for (std::size_t i = 0; i < n.value.size(); ++i) {
                da[i] += g[i] * bp[i];
                db[i] += g[i] * ap[i];
            }
            break;
        }
        case Op::Sub: {
            double* da = nodes_[n.a].grad.ptr();
            double* db = nodes_[n.b].grad.ptr();
            for (std::size_t i = 0; i < n.value.size(); ++i) {
                da[i] += g[i];
                db[i] -= g[i];
            }
            break;
        }
        case Op::Scale: {
            double* da = nodes_[n.a].grad.ptr();
            for (std::size_t i = 0; i < n.value.size(); ++i) da[i] += g[i] * n.aux;
            break;
        }
        case Op::Sum: {
            double* da = nodes_[n.a].grad.ptr();
            const double gs = g[0];
            for (std::size_t i = 0; i < val(n.a).size(); ++i) da[i] += gs;
            break;
        }
        case Op::SumSquares: {
            const double* ap = val(n.a).ptr();
            double* da = nodes_[n.a].grad.ptr();
            const double gs = 2.0 * g[0];
            for (std::size_t i = 0; i < val(n.a).size(); ++i) da[i] += gs * ap[i];
            break;
        }
        }
    }
}

} // namespace fmchan::ad
