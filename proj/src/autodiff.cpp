#include "gamr/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "gamr/fft.hpp"

namespace gamr {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
}

struct ConvDims {
    int64_t n, cin, h, w, cout, k;
    int64_t cin_g, cout_g;  // channels per group
    int64_t pad;
    int dilation, groups;
};

ConvDims conv_dims(const Tensor& input, const Tensor& kernel, const Tensor* bias,
                   int dilation, int groups) {
    if (input.rank() != 4)
        throw DimensionError("conv2d: input must be [N,Cin,H,W], got " + shape_str(input.shape()));
    if (kernel.rank() != 4)
        throw DimensionError("conv2d: kernel must be [Cout,Cin/groups,k,k], got " +
                             shape_str(kernel.shape()));
    ConvDims d;
    d.n = input.dim(0);
    d.cin = input.dim(1);
    d.h = input.dim(2);
    d.w = input.dim(3);
    d.cout = kernel.dim(0);
    d.k = kernel.dim(2);
    d.dilation = dilation;
    d.groups = groups;
    if (kernel.dim(3) != d.k)
        throw DimensionError("conv2d: kernel must be square, got " + shape_str(kernel.shape()));
    if (d.k % 2 == 0)
        throw ContractError("conv2d: even kernel size " + std::to_string(d.k) + " unsupported");
    if (dilation < 1) throw ContractError("conv2d: dilation must be >= 1");
    if (groups < 1 || d.cin % groups != 0 || d.cout % groups != 0)
        throw DimensionError("conv2d: groups must divide Cin and Cout");
    d.cin_g = d.cin / groups;
    d.cout_g = d.cout / groups;
    if (kernel.dim(1) != d.cin_g)
        throw DimensionError("conv2d: kernel expects " + std::to_string(kernel.dim(1)) +
                             " input channels per group, input provides " + std::to_string(d.cin_g));
    if (bias && (bias->rank() != 1 || bias->dim(0) != d.cout))
        throw DimensionError("conv2d: bias must be [Cout]");
    d.pad = static_cast<int64_t>(dilation) * (d.k - 1) / 2;
    return d;
}

void conv2d_forward(const ConvDims& d, const double* in, const double* ker,
                    const double* bias, double* out) {
    const int64_t plane = d.h * d.w;
    for (int64_t n = 0; n < d.n; ++n) {
        for (int64_t co = 0; co < d.cout; ++co) {
            double* op = out + (n * d.cout + co) * plane;
            const double b = bias ? bias[co] : 0.0;
            std::fill(op, op + plane, b);
            const int64_t g = co / d.cout_g;
            for (int64_t cg = 0; cg < d.cin_g; ++cg) {
                const double* ip = in + (n * d.cin + g * d.cin_g + cg) * plane;
                const double* kp = ker + (co * d.cin_g + cg) * d.k * d.k;
                for (int64_t ky = 0; ky < d.k; ++ky) {
                    const int64_t dy = ky * d.dilation - d.pad;
                    const int64_t y0 = std::max<int64_t>(0, -dy);
                    const int64_t y1 = std::min<int64_t>(d.h, d.h - dy);
                    for (int64_t kx = 0; kx < d.k; ++kx) {
                        const double wv = kp[ky * d.k + kx];
                        const int64_t dx = kx * d.dilation - d.pad;
                        const int64_t x0 = std::max<int64_t>(0, -dx);
                        const int64_t x1 = std::min<int64_t>(d.w, d.w - dx);
                        for (int64_t y = y0; y < y1; ++y) {
                            const double* irow = ip + (y + dy) * d.w + dx;
                            double* orow = op + y * d.w;
                            for (int64_t x = x0; x < x1; ++x) orow[x] += wv * irow[x];
                        }
                    }
                }
            }
        }
    }
}

// Adjoint of the forward loop: every contribution out += w*in becomes
// g_in += w*g_out and g_w += in*g_out. Null pointers skip that gradient.
void conv2d_backward(const ConvDims& d, const double* in, const double* ker,
                     const double* gout, double* gin, double* gker, double* gbias) {
    const int64_t plane = d.h * d.w;
    for (int64_t n = 0; n < d.n; ++n) {
        for (int64_t co = 0; co < d.cout; ++co) {
            const double* gop = gout + (n * d.cout + co) * plane;
            if (gbias) {
                double s = 0.0;
                for (int64_t i = 0; i < plane; ++i) s += gop[i];
                gbias[co] += s;
            }
            const int64_t g = co / d.cout_g;
            for (int64_t cg = 0; cg < d.cin_g; ++cg) {
                const int64_t ci = g * d.cin_g + cg;
                const double* ip = in + (n * d.cin + ci) * plane;
                double* gip = gin ? gin + (n * d.cin + ci) * plane : nullptr;
                const double* kp = ker + (co * d.cin_g + cg) * d.k * d.k;
                double* gkp = gker ? gker + (co * d.cin_g + cg) * d.k * d.k : nullptr;
                for (int64_t ky = 0; ky < d.k; ++ky) {
                    const int64_t dy = ky * d.dilation - d.pad;
                    const int64_t y0 = std::max<int64_t>(0, -dy);
                    const int64_t y1 = std::min<int64_t>(d.h, d.h - dy);
                    for (int64_t kx = 0; kx < d.k; ++kx) {
                        const double wv = kp[ky * d.k + kx];
                        const int64_t dx = kx * d.dilation - d.pad;
                        const int64_t x0 = std::max<int64_t>(0, -dx);
                        const int64_t x1 = std::min<int64_t>(d.w, d.w - dx);
                        double wacc = 0.0;
                        for (int64_t y = y0; y < y1; ++y) {
                            const double* grow = gop + y * d.w;
                            const double* irow = ip + (y + dy) * d.w + dx;
                            if (gip) {
                                double* girow = gip + (y + dy) * d.w + dx;
                                for (int64_t x = x0; x < x1; ++x) {
                                    girow[x] += wv * grow[x];
                                    wacc += irow[x] * grow[x];
                                }
                            } else {
                                for (int64_t x = x0; x < x1; ++x) wacc += irow[x] * grow[x];
                            }
                        }
                        if (gkp) gkp[ky * d.k + kx] += wacc;
                    }
                }
            }
        }
    }
}

double stable_softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

} // namespace

Tape::Node& Tape::node(NodeId id) {
    return nodes_.at(static_cast<std::size_t>(id));
}

const Tape::Node& Tape::node(NodeId id) const {
    return nodes_.at(static_cast<std::size_t>(id));
}

NodeId Tape::push(Tensor value, bool requires_grad, std::function<void(Tape&)> backprop) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::leaf(Tensor value, bool requires_grad) {
    return push(std::move(value), requires_grad, nullptr);
}

const Tensor& Tape::grad(NodeId id) const {
    const Node& n = node(id);
    if (!n.grad.defined())
        throw ContractError("node has no gradient (not reached by backward)");
    return n.grad;
}

Tensor Tape::grad_or_zero(NodeId id) const {
    const Node& n = node(id);
    if (n.grad.defined()) return n.grad;
    return Tensor(n.value.shape());
}

void Tape::accumulate(NodeId id, const Tensor& delta) {
    auto g = grad_buffer(id);
    if (g.empty()) return;
    auto d = delta.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += d[i];
}

std::span<double> Tape::grad_buffer(NodeId id) {
    Node& n = node(id);
    if (!n.requires_grad) return {};
    if (!n.grad.defined()) n.grad = Tensor(n.value.shape());
    return n.grad.mutable_data();
}

void Tape::backward(NodeId root) {
    Node& r = node(root);
    if (r.value.numel() != 1)
        throw ContractError("backward root must be scalar, shape is " + shape_str(r.value.shape()));
    if (!r.grad.defined()) r.grad = Tensor(r.value.shape());
    r.grad.mutable_data()[0] += 1.0;
    // Reverse creation order is a topological order of the recorded DAG.
    for (NodeId id = root; id >= 0; --id) {
        Node& n = node(id);
        if (!n.requires_grad || !n.grad.defined() || !n.backprop) continue;
        n.backprop(*this);
    }
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    check_same_shape(ta, tb, "add");
    Tensor out(ta.shape(), promote_dtype(ta.dtype(), tb.dtype()));
    {
        auto o = out.mutable_data();
        auto pa = ta.data();
        auto pb = tb.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = pa[i] + pb[i];
    }
    out.quantize_to_dtype();
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(a).requires_grad || node(b).requires_grad,
                [self, a, b](Tape& t) {
                    const Tensor& g = t.node(self).grad;
                    t.accumulate(a, g);
                    t.accumulate(b, g);
                });
}

NodeId Tape::sub(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    check_same_shape(ta, tb, "sub");
    Tensor out(ta.shape(), promote_dtype(ta.dtype(), tb.dtype()));
    {
        auto o = out.mutable_data();
        auto pa = ta.data();
        auto pb = tb.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = pa[i] - pb[i];
    }
    out.quantize_to_dtype();
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(a).requires_grad || node(b).requires_grad,
                [self, a, b](Tape& t) {
                    const Tensor& g = t.node(self).grad;
                    t.accumulate(a, g);
                    auto gb = t.grad_buffer(b);
                    if (gb.empty()) return;
                    auto gd = g.data();
                    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= gd[i];
                });
}

NodeId Tape::mul(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    check_same_shape(ta, tb, "mul");
    Tensor out(ta.shape(), promote_dtype(ta.dtype(), tb.dtype()));
    {
        auto o = out.mutable_data();
        auto pa = ta.data();
        auto pb = tb.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = pa[i] * pb[i];
    }
    out.quantize_to_dtype();
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(a).requires_grad || node(b).requires_grad,
                [self, a, b](Tape& t) {
                    const auto g = t.node(self).grad.data();
                    const auto va = t.value(a).data();
                    const auto vb = t.value(b).data();
                    auto ga = t.grad_buffer(a);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * vb[i];
                    auto gb = t.grad_buffer(b);
                    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * va[i];
                });
}

NodeId Tape::div(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    check_same_shape(ta, tb, "div");
    Tensor out(ta.shape(), promote_dtype(ta.dtype(), tb.dtype()));
    {
        auto o = out.mutable_data();
        auto pa = ta.data();
        auto pb = tb.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = pa[i] / pb[i];
    }
    out.quantize_to_dtype();
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(a).requires_grad || node(b).requires_grad,
                [self, a, b](Tape& t) {
                    const auto g = t.node(self).grad.data();
                    const auto q = t.node(self).value.data();  // a/b
                    const auto vb = t.value(b).data();
                    auto ga = t.grad_buffer(a);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] / vb[i];
                    auto gb = t.grad_buffer(b);
                    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i] * q[i] / vb[i];
                });
}

NodeId Tape::scalar_mul(NodeId scalar, NodeId tnode) {
    const Tensor& ts = value(scalar);
    if (ts.numel() != 1)
        throw ContractError("scalar_mul: first operand must be scalar");
    const Tensor& tt = value(tnode);
    const double s = ts.item();
    Tensor out(tt.shape(), promote_dtype(ts.dtype(), tt.dtype()));
    {
        auto o = out.mutable_data();
        auto p = tt.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = s * p[i];
    }
    out.quantize_to_dtype();
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(scalar).requires_grad || node(tnode).requires_grad,
                [self, scalar, tnode](Tape& t) {
                    const auto g = t.node(self).grad.data();
                    const double sv = t.value(scalar).item();
                    const auto vt = t.value(tnode).data();
                    auto gs = t.grad_buffer(scalar);
                    if (!gs.empty()) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < vt.size(); ++i) acc += g[i] * vt[i];
                        gs[0] += acc;
                    }
                    auto gt = t.grad_buffer(tnode);
                    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += sv * g[i];
                });
}

NodeId Tape::scalar_add(NodeId scalar, NodeId tnode) {
    const Tensor& ts = value(scalar);
    if (ts.numel() != 1)
        throw ContractError("scalar_add: first operand must be scalar");
    const Tensor& tt = value(tnode);
    const double s = ts.item();
    Tensor out(tt.shape(), promote_dtype(ts.dtype(), tt.dtype()));
    {
        auto o = out.mutable_data();
        auto p = tt.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = s + p[i];
    }
    out.quantize_to_dtype();
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(scalar).requires_grad || node(tnode).requires_grad,
                [self, scalar, tnode](Tape& t) {
                    const auto g = t.node(self).grad.data();
                    auto gs = t.grad_buffer(scalar);
                    if (!gs.empty()) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i];
                        gs[0] += acc;
                    }
                    auto gt = t.grad_buffer(tnode);
                    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += g[i];
                });
}

NodeId Tape::relu(NodeId x) {
    const Tensor& tx = value(x);
    Tensor out(tx.shape(), tx.dtype());
    {
        auto o = out.mutable_data();
        auto p = tx.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = p[i] > 0.0 ? p[i] : 0.0;
    }
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(x).requires_grad, [self, x](Tape& t) {
        const auto g = t.node(self).grad.data();
        const auto vx = t.value(x).data();
        auto gx = t.grad_buffer(x);
        for (std::size_t i = 0; i < gx.size(); ++i)
            if (vx[i] > 0.0) gx[i] += g[i];
    });
}

NodeId Tape::softplus(NodeId x) {
    const Tensor& tx = value(x);
    Tensor out(tx.shape(), tx.dtype());
    {
        auto o = out.mutable_data();
        auto p = tx.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = stable_softplus(p[i]);
    }
    out.quantize_to_dtype();
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(x).requires_grad, [self, x](Tape& t) {
        const auto g = t.node(self).grad.data();
        const auto vx = t.value(x).data();
        auto gx = t.grad_buffer(x);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * sigmoid(vx[i]);
    });
}

NodeId Tape::softmax(NodeId v) {
    const Tensor& tv = value(v);
    if (tv.rank() != 1 || tv.numel() < 1)
        throw ContractError("softmax expects a non-empty 1-d vector, got " + shape_str(tv.shape()));
    Tensor out(tv.shape(), tv.dtype());
    {
        auto o = out.mutable_data();
        auto p = tv.data();
        double mx = p[0];
        for (double x : p) mx = std::max(mx, x);
        double sum = 0.0;
        for (std::size_t i = 0; i < o.size(); ++i) {
            o[i] = std::exp(p[i] - mx);
            sum += o[i];
        }
        for (auto& x : o) x /= sum;
    }
    out.quantize_to_dtype();
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(v).requires_grad, [self, v](Tape& t) {
        const auto g = t.node(self).grad.data();
        const auto y = t.node(self).value.data();
        auto gv = t.grad_buffer(v);
        if (gv.empty()) return;
        double dot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += y[i] * (g[i] - dot);
    });
}

NodeId Tape::index(NodeId v, int64_t i) {
    const Tensor& tv = value(v);
    if (tv.rank() != 1)
        throw DimensionError("index expects a 1-d vector, got " + shape_str(tv.shape()));
    if (i < 0 || i >= tv.dim(0)) throw DimensionError("index out of range");
    Tensor out = Tensor::scalar(tv.data()[static_cast<std::size_t>(i)], tv.dtype());
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(v).requires_grad, [self, v, i](Tape& t) {
        const double g = t.node(self).grad.item();
        auto gv = t.grad_buffer(v);
        if (!gv.empty()) gv[static_cast<std::size_t>(i)] += g;
    });
}

NodeId Tape::row(NodeId m, int64_t r) {
    const Tensor& tm = value(m);
    if (tm.rank() != 2)
        throw DimensionError("row expects a 2-d matrix, got " + shape_str(tm.shape()));
    if (r < 0 || r >= tm.dim(0)) throw DimensionError("row index out of range");
    const int64_t cols = tm.dim(1);
    Tensor out({cols}, tm.dtype());
    {
        auto o = out.mutable_data();
        auto p = tm.data().subspan(static_cast<std::size_t>(r * cols), static_cast<std::size_t>(cols));
        std::copy(p.begin(), p.end(), o.begin());
    }
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(m).requires_grad, [self, m, r, cols](Tape& t) {
        const auto g = t.node(self).grad.data();
        auto gm = t.grad_buffer(m);
        if (gm.empty()) return;
        for (int64_t c = 0; c < cols; ++c)
            gm[static_cast<std::size_t>(r * cols + c)] += g[static_cast<std::size_t>(c)];
    });
}

// ---------------------------------------------------------------------------
// structured ops
// ---------------------------------------------------------------------------

NodeId Tape::conv2d(NodeId input, NodeId kernel, NodeId bias, int dilation, int groups) {
    const Tensor& ti = value(input);
    const Tensor& tk = value(kernel);
    const Tensor* tb = bias != kNoNode ? &value(bias) : nullptr;
    const ConvDims d = conv_dims(ti, tk, tb, dilation, groups);
    Tensor out({d.n, d.cout, d.h, d.w}, promote_dtype(ti.dtype(), tk.dtype()));
    conv2d_forward(d, ti.data().data(), tk.data().data(),
                   tb ? tb->data().data() : nullptr, out.mutable_data().data());
    out.quantize_to_dtype();
    bool rg = node(input).requires_grad || node(kernel).requires_grad;
    if (bias != kNoNode) rg = rg || node(bias).requires_grad;
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), rg, [self, input, kernel, bias, d](Tape& t) {
        const auto g = t.node(self).grad.data();
        auto gin = t.grad_buffer(input);
        auto gker = t.grad_buffer(kernel);
        auto gbias = bias != kNoNode ? t.grad_buffer(bias) : std::span<double>{};
        conv2d_backward(d, t.value(input).data().data(), t.value(kernel).data().data(),
                        g.data(), gin.empty() ? nullptr : gin.data(),
                        gker.empty() ? nullptr : gker.data(),
                        gbias.empty() ? nullptr : gbias.data());
    });
}

NodeId Tape::fft2(NodeId x, bool inverse) {
    Tensor out = fft2_raw(value(x), inverse);
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(x).requires_grad, [self, x, inverse](Tape& t) {
        // Unitary transform: the adjoint is the opposite direction.
        t.accumulate(x, fft2_raw(t.node(self).grad, !inverse));
    });
}

NodeId Tape::concat_channels(std::span<const NodeId> xs) {
    if (xs.empty()) throw ContractError("concat_channels: need at least one input");
    const Tensor& first = value(xs[0]);
    if (first.rank() != 4)
        throw DimensionError("concat_channels expects [N,C,H,W] tensors");
    const int64_t n = first.dim(0), h = first.dim(2), w = first.dim(3);
    int64_t ctotal = 0;
    bool rg = false;
    DType dt = first.dtype();
    for (NodeId id : xs) {
        const Tensor& t = value(id);
        if (t.rank() != 4 || t.dim(0) != n || t.dim(2) != h || t.dim(3) != w)
            throw DimensionError("concat_channels: incompatible shape " + shape_str(t.shape()));
        ctotal += t.dim(1);
        rg = rg || node(id).requires_grad;
        dt = promote_dtype(dt, t.dtype());
    }
    Tensor out({n, ctotal, h, w}, dt);
    {
        auto o = out.mutable_data();
        const int64_t plane = h * w;
        for (int64_t bi = 0; bi < n; ++bi) {
            int64_t coff = 0;
            for (NodeId id : xs) {
                const Tensor& t = value(id);
                const int64_t c = t.dim(1);
                auto p = t.data();
                std::copy_n(p.data() + bi * c * plane, c * plane,
                            o.data() + (bi * ctotal + coff) * plane);
                coff += c;
            }
        }
    }
    out.quantize_to_dtype();
    std::vector<NodeId> parents(xs.begin(), xs.end());
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), rg, [self, parents, n, ctotal, h, w](Tape& t) {
        const auto g = t.node(self).grad.data();
        const int64_t plane = h * w;
        for (int64_t bi = 0; bi < n; ++bi) {
            int64_t coff = 0;
            for (NodeId id : parents) {
                const int64_t c = t.value(id).dim(1);
                auto gp = t.grad_buffer(id);
                if (!gp.empty()) {
                    const double* src = g.data() + (bi * ctotal + coff) * plane;
                    double* dst = gp.data() + bi * c * plane;
                    for (int64_t i = 0; i < c * plane; ++i) dst[i] += src[i];
                }
                coff += c;
            }
        }
    });
}

NodeId Tape::sum(NodeId x) {
    const Tensor& tx = value(x);
    double s = 0.0;
    for (double v : tx.data()) s += v;
    Tensor out = Tensor::scalar(s, tx.dtype());
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(x).requires_grad, [self, x](Tape& t) {
        const double g = t.node(self).grad.item();
        auto gx = t.grad_buffer(x);
        for (auto& v : gx) v += g;
    });
}

NodeId Tape::mse(NodeId pred, NodeId ref) {
    const Tensor& tp = value(pred);
    const Tensor& tr = value(ref);
    check_same_shape(tp, tr, "mse");
    const auto a = tp.data();
    const auto b = tr.data();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    const double inv_n = 1.0 / static_cast<double>(tp.numel());
    Tensor out = Tensor::scalar(s * inv_n, promote_dtype(tp.dtype(), tr.dtype()));
    const NodeId self = static_cast<NodeId>(nodes_.size());
    return push(std::move(out), node(pred).requires_grad || node(ref).requires_grad,
                [self, pred, ref, inv_n](Tape& t) {
                    const double g = t.node(self).grad.item();
                    const auto a = t.value(pred).data();
                    const auto b = t.value(ref).data();
                    const double c = 2.0 * g * inv_n;
                    auto gp = t.grad_buffer(pred);
                    for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += c * (a[i] - b[i]);
                    auto gr = t.grad_buffer(ref);
                    for (std::size_t i = 0; i < gr.size(); ++i) gr[i] -= c * (a[i] - b[i]);
                });
}

// ---------------------------------------------------------------------------
// ParamBinder
// ---------------------------------------------------------------------------

NodeId ParamBinder::operator()(const Parameter& p) {
    auto it = bound_.find(&p);
    if (it != bound_.end()) return it->second;
    const NodeId id = tape_->leaf(p.tensor, true);
    bound_.emplace(&p, id);
    return id;
}

Tensor ParamBinder::grad_of(const Parameter& p) const {
    auto it = bound_.find(&p);
    if (it == bound_.end()) return Tensor(p.tensor.shape());
    return tape_->grad_or_zero(it->second);
}

} // namespace gamr
