#ifndef GAMR_AUTODIFF_HPP
#define GAMR_AUTODIFF_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gamr/tensor.hpp"

namespace gamr {

using NodeId = int32_t;
constexpr NodeId kNoNode = -1;

// Named trainable tensor. Construction order inside a model defines the
// canonical parameter order used by optimizers, aggregation, and checkpoints.
struct Parameter {
    std::string name;
    Tensor tensor;

    Parameter() = default;
    Parameter(std::string name_, Tensor tensor_)
        : name(std::move(name_)), tensor(std::move(tensor_)) {
        tensor.set_requires_grad(true);
    }
};

// Reverse-mode tape. Nodes are recorded in evaluation order, which is a
// topological order by construction; backward walks it in reverse and
// accumulates gradients by summation over all paths. One tape per forward
// pass, confined to a single thread.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    NodeId leaf(Tensor value, bool requires_grad);
    NodeId constant(Tensor value) { return leaf(std::move(value), false); }

    // --- elementwise, same shape ---
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);

    // --- scalar (1-element) broadcast against a tensor ---
    NodeId scalar_mul(NodeId scalar, NodeId t);
    NodeId scalar_add(NodeId scalar, NodeId t);

    NodeId relu(NodeId x);
    NodeId softplus(NodeId x);

    // Softmax over a 1-d vector, max-subtracted for stability.
    NodeId softmax(NodeId v);
    // Scalar pick v[i] from a 1-d vector.
    NodeId index(NodeId v, int64_t i);
    // Row r of a 2-d matrix as a 1-d vector.
    NodeId row(NodeId m, int64_t r);

    // Same-size convolution, stride 1, odd kernel, zero padding
    // p = dilation*(k-1)/2. input [N,Cin,H,W], kernel [Cout,Cin/groups,k,k],
    // optional bias [Cout] (pass kNoNode for none).
    NodeId conv2d(NodeId input, NodeId kernel, NodeId bias, int dilation = 1, int groups = 1);

    // Unitary 2-d FFT over the trailing [2,H,W] axes (real/imag channels);
    // H and W must be powers of two. Leading axes are batched.
    NodeId fft2(NodeId x, bool inverse = false);

    // Concatenate rank-4 tensors [N,C_i,H,W] along the channel axis.
    NodeId concat_channels(std::span<const NodeId> xs);

    NodeId sum(NodeId x);                 // scalar
    NodeId mse(NodeId pred, NodeId ref);  // scalar mean over all elements

    // Root must be scalar. After the call every node reachable from the root
    // whose subgraph touches a requires_grad leaf has a populated gradient.
    void backward(NodeId root);

    const Tensor& value(NodeId id) const { return node(id).value; }
    bool has_grad(NodeId id) const { return node(id).grad.defined(); }
    const Tensor& grad(NodeId id) const;
    Tensor grad_or_zero(NodeId id) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        bool requires_grad = false;
        Tensor grad;  // undefined until touched by backward
        // Accumulates parent gradients from this node's gradient.
        std::function<void(Tape&)> backprop;
    };

    std::vector<Node> nodes_;

    Node& node(NodeId id);
    const Node& node(NodeId id) const;
    NodeId push(Tensor value, bool requires_grad, std::function<void(Tape&)> backprop);
    void accumulate(NodeId id, const Tensor& delta);
    // Direct accumulate from a raw buffer, avoiding temporaries in hot paths.
    std::span<double> grad_buffer(NodeId id);

    friend struct TapeTestAccess;
};

// Maps persistent Parameters onto leaf nodes of one tape, binding each at
// most once so repeated uses share a node (gradient sum rule applies).
class ParamBinder {
public:
    explicit ParamBinder(Tape& tape) : tape_(&tape) {}

    NodeId operator()(const Parameter& p);

    // Zero tensor when the parameter was never bound or never reached.
    Tensor grad_of(const Parameter& p) const;

private:
    Tape* tape_;
    std::unordered_map<const Parameter*, NodeId> bound_;
};

} // namespace gamr

#endif
