#include "gamr/search_space.hpp"

#include <cmath>

namespace gamr {

namespace {

const char* kOpNames[kNumOpKinds] = {
    "std_conv_3", "std_conv_5", "std_conv_7",
    "sep_conv_3", "sep_conv_5", "sep_conv_7",
    "dil2_conv_3", "dil3_conv_3",
};

Tensor he_normal(Shape shape, int64_t fan_in, Rng& rng) {
    Tensor t(std::move(shape));
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (auto& v : t.mutable_data()) v = rng.normal(0.0, stddev);
    return t;
}

} // namespace

const char* op_kind_name(OpKind k) {
    return kOpNames[static_cast<int>(k)];
}

OpKind op_kind_from_name(const std::string& name) {
    for (int i = 0; i < kNumOpKinds; ++i)
        if (name == kOpNames[i]) return static_cast<OpKind>(i);
    throw ConfigError("unknown candidate op '" + name + "'");
}

int op_kernel_size(OpKind k) {
    switch (k) {
        case OpKind::std_conv_3:
        case OpKind::sep_conv_3:
        case OpKind::dil2_conv_3:
        case OpKind::dil3_conv_3: return 3;
        case OpKind::std_conv_5:
        case OpKind::sep_conv_5: return 5;
        case OpKind::std_conv_7:
        case OpKind::sep_conv_7: return 7;
    }
    return 3;
}

int op_dilation(OpKind k) {
    if (k == OpKind::dil2_conv_3) return 2;
    if (k == OpKind::dil3_conv_3) return 3;
    return 1;
}

bool op_separable(OpKind k) {
    return k == OpKind::sep_conv_3 || k == OpKind::sep_conv_5 || k == OpKind::sep_conv_7;
}

// ---------------------------------------------------------------------------
// topology
// ---------------------------------------------------------------------------

CellTopology CellTopology::make(int num_intermediate) {
    if (num_intermediate < 1)
        throw ContractError("cell needs at least one intermediate node");
    CellTopology topo;
    topo.num_intermediate = num_intermediate;
    for (int j = 0; j < num_intermediate; ++j)
        for (int i = 0; i < topo.num_inputs + j; ++i)
            topo.edges.emplace_back(i, topo.num_inputs + j);
    return topo;
}

void CellTopology::validate() const {
    if (num_inputs != 2) throw ContractError("cell topology requires exactly 2 inputs");
    if (num_intermediate < 1) throw ContractError("cell topology requires >= 1 intermediate node");
    const int total = num_inputs + num_intermediate;
    for (const auto& [src, dst] : edges) {
        if (dst < num_inputs)
            throw ContractError("cell topology: edge into input node " + std::to_string(dst));
        if (src >= dst || src < 0 || dst >= total)
            throw ContractError("cell topology: invalid edge " + std::to_string(src) + "->" +
                                std::to_string(dst));
    }
}

DiscreteArch discretize(const Tensor& logits, const CellTopology& topo,
                        int channels, int num_cells) {
    topo.validate();
    if (logits.rank() != 2 || logits.dim(0) != topo.num_edges() || logits.dim(1) != kNumOpKinds)
        throw DimensionError("discretize: logits must be [" + std::to_string(topo.num_edges()) +
                             "," + std::to_string(kNumOpKinds) + "], got " +
                             shape_str(logits.shape()));
    const auto p = logits.data();
    for (double v : p)
        if (std::isnan(v)) throw ContractError("discretize: NaN in architecture encoding");

    DiscreteArch arch;
    arch.topology = topo;
    arch.channels = channels;
    arch.num_cells = num_cells;
    for (int e = 0; e < topo.num_edges(); ++e) {
        int best = 0;
        double best_v = p[static_cast<std::size_t>(e * kNumOpKinds)];
        for (int o = 1; o < kNumOpKinds; ++o) {
            const double v = p[static_cast<std::size_t>(e * kNumOpKinds + o)];
            if (v > best_v) {  // strict: ties keep the lower index
                best_v = v;
                best = o;
            }
        }
        arch.chosen.push_back(static_cast<OpKind>(best));
    }
    return arch;
}

// ---------------------------------------------------------------------------
// layers
// ---------------------------------------------------------------------------

ConvLayer::ConvLayer(const std::string& name, int cout, int cin, int k, int dilation_,
                     int groups_, Rng& init)
    : dilation(dilation_), groups(groups_) {
    const int cin_g = cin / groups_;
    weight = Parameter(name + ".weight",
                       he_normal({cout, cin_g, k, k}, static_cast<int64_t>(cin_g) * k * k, init));
    bias = Parameter(name + ".bias", Tensor({cout}));
}

NodeId ConvLayer::forward(Tape& t, ParamBinder& bind, NodeId x) const {
    return t.conv2d(x, bind(weight), bind(bias), dilation, groups);
}

void ConvLayer::collect(std::vector<Parameter*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

CandidateOp::CandidateOp(const std::string& name, OpKind kind, int channels, Rng& init)
    : kind_(kind) {
    const int k = op_kernel_size(kind);
    const int d = op_dilation(kind);
    if (op_separable(kind)) {
        convs_.emplace_back(name + ".dw", channels, channels, k, d, channels, init);
        convs_.emplace_back(name + ".pw", channels, channels, 1, 1, 1, init);
    } else {
        convs_.emplace_back(name + ".conv", channels, channels, k, d, 1, init);
    }
}

NodeId CandidateOp::forward(Tape& t, ParamBinder& bind, NodeId x) const {
    NodeId h = x;
    for (const auto& c : convs_) h = c.forward(t, bind, h);
    return t.relu(h);
}

void CandidateOp::collect(std::vector<Parameter*>& out) {
    for (auto& c : convs_) c.collect(out);
}

NodeId mixed_op_forward(Tape& t, ParamBinder& bind, NodeId x, NodeId logits,
                        std::span<const CandidateOp> ops) {
    const Tensor& lv = t.value(logits);
    if (lv.rank() != 1 || lv.dim(0) != static_cast<int64_t>(ops.size()))
        throw DimensionError("mixed_op_forward: logits size " + shape_str(lv.shape()) +
                             " does not match op count " + std::to_string(ops.size()));
    const NodeId weights = t.softmax(logits);
    NodeId acc = kNoNode;
    for (std::size_t o = 0; o < ops.size(); ++o) {
        const NodeId term =
            t.scalar_mul(t.index(weights, static_cast<int64_t>(o)), ops[o].forward(t, bind, x));
        acc = acc == kNoNode ? term : t.add(acc, term);
    }
    return acc;
}

MixedOp::MixedOp(const std::string& name, int channels, Rng& init) {
    ops_.reserve(kNumOpKinds);
    for (int o = 0; o < kNumOpKinds; ++o) {
        const OpKind kind = static_cast<OpKind>(o);
        ops_.emplace_back(name + "." + op_kind_name(kind), kind, channels, init);
    }
}

NodeId MixedOp::forward(Tape& t, ParamBinder& bind, NodeId x, NodeId edge_logits) const {
    return mixed_op_forward(t, bind, x, edge_logits, ops_);
}

void MixedOp::collect(std::vector<Parameter*>& out) {
    for (auto& op : ops_) op.collect(out);
}

// ---------------------------------------------------------------------------
// cells
// ---------------------------------------------------------------------------

namespace {

// Shared wiring for supernet and discrete cells: intermediates accumulate
// their incoming edges, the concatenated intermediates get projected.
template <typename EdgeFn>
NodeId cell_body(Tape& t, const CellTopology& topo, NodeId in_a, NodeId in_b,
                 EdgeFn&& edge_out, const ConvLayer& proj, ParamBinder& bind) {
    std::vector<NodeId> states = {in_a, in_b};
    for (int j = 0; j < topo.num_intermediate; ++j) {
        const int dst = topo.num_inputs + j;
        NodeId acc = kNoNode;
        for (int e = 0; e < topo.num_edges(); ++e) {
            if (topo.edges[static_cast<std::size_t>(e)].second != dst) continue;
            const NodeId src = states[static_cast<std::size_t>(
                topo.edges[static_cast<std::size_t>(e)].first)];
            const NodeId out = edge_out(e, src);
            acc = acc == kNoNode ? out : t.add(acc, out);
        }
        states.push_back(acc);
    }
    std::vector<NodeId> inters(states.begin() + topo.num_inputs, states.end());
    const NodeId cat = t.concat_channels(inters);
    return proj.forward(t, bind, cat);
}

} // namespace

SupernetCell::SupernetCell(const std::string& name, const CellTopology& topo, int channels,
                           Rng& init)
    : topo_(topo) {
    topo_.validate();
    edges_.reserve(static_cast<std::size_t>(topo_.num_edges()));
    for (int e = 0; e < topo_.num_edges(); ++e)
        edges_.emplace_back(name + ".edge" + std::to_string(e), channels, init);
    proj_ = ConvLayer(name + ".proj", channels, channels * topo_.num_intermediate, 1, 1, 1, init);
}

NodeId SupernetCell::forward(Tape& t, ParamBinder& bind, NodeId in_a, NodeId in_b,
                             NodeId alpha) const {
    return cell_body(
        t, topo_, in_a, in_b,
        [&](int e, NodeId src) { return edges_[static_cast<std::size_t>(e)].forward(
                                     t, bind, src, t.row(alpha, e)); },
        proj_, bind);
}

void SupernetCell::collect(std::vector<Parameter*>& out) {
    for (auto& e : edges_) e.collect(out);
    proj_.collect(out);
}

DiscreteCell::DiscreteCell(const std::string& name, const CellTopology& topo,
                           std::span<const OpKind> chosen, int channels, Rng& init)
    : topo_(topo) {
    topo_.validate();
    if (chosen.size() != static_cast<std::size_t>(topo_.num_edges()))
        throw ContractError("discrete cell: expected one op per edge");
    for (int e = 0; e < topo_.num_edges(); ++e) {
        const OpKind kind = chosen[static_cast<std::size_t>(e)];
        edge_ops_.emplace_back(name + ".edge" + std::to_string(e) + "." + op_kind_name(kind),
                               kind, channels, init);
    }
    proj_ = ConvLayer(name + ".proj", channels, channels * topo_.num_intermediate, 1, 1, 1, init);
}

NodeId DiscreteCell::forward(Tape& t, ParamBinder& bind, NodeId in_a, NodeId in_b) const {
    return cell_body(
        t, topo_, in_a, in_b,
        [&](int e, NodeId src) { return edge_ops_[static_cast<std::size_t>(e)].forward(t, bind, src); },
        proj_, bind);
}

void DiscreteCell::collect(std::vector<Parameter*>& out) {
    for (auto& op : edge_ops_) op.collect(out);
    proj_.collect(out);
}

// ---------------------------------------------------------------------------
// denoisers
// ---------------------------------------------------------------------------

namespace {

// Chain cells with two-predecessor connectivity; the first cell sees the
// stem output twice.
template <typename Cells, typename FwdOne>
NodeId denoiser_body(Tape& t, ParamBinder& bind, const ConvLayer& stem, const Cells& cells,
                     const ConvLayer& head, NodeId x, FwdOne&& fwd_one) {
    NodeId prev2 = stem.forward(t, bind, x);
    NodeId prev1 = prev2;
    for (const auto& cell : cells) {
        const NodeId out = fwd_one(cell, prev2, prev1);
        prev2 = prev1;
        prev1 = out;
    }
    return head.forward(t, bind, prev1);
}

} // namespace

SupernetDenoiser::SupernetDenoiser(int num_cells, int num_intermediate, int channels, Rng& init)
    : channels_(channels), topo_(CellTopology::make(num_intermediate)) {
    if (num_cells < 1) throw ContractError("denoiser needs at least one cell");
    stem_ = ConvLayer("stem", channels, 2, 3, 1, 1, init);
    for (int c = 0; c < num_cells; ++c)
        cells_.emplace_back("cell" + std::to_string(c), topo_, channels, init);
    head_ = ConvLayer("head", 2, channels, 3, 1, 1, init);
    // Uniform mixture at the start: zero logits.
    arch_.logits = Parameter("alpha", Tensor({topo_.num_edges(), kNumOpKinds}));
}

NodeId SupernetDenoiser::forward(Tape& t, ParamBinder& bind, NodeId x) const {
    const NodeId alpha = bind(arch_.logits);
    return denoiser_body(t, bind, stem_, cells_, head_, x,
                         [&](const SupernetCell& c, NodeId a, NodeId b) {
                             return c.forward(t, bind, a, b, alpha);
                         });
}

void SupernetDenoiser::collect(std::vector<Parameter*>& out) {
    stem_.collect(out);
    for (auto& c : cells_) c.collect(out);
    head_.collect(out);
}

DiscreteDenoiser::DiscreteDenoiser(const DiscreteArch& arch, Rng& init) : arch_(arch) {
    arch_.topology.validate();
    if (arch_.chosen.size() != static_cast<std::size_t>(arch_.topology.num_edges()))
        throw ContractError("discrete arch: expected one op per edge");
    if (arch_.num_cells < 1 || arch_.channels < 1)
        throw ContractError("discrete arch: cells and channels must be positive");
    stem_ = ConvLayer("stem", arch_.channels, 2, 3, 1, 1, init);
    for (int c = 0; c < arch_.num_cells; ++c)
        cells_.emplace_back("cell" + std::to_string(c), arch_.topology, arch_.chosen,
                            arch_.channels, init);
    head_ = ConvLayer("head", 2, arch_.channels, 3, 1, 1, init);
}

NodeId DiscreteDenoiser::forward(Tape& t, ParamBinder& bind, NodeId x) const {
    return denoiser_body(t, bind, stem_, cells_, head_, x,
                         [&](const DiscreteCell& c, NodeId a, NodeId b) {
                             return c.forward(t, bind, a, b);
                         });
}

void DiscreteDenoiser::collect(std::vector<Parameter*>& out) {
    stem_.collect(out);
    for (auto& c : cells_) c.collect(out);
    head_.collect(out);
}

void DiscreteDenoiser::adopt_weights(SupernetDenoiser& super) {
    if (super.num_cells() != arch_.num_cells || super.channels() != arch_.channels ||
        super.topology().num_edges() != arch_.topology.num_edges())
        throw ContractError("adopt_weights: supernet structure does not match arch");
    auto copy_conv = [](ConvLayer& dst, ConvLayer& src) {
        dst.weight.tensor = src.weight.tensor;
        dst.bias.tensor = src.bias.tensor;
    };
    copy_conv(stem_, super.stem());
    copy_conv(head_, super.head());
    for (int c = 0; c < arch_.num_cells; ++c) {
        auto& dcell = cells_[static_cast<std::size_t>(c)];
        auto& scell = super.cells()[static_cast<std::size_t>(c)];
        copy_conv(dcell.projection(), scell.projection());
        for (int e = 0; e < arch_.topology.num_edges(); ++e) {
            auto& dop = dcell.edge_ops()[static_cast<std::size_t>(e)];
            auto& sop = scell.edges()[static_cast<std::size_t>(e)]
                            .ops()[static_cast<int>(dop.kind())];
            for (std::size_t i = 0; i < dop.convs().size(); ++i)
                copy_conv(dop.convs()[i], sop.convs()[i]);
        }
    }
}

} // namespace gamr
