#ifndef GAMR_SEARCH_SPACE_HPP
#define GAMR_SEARCH_SPACE_HPP

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gamr/autodiff.hpp"
#include "gamr/rng.hpp"

namespace gamr {

// Candidate operations, in fixed order. The order is load-bearing: argmax
// tie-breaking and serialized indices rely on it.
enum class OpKind : int {
    std_conv_3 = 0,
    std_conv_5,
    std_conv_7,
    sep_conv_3,
    sep_conv_5,
    sep_conv_7,
    dil2_conv_3,
    dil3_conv_3,
};
constexpr int kNumOpKinds = 8;

const char* op_kind_name(OpKind k);
OpKind op_kind_from_name(const std::string& name);
int op_kernel_size(OpKind k);
int op_dilation(OpKind k);
bool op_separable(OpKind k);

// Cell DAG: nodes 0,1 are the two inputs, nodes 2..2+n-1 are intermediates.
// Every earlier node feeds every intermediate, so E = sum_{m=0..n-1}(2+m).
struct CellTopology {
    int num_inputs = 2;
    int num_intermediate = 0;
    std::vector<std::pair<int, int>> edges;  // (src, dst), src < dst, dst >= 2

    static CellTopology make(int num_intermediate);
    void validate() const;  // throws ContractError on edges into input nodes etc.
    int num_edges() const { return static_cast<int>(edges.size()); }
};

// Continuous architecture encoding: one row of op logits per cell edge,
// shared across all cells of the model.
struct ArchEncoding {
    Parameter logits;  // [E, kNumOpKinds]
};

struct DiscreteArch {
    CellTopology topology;
    std::vector<OpKind> chosen;  // one per edge
    int channels = 0;
    int num_cells = 0;
};

// Per-edge argmax with ties broken toward the lowest OpKind index.
DiscreteArch discretize(const Tensor& logits, const CellTopology& topo,
                        int channels, int num_cells);

// ---------------------------------------------------------------------------
// layers
// ---------------------------------------------------------------------------

struct ConvLayer {
    Parameter weight;  // [cout, cin/groups, k, k]
    Parameter bias;    // [cout]
    int dilation = 1;
    int groups = 1;

    ConvLayer() = default;
    ConvLayer(const std::string& name, int cout, int cin, int k, int dilation, int groups,
              Rng& init);
    NodeId forward(Tape& t, ParamBinder& bind, NodeId x) const;
    void collect(std::vector<Parameter*>& out);
};

// One candidate op: conv (two convs for the separable kinds) + ReLU.
class CandidateOp {
public:
    CandidateOp(const std::string& name, OpKind kind, int channels, Rng& init);
    NodeId forward(Tape& t, ParamBinder& bind, NodeId x) const;
    void collect(std::vector<Parameter*>& out);
    OpKind kind() const { return kind_; }
    const std::vector<ConvLayer>& convs() const { return convs_; }
    std::vector<ConvLayer>& convs() { return convs_; }

private:
    OpKind kind_;
    std::vector<ConvLayer> convs_;
};

// softmax(logits)-weighted sum of the given ops applied to x.
NodeId mixed_op_forward(Tape& t, ParamBinder& bind, NodeId x, NodeId logits,
                        std::span<const CandidateOp> ops);

// All candidate kinds on one edge.
class MixedOp {
public:
    MixedOp(const std::string& name, int channels, Rng& init);
    NodeId forward(Tape& t, ParamBinder& bind, NodeId x, NodeId edge_logits) const;
    void collect(std::vector<Parameter*>& out);
    std::span<const CandidateOp> ops() const { return ops_; }
    std::vector<CandidateOp>& ops() { return ops_; }

private:
    std::vector<CandidateOp> ops_;
};

// Supernet cell: mixed op on every edge, intermediates summed over incoming
// edges, output = 1x1 projection of the concatenated intermediates.
class SupernetCell {
public:
    SupernetCell(const std::string& name, const CellTopology& topo, int channels, Rng& init);
    NodeId forward(Tape& t, ParamBinder& bind, NodeId in_a, NodeId in_b, NodeId alpha) const;
    void collect(std::vector<Parameter*>& out);
    std::vector<MixedOp>& edges() { return edges_; }
    ConvLayer& projection() { return proj_; }

private:
    CellTopology topo_;
    std::vector<MixedOp> edges_;
    ConvLayer proj_;
};

// Discrete cell: one chosen op per edge, same wiring and projection.
class DiscreteCell {
public:
    DiscreteCell(const std::string& name, const CellTopology& topo,
                 std::span<const OpKind> chosen, int channels, Rng& init);
    NodeId forward(Tape& t, ParamBinder& bind, NodeId in_a, NodeId in_b) const;
    void collect(std::vector<Parameter*>& out);
    std::vector<CandidateOp>& edge_ops() { return edge_ops_; }
    ConvLayer& projection() { return proj_; }

private:
    CellTopology topo_;
    std::vector<CandidateOp> edge_ops_;
    ConvLayer proj_;
};

// ---------------------------------------------------------------------------
// denoiser stacks
// ---------------------------------------------------------------------------

// Image-to-image denoiser body: stem conv from 2 channels, a chain of cells
// (each fed by the two preceding outputs), head conv back to 2 channels.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual NodeId forward(Tape& t, ParamBinder& bind, NodeId x) const = 0;
    // Model weights, excluding any architecture encoding.
    virtual void collect(std::vector<Parameter*>& out) = 0;
    virtual int channels() const = 0;
};

class SupernetDenoiser : public Denoiser {
public:
    SupernetDenoiser(int num_cells, int num_intermediate, int channels, Rng& init);
    NodeId forward(Tape& t, ParamBinder& bind, NodeId x) const override;
    void collect(std::vector<Parameter*>& out) override;
    int channels() const override { return channels_; }

    ArchEncoding& arch() { return arch_; }
    const ArchEncoding& arch() const { return arch_; }
    const CellTopology& topology() const { return topo_; }
    int num_cells() const { return static_cast<int>(cells_.size()); }
    std::vector<SupernetCell>& cells() { return cells_; }
    ConvLayer& stem() { return stem_; }
    ConvLayer& head() { return head_; }

private:
    int channels_;
    CellTopology topo_;
    ConvLayer stem_;
    std::vector<SupernetCell> cells_;
    ConvLayer head_;
    ArchEncoding arch_;
};

class DiscreteDenoiser : public Denoiser {
public:
    DiscreteDenoiser(const DiscreteArch& arch, Rng& init);
    NodeId forward(Tape& t, ParamBinder& bind, NodeId x) const override;
    void collect(std::vector<Parameter*>& out) override;
    int channels() const override { return arch_.channels; }

    const DiscreteArch& arch() const { return arch_; }
    // Copies the chosen ops' weights (and stem/head/projections) from a
    // structurally matching supernet.
    void adopt_weights(SupernetDenoiser& super);

private:
    DiscreteArch arch_;
    ConvLayer stem_;
    std::vector<DiscreteCell> cells_;
    ConvLayer head_;
};

} // namespace gamr

#endif
