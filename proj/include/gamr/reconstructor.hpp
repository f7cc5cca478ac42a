#ifndef GAMR_RECONSTRUCTOR_HPP
#define GAMR_RECONSTRUCTOR_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gamr/search_space.hpp"

namespace gamr {

// Cartesian column-undersampling pattern. columns[j] == 1 means k-space
// column j is acquired; the ACS center block is always acquired.
struct MaskSpec {
    enum class Kind { random1d, equispaced1d };
    Kind kind = Kind::random1d;
    double acceleration = 4.0;
    double acs_fraction = 0.08;
    uint64_t seed = 0;
    std::vector<uint8_t> columns;

    int64_t width() const { return static_cast<int64_t>(columns.size()); }
    int64_t sampled_count() const;
    double realized_acceleration() const;
    // [2,H,W] tensor with the column pattern replicated over rows and both
    // channels, ready for elementwise use in k-space.
    Tensor to_tensor(int64_t h) const;
};

const char* mask_kind_name(MaskSpec::Kind k);
MaskSpec::Kind mask_kind_from_name(const std::string& name);

// Undersampled k-space measurement; zero at unacquired locations.
struct KSpace {
    Tensor data;  // [2,H,W]
    MaskSpec mask;
};

// Unrolled reconstructor: J alternations of a residual denoiser and the
// closed-form k-space data-consistency step, denoiser weights shared across
// iterations. lambda = softplus(lambda_raw) keeps the consistency weight
// positive.
struct UnrolledModel {
    int iterations = 3;
    Parameter lambda_raw;
    std::unique_ptr<Denoiser> denoiser;

    double lambda() const;
    // Trainable weights (denoiser theta + lambda_raw), deterministic order.
    std::vector<Parameter*> parameters();
    // Architecture logits; empty for discrete models.
    std::vector<Parameter*> arch_parameters();
    // Both groups, for checkpointing.
    std::vector<Parameter*> all_parameters();
    SupernetDenoiser* supernet();
    const SupernetDenoiser* supernet() const;
};

struct ModelConfig {
    int cells = 3;
    int intermediate_nodes = 2;
    int channels = 16;
    int iterations = 3;
    double lambda_init = 0.05;
};

UnrolledModel make_supernet_model(const ModelConfig& cfg, uint64_t init_seed);
UnrolledModel make_discrete_model(const DiscreteArch& arch, int iterations, double lambda_init,
                                  uint64_t init_seed);

double inverse_softplus(double y);

// --- graph builders (batched [N,2,H,W] constants) ---

NodeId data_consistency_on_tape(Tape& t, NodeId z, NodeId kspace, NodeId mask, NodeId lambda);
NodeId reconstruct_on_tape(Tape& t, ParamBinder& bind, const UnrolledModel& model,
                           NodeId kspace, NodeId mask);

// --- single-sample convenience, no gradients ---

Tensor zero_filled(const KSpace& b);
Tensor data_consistency(const Tensor& z, const KSpace& b, const MaskSpec& mask, double lambda);
Tensor reconstruct(const KSpace& b, const UnrolledModel& model);
double training_loss(const Tensor& pred, const Tensor& ref);

} // namespace gamr

#endif
