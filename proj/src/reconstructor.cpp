#include "gamr/reconstructor.hpp"

#include <cmath>

#include "gamr/fft.hpp"

namespace gamr {

int64_t MaskSpec::sampled_count() const {
    int64_t n = 0;
    for (uint8_t c : columns) n += c;
    return n;
}

double MaskSpec::realized_acceleration() const {
    const int64_t s = sampled_count();
    if (s == 0) throw ContractError("mask samples no columns");
    return static_cast<double>(width()) / static_cast<double>(s);
}

Tensor MaskSpec::to_tensor(int64_t h) const {
    const int64_t w = width();
    Tensor t({2, h, w});
    auto buf = t.mutable_data();
    for (int64_t ch = 0; ch < 2; ++ch)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x)
                buf[static_cast<std::size_t>((ch * h + y) * w + x)] =
                    columns[static_cast<std::size_t>(x)] ? 1.0 : 0.0;
    return t;
}

const char* mask_kind_name(MaskSpec::Kind k) {
    return k == MaskSpec::Kind::random1d ? "random1d" : "equispaced1d";
}

MaskSpec::Kind mask_kind_from_name(const std::string& name) {
    if (name == "random1d") return MaskSpec::Kind::random1d;
    if (name == "equispaced1d") return MaskSpec::Kind::equispaced1d;
    throw ConfigError("unknown mask kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// model
// ---------------------------------------------------------------------------

double inverse_softplus(double y) {
    if (y <= 0.0) throw ContractError("inverse_softplus needs a positive value");
    // log(exp(y) - 1), stable for small y.
    return y + std::log(-std::expm1(-y));
}

double UnrolledModel::lambda() const {
    const double x = lambda_raw.tensor.item();
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

std::vector<Parameter*> UnrolledModel::parameters() {
    std::vector<Parameter*> out;
    denoiser->collect(out);
    out.push_back(&lambda_raw);
    return out;
}

std::vector<Parameter*> UnrolledModel::arch_parameters() {
    std::vector<Parameter*> out;
    if (auto* s = supernet()) out.push_back(&s->arch().logits);
    return out;
}

std::vector<Parameter*> UnrolledModel::all_parameters() {
    auto out = parameters();
    auto arch = arch_parameters();
    out.insert(out.end(), arch.begin(), arch.end());
    return out;
}

SupernetDenoiser* UnrolledModel::supernet() {
    return dynamic_cast<SupernetDenoiser*>(denoiser.get());
}

const SupernetDenoiser* UnrolledModel::supernet() const {
    return dynamic_cast<const SupernetDenoiser*>(denoiser.get());
}

UnrolledModel make_supernet_model(const ModelConfig& cfg, uint64_t init_seed) {
    if (cfg.iterations < 1) throw ContractError("unrolled model needs iterations >= 1");
    Rng init(init_seed);
    UnrolledModel m;
    m.iterations = cfg.iterations;
    m.denoiser = std::make_unique<SupernetDenoiser>(cfg.cells, cfg.intermediate_nodes,
                                                    cfg.channels, init);
    m.lambda_raw = Parameter("lambda_raw", Tensor::scalar(inverse_softplus(cfg.lambda_init)));
    return m;
}

UnrolledModel make_discrete_model(const DiscreteArch& arch, int iterations, double lambda_init,
                                  uint64_t init_seed) {
    if (iterations < 1) throw ContractError("unrolled model needs iterations >= 1");
    Rng init(init_seed);
    UnrolledModel m;
    m.iterations = iterations;
    m.denoiser = std::make_unique<DiscreteDenoiser>(arch, init);
    m.lambda_raw = Parameter("lambda_raw", Tensor::scalar(inverse_softplus(lambda_init)));
    return m;
}

// ---------------------------------------------------------------------------
// graph builders
// ---------------------------------------------------------------------------

NodeId data_consistency_on_tape(Tape& t, NodeId z, NodeId kspace, NodeId mask, NodeId lambda) {
    // In k-space, per location: X = (M*B + lambda*Z^) / (M + lambda).
    // Measurements are stored pre-masked, so M*B == B.
    const NodeId zhat = t.fft2(z, false);
    const NodeId num = t.add(kspace, t.scalar_mul(lambda, zhat));
    const NodeId den = t.scalar_add(lambda, mask);
    return t.fft2(t.div(num, den), true);
}

NodeId reconstruct_on_tape(Tape& t, ParamBinder& bind, const UnrolledModel& model,
                           NodeId kspace, NodeId mask) {
    const NodeId lambda = t.softplus(bind(model.lambda_raw));
    NodeId x = t.fft2(kspace, true);  // zero-filled start
    for (int j = 0; j < model.iterations; ++j) {
        const NodeId z = t.add(x, model.denoiser->forward(t, bind, x));
        x = data_consistency_on_tape(t, z, kspace, mask, lambda);
    }
    return x;
}

// ---------------------------------------------------------------------------
// single-sample convenience
// ---------------------------------------------------------------------------

namespace {

Tensor as_batch(const Tensor& t) {
    if (t.rank() != 3)
        throw DimensionError("expected [2,H,W] image/k-space, got " + shape_str(t.shape()));
    Tensor b = t;
    // reshape view: same buffer, batch of one
    return Tensor::from({1, t.dim(0), t.dim(1), t.dim(2)},
                        std::vector<double>(t.data().begin(), t.data().end()), t.dtype());
}

Tensor drop_batch(const Tensor& t) {
    return Tensor::from({t.dim(1), t.dim(2), t.dim(3)},
                        std::vector<double>(t.data().begin(), t.data().end()), t.dtype());
}

} // namespace

Tensor zero_filled(const KSpace& b) {
    return fft2_raw(b.data, true);
}

Tensor data_consistency(const Tensor& z, const KSpace& b, const MaskSpec& mask, double lambda) {
    if (!(lambda > 0.0))
        throw ContractError("data_consistency: lambda must be positive, got " +
                            std::to_string(lambda));
    if (!z.same_shape(b.data))
        throw DimensionError("data_consistency: z and k-space shapes differ");
    Tape t;
    const NodeId out = data_consistency_on_tape(
        t, t.constant(as_batch(z)), t.constant(as_batch(b.data)),
        t.constant(as_batch(mask.to_tensor(z.dim(1)))), t.constant(Tensor::scalar(lambda)));
    return drop_batch(t.value(out));
}

Tensor reconstruct(const KSpace& b, const UnrolledModel& model) {
    Tape t;
    ParamBinder bind(t);
    const NodeId out = reconstruct_on_tape(
        t, bind, model, t.constant(as_batch(b.data)),
        t.constant(as_batch(b.mask.to_tensor(b.data.dim(1)))));
    return drop_batch(t.value(out));
}

double training_loss(const Tensor& pred, const Tensor& ref) {
    if (!pred.same_shape(ref))
        throw DimensionError("training_loss: shape mismatch " + shape_str(pred.shape()) + " vs " +
                             shape_str(ref.shape()));
    const auto a = pred.data();
    const auto b = ref.data();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.numel());
}

} // namespace gamr
