#include "gamr/tensor.hpp"

#include <numeric>
#include <sstream>

namespace gamr {

const char* dtype_name(DType dt) {
    return dt == DType::f32 ? "float32" : "float64";
}

DType dtype_from_name(const std::string& name) {
    if (name == "float32") return DType::f32;
    if (name == "float64") return DType::f64;
    throw ConfigError("unknown dtype '" + name + "' (expected float32 or float64)");
}

std::size_t dtype_width(DType dt) {
    return dt == DType::f32 ? 4 : 8;
}

int64_t shape_numel(const Shape& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d <= 0) throw DimensionError("tensor dims must be positive, got " + shape_str(shape));
        n *= d;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, DType dtype)
    : shape_(std::move(shape)), numel_(shape_numel(shape_)), dtype_(dtype),
      data_(std::make_shared<std::vector<double>>(numel_, 0.0)) {}

Tensor Tensor::from(Shape shape, std::vector<double> values, DType dtype) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.numel_ = shape_numel(t.shape_);
    t.dtype_ = dtype;
    if (static_cast<int64_t>(values.size()) != t.numel_)
        throw DimensionError("value count " + std::to_string(values.size()) +
                             " does not match shape " + shape_str(t.shape_));
    t.data_ = std::make_shared<std::vector<double>>(std::move(values));
    t.quantize_to_dtype();
    return t;
}

Tensor Tensor::full(Shape shape, double value, DType dtype) {
    Tensor t(std::move(shape), dtype);
    auto buf = t.mutable_data();
    for (auto& v : buf) v = value;
    t.quantize_to_dtype();
    return t;
}

Tensor Tensor::scalar(double value, DType dtype) {
    return full({1}, value, dtype);
}

Tensor Tensor::zeros_like(const Tensor& other) {
    return Tensor(other.shape_, other.dtype_);
}

std::span<const double> Tensor::data() const {
    if (!data_) return {};
    return {data_->data(), data_->size()};
}

std::span<double> Tensor::mutable_data() {
    ensure_unique();
    return {data_->data(), data_->size()};
}

double Tensor::item() const {
    if (numel_ != 1) throw ContractError("item() requires a scalar tensor, shape is " + shape_str(shape_));
    return (*data_)[0];
}

double Tensor::at(std::initializer_list<int64_t> idx) const {
    if (idx.size() != shape_.size())
        throw DimensionError("index rank mismatch for shape " + shape_str(shape_));
    int64_t flat = 0;
    std::size_t axis = 0;
    for (int64_t i : idx) {
        if (i < 0 || i >= shape_[axis]) throw DimensionError("index out of range");
        flat = flat * shape_[axis] + i;
        ++axis;
    }
    return (*data_)[static_cast<std::size_t>(flat)];
}

void Tensor::quantize_to_dtype() {
    if (dtype_ != DType::f32 || !data_) return;
    ensure_unique();
    for (auto& v : *data_) v = static_cast<double>(static_cast<float>(v));
}

Tensor Tensor::to_dtype(DType dt) const {
    Tensor t = *this;
    t.dtype_ = dt;
    t.quantize_to_dtype();
    return t;
}

void Tensor::ensure_unique() {
    if (!data_) {
        data_ = std::make_shared<std::vector<double>>();
        return;
    }
    if (data_.use_count() > 1) data_ = std::make_shared<std::vector<double>>(*data_);
}

DType promote_dtype(DType a, DType b) {
    return (a == DType::f32 && b == DType::f32) ? DType::f32 : DType::f64;
}

} // namespace gamr
