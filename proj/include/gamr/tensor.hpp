#ifndef GAMR_TENSOR_HPP
#define GAMR_TENSOR_HPP

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gamr/errors.hpp"

namespace gamr {

enum class DType { f32, f64 };

const char* dtype_name(DType dt);
DType dtype_from_name(const std::string& name);
std::size_t dtype_width(DType dt);

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major n-d array. Arithmetic always runs in double precision;
// a float32 tensor keeps its values quantized to float precision so that
// storage dtype is observable in round-trips and serialized payloads.
// The buffer is shared between copies and cloned on first mutable access,
// which keeps autodiff tape saves cheap.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, DType dtype = DType::f64);

    static Tensor from(Shape shape, std::vector<double> values, DType dtype = DType::f64);
    static Tensor full(Shape shape, double value, DType dtype = DType::f64);
    static Tensor scalar(double value, DType dtype = DType::f64);
    static Tensor zeros_like(const Tensor& other);

    const Shape& shape() const { return shape_; }
    int64_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t rank() const { return shape_.size(); }
    int64_t numel() const { return numel_; }
    DType dtype() const { return dtype_; }
    bool defined() const { return data_ != nullptr; }

    bool requires_grad() const { return requires_grad_; }
    Tensor& set_requires_grad(bool flag) { requires_grad_ = flag; return *this; }

    std::span<const double> data() const;
    // Detaches from any sharing copies before handing out a writable view.
    std::span<double> mutable_data();

    double item() const;                       // scalar tensors only
    double at(std::initializer_list<int64_t> idx) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    // Re-rounds the buffer when dtype is f32. Called by ops after writing.
    void quantize_to_dtype();

    Tensor to_dtype(DType dt) const;

private:
    Shape shape_;
    int64_t numel_ = 0;
    DType dtype_ = DType::f64;
    bool requires_grad_ = false;
    std::shared_ptr<std::vector<double>> data_;

    void ensure_unique();
};

// dtype of an op result: f32 only when every input is f32.
DType promote_dtype(DType a, DType b);

} // namespace gamr

#endif
