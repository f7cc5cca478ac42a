#ifndef GAMR_FFT_HPP
#define GAMR_FFT_HPP

#include "gamr/tensor.hpp"

namespace gamr {

bool is_power_of_two(int64_t n);

// Unitary radix-2 FFT over the trailing [2,H,W] axes of x (real/imag
// channel planes, H and W powers of two). Both directions scale by
// 1/sqrt(HW), so fft2_raw(fft2_raw(x), inverse=true) == x up to rounding.
// Leading axes are treated as a batch. Tape-free; the autodiff op and the
// data simulator both sit on top of this.
Tensor fft2_raw(const Tensor& x, bool inverse);

} // namespace gamr

#endif
