#include "gamr/fft.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace gamr {

namespace {

// In-place radix-2 Cooley-Tukey on split re/im arrays, unnormalized.
void fft1d(double* re, double* im, int64_t n, bool inverse) {
    // bit-reversal permutation
    for (int64_t i = 1, j = 0; i < n; ++i) {
        int64_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (int64_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const double wr = std::cos(ang);
        const double wi = std::sin(ang);
        for (int64_t base = 0; base < n; base += len) {
            double cur_r = 1.0, cur_i = 0.0;
            const int64_t half = len >> 1;
            for (int64_t k = 0; k < half; ++k) {
                const int64_t a = base + k;
                const int64_t b = a + half;
                const double tr = re[b] * cur_r - im[b] * cur_i;
                const double ti = re[b] * cur_i + im[b] * cur_r;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                const double nr = cur_r * wr - cur_i * wi;
                cur_i = cur_r * wi + cur_i * wr;
                cur_r = nr;
            }
        }
    }
}

} // namespace

bool is_power_of_two(int64_t n) {
    return n > 0 && (n & (n - 1)) == 0;
}

Tensor fft2_raw(const Tensor& x, bool inverse) {
    const auto& shape = x.shape();
    if (shape.size() < 3)
        throw DimensionError("fft2 expects a [...,2,H,W] tensor, got " + shape_str(shape));
    const int64_t w = shape[shape.size() - 1];
    const int64_t h = shape[shape.size() - 2];
    const int64_t ch = shape[shape.size() - 3];
    if (ch != 2)
        throw DimensionError("fft2 expects 2 channels (real, imag), got " + std::to_string(ch));
    if (!is_power_of_two(h) || !is_power_of_two(w))
        throw ContractError("fft2 supports power-of-two sizes only, got " +
                            std::to_string(h) + "x" + std::to_string(w));

    Tensor out = x;
    auto buf = out.mutable_data();
    const int64_t plane = h * w;
    const int64_t batch = out.numel() / (2 * plane);
    const double norm = 1.0 / std::sqrt(static_cast<double>(plane));

    std::vector<double> col_re(static_cast<std::size_t>(h));
    std::vector<double> col_im(static_cast<std::size_t>(h));

    for (int64_t b = 0; b < batch; ++b) {
        double* re = buf.data() + b * 2 * plane;
        double* im = re + plane;
        for (int64_t y = 0; y < h; ++y)
            fft1d(re + y * w, im + y * w, w, inverse);
        for (int64_t xcol = 0; xcol < w; ++xcol) {
            for (int64_t y = 0; y < h; ++y) {
                col_re[static_cast<std::size_t>(y)] = re[y * w + xcol];
                col_im[static_cast<std::size_t>(y)] = im[y * w + xcol];
            }
            fft1d(col_re.data(), col_im.data(), h, inverse);
            for (int64_t y = 0; y < h; ++y) {
                re[y * w + xcol] = col_re[static_cast<std::size_t>(y)] * norm;
                im[y * w + xcol] = col_im[static_cast<std::size_t>(y)] * norm;
            }
        }
    }
    out.quantize_to_dtype();
    return out;
}

} // namespace gamr
