#include "aim/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "aim/error.hpp"

namespace aim::kernels {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Twiddle table: w[k] = exp(sign * j * 2 pi k / n) for k < n/2.
std::vector<cd> twiddles(std::size_t n, int sign) {
    std::vector<cd> w(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double ang = sign * kTwoPi * static_cast<double>(k) / static_cast<double>(n);
        w[k] = {std::cos(ang), std::sin(ang)};
    }
    return w;
}

void fft_with_table(cd* x, std::size_t n, const std::vector<cd>& w) {
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cd t = x[i + k + len / 2] * w[k * step];
                x[i + k + len / 2] = x[i + k] - t;
                x[i + k] += t;
            }
        }
    }
}

void transpose(const CRaster& in, CRaster& out) {
    const std::size_t r = in.rows(), c = in.cols();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(r); ++i)
        for (std::size_t j = 0; j < c; ++j)
            out(j, static_cast<std::size_t>(i)) = in(static_cast<std::size_t>(i), j);
}

} // namespace

void fft_inplace(cd* x, std::size_t n, int sign) {
    if (!is_pow2(n)) throw ValidationError("fft size must be a power of two");
    if (n == 1) return;
    const auto w = twiddles(n, sign);
    fft_with_table(x, n, w);
}

void fft2d_inplace(CRaster& a, int sign) {
    const std::size_t rows = a.rows(), cols = a.cols();
    if (!is_pow2(rows) || !is_pow2(cols))
        throw ValidationError("fft2d raster dimensions must be powers of two");

    const auto wc = twiddles(cols, sign);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r)
        fft_with_table(a.data().data() + static_cast<std::size_t>(r) * cols, cols, wc);

    CRaster t(cols, rows);
    transpose(a, t);
    const auto wr = twiddles(rows, sign);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(cols); ++c)
        fft_with_table(t.data().data() + static_cast<std::size_t>(c) * rows, rows, wr);
    transpose(t, a);
}

CRaster dft2d_reference(const CRaster& a, int sign) {
    const std::size_t rows = a.rows(), cols = a.cols();
    // Exact-period twiddle tables so the reference is free of phase drift.
    std::vector<cd> wr(rows), wc(cols);
    for (std::size_t k = 0; k < rows; ++k) {
        const double ang = sign * kTwoPi * static_cast<double>(k) / static_cast<double>(rows);
        wr[k] = {std::cos(ang), std::sin(ang)};
    }
    for (std::size_t k = 0; k < cols; ++k) {
        const double ang = sign * kTwoPi * static_cast<double>(k) / static_cast<double>(cols);
        wc[k] = {std::cos(ang), std::sin(ang)};
    }
    CRaster out(rows, cols);
    for (std::size_t tr = 0; tr < rows; ++tr) {
        for (std::size_t tc = 0; tc < cols; ++tc) {
            cd acc = 0.0;
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c)
                    acc += a(r, c) * wr[(r * tr) % rows] * wc[(c * tc) % cols];
            out(tr, tc) = acc;
        }
    }
    return out;
}

CRaster convolve2d_circular(const CRaster& a, const CRaster& b) {
    if (!a.same_shape(b)) throw ValidationError("convolution operands must share a raster shape");
    CRaster fa = a, fb = b;
    fft2d_inplace(fa, +1);
    fft2d_inplace(fb, +1);
    const double scale = 1.0 / static_cast<double>(a.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(fa.size()); ++i)
        fa.data()[static_cast<std::size_t>(i)] *= fb.data()[static_cast<std::size_t>(i)] * scale;
    fft2d_inplace(fa, -1);
    return fa;
}

CRaster convolve2d_reference(const CRaster& a, const CRaster& b) {
    if (!a.same_shape(b)) throw ValidationError("convolution operands must share a raster shape");
    const std::size_t rows = a.rows(), cols = a.cols();
    CRaster out(rows, cols);
    for (std::size_t pr = 0; pr < rows; ++pr)
        for (std::size_t pc = 0; pc < cols; ++pc) {
            cd acc = 0.0;
            for (std::size_t qr = 0; qr < rows; ++qr)
                for (std::size_t qc = 0; qc < cols; ++qc)
                    acc += a(qr, qc) * b((pr + rows - qr) % rows, (pc + cols - qc) % cols);
            out(pr, pc) = acc;
        }
    return out;
}

} // namespace aim::kernels
