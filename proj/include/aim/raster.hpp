#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace aim {

// Dense row-major 2D array. Rows index the beta (vertical) direction,
// columns the alpha (horizontal) direction.
template <typename T>
class Raster {
public:
    Raster() = default;
    Raster(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }

    T& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

    std::vector<T>& data() { return v_; }
    const std::vector<T>& data() const { return v_; }

    template <typename U>
    bool same_shape(const Raster<U>& o) const {
        return rows_ == o.rows() && cols_ == o.cols();
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> v_;
};

using CRaster = Raster<std::complex<double>>;

// Index mapping between "standard" DFT layout (DC at index 0) and the
// centered layout (DC at index n/2). Self-inverse for even n.
inline std::size_t shifted_index(std::size_t i, std::size_t n) { return (i + n / 2) % n; }

template <typename T>
Raster<T> fftshift(const Raster<T>& a) {
    Raster<T> out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
            out(shifted_index(r, a.rows()), shifted_index(c, a.cols())) = a(r, c);
    return out;
}

// Direction-cosine axis implied by a UV lattice with the given cell size
// (in wavelengths per cell): axis[i] = (i - n/2) / (n * cell_size).
inline std::vector<double> centered_axis(std::size_t n, double cell_size) {
    std::vector<double> ax(n);
    for (std::size_t i = 0; i < n; ++i)
        ax[i] = (static_cast<double>(i) - static_cast<double>(n / 2)) / (static_cast<double>(n) * cell_size);
    return ax;
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace aim
