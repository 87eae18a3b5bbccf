#include "aim/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aim/error.hpp"
#include "aim/kernels.hpp"
#include "aim/rng.hpp"

namespace aim::imaging {

namespace {

void check_axes(const std::vector<double>& ax, std::size_t n, const char* what) {
    if (ax.size() != n) throw ValidationError(std::string(what) + " axis length mismatch");
    if (n < 2) return;
    const double step = ax[1] - ax[0];
    if (step <= 0.0) throw ValidationError(std::string(what) + " axis must be strictly increasing");
    for (std::size_t i = 1; i < n; ++i) {
        const double d = ax[i] - ax[i - 1];
        if (d <= 0.0 || std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(step)))
            throw ValidationError(std::string(what) + " axis must be uniform and strictly increasing");
    }
}

double cell_size_from_axes(const std::vector<double>& alpha) {
    // alpha step = 1 / (n * cell_size)
    const double step = alpha[1] - alpha[0];
    return 1.0 / (static_cast<double>(alpha.size()) * step);
}

} // namespace

void SceneImage::validate() const {
    if (pixels.rows() == 0 || pixels.cols() == 0) throw ValidationError("scene raster is empty");
    check_axes(alpha, pixels.cols(), "alpha");
    check_axes(beta, pixels.rows(), "beta");
    for (double v : pixels.data())
        if (!(v >= 0.0)) throw ValidationError("scene intensities must be non-negative");
}

void VisibilityGrid::validate() const {
    if (!cells.same_shape(mask)) throw ValidationError("visibility cell/mask shapes differ");
    const std::size_t rows = cells.rows(), cols = cells.cols();
    double scale = 0.0;
    for (const auto& c : cells.data()) scale = std::max(scale, std::abs(c));
    const double tol = 1e-9 * std::max(scale, 1e-300);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            if (mask(r, c) <= 0.0) continue;
            // cell (p,q) sits at centered index (q + n/2, p + n/2); its
            // conjugate partner (-p,-q) therefore sits at (n - r, n - c) mod n
            const std::size_t cr = (2 * (rows / 2) + rows - r) % rows;
            const std::size_t ccol = (2 * (cols / 2) + cols - c) % cols;
            if (mask(cr, ccol) > 0.0) {
                const cd diff = cells(r, c) - std::conj(cells(cr, ccol));
                if (std::abs(diff) > tol)
                    throw ValidationError("sampled visibility is not Hermitian-consistent");
            }
        }
}

SceneImage blank_scene(std::size_t raster, double cell_size) {
    SceneImage s;
    s.pixels = Raster<double>(raster, raster, 0.0);
    s.alpha = centered_axis(raster, cell_size);
    s.beta = centered_axis(raster, cell_size);
    return s;
}

ComplexImage psf(const geometry::SamplingFunction& s, std::size_t raster) {
    if (!is_pow2(raster)) throw ValidationError("raster size must be a power of two");
    const long need = 2 * s.max_abs_cell() + 1;
    if (static_cast<long>(raster) < need)
        throw ValidationError("raster " + std::to_string(raster) +
                              " cannot hold the sampling support; needs at least " +
                              std::to_string(need));

    const std::size_t n = raster;
    CRaster grid(n, n); // standard DFT layout
    for (const auto& [cell, mult] : s.cells) {
        (void)mult; // binarized support: every sampled cell weighs 1
        const std::size_t r = static_cast<std::size_t>(((cell.second % static_cast<long>(n)) +
                                                        static_cast<long>(n)) % static_cast<long>(n));
        const std::size_t c = static_cast<std::size_t>(((cell.first % static_cast<long>(n)) +
                                                        static_cast<long>(n)) % static_cast<long>(n));
        grid(r, c) = 1.0;
    }

    kernels::fft2d_inplace(grid, -1);
    const double scale = 1.0 / static_cast<double>(n * n);
    double peak = 0.0;
    for (auto& v : grid.data()) {
        v *= scale;
        peak = std::max(peak, std::abs(v));
    }
    if (peak <= 0.0) throw ValidationError("sampling function is empty");
    for (auto& v : grid.data()) v /= peak;

    ComplexImage img;
    img.pixels = fftshift(grid);
    img.alpha = centered_axis(n, s.cell_size);
    img.beta = centered_axis(n, s.cell_size);
    img.peak_scale = peak;
    return img;
}

VisibilityGrid scene_visibility(const SceneImage& scene) {
    scene.validate();
    const std::size_t n = scene.pixels.rows();
    if (n != scene.pixels.cols()) throw ValidationError("scene raster must be square");
    if (!is_pow2(n)) throw ValidationError("raster size must be a power of two");

    CRaster work(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            work(shifted_index(r, n), shifted_index(c, n)) = scene.pixels(r, c);
    kernels::fft2d_inplace(work, +1);

    VisibilityGrid vis;
    vis.cells = fftshift(work);
    vis.mask = Raster<double>(n, n, 1.0);
    vis.cell_size = cell_size_from_axes(scene.alpha);
    return vis;
}

VisibilityGrid sample_visibility(const VisibilityGrid& vis, const geometry::SamplingFunction& s) {
    if (std::abs(vis.cell_size - s.cell_size) > 1e-12)
        throw ValidationError("sampling function cell size does not match the visibility lattice");
    const std::size_t n = vis.cells.rows();
    if (n != vis.cells.cols()) throw ValidationError("visibility raster must be square");
    const long need = 2 * s.max_abs_cell() + 1;
    if (static_cast<long>(n) < need)
        throw ValidationError("visibility raster " + std::to_string(n) +
                              " cannot hold the sampling support; needs at least " +
                              std::to_string(need));

    VisibilityGrid out;
    out.cells = Raster<cd>(n, n);
    out.mask = Raster<double>(n, n, 0.0);
    out.cell_size = vis.cell_size;
    const long half = static_cast<long>(n / 2);
    for (const auto& [cell, mult] : s.cells) {
        const std::size_t r = static_cast<std::size_t>(cell.second + half);
        const std::size_t c = static_cast<std::size_t>(cell.first + half);
        out.cells(r, c) = vis.cells(r, c);
        out.mask(r, c) = static_cast<double>(mult);
    }
    return out;
}

SceneImage reconstruct(const VisibilityGrid& vis) {
    vis.validate();
    const std::size_t n = vis.cells.rows();
    if (n != vis.cells.cols()) throw ValidationError("visibility raster must be square");
    if (!is_pow2(n)) throw ValidationError("raster size must be a power of two");

    CRaster work(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            work(shifted_index(r, n), shifted_index(c, n)) = vis.cells(r, c);
    kernels::fft2d_inplace(work, -1);

    SceneImage img;
    img.pixels = Raster<double>(n, n);
    const double scale = 1.0 / static_cast<double>(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            img.pixels(r, c) = std::abs(work(shifted_index(r, n), shifted_index(c, n))) * scale;
    img.alpha = centered_axis(n, vis.cell_size);
    img.beta = centered_axis(n, vis.cell_size);
    return img;
}

SceneImage simulate_reconstruction(const SceneImage& scene, const ComplexImage& psf_image) {
    scene.validate();
    const std::size_t n = scene.pixels.rows();
    if (!psf_image.pixels.same_shape(scene.pixels))
        throw ValidationError("scene and PSF rasters must match");

    CRaster a(n, n), b(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            a(shifted_index(r, n), shifted_index(c, n)) = scene.pixels(r, c);
            b(shifted_index(r, n), shifted_index(c, n)) = psf_image.pixels(r, c);
        }
    CRaster conv = kernels::convolve2d_circular(a, b);

    SceneImage out;
    out.pixels = Raster<double>(n, n);
    double peak = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double m = std::abs(conv(shifted_index(r, n), shifted_index(c, n)));
            out.pixels(r, c) = m;
            peak = std::max(peak, m);
        }
    if (peak > 0.0)
        for (auto& v : out.pixels.data()) v /= peak;
    out.alpha = scene.alpha;
    out.beta = scene.beta;
    return out;
}

SceneImage generate_random_scene(std::uint64_t seed, const SceneSpec& spec) {
    if (spec.min_shapes < 0 || spec.max_shapes < spec.min_shapes)
        throw ValidationError("scene shape count range is invalid");
    if (spec.min_intensity < 0.0 || spec.max_intensity < spec.min_intensity)
        throw ValidationError("scene intensity range is invalid");

    SceneImage scene = blank_scene(spec.raster, spec.cell_size);
    Rng rng(seed);
    const int count = spec.min_shapes +
        static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.max_shapes - spec.min_shapes + 1)));

    const std::size_t n = spec.raster;
    for (int k = 0; k < count; ++k) {
        const bool rectangle = rng.below(2) == 0;
        const double cx = rng.uniform(-spec.placement_extent, spec.placement_extent);
        const double cy = rng.uniform(-spec.placement_extent, spec.placement_extent);
        const double sx = rng.uniform(spec.min_size, spec.max_size);
        const double sy = rectangle ? rng.uniform(spec.min_size, spec.max_size) : sx;
        const double intensity = rng.uniform(spec.min_intensity, spec.max_intensity);

        for (std::size_t r = 0; r < n; ++r) {
            const double b = scene.beta[r];
            for (std::size_t c = 0; c < n; ++c) {
                const double a = scene.alpha[c];
                bool inside;
                if (rectangle) {
                    inside = std::abs(a - cx) <= sx && std::abs(b - cy) <= sy;
                } else {
                    const double dx = a - cx, dy = b - cy;
                    inside = dx * dx + dy * dy <= sx * sx;
                }
                if (inside) scene.pixels(r, c) = std::max(scene.pixels(r, c), intensity);
            }
        }
    }
    return scene;
}

} // namespace aim::imaging
