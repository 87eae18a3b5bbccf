#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "aim/geometry.hpp"
#include "aim/raster.hpp"

// Image-domain pipeline.
//
// Conventions (fixed project-wide):
//  * Rasters are square powers of two, stored DC-centered: the zero
//    frequency / boresight pixel sits at index (n/2, n/2). Columns map to
//    the alpha direction cosine, rows to beta.
//  * UV cells have spacing `cell_size` (wavelengths per cell); the implied
//    image axis is alpha_p = (p - n/2) / (n * cell_size). At the default
//    cell size of 0.5 the image spans [-1, 1) in direction cosines.
//  * Forward transform (scene -> visibility) uses exp(+j 2 pi (u a + v b));
//    image formation (visibility -> image) uses exp(-j 2 pi (u a + v b))
//    scaled by 1 / (raster cells). The pair is a true inverse, so a fully
//    sampled visibility reproduces the scene without reflection.
namespace aim::imaging {

using cd = std::complex<double>;

// Non-negative intensity raster with its direction-cosine axes.
struct SceneImage {
    Raster<double> pixels;
    std::vector<double> alpha; // per column, strictly increasing, uniform
    std::vector<double> beta;  // per row

    void validate() const;
};

struct ComplexImage {
    Raster<cd> pixels;
    std::vector<double> alpha;
    std::vector<double> beta;
    // For peak-normalized images: the magnitude the peak had before
    // normalization (1.0 otherwise). Lets tests undo the normalization.
    double peak_scale = 1.0;
};

// Complex visibility samples on the UV cell lattice plus the sample
// multiplicity per cell (0 = not sampled). DC-centered like the images.
struct VisibilityGrid {
    Raster<cd> cells;
    Raster<double> mask;
    double cell_size = 0.5;

    void validate() const; // shapes match, Hermitian consistency where sampled
};

SceneImage blank_scene(std::size_t raster, double cell_size = 0.5);

// Point-spread function: inverse transform of the binarized cell support,
// peak-normalized (peak_scale records the pre-normalization peak).
// Throws if the support does not fit: raster >= 2 * max|cell index| + 1.
ComplexImage psf(const geometry::SamplingFunction& s, std::size_t raster);

// Forward transform of a scene onto a fully sampled visibility grid
// (mask = 1 everywhere). The cell size is implied by the scene axes.
VisibilityGrid scene_visibility(const SceneImage& scene);

// Pointwise sampling: keeps visibility values on sampled cells, zeroes the
// rest, and stores the multiplicities in the mask. Cell lattices must match.
VisibilityGrid sample_visibility(const VisibilityGrid& vis, const geometry::SamplingFunction& s);

// Magnitude image of the inverse transform of the sampled visibility,
// scaled by 1 / (raster cells).
SceneImage reconstruct(const VisibilityGrid& vis);

// Circular convolution of the scene with the complex PSF; magnitude taken
// after the convolution, then peak-normalized.
SceneImage simulate_reconstruction(const SceneImage& scene, const ComplexImage& psf_image);

// Random test scenes: axis-aligned rectangles and filled circles with
// uniformly drawn centers, sizes and intensities (overlaps keep the
// brighter shape). Deterministic in the seed.
struct SceneSpec {
    std::size_t raster = 256;
    double cell_size = 0.5;
    int min_shapes = 2;
    int max_shapes = 6;
    double min_intensity = 0.25;
    double max_intensity = 1.0;
    double placement_extent = 0.35; // max |center| in direction cosines
    double min_size = 0.05;         // half-width / radius, direction cosines
    double max_size = 0.20;
};

SceneImage generate_random_scene(std::uint64_t seed, const SceneSpec& spec = {});

} // namespace aim::imaging
