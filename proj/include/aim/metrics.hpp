#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aim/geometry.hpp"
#include "aim/imaging.hpp"
#include "aim/raster.hpp"

namespace aim::metrics {

struct SampleCounts {
    long unique_samples = 0;
    long redundant_samples = 0; // total multiplicity minus unique
};

SampleCounts count_unique(const geometry::SamplingFunction& s);

// Sidelobe level per azimuth around the image peak, in dB (20 log10 of the
// peak-normalized magnitude). One entry per angle, 0 dB is the peak.
struct SllProfile {
    double step_deg = 1.0;
    std::vector<double> level_db; // angle k * step_deg, k = 0 .. 360/step - 1
};

// Walks 360/step rays outward from the raster center in quarter-pixel steps
// (bilinear interpolation) and records the strongest level outside the main
// lobe. The main lobe ends at the first radial local minimum, falling back
// to the -3 dB radius for monotone profiles. `fixed_exclusion_px` overrides
// the automatic boundary with a fixed radius in pixels.
SllProfile sll_profile(const imaging::ComplexImage& image, double step_deg = 1.0,
                       std::optional<double> fixed_exclusion_px = std::nullopt);

enum class SllAveraging { DbMean, LinearMean };

// Average sidelobe level. The default averages the per-angle dB values;
// LinearMean averages magnitudes before converting to dB.
double avg_sll_db(const SllProfile& profile, SllAveraging mode = SllAveraging::DbMean);

// Peak sidelobe level: the worst (largest) profile entry.
double psl_db(const SllProfile& profile);

// Structural similarity over an 11x11 Gaussian window (sigma 1.5),
// C1 = (0.01 L)^2, C2 = (0.03 L)^2. When L is not given it is taken as the
// larger of the two image maxima (keeping the metric symmetric). Two
// all-zero images compare as 1.
double ssim(const Raster<double>& a, const Raster<double>& b,
            std::optional<double> dynamic_range = std::nullopt);

double ssim(const imaging::SceneImage& a, const imaging::SceneImage& b,
            std::optional<double> dynamic_range = std::nullopt);

// Sub-raster with |alpha| <= fov_alpha and |beta| <= fov_beta (inclusive
// within a small epsilon). Throws if a half-extent is non-positive or lies
// beyond the image axes.
imaging::SceneImage crop_to_fov(const imaging::SceneImage& img, double fov_alpha, double fov_beta);

// Rescales pixel values onto [0, 1] (min -> 0, max -> 1), the usual display
// normalization. A constant image is returned unchanged: there is no
// contrast to stretch and no offset that SSIM's stabilizers can't absorb.
imaging::SceneImage display_normalized(const imaging::SceneImage& img);

// The reconstruction-fidelity score used by the scene studies: crop both
// images to the same field-of-view window, display-normalize each crop, and
// compare with ssim(). Cropping first means the stretch is set by the
// compared region, not by off-window content.
double fov_ssim(const imaging::SceneImage& reference, const imaging::SceneImage& reconstruction,
                double fov_alpha, double fov_beta);

struct MetricReport {
    long unique_samples = 0;
    long redundant_samples = 0;
    std::optional<double> avg_sll_db;
    std::optional<double> psl_db;
    std::optional<double> ssim;

    std::string to_json() const;
};

} // namespace aim::metrics
