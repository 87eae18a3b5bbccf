#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aim::geometry {

// Physical constants / unit helpers.
inline constexpr double kSpeedOfLightMmPerS = 299792458.0e3;
inline double wavelength_mm_from_ghz(double freq_ghz) {
    return kSpeedOfLightMmPerS / (freq_ghz * 1e9);
}

struct GridLimits {
    double min_spacing_mm = 26.0; // smallest allowed pairwise distance
    double max_extent_mm = 202.0; // largest allowed per-axis extent
};

struct Slot {
    int id = 0;
    double x_mm = 0.0;
    double y_mm = 0.0;
};

// Candidate receiver positions. Slot ids are contiguous from 1.
struct PositionGrid {
    std::string name;
    std::vector<Slot> slots; // sorted by id after validation

    const Slot& slot(int id) const;     // throws ValidationError on unknown id
    double extent_x_mm() const;
    double extent_y_mm() const;
    double min_pairwise_spacing_mm() const;

    // Checks id contiguity, spacing and extent limits. Error messages name
    // the offending slot ids.
    void validate(const GridLimits& limits = {}) const;
};

// Parses the `id,x_mm,y_mm` CSV and validates. The grid name is the file
// stem. Parse errors carry 1-based line numbers.
PositionGrid load_grid(const std::string& path, const GridLimits& limits = {});

// A selection of grid slots acting as the receive array.
struct ArrayLayout {
    std::string grid_name;
    std::vector<int> indices; // canonical form: sorted, distinct

    int n() const { return static_cast<int>(indices.size()); }
};

ArrayLayout load_layout(const std::string& path);
void save_layout(const ArrayLayout& layout, const std::string& path);

// Membership / distinctness / size checks against a grid.
void validate_layout(const ArrayLayout& layout, const PositionGrid& grid,
                     std::optional<int> expected_n = std::nullopt);

// Multiset of quantized UV cells produced by all N^2 ordered element pairs
// (autocorrelations included; they all land on the DC cell for any grid
// respecting the spacing limits).
struct SamplingFunction {
    double cell_size = 0.5;   // wavelengths per UV cell
    double wavelength_mm = 0.0;
    int n_elements = 0;
    std::map<std::pair<long, long>, long> cells; // (u_cell, v_cell) -> multiplicity

    long total_multiplicity() const;
    long max_abs_cell() const; // largest |index| over both axes
    long unique_cells() const { return static_cast<long>(cells.size()); }

    // Hermitian support symmetry, DC presence, total multiplicity = N^2.
    void validate() const;
};

// Quantization: round to the nearest cell, ties toward +infinity.
inline long quantize_cell(double baseline_wavelengths, double cell_size) {
    return static_cast<long>(std::floor(baseline_wavelengths / cell_size + 0.5));
}

SamplingFunction sampling_function(const ArrayLayout& layout, const PositionGrid& grid,
                                   double wavelength_mm, double cell_size = 0.5);

// Resolution / field-of-view figures for one axis.
struct AxisFigures {
    double largest_baseline_mm = 0.0;  // D
    double smallest_spacing_mm = 0.0;  // smallest non-zero |delta|
    double resolution_rad = 0.0;       // 0.88 * lambda / D
    double fov_halfwidth = 0.0;        // lambda / (2 d), direction cosine units
};

// Per-axis figures; an axis with zero extent is left unset rather than
// reported as infinite.
struct ApertureFigures {
    std::optional<AxisFigures> x; // alpha axis
    std::optional<AxisFigures> y; // beta axis

    bool feasible() const { return x.has_value() && y.has_value(); }
    double worst_resolution_rad() const; // max over defined axes; throws if none
    double worst_fov_halfwidth() const;  // min over defined axes; throws if none
};

ApertureFigures aperture_figures(const ArrayLayout& layout, const PositionGrid& grid,
                                 double wavelength_mm);

// Smallest pairwise element distance among the layout's selected slots.
// lambda / (2 * this) is the alias-free field-of-view half-width actually
// achieved by the layout, independent of axis projections.
double layout_min_spacing_mm(const ArrayLayout& layout, const PositionGrid& grid);

} // namespace aim::geometry
