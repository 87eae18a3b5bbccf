#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "aim/geometry.hpp"
#include "aim/imaging.hpp"

// Monte-Carlo cross-correlation simulator.
//
// Each snapshot draws an independent circular complex Gaussian amplitude per
// emitter (variance = intensity) plus receiver noise; receiver i sees the
// phase-steered sum with steering exp(+j 2 pi (x_i a + y_i b) / lambda).
// Snapshot-averaged products E_i conj(E_j) converge on the analytic
// visibility sum_k I_k exp(+j 2 pi (u a_k + v b_k)) with u = (x_i - x_j) /
// lambda at the usual 1/sqrt(T) Monte-Carlo rate.
//
// Reproducibility: snapshots are processed in fixed chunks of 1024, each
// chunk seeded independently from (seed, chunk index). Chunk partial sums
// are combined in chunk order, so results are bit-identical for a fixed
// (seed, T) regardless of thread count.
namespace aim::signalsim {

using cd = std::complex<double>;

struct EmitterPoint {
    double alpha = 0.0;
    double beta = 0.0;
    double intensity = 1.0;
};

struct EmitterScene {
    std::vector<EmitterPoint> points;

    void validate() const; // alpha^2 + beta^2 <= 1, intensity >= 0
};

EmitterScene load_emitter_scene(const std::string& path);
void save_emitter_scene(const EmitterScene& scene, const std::string& path);

struct ChannelModel {
    std::vector<cd> gains;     // per receiver, |gain| > 0
    double noise_power = 0.0;  // additive per-receiver noise variance

    static ChannelModel unit(int n);
    void validate(int n_receivers) const;
};

ChannelModel load_channel(const std::string& path);
void save_channel(const ChannelModel& channel, const std::string& path);

// Sample averages over ordered pairs; only i <= j is stored, pair(j, i) is
// computed as the conjugate so the Hermitian invariant holds exactly.
struct VisibilityEstimate {
    int n_receivers = 0;
    long snapshots = 0;
    std::vector<cd> upper; // packed i <= j

    cd pair(int i, int j) const;
    static std::size_t packed_index(int i, int j, int n); // requires i <= j
};

inline constexpr long kSnapshotChunk = 1024;

VisibilityEstimate simulate_visibility(const EmitterScene& scene,
                                       const geometry::ArrayLayout& layout,
                                       const geometry::PositionGrid& grid,
                                       double wavelength_mm,
                                       const ChannelModel& channel,
                                       long snapshots, std::uint64_t seed);

// Per-receiver calibration weights from a point-source observation at
// (alpha0, beta0): solves the log-amplitude and phase pair equations by
// least squares (cross pairs only; autocorrelations carry the noise bias).
// Phase is anchored to receiver 1, amplitude to geometric mean 1; phase
// wraps are resolved by shortest-path unwrapping against the source model.
// Throws InfeasibleError when the post-fit phase residual exceeds pi/2 on
// any pair, ValidationError when the pair system is rank-deficient.
std::vector<cd> calibrate_point_source(const VisibilityEstimate& measured,
                                       const geometry::ArrayLayout& layout,
                                       const geometry::PositionGrid& grid,
                                       double wavelength_mm,
                                       double alpha0 = 0.0, double beta0 = 0.0);

// Applies weights: v'_ij = w_i v_ij conj(w_j).
VisibilityEstimate apply_weights(const VisibilityEstimate& measured, const std::vector<cd>& weights);

// Grids pair estimates onto the UV cell lattice (cell values are averages of
// the contributing pairs; the mask carries contribution counts) and, when
// the DC cell is sampled, normalizes by the DC value so the image scale is
// independent of the overall gain level.
imaging::VisibilityGrid grid_estimate(const VisibilityEstimate& est,
                                      const geometry::ArrayLayout& layout,
                                      const geometry::PositionGrid& grid,
                                      double wavelength_mm, double cell_size,
                                      std::size_t raster);

void save_visibility_csv(const VisibilityEstimate& est, const std::string& path);

} // namespace aim::signalsim
