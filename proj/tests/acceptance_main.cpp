// Acceptance harness: end-to-end checks of the array-design toolkit against
// independent oracles (brute-force enumeration, closed-form sidelobe levels,
// Monte-Carlo convergence rates, exhaustive Pareto fronts) plus the expected
// quality ordering of the shipped reference layout, random search, and the
// genetic optimizer on the shipped 48-slot grid. Prints one line per
// criterion; the exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "aim/error.hpp"
#include "aim/geometry.hpp"
#include "aim/imaging.hpp"
#include "aim/metrics.hpp"
#include "aim/optimize.hpp"
#include "aim/rng.hpp"
#include "aim/signalsim.hpp"

namespace fs = std::filesystem;
using aim::Rng;
using cd = std::complex<double>;
namespace geo = aim::geometry;
namespace img = aim::imaging;
namespace met = aim::metrics;
namespace opt = aim::optimize;
namespace sig = aim::signalsim;

namespace {

constexpr double kFreqGhz = 38.0;
constexpr double kCell = 0.5;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error(what);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string shipped(const std::string& name) { return std::string(AIM_DATA_DIR) + "/" + name; }

geo::PositionGrid make_grid(std::string name, std::vector<std::pair<double, double>> xy) {
    geo::PositionGrid g;
    g.name = std::move(name);
    int id = 1;
    for (auto [x, y] : xy) g.slots.push_back({id++, x, y});
    return g;
}

geo::ArrayLayout make_layout(const geo::PositionGrid& g, std::vector<int> ids) {
    geo::ArrayLayout l;
    l.grid_name = g.name;
    l.indices = std::move(ids);
    return l;
}

std::vector<int> random_subset(Rng& rng, int n_slots, int k) {
    std::vector<int> ids(static_cast<std::size_t>(n_slots));
    std::iota(ids.begin(), ids.end(), 1);
    for (int i = 0; i < k; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_slots - i)));
        std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
    ids.resize(static_cast<std::size_t>(k));
    std::sort(ids.begin(), ids.end());
    return ids;
}

double max_pixel(const aim::Raster<double>& r) {
    double m = 0.0;
    for (std::size_t i = 0; i < r.rows(); ++i)
        for (std::size_t j = 0; j < r.cols(); ++j) m = std::max(m, r(i, j));
    return m;
}

// Artifacts shared between the trend, GA-quality, and scene-score criteria.
struct Shared {
    geo::PositionGrid grid48;
    geo::ArrayLayout circular;
    double lambda = 0.0;
    std::optional<opt::RandomSearchResult> random_best; // 1e5 trials, seed 1
    std::optional<opt::GaResult> ga_seed1;              // pop 200, gens 100
};

double layout_avg_sll(const geo::ArrayLayout& l, const geo::PositionGrid& g, double lambda) {
    const auto s = geo::sampling_function(l, g, lambda, kCell);
    const auto beam = img::psf(s, 256);
    return met::avg_sll_db(met::sll_profile(beam, 1.0));
}

// ---------------------------------------------------------------------------
// criterion 1: unique/redundant sample counts vs. a brute-force enumerator
// ---------------------------------------------------------------------------
void criterion_counting_oracle() {
    Stopwatch sw;
    const double lambda = geo::wavelength_mm_from_ghz(kFreqGhz);
    for (int rep = 0; rep < 200; ++rep) {
        Rng rng(10000u + static_cast<unsigned>(rep));
        // Jittered 5x5 lattice; 30 mm pitch with +-2 mm jitter keeps every
        // pairwise distance at or above the 26 mm spacing floor.
        std::vector<std::pair<double, double>> xy;
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 5; ++c)
                xy.emplace_back(30.0 * c + rng.uniform(-2.0, 2.0),
                                30.0 * r + rng.uniform(-2.0, 2.0));
        const auto grid = make_grid("jitter25", std::move(xy));
        const auto layout = make_layout(grid, random_subset(rng, 25, 6));

        const auto s = geo::sampling_function(layout, grid, lambda, kCell);
        const auto counts = met::count_unique(s);

        std::set<std::pair<long, long>> seen;
        for (int a : layout.indices)
            for (int b : layout.indices) {
                const auto& pa = grid.slot(a);
                const auto& pb = grid.slot(b);
                const double u = (pa.x_mm - pb.x_mm) / lambda;
                const double v = (pa.y_mm - pb.y_mm) / lambda;
                seen.insert({static_cast<long>(std::floor(u / kCell + 0.5)),
                             static_cast<long>(std::floor(v / kCell + 0.5))});
            }
        const long unique = static_cast<long>(seen.size());
        const long redundant = 36 - unique;
        require(counts.unique_samples == unique,
                "rep " + std::to_string(rep) + ": unique " + std::to_string(counts.unique_samples) +
                    " != brute " + std::to_string(unique));
        require(counts.redundant_samples == redundant,
                "rep " + std::to_string(rep) + ": redundant mismatch");
    }
    require(sw.seconds() < 10.0, "took " + num(sw.seconds()) + " s (budget 10 s)");
}

// ---------------------------------------------------------------------------
// criterion 2: sample-count ceiling and totals on the shipped grid
// ---------------------------------------------------------------------------
void criterion_ceiling(const Shared& sh) {
    Rng rng(21);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto layout = make_layout(sh.grid48, random_subset(rng, 48, 24));
        const auto counts =
            met::count_unique(geo::sampling_function(layout, sh.grid48, sh.lambda, kCell));
        require(counts.unique_samples <= 553,
                "rep " + std::to_string(rep) + ": unique " +
                    std::to_string(counts.unique_samples) + " exceeds 553");
        require(counts.unique_samples + counts.redundant_samples == 576,
                "rep " + std::to_string(rep) + ": totals do not add up to 576");
    }
}

// ---------------------------------------------------------------------------
// criterion 3: visibility-domain path vs. PSF-convolution path
// ---------------------------------------------------------------------------
void criterion_path_equivalence() {
    const double lambda = geo::wavelength_mm_from_ghz(kFreqGhz);
    // 4x4 lattice, 28 mm pitch: the longest diagonal stays within the UV
    // support a 64-cell raster can hold.
    std::vector<std::pair<double, double>> xy;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) xy.emplace_back(28.0 * c, 28.0 * r);
    const auto grid = make_grid("lat16", std::move(xy));

    img::SceneSpec spec;
    spec.raster = 64;
    spec.cell_size = kCell;

    Rng rng(31);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto layout = make_layout(grid, random_subset(rng, 16, 5));
        const auto s = geo::sampling_function(layout, grid, lambda, kCell);
        const auto scene = img::generate_random_scene(700u + static_cast<unsigned>(rep), spec);

        const auto direct = img::reconstruct(img::sample_visibility(img::scene_visibility(scene), s));
        const auto convolved = img::simulate_reconstruction(scene, img::psf(s, 64));

        const double peak = max_pixel(direct.pixels);
        require(peak > 0.0, "direct path produced an all-zero image");
        double num_sq = 0.0;
        double den_sq = 0.0;
        for (std::size_t i = 0; i < direct.pixels.rows(); ++i)
            for (std::size_t j = 0; j < direct.pixels.cols(); ++j) {
                const double a = direct.pixels(i, j) / peak;
                const double b = convolved.pixels(i, j);
                num_sq += (a - b) * (a - b);
                den_sq += b * b;
            }
        const double rel_rms = std::sqrt(num_sq / den_sq);
        worst = std::max(worst, rel_rms);
        require(rel_rms <= 1e-6,
                "rep " + std::to_string(rep) + ": relative RMS " + num(rel_rms) + " > 1e-6");
    }
    std::fprintf(stderr, "  [c3] worst relative RMS %s\n", num(worst).c_str());
}

// ---------------------------------------------------------------------------
// criterion 4: reconstruct() vs. the literal inverse-transform double sum
// ---------------------------------------------------------------------------
void criterion_direct_sum() {
    constexpr std::size_t n = 16;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int rep = 0; rep < 10; ++rep) {
        Rng rng(400u + static_cast<unsigned>(rep));
        img::VisibilityGrid vis;
        vis.cell_size = kCell;
        vis.cells = aim::Raster<cd>(n, n);
        vis.mask = aim::Raster<double>(n, n);
        // Random Hermitian-consistent support: each sampled cell carries the
        // conjugate of its mirrored partner; self-partnered cells stay real.
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                const std::size_t pr = (n - r) % n;
                const std::size_t pc = (n - c) % n;
                if (std::make_pair(pr, pc) < std::make_pair(r, c)) continue;
                if (rng.uniform01() >= 0.5) continue;
                if (pr == r && pc == c) {
                    vis.cells(r, c) = cd(rng.uniform(-1.0, 1.0), 0.0);
                    vis.mask(r, c) = 1.0;
                } else {
                    vis.cells(r, c) = cd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
                    vis.cells(pr, pc) = std::conj(vis.cells(r, c));
                    vis.mask(r, c) = 1.0;
                    vis.mask(pr, pc) = 1.0;
                }
            }

        const auto image = img::reconstruct(vis);

        const auto half = static_cast<double>(n) / 2.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                const double alpha = (static_cast<double>(c) - half) / (n * kCell);
                const double beta = (static_cast<double>(r) - half) / (n * kCell);
                cd acc = 0.0;
                for (std::size_t vr = 0; vr < n; ++vr)
                    for (std::size_t vc = 0; vc < n; ++vc) {
                        if (vis.mask(vr, vc) == 0.0) continue;
                        const double u = (static_cast<double>(vc) - half) * kCell;
                        const double v = (static_cast<double>(vr) - half) * kCell;
                        acc += vis.cells(vr, vc) *
                               std::exp(cd(0.0, -two_pi * (u * alpha + v * beta)));
                    }
                const double expect = std::abs(acc) / static_cast<double>(n * n);
                require(std::abs(image.pixels(r, c) - expect) <= 1e-9,
                        "rep " + std::to_string(rep) + ": pixel (" + std::to_string(r) + ", " +
                            std::to_string(c) + ") off by " +
                            num(std::abs(image.pixels(r, c) - expect)));
            }
    }
}

// ---------------------------------------------------------------------------
// criterion 5: dense rectangular sampling shows the sinc first-sidelobe level
// ---------------------------------------------------------------------------
void criterion_dense_sidelobe() {
    geo::SamplingFunction s;
    s.cell_size = kCell;
    s.wavelength_mm = geo::wavelength_mm_from_ghz(kFreqGhz);
    // Dense 33x33 cell block. Multiplicities are padded on cells inside the
    // block so the multiset obeys the sampling-function invariants (N
    // autocorrelations at DC, N^2 total, Hermitian symmetry) without touching
    // the support; the beam only sees the binarized support.
    s.n_elements = 34; // 34^2 = 1156 = 1054 singles + 17 mirrored double pairs + 34 at DC
    for (long u = -16; u <= 16; ++u)
        for (long v = -16; v <= 16; ++v) s.cells[{u, v}] = 1;
    s.cells[{0, 0}] = 34;
    for (long u = 1; u <= 16; ++u) {
        s.cells[{u, 0}] = 2;
        s.cells[{-u, 0}] = 2;
    }
    s.cells[{0, 1}] = 2;
    s.cells[{0, -1}] = 2;
    s.validate();

    const auto beam = img::psf(s, 1024);
    const std::size_t c0 = 512;
    std::vector<double> ray;
    for (std::size_t k = 0; k < 120; ++k) ray.push_back(std::abs(beam.pixels(c0, c0 + k)));
    require(std::abs(ray[0] - 1.0) < 1e-12, "peak is not normalized to 1");

    std::size_t k = 1;
    while (k + 1 < ray.size() && ray[k] <= ray[k - 1]) ++k; // walk down to the first null
    require(k + 1 < ray.size(), "no null found on the scan ray");
    std::size_t peak_idx = k;
    while (peak_idx + 1 < ray.size() && ray[peak_idx + 1] >= ray[peak_idx]) ++peak_idx;
    const double level_db = 20.0 * std::log10(ray[peak_idx]);
    require(std::abs(level_db - (-13.26)) <= 0.1,
            "first sidelobe " + num(level_db) + " dB, expected -13.26 +- 0.1");
    std::fprintf(stderr, "  [c5] first sidelobe %s dB\n", num(level_db).c_str());
}

// ---------------------------------------------------------------------------
// criterion 6: cross-correlation error falls at the Monte-Carlo rate
// ---------------------------------------------------------------------------
void criterion_convergence_rate() {
    Stopwatch sw;
    const double lambda = geo::wavelength_mm_from_ghz(kFreqGhz);
    const auto grid =
        make_grid("toy5", {{0.0, 0.0}, {27.0, 5.0}, {8.0, 30.0}, {40.0, 33.0}, {21.0, 57.0}});
    const auto layout = make_layout(grid, {1, 2, 3, 4, 5});
    const auto channel = sig::ChannelModel::unit(5);
    const std::vector<long> snapshot_counts = {100, 1000, 10000};
    constexpr double two_pi = 2.0 * std::numbers::pi;

    std::vector<double> mean_err(snapshot_counts.size(), 0.0);
    for (int sc = 0; sc < 10; ++sc) {
        Rng rng(900u + static_cast<unsigned>(sc));
        sig::EmitterScene scene;
        for (int k = 0; k < 3; ++k)
            scene.points.push_back(
                {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.3, 1.0)});

        for (std::size_t ti = 0; ti < snapshot_counts.size(); ++ti) {
            const auto est = sig::simulate_visibility(scene, layout, grid, lambda, channel,
                                                      snapshot_counts[ti],
                                                      5000u + 100u * static_cast<unsigned>(sc) +
                                                          static_cast<unsigned>(ti));
            double err_sq = 0.0;
            double ref_sq = 0.0;
            for (int i = 0; i < 5; ++i)
                for (int j = i + 1; j < 5; ++j) {
                    const auto& pi = grid.slot(layout.indices[static_cast<std::size_t>(i)]);
                    const auto& pj = grid.slot(layout.indices[static_cast<std::size_t>(j)]);
                    const double u = (pi.x_mm - pj.x_mm) / lambda;
                    const double v = (pi.y_mm - pj.y_mm) / lambda;
                    cd truth = 0.0;
                    for (const auto& p : scene.points)
                        truth += p.intensity *
                                 std::exp(cd(0.0, two_pi * (u * p.alpha + v * p.beta)));
                    err_sq += std::norm(est.pair(i, j) - truth);
                    ref_sq += std::norm(truth);
                }
            mean_err[ti] += std::sqrt(err_sq / ref_sq) / 10.0;
        }
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto m = static_cast<double>(snapshot_counts.size());
    for (std::size_t ti = 0; ti < snapshot_counts.size(); ++ti) {
        const double x = std::log10(static_cast<double>(snapshot_counts[ti]));
        const double y = std::log10(mean_err[ti]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    require(std::abs(slope - (-0.5)) <= 0.1,
            "log-log slope " + num(slope) + ", expected -0.5 +- 0.1");
    require(sw.seconds() < 120.0, "took " + num(sw.seconds()) + " s (budget 120 s)");
    std::fprintf(stderr, "  [c6] slope %s in %s s\n", num(slope).c_str(),
                 num(sw.seconds()).c_str());
}

// ---------------------------------------------------------------------------
// criterion 7: reference < random search <= GA in uniques, SLL widening
// ---------------------------------------------------------------------------
void criterion_trend(Shared& sh) {
    Stopwatch sw;
    std::fprintf(stderr, "  [c7] random search, 100000 trials...\n");
    sh.random_best =
        opt::random_search(sh.grid48, 24, 100000, sh.lambda, kCell, 1);

    std::fprintf(stderr, "  [c7] genetic run, population 200, generations 100...\n");
    opt::GaParams params;
    params.population = 200;
    params.generations = 100;
    params.seed = 1;
    sh.ga_seed1 = opt::ga_multiobjective(sh.grid48, 24, params, sh.lambda, kCell);

    const auto circ_counts =
        met::count_unique(geo::sampling_function(sh.circular, sh.grid48, sh.lambda, kCell));
    const long u_circ = circ_counts.unique_samples;
    const long u_rand = sh.random_best->objectives.unique();
    const long u_ga = opt::select_final(sh.ga_seed1->front).objectives.unique();
    require(u_circ < u_rand, "reference layout (" + std::to_string(u_circ) +
                                 ") should trail random search (" + std::to_string(u_rand) + ")");
    require(u_rand <= u_ga, "random search (" + std::to_string(u_rand) +
                                ") should not beat the GA (" + std::to_string(u_ga) + ")");

    const double sll_circ = layout_avg_sll(sh.circular, sh.grid48, sh.lambda);
    const double sll_rand = layout_avg_sll(sh.random_best->layout, sh.grid48, sh.lambda);
    const double sll_ga =
        layout_avg_sll(opt::select_final(sh.ga_seed1->front).layout, sh.grid48, sh.lambda);
    require(sll_circ > sll_rand && sll_rand > sll_ga,
            "average SLL not strictly improving: " + num(sll_circ) + ", " + num(sll_rand) + ", " +
                num(sll_ga) + " dB");
    require(sll_circ - sll_ga >= 2.0,
            "SLL spread " + num(sll_circ - sll_ga) + " dB < 2 dB");
    require(sw.seconds() < 900.0, "took " + num(sw.seconds()) + " s (budget 900 s)");
    std::fprintf(stderr, "  [c7] uniques %ld/%ld/%ld, avg SLL %s/%s/%s dB in %s s\n", u_circ,
                 u_rand, u_ga, num(sll_circ).c_str(), num(sll_rand).c_str(), num(sll_ga).c_str(),
                 num(sw.seconds()).c_str());
}

// ---------------------------------------------------------------------------
// criterion 8: GA reaches near-ceiling unique counts across seeds
// ---------------------------------------------------------------------------
void criterion_ga_quality(Shared& sh) {
    require(sh.ga_seed1.has_value(), "GA seed-1 run unavailable (criterion 7 failed)");
    std::vector<long> uniques;
    uniques.push_back(opt::select_final(sh.ga_seed1->front).objectives.unique());
    for (std::uint64_t seed : {2ull, 3ull}) {
        std::fprintf(stderr, "  [c8] genetic run, seed %llu...\n",
                     static_cast<unsigned long long>(seed));
        opt::GaParams params;
        params.population = 200;
        params.generations = 100;
        params.seed = seed;
        const auto res = opt::ga_multiobjective(sh.grid48, 24, params, sh.lambda, kCell);
        uniques.push_back(opt::select_final(res.front).objectives.unique());
    }
    require(uniques[0] >= 520, "seed 1 reached " + std::to_string(uniques[0]) + " of 553 (< 520)");
    for (std::size_t i = 0; i < uniques.size(); ++i)
        require(uniques[i] >= 510, "seed " + std::to_string(i + 1) + " reached " +
                                       std::to_string(uniques[i]) + " of 553 (< 510)");
    std::fprintf(stderr, "  [c8] uniques %ld/%ld/%ld of 553\n", uniques[0], uniques[1],
                 uniques[2]);
}

// ---------------------------------------------------------------------------
// criterion 9: GA front equals the exhaustive Pareto front on toy instances
// ---------------------------------------------------------------------------
std::vector<std::vector<int>> combinations(int n_slots, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> c(static_cast<std::size_t>(k));
    std::iota(c.begin(), c.end(), 1);
    while (true) {
        out.push_back(c);
        int i = k - 1;
        while (i >= 0 && c[static_cast<std::size_t>(i)] == n_slots - (k - 1 - i)) --i;
        if (i < 0) break;
        ++c[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

bool preferred_order(const opt::ParetoSolution& a, const opt::ParetoSolution& b) {
    if (a.objectives.unique() != b.objectives.unique())
        return a.objectives.unique() > b.objectives.unique();
    if (a.objectives.worst_res != b.objectives.worst_res)
        return a.objectives.worst_res < b.objectives.worst_res;
    if (a.objectives.neg_worst_fov != b.objectives.neg_worst_fov)
        return a.objectives.neg_worst_fov < b.objectives.neg_worst_fov;
    return a.layout.indices < b.layout.indices;
}

void criterion_ga_oracle() {
    const double lambda = geo::wavelength_mm_from_ghz(kFreqGhz);
    struct Instance {
        geo::PositionGrid grid;
        int n_elements;
        int population;
        int generations;
    };
    std::vector<std::pair<double, double>> lat_xy;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) lat_xy.emplace_back(30.0 * c, 30.0 * r);
    const std::vector<std::pair<double, double>> scatter8 = {
        {0.0, 0.0},  {29.0, 7.0},  {9.0, 31.0},  {43.0, 19.0},
        {23.0, 53.0}, {61.0, 37.0}, {47.0, 71.0}, {77.0, 11.0}};
    auto scatter12 = scatter8;
    scatter12.insert(scatter12.end(),
                     {{5.0, 79.0}, {79.0, 53.0}, {67.0, 89.0}, {89.0, 29.0}});

    std::vector<Instance> instances;
    instances.push_back({make_grid("lat32", lat_xy), 3, 16, 40});      // C(6,3)  = 20
    instances.push_back({make_grid("scatter8", scatter8), 3, 24, 60}); // C(8,3)  = 56
    instances.push_back({make_grid("scatter12", scatter12), 4, 24, 60}); // C(12,4) = 495

    for (const auto& inst : instances) {
        const int n_slots = static_cast<int>(inst.grid.slots.size());

        std::vector<opt::ParetoSolution> all;
        for (auto& genome : combinations(n_slots, inst.n_elements)) {
            opt::ParetoSolution sol;
            sol.objectives = opt::evaluate_objectives(inst.grid, genome, lambda, kCell);
            sol.layout = make_layout(inst.grid, std::move(genome));
            all.push_back(std::move(sol));
        }
        require(all.size() <= 500, inst.grid.name + ": instance larger than advertised");
        std::vector<opt::ParetoSolution> expected;
        for (const auto& cand : all) {
            bool dominated = false;
            for (const auto& other : all)
                if (opt::dominates(other.objectives, cand.objectives)) {
                    dominated = true;
                    break;
                }
            if (!dominated && cand.objectives.feasible) expected.push_back(cand);
        }
        std::sort(expected.begin(), expected.end(), preferred_order);

        opt::GaParams params;
        params.population = inst.population;
        params.generations = inst.generations;
        params.pareto_fraction = 1.0;
        params.seed = 42;
        const auto res = opt::ga_multiobjective(inst.grid, inst.n_elements, params, lambda, kCell);

        require(res.front.size() == expected.size(),
                inst.grid.name + ": front size " + std::to_string(res.front.size()) +
                    " != exhaustive " + std::to_string(expected.size()));
        for (std::size_t i = 0; i < expected.size(); ++i)
            require(res.front[i].layout.indices == expected[i].layout.indices,
                    inst.grid.name + ": front member " + std::to_string(i) +
                        " differs from the exhaustive front");
        std::fprintf(stderr, "  [c9] %s: front of %zu matches exhaustively\n",
                     inst.grid.name.c_str(), expected.size());
    }
}

// ---------------------------------------------------------------------------
// criterion 10: SSIM properties and the layout-quality ordering on scenes
// ---------------------------------------------------------------------------
aim::Raster<double> random_raster(std::size_t n, Rng& rng, double lo, double hi) {
    aim::Raster<double> r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = rng.uniform(lo, hi);
    return r;
}

void criterion_ssim(Shared& sh) {
    // Identity and symmetry.
    for (int rep = 0; rep < 20; ++rep) {
        Rng rng(1500u + static_cast<unsigned>(rep));
        const auto a = random_raster(32, rng, 0.0, 1.0);
        require(std::abs(met::ssim(a, a) - 1.0) <= 1e-12, "self-similarity is not 1");
    }
    for (int rep = 0; rep < 100; ++rep) {
        Rng rng(1600u + static_cast<unsigned>(rep));
        const auto a = random_raster(32, rng, 0.0, 1.0);
        const auto b = random_raster(32, rng, 0.0, 1.0);
        require(std::abs(met::ssim(a, b) - met::ssim(b, a)) <= 1e-12, "ssim is not symmetric");
    }
    // Range bounds over ten thousand random pairs.
    for (int rep = 0; rep < 10000; ++rep) {
        Rng rng(1700u + static_cast<unsigned>(rep));
        const auto a = random_raster(16, rng, -1.0, 1.0);
        const auto b = random_raster(16, rng, -1.0, 1.0);
        const double s = met::ssim(a, b);
        require(s >= -1.0 - 1e-12 && s <= 1.0 + 1e-12,
                "ssim " + num(s) + " outside [-1, 1] at rep " + std::to_string(rep));
    }
    // More noise, lower similarity.
    for (int rep = 0; rep < 100; ++rep) {
        Rng rng(1800u + static_cast<unsigned>(rep));
        const auto base = random_raster(32, rng, 0.2, 0.8);
        aim::Raster<double> small_noise(32, 32);
        aim::Raster<double> large_noise(32, 32);
        for (std::size_t i = 0; i < 32; ++i)
            for (std::size_t j = 0; j < 32; ++j) {
                const double nz = rng.uniform(-1.0, 1.0);
                small_noise(i, j) = base(i, j) + 0.05 * nz;
                large_noise(i, j) = base(i, j) + 0.5 * nz;
            }
        require(met::ssim(base, small_noise) > met::ssim(base, large_noise),
                "noise monotonicity violated at rep " + std::to_string(rep));
    }

    // Scene scores must rank GA >= random search >= the reference circle.
    require(sh.random_best.has_value() && sh.ga_seed1.has_value(),
            "optimizer artifacts unavailable (criterion 7 failed)");
    const std::vector<const geo::ArrayLayout*> layouts = {
        &sh.circular, &sh.random_best->layout, &opt::select_final(sh.ga_seed1->front).layout};

    double fov = 1.0;
    std::vector<img::ComplexImage> beams;
    for (const auto* l : layouts) {
        fov = std::min(fov, std::min(sh.lambda / (2.0 * geo::layout_min_spacing_mm(*l, sh.grid48)),
                                     1.0));
        beams.push_back(img::psf(geo::sampling_function(*l, sh.grid48, sh.lambda, kCell), 256));
    }

    std::vector<double> mean_ssim(layouts.size(), 0.0);
    for (int seed = 1; seed <= 20; ++seed) {
        const auto scene = img::generate_random_scene(static_cast<unsigned>(seed));
        for (std::size_t li = 0; li < layouts.size(); ++li) {
            const auto recon = img::simulate_reconstruction(scene, beams[li]);
            mean_ssim[li] += met::fov_ssim(scene, recon, fov, fov) / 20.0;
        }
    }
    require(mean_ssim[2] >= mean_ssim[1] && mean_ssim[1] >= mean_ssim[0],
            "mean SSIM ordering violated: circle " + num(mean_ssim[0]) + ", random " +
                num(mean_ssim[1]) + ", GA " + num(mean_ssim[2]));
    require(mean_ssim[2] - mean_ssim[0] >= 0.01,
            "GA-to-circle SSIM gap " + num(mean_ssim[2] - mean_ssim[0]) + " < 0.01");
    std::fprintf(stderr, "  [c10] mean SSIM %s/%s/%s over 20 scenes (fov %s)\n",
                 num(mean_ssim[0]).c_str(), num(mean_ssim[1]).c_str(), num(mean_ssim[2]).c_str(),
                 num(fov).c_str());
}

// ---------------------------------------------------------------------------
// criterion 11: calibration recovers the unit-gain point-source image
// ---------------------------------------------------------------------------
void criterion_calibration(const Shared& sh) {
    sig::EmitterScene scene;
    scene.points.push_back({0.0, 0.0, 1.0});
    constexpr long kSnapshots = 100000;
    constexpr std::uint64_t kSeed = 77;

    const auto ideal_est = sig::simulate_visibility(scene, sh.circular, sh.grid48, sh.lambda,
                                                    sig::ChannelModel::unit(24), kSnapshots, kSeed);
    const auto ideal_img = img::reconstruct(
        sig::grid_estimate(ideal_est, sh.circular, sh.grid48, sh.lambda, kCell, 256));

    sig::ChannelModel skewed;
    Rng rng(123);
    for (int i = 0; i < 24; ++i)
        skewed.gains.push_back(std::polar(rng.uniform(0.7, 1.4),
                                          rng.uniform(-std::numbers::pi, std::numbers::pi)));
    const auto raw_est = sig::simulate_visibility(scene, sh.circular, sh.grid48, sh.lambda, skewed,
                                                  kSnapshots, kSeed);
    const auto weights = sig::calibrate_point_source(raw_est, sh.circular, sh.grid48, sh.lambda);
    const auto cal_img = img::reconstruct(sig::grid_estimate(
        sig::apply_weights(raw_est, weights), sh.circular, sh.grid48, sh.lambda, kCell, 256));

    const double ideal_peak = max_pixel(ideal_img.pixels);
    const double cal_peak = max_pixel(cal_img.pixels);
    require(ideal_peak > 0.0, "ideal image is all zero");
    require(std::abs(cal_peak - ideal_peak) <= 0.01 * ideal_peak,
            "calibrated peak " + num(cal_peak) + " vs ideal " + num(ideal_peak) +
                " differs by more than 1%");
    const double s = met::ssim(cal_img, ideal_img);
    require(s >= 0.99, "ssim(calibrated, ideal) = " + num(s) + " < 0.99");
    std::fprintf(stderr, "  [c11] peak ratio %s, ssim %s\n", num(cal_peak / ideal_peak).c_str(),
                 num(s).c_str());
}

// ---------------------------------------------------------------------------
// criterion 12: every CLI command is byte-deterministic under a fixed seed
// ---------------------------------------------------------------------------
struct CliRun {
    int code = -1;
    std::string out;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliRun run_cli(const fs::path& dir, int idx, const std::string& args) {
    const auto out_path = dir / ("stdout" + std::to_string(idx));
    const std::string cmd =
        std::string(AIM_CLI_PATH) + " " + args + " >" + out_path.string() + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    CliRun r;
    if (rc != -1 && WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
    r.out = slurp(out_path);
    return r;
}

void compare_trees(const fs::path& a, const fs::path& b) {
    std::size_t count_a = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        ++count_a;
        const auto rel = fs::relative(entry.path(), a);
        require(fs::exists(b / rel), rel.string() + " missing from the second run");
        require(slurp(entry.path()) == slurp(b / rel), rel.string() + " differs between runs");
    }
    std::size_t count_b = 0;
    for (const auto& entry : fs::recursive_directory_iterator(b))
        if (entry.is_regular_file()) ++count_b;
    require(count_a == count_b, "the two runs produced different file sets");
}

void criterion_cli_determinism() {
    const fs::path root =
        fs::temp_directory_path() / ("aim_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    struct Cleanup {
        fs::path p;
        ~Cleanup() { fs::remove_all(p); }
    } cleanup{root};

    // Inputs for the optimizer and simulator commands.
    const auto toy_grid = root / "toy6.csv";
    {
        std::ofstream out(toy_grid);
        out << "id,x_mm,y_mm\n1,0,0\n2,26,0\n3,52,0\n4,0,26\n5,26,26\n6,52,26\n";
    }
    const auto channel = root / "channel.json";
    {
        sig::ChannelModel ch;
        for (int i = 0; i < 24; ++i)
            ch.gains.push_back(std::polar(i % 2 == 0 ? 1.1 : 0.9, 0.25 * (i % 7 - 3)));
        sig::save_channel(ch, channel.string());
    }

    const std::string grid48 = shipped("lattice48.csv");
    const std::string circ = shipped("circular24.json");
    const std::string scene = shipped("boresight_point.json");
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"grid-validate", "grid-validate --grid " + grid48},
        {"layout-eval", "layout-eval --grid " + grid48 + " --layout " + circ},
        {"psf", "psf --grid " + grid48 + " --layout " + circ + " --step-deg 5 --out-dir "},
        {"optimize-random", "optimize --mode random --grid " + toy_grid.string() +
                                " --n 3 --trials 300 --seed 7 --out-dir "},
        {"optimize-ga", "optimize --mode ga --grid " + toy_grid.string() +
                            " --n 3 --pop 8 --gens 3 --seed 2 --checkpoint-every 2 --out-dir "},
        {"scene-study", "scene-study --grid " + grid48 + " --layout " + circ +
                            " --scenes 2 --seed 1 --out-dir "},
        {"signalsim", "signalsim --grid " + grid48 + " --layout " + circ + " --scene " + scene +
                          " --channel " + channel.string() +
                          " --calibrate --snapshots 2000 --seed 3 --out-dir "},
    };

    for (const auto& [name, args] : commands) {
        const bool writes_files = args.ends_with("--out-dir ");
        const auto dir_a = root / (name + "_a");
        const auto dir_b = root / (name + "_b");
        fs::create_directories(dir_a);
        fs::create_directories(dir_b);
        const auto run_a =
            run_cli(root, 0, writes_files ? args + dir_a.string() : args);
        const auto run_b =
            run_cli(root, 1, writes_files ? args + dir_b.string() : args);
        require(run_a.code == 0, name + " exited with code " + std::to_string(run_a.code));
        require(run_b.code == 0, name + " (second run) exited with code " +
                                     std::to_string(run_b.code));
        require(run_a.out == run_b.out, name + ": stdout differs between runs");
        if (writes_files) compare_trees(dir_a, dir_b);
        std::fprintf(stderr, "  [c12] %s deterministic\n", name.c_str());
    }
}

} // namespace

int main() {
    Shared sh;
    sh.grid48 = geo::load_grid(shipped("lattice48.csv"));
    sh.circular = geo::load_layout(shipped("circular24.json"));
    sh.lambda = geo::wavelength_mm_from_ghz(kFreqGhz);

    struct Criterion {
        int id;
        const char* label;
        std::function<void()> body;
    };
    const std::vector<Criterion> criteria = {
        {1, "unique-sample counts match a brute-force enumerator on 200 random layouts",
         [&] { criterion_counting_oracle(); }},
        {2, "1000 random 24-element layouts stay within the 553 ceiling and sum to 576",
         [&] { criterion_ceiling(sh); }},
        {3, "visibility-domain and PSF-convolution reconstructions agree to 1e-6",
         [&] { criterion_path_equivalence(); }},
        {4, "reconstruct() matches the literal inverse-transform sum to 1e-9",
         [&] { criterion_direct_sum(); }},
        {5, "dense rectangular sampling yields a -13.26 +- 0.1 dB first sidelobe",
         [&] { criterion_dense_sidelobe(); }},
        {6, "visibility estimates converge at the 1/sqrt(T) Monte-Carlo rate",
         [&] { criterion_convergence_rate(); }},
        {7, "circle < random search <= GA in uniques with >= 2 dB SLL spread",
         [&] { criterion_trend(sh); }},
        {8, "GA reaches >= 520 uniques (seed 1) and >= 510 on all three seeds",
         [&] { criterion_ga_quality(sh); }},
        {9, "GA front equals the exhaustive Pareto front on small instances",
         [&] { criterion_ga_oracle(); }},
        {10, "SSIM properties hold and scene scores rank GA >= random >= circle",
         [&] { criterion_ssim(sh); }},
        {11, "calibration recovers the unit-gain point-source image",
         [&] { criterion_calibration(sh); }},
        {12, "every CLI command is byte-deterministic under a fixed seed",
         [&] { criterion_cli_determinism(); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        try {
            c.body();
            std::printf("[PASS] criterion %d: %s\n", c.id, c.label);
        } catch (const std::exception& e) {
            std::printf("[FAIL] criterion %d: %s -- %s\n", c.id, c.label, e.what());
            ++failures;
        }
        std::fflush(stdout);
    }
    std::printf("acceptance: %d of %zu criteria passed\n",
                static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
