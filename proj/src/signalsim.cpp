#include "aim/signalsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "aim/error.hpp"
#include "aim/io.hpp"
#include "aim/rng.hpp"

namespace aim::signalsim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Dense symmetric solve (Cholesky with a fallback pivot check); systems here
// are at most (n_receivers + 1) square.
std::vector<double> solve_spd(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        double d = a[k][k];
        for (std::size_t j = 0; j < k; ++j) d -= a[k][j] * a[k][j];
        if (d <= 1e-12)
            throw ValidationError("calibration system is rank-deficient; need pair equations covering every receiver");
        a[k][k] = std::sqrt(d);
        for (std::size_t i = k + 1; i < n; ++i) {
            double s = a[i][k];
            for (std::size_t j = 0; j < k; ++j) s -= a[i][j] * a[k][j];
            a[i][k] = s / a[k][k];
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < i; ++j) s -= a[i][j] * b[j];
        b[i] = s / a[i][i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a[j][ii] * b[j];
        b[ii] = s / a[ii][ii];
    }
    return b;
}

// Least squares for rows sum_k coef_k x_k = rhs via normal equations.
struct LinearSystem {
    std::size_t n_unknowns;
    std::vector<std::vector<double>> ata;
    std::vector<double> atb;

    explicit LinearSystem(std::size_t n)
        : n_unknowns(n), ata(n, std::vector<double>(n, 0.0)), atb(n, 0.0) {}

    void add_row(const std::vector<std::pair<std::size_t, double>>& coef, double rhs) {
        for (const auto& [i, ci] : coef) {
            atb[i] += ci * rhs;
            for (const auto& [j, cj] : coef) ata[i][j] += ci * cj;
        }
    }

    std::vector<double> solve() { return solve_spd(ata, atb); }
};

double wrap_pi(double x) {
    x = std::fmod(x + 3.14159265358979323846, kTwoPi);
    if (x < 0) x += kTwoPi;
    return x - 3.14159265358979323846;
}

} // namespace

void EmitterScene::validate() const {
    for (const auto& p : points) {
        if (p.alpha * p.alpha + p.beta * p.beta > 1.0 + 1e-12)
            throw ValidationError("emitter direction cosines must satisfy alpha^2 + beta^2 <= 1");
        if (!(p.intensity >= 0.0)) throw ValidationError("emitter intensity must be non-negative");
    }
}

EmitterScene load_emitter_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scene file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("scene file '" + path + "': " + e.what());
    }
    EmitterScene scene;
    try {
        for (const auto& p : j.at("points")) {
            EmitterPoint pt;
            pt.alpha = p.at("alpha").get<double>();
            pt.beta = p.at("beta").get<double>();
            pt.intensity = p.at("intensity").get<double>();
            scene.points.push_back(pt);
        }
    } catch (const std::exception& e) {
        throw ValidationError("scene file '" + path + "': " + e.what());
    }
    scene.validate();
    return scene;
}

void save_emitter_scene(const EmitterScene& scene, const std::string& path) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : scene.points)
        pts.push_back({{"alpha", p.alpha}, {"beta", p.beta}, {"intensity", p.intensity}});
    io::atomic_write_text(path, nlohmann::json{{"points", pts}}.dump(2) + "\n");
}

ChannelModel ChannelModel::unit(int n) {
    ChannelModel m;
    m.gains.assign(static_cast<std::size_t>(n), cd(1.0, 0.0));
    return m;
}

void ChannelModel::validate(int n_receivers) const {
    if (static_cast<int>(gains.size()) != n_receivers)
        throw ValidationError("channel model has " + std::to_string(gains.size()) +
                              " gains for " + std::to_string(n_receivers) + " receivers");
    for (const auto& g : gains)
        if (!(std::abs(g) > 0.0)) throw ValidationError("channel gains must have positive amplitude");
    if (noise_power < 0.0) throw ValidationError("noise power must be non-negative");
}

ChannelModel load_channel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open channel file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("channel file '" + path + "': " + e.what());
    }
    ChannelModel m;
    try {
        for (const auto& g : j.at("gains")) {
            const double amp = g.at("amp").get<double>();
            const double ph = g.at("phase_rad").get<double>();
            m.gains.push_back(std::polar(amp, ph));
        }
        m.noise_power = j.value("noise_power", 0.0);
    } catch (const std::exception& e) {
        throw ValidationError("channel file '" + path + "': " + e.what());
    }
    return m;
}

void save_channel(const ChannelModel& channel, const std::string& path) {
    nlohmann::json gains = nlohmann::json::array();
    for (const auto& g : channel.gains)
        gains.push_back({{"amp", std::abs(g)}, {"phase_rad", std::arg(g)}});
    io::atomic_write_text(path,
                          nlohmann::json{{"gains", gains}, {"noise_power", channel.noise_power}}.dump(2) + "\n");
}

std::size_t VisibilityEstimate::packed_index(int i, int j, int n) {
    // row-major upper triangle including the diagonal
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) -
           static_cast<std::size_t>(i) * static_cast<std::size_t>(i - 1) / 2 +
           static_cast<std::size_t>(j - i);
}

cd VisibilityEstimate::pair(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_receivers || j >= n_receivers)
        throw ValidationError("visibility pair index out of range");
    if (i <= j) return upper[packed_index(i, j, n_receivers)];
    return std::conj(upper[packed_index(j, i, n_receivers)]);
}

VisibilityEstimate simulate_visibility(const EmitterScene& scene,
                                       const geometry::ArrayLayout& layout,
                                       const geometry::PositionGrid& grid,
                                       double wavelength_mm,
                                       const ChannelModel& channel,
                                       long snapshots, std::uint64_t seed) {
    scene.validate();
    geometry::validate_layout(layout, grid);
    const int n = layout.n();
    channel.validate(n);
    if (snapshots < 1) throw ValidationError("snapshot count must be at least 1");
    if (wavelength_mm <= 0.0) throw ValidationError("wavelength must be positive");

    const std::size_t n_points = scene.points.size();
    const std::size_t n_pairs = static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) + 1) / 2;

    // steering[i][k] = exp(+j 2 pi (x_i a_k + y_i b_k) / lambda)
    std::vector<cd> steering(static_cast<std::size_t>(n) * std::max<std::size_t>(n_points, 1));
    for (int i = 0; i < n; ++i) {
        const auto& s = grid.slot(layout.indices[static_cast<std::size_t>(i)]);
        for (std::size_t k = 0; k < n_points; ++k) {
            const double ph = kTwoPi * (s.x_mm * scene.points[k].alpha + s.y_mm * scene.points[k].beta) /
                              wavelength_mm;
            steering[static_cast<std::size_t>(i) * n_points + k] = {std::cos(ph), std::sin(ph)};
        }
    }
    std::vector<double> amp_scale(n_points);
    for (std::size_t k = 0; k < n_points; ++k) amp_scale[k] = std::sqrt(scene.points[k].intensity);
    const double noise_scale = std::sqrt(channel.noise_power);

    const long n_chunks = (snapshots + kSnapshotChunk - 1) / kSnapshotChunk;
    std::vector<std::vector<cd>> partial(static_cast<std::size_t>(n_chunks),
                                         std::vector<cd>(n_pairs, cd(0.0, 0.0)));

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t chunk = 0; chunk < static_cast<std::ptrdiff_t>(n_chunks); ++chunk) {
        Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(chunk));
        auto& acc = partial[static_cast<std::size_t>(chunk)];
        std::vector<cd> e(static_cast<std::size_t>(n));
        std::vector<cd> amp(n_points);
        const long t0 = static_cast<long>(chunk) * kSnapshotChunk;
        const long t1 = std::min(snapshots, t0 + kSnapshotChunk);
        for (long t = t0; t < t1; ++t) {
            for (std::size_t k = 0; k < n_points; ++k) amp[k] = rng.cnormal() * amp_scale[k];
            for (int i = 0; i < n; ++i) {
                cd sum(0.0, 0.0);
                for (std::size_t k = 0; k < n_points; ++k)
                    sum += amp[k] * steering[static_cast<std::size_t>(i) * n_points + k];
                e[static_cast<std::size_t>(i)] = channel.gains[static_cast<std::size_t>(i)] * sum;
            }
            if (noise_scale > 0.0)
                for (int i = 0; i < n; ++i)
                    e[static_cast<std::size_t>(i)] += rng.cnormal() * noise_scale;
            std::size_t idx = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j, ++idx)
                    acc[idx] += e[static_cast<std::size_t>(i)] * std::conj(e[static_cast<std::size_t>(j)]);
        }
    }

    VisibilityEstimate est;
    est.n_receivers = n;
    est.snapshots = snapshots;
    est.upper.assign(n_pairs, cd(0.0, 0.0));
    for (long chunk = 0; chunk < n_chunks; ++chunk)
        for (std::size_t p = 0; p < n_pairs; ++p)
            est.upper[p] += partial[static_cast<std::size_t>(chunk)][p];
    const double inv_t = 1.0 / static_cast<double>(snapshots);
    for (auto& v : est.upper) v *= inv_t;
    return est;
}

std::vector<cd> calibrate_point_source(const VisibilityEstimate& measured,
                                       const geometry::ArrayLayout& layout,
                                       const geometry::PositionGrid& grid,
                                       double wavelength_mm,
                                       double alpha0, double beta0) {
    geometry::validate_layout(layout, grid);
    const int n = layout.n();
    if (measured.n_receivers != n)
        throw ValidationError("visibility estimate covers " + std::to_string(measured.n_receivers) +
                              " receivers, layout has " + std::to_string(n));
    if (n < 3) throw ValidationError("calibration needs at least three receivers");

    // model phase per receiver: exp(+j 2 pi (x a0 + y b0) / lambda)
    std::vector<double> model_phase(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& s = grid.slot(layout.indices[static_cast<std::size_t>(i)]);
        model_phase[static_cast<std::size_t>(i)] =
            kTwoPi * (s.x_mm * alpha0 + s.y_mm * beta0) / wavelength_mm;
    }

    // Pair observations relative to the model (cross pairs only).
    struct Obs {
        int i, j;
        double log_amp;  // log |v_ij / m_ij| = log|g_i| + log|g_j|
        double phase;    // wrapped arg(v_ij conj(m_ij)) = phi_i - phi_j + 2 pi k
    };
    std::vector<Obs> obs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const cd v = measured.pair(i, j);
            if (std::abs(v) <= 0.0)
                throw ValidationError("measured visibility pair (" + std::to_string(i + 1) + "," +
                                      std::to_string(j + 1) + ") is zero; cannot calibrate");
            const double mp = model_phase[static_cast<std::size_t>(i)] -
                              model_phase[static_cast<std::size_t>(j)];
            obs.push_back({i, j, std::log(std::abs(v)), wrap_pi(std::arg(v) - mp)});
        }

    // Amplitudes: x_i + x_j + c = log-amp, c absorbing the unknown source
    // power; the appended sum(x) = 0 row pins the geometric-mean gauge.
    LinearSystem amp_sys(static_cast<std::size_t>(n) + 1);
    for (const auto& o : obs)
        amp_sys.add_row({{static_cast<std::size_t>(o.i), 1.0},
                         {static_cast<std::size_t>(o.j), 1.0},
                         {static_cast<std::size_t>(n), 1.0}},
                        o.log_amp);
    {
        std::vector<std::pair<std::size_t, double>> gauge;
        for (int i = 0; i < n; ++i) gauge.push_back({static_cast<std::size_t>(i), 1.0});
        amp_sys.add_row(gauge, 0.0);
    }
    const auto log_amp = amp_sys.solve();

    // Phases: initial anchor phi_1 = 0 gives phi_i directly from the (1, i)
    // pairs; every equation is then integer-unwrapped against that estimate
    // before the joint least squares over all pairs.
    std::vector<double> phi0(static_cast<std::size_t>(n), 0.0);
    for (const auto& o : obs)
        if (o.i == 0) phi0[static_cast<std::size_t>(o.j)] = -o.phase;

    LinearSystem ph_sys(static_cast<std::size_t>(n));
    for (const auto& o : obs) {
        const double predicted = phi0[static_cast<std::size_t>(o.i)] - phi0[static_cast<std::size_t>(o.j)];
        const double unwrapped = o.phase + kTwoPi * std::round((predicted - o.phase) / kTwoPi);
        ph_sys.add_row({{static_cast<std::size_t>(o.i), 1.0}, {static_cast<std::size_t>(o.j), -1.0}},
                       unwrapped);
    }
    ph_sys.add_row({{0, 1.0}}, 0.0); // anchor receiver 1
    const auto phi = ph_sys.solve();

    // Post-fit residual check: inconsistent wrapping shows up here.
    for (const auto& o : obs) {
        const double r = wrap_pi(o.phase - (phi[static_cast<std::size_t>(o.i)] -
                                            phi[static_cast<std::size_t>(o.j)]));
        if (std::abs(r) > 1.5707963267948966)
            throw InfeasibleError("calibration phase residual exceeds pi/2 on pair (" +
                                  std::to_string(o.i + 1) + "," + std::to_string(o.j + 1) + ")");
    }

    std::vector<cd> weights(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const cd g = std::polar(std::exp(log_amp[static_cast<std::size_t>(i)]),
                                phi[static_cast<std::size_t>(i)]);
        weights[static_cast<std::size_t>(i)] = cd(1.0, 0.0) / g;
    }
    return weights;
}

VisibilityEstimate apply_weights(const VisibilityEstimate& measured, const std::vector<cd>& weights) {
    if (static_cast<int>(weights.size()) != measured.n_receivers)
        throw ValidationError("weight count does not match the receiver count");
    VisibilityEstimate out = measured;
    std::size_t idx = 0;
    for (int i = 0; i < measured.n_receivers; ++i)
        for (int j = i; j < measured.n_receivers; ++j, ++idx)
            out.upper[idx] = weights[static_cast<std::size_t>(i)] * measured.upper[idx] *
                             std::conj(weights[static_cast<std::size_t>(j)]);
    return out;
}

imaging::VisibilityGrid grid_estimate(const VisibilityEstimate& est,
                                      const geometry::ArrayLayout& layout,
                                      const geometry::PositionGrid& grid,
                                      double wavelength_mm, double cell_size,
                                      std::size_t raster) {
    geometry::validate_layout(layout, grid);
    if (est.n_receivers != layout.n())
        throw ValidationError("visibility estimate does not match the layout size");

    imaging::VisibilityGrid out;
    out.cells = Raster<cd>(raster, raster);
    out.mask = Raster<double>(raster, raster, 0.0);
    out.cell_size = cell_size;
    const long half = static_cast<long>(raster / 2);

    const int n = est.n_receivers;
    for (int i = 0; i < n; ++i) {
        const auto& pi = grid.slot(layout.indices[static_cast<std::size_t>(i)]);
        for (int j = i; j < n; ++j) {
            const auto& pj = grid.slot(layout.indices[static_cast<std::size_t>(j)]);
            const long uc = geometry::quantize_cell((pi.x_mm - pj.x_mm) / wavelength_mm, cell_size);
            const long vc = geometry::quantize_cell((pi.y_mm - pj.y_mm) / wavelength_mm, cell_size);
            if (std::labs(uc) > half - 1 || std::labs(vc) > half - 1)
                throw ValidationError("raster " + std::to_string(raster) +
                                      " cannot hold the sampled baselines");
            const cd v = est.pair(i, j);
            out.cells(static_cast<std::size_t>(vc + half), static_cast<std::size_t>(uc + half)) += v;
            out.mask(static_cast<std::size_t>(vc + half), static_cast<std::size_t>(uc + half)) += 1.0;
            if (i != j) { // conjugate sample on the reverse baseline
                out.cells(static_cast<std::size_t>(-vc + half), static_cast<std::size_t>(-uc + half)) +=
                    std::conj(v);
                out.mask(static_cast<std::size_t>(-vc + half), static_cast<std::size_t>(-uc + half)) += 1.0;
            }
        }
    }

    for (std::size_t r = 0; r < raster; ++r)
        for (std::size_t c = 0; c < raster; ++c)
            if (out.mask(r, c) > 0.0) out.cells(r, c) /= out.mask(r, c);

    // Total-power normalization: the overall gain scale is unobservable from
    // cross-correlations, so reconstruction amplitudes are referenced to DC.
    const cd dc = out.cells(raster / 2, raster / 2);
    if (out.mask(raster / 2, raster / 2) > 0.0 && std::abs(dc) > 0.0)
        for (auto& v : out.cells.data()) v /= std::abs(dc);
    return out;
}

void save_visibility_csv(const VisibilityEstimate& est, const std::string& path) {
    std::ostringstream os;
    os << "i,j,re,im\n";
    for (int i = 0; i < est.n_receivers; ++i)
        for (int j = i; j < est.n_receivers; ++j) {
            const cd v = est.pair(i, j);
            os << (i + 1) << "," << (j + 1) << "," << io::format_double(v.real()) << ","
               << io::format_double(v.imag()) << "\n";
        }
    io::atomic_write_text(path, os.str());
}

} // namespace aim::signalsim
