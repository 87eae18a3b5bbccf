#include "aim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "aim/error.hpp"

namespace aim::metrics {

namespace {

constexpr double kDbFloor = -400.0; // stands in for log of exact zero

double to_db(double magnitude) {
    if (magnitude <= 0.0) return kDbFloor;
    return std::max(kDbFloor, 20.0 * std::log10(magnitude));
}

// Bilinear sample of |image| at fractional (row, col); callers keep the
// coordinates inside the raster.
double bilinear_abs(const Raster<std::complex<double>>& px, double row, double col) {
    const std::size_t rows = px.rows(), cols = px.cols();
    std::size_t r0 = static_cast<std::size_t>(row);
    std::size_t c0 = static_cast<std::size_t>(col);
    if (r0 >= rows - 1) r0 = rows - 2;
    if (c0 >= cols - 1) c0 = cols - 2;
    const double fr = row - static_cast<double>(r0);
    const double fc = col - static_cast<double>(c0);
    const double v00 = std::abs(px(r0, c0));
    const double v01 = std::abs(px(r0, c0 + 1));
    const double v10 = std::abs(px(r0 + 1, c0));
    const double v11 = std::abs(px(r0 + 1, c0 + 1));
    return v00 * (1 - fr) * (1 - fc) + v01 * (1 - fr) * fc + v10 * fr * (1 - fc) + v11 * fr * fc;
}

// 1D Gaussian window, normalized to sum 1.
std::vector<double> gaussian_window(int n, double sigma) {
    std::vector<double> w(static_cast<std::size_t>(n));
    const double mid = (n - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = (i - mid) / sigma;
        w[static_cast<std::size_t>(i)] = std::exp(-0.5 * d * d);
        sum += w[static_cast<std::size_t>(i)];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Separable valid-region filtering: output is (rows-n+1) x (cols-n+1).
Raster<double> filter_valid(const Raster<double>& img, const std::vector<double>& w) {
    const int n = static_cast<int>(w.size());
    const std::size_t rows = img.rows(), cols = img.cols();
    Raster<double> tmp(rows, cols - static_cast<std::size_t>(n) + 1);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r)
        for (std::size_t c = 0; c + static_cast<std::size_t>(n) <= cols; ++c) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += w[static_cast<std::size_t>(k)] *
                       img(static_cast<std::size_t>(r), c + static_cast<std::size_t>(k));
            tmp(static_cast<std::size_t>(r), c) = acc;
        }
    Raster<double> out(rows - static_cast<std::size_t>(n) + 1, tmp.cols());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(out.rows()); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += w[static_cast<std::size_t>(k)] *
                       tmp(static_cast<std::size_t>(r) + static_cast<std::size_t>(k), c);
            out(static_cast<std::size_t>(r), c) = acc;
        }
    return out;
}

Raster<double> hadamard(const Raster<double>& a, const Raster<double>& b) {
    Raster<double> out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

} // namespace

SampleCounts count_unique(const geometry::SamplingFunction& s) {
    SampleCounts c;
    c.unique_samples = s.unique_cells();
    c.redundant_samples = s.total_multiplicity() - c.unique_samples;
    return c;
}

SllProfile sll_profile(const imaging::ComplexImage& image, double step_deg,
                       std::optional<double> fixed_exclusion_px) {
    const auto& px = image.pixels;
    const std::size_t rows = px.rows(), cols = px.cols();
    if (rows < 4 || cols < 4) throw ValidationError("image too small for a sidelobe profile");
    if (step_deg <= 0.0 || std::abs(360.0 / step_deg - std::round(360.0 / step_deg)) > 1e-9)
        throw ValidationError("angle step must divide 360 degrees");

    const std::size_t cr = rows / 2, cc = cols / 2;
    const double peak = std::abs(px(cr, cc));
    if (peak <= 0.0) throw ValidationError("image peak must sit at the raster center");
    for (const auto& v : px.data())
        if (std::abs(v) > peak * (1.0 + 1e-9))
            throw ValidationError("image peak must sit at the raster center");

    const int n_angles = static_cast<int>(std::round(360.0 / step_deg));
    SllProfile profile;
    profile.step_deg = step_deg;
    profile.level_db.assign(static_cast<std::size_t>(n_angles), kDbFloor);

    constexpr double kStepPx = 0.25;
    const double deg2rad = 3.14159265358979323846 / 180.0;
    const double excl_3db = std::pow(10.0, -3.0 / 20.0);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ai = 0; ai < n_angles; ++ai) {
        const double ang = static_cast<double>(ai) * step_deg * deg2rad;
        const double dc = std::cos(ang); // column step (+alpha)
        const double dr = std::sin(ang); // row step (+beta)

        // radial samples until the ray leaves the raster
        std::vector<double> f;
        for (std::size_t k = 0;; ++k) {
            const double r = static_cast<double>(k) * kStepPx;
            const double row = static_cast<double>(cr) + dr * r;
            const double col = static_cast<double>(cc) + dc * r;
            if (row < 0.0 || col < 0.0 || row > static_cast<double>(rows - 1) ||
                col > static_cast<double>(cols - 1))
                break;
            f.push_back(bilinear_abs(px, row, col) / peak);
        }

        std::size_t excl = f.size(); // first index outside the main lobe
        if (fixed_exclusion_px) {
            excl = static_cast<std::size_t>(std::ceil(*fixed_exclusion_px / kStepPx));
        } else {
            bool found = false;
            for (std::size_t k = 0; k + 1 < f.size(); ++k) {
                if (f[k + 1] > f[k]) { // first radial local minimum
                    excl = k;
                    found = true;
                    break;
                }
            }
            if (!found) {
                for (std::size_t k = 0; k < f.size(); ++k) {
                    if (f[k] <= excl_3db) { // fallback: -3 dB radius
                        excl = k;
                        found = true;
                        break;
                    }
                }
            }
            if (!found) excl = f.size();
        }

        double best = -1.0;
        for (std::size_t k = excl; k < f.size(); ++k) best = std::max(best, f[k]);
        profile.level_db[static_cast<std::size_t>(ai)] = best < 0.0 ? std::nan("") : to_db(best);
    }

    for (double v : profile.level_db)
        if (std::isnan(v)) throw ValidationError("main lobe fills raster");
    return profile;
}

double avg_sll_db(const SllProfile& profile, SllAveraging mode) {
    if (profile.level_db.empty()) throw ValidationError("empty sidelobe profile");
    if (mode == SllAveraging::DbMean) {
        double acc = 0.0;
        for (double v : profile.level_db) acc += v;
        return acc / static_cast<double>(profile.level_db.size());
    }
    double acc = 0.0;
    for (double v : profile.level_db) acc += std::pow(10.0, v / 20.0);
    return to_db(acc / static_cast<double>(profile.level_db.size()));
}

double psl_db(const SllProfile& profile) {
    if (profile.level_db.empty()) throw ValidationError("empty sidelobe profile");
    return *std::max_element(profile.level_db.begin(), profile.level_db.end());
}

double ssim(const Raster<double>& a, const Raster<double>& b,
            std::optional<double> dynamic_range) {
    if (!a.same_shape(b)) throw ValidationError("ssim images must share a raster shape");
    constexpr int kWindow = 11;
    constexpr double kSigma = 1.5;
    if (a.rows() < kWindow || a.cols() < kWindow)
        throw ValidationError("ssim images must be at least 11 pixels on each axis");

    double range;
    if (dynamic_range) {
        range = *dynamic_range;
    } else {
        double ma = 0.0, mb = 0.0;
        for (double v : a.data()) ma = std::max(ma, v);
        for (double v : b.data()) mb = std::max(mb, v);
        range = std::max(ma, mb);
    }
    if (range <= 0.0) return 1.0; // two blank images are identical

    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);

    const auto w = gaussian_window(kWindow, kSigma);
    const auto mu_a = filter_valid(a, w);
    const auto mu_b = filter_valid(b, w);
    const auto raw_aa = filter_valid(hadamard(a, a), w);
    const auto raw_bb = filter_valid(hadamard(b, b), w);
    const auto raw_ab = filter_valid(hadamard(a, b), w);

    const std::size_t n = mu_a.size();
    // Per-row partial sums, combined serially: the result does not depend on
    // the number of threads.
    std::vector<double> row_sum(mu_a.rows(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(mu_a.rows()); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < mu_a.cols(); ++c) {
            const std::size_t rr = static_cast<std::size_t>(r);
            const double ma = mu_a(rr, c), mb = mu_b(rr, c);
            const double va = raw_aa(rr, c) - ma * ma;
            const double vb = raw_bb(rr, c) - mb * mb;
            const double cov = raw_ab(rr, c) - ma * mb;
            const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
            const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            acc += num / den;
        }
        row_sum[static_cast<std::size_t>(r)] = acc;
    }
    double total = 0.0;
    for (double v : row_sum) total += v;
    return total / static_cast<double>(n);
}

double ssim(const imaging::SceneImage& a, const imaging::SceneImage& b,
            std::optional<double> dynamic_range) {
    return ssim(a.pixels, b.pixels, dynamic_range);
}

imaging::SceneImage crop_to_fov(const imaging::SceneImage& img, double fov_alpha, double fov_beta) {
    img.validate();
    if (fov_alpha <= 0.0 || fov_beta <= 0.0)
        throw ValidationError("field-of-view half-extents must be positive");
    const double eps = 1e-12;
    double max_a = 0.0, max_b = 0.0;
    for (double v : img.alpha) max_a = std::max(max_a, std::abs(v));
    for (double v : img.beta) max_b = std::max(max_b, std::abs(v));
    if (fov_alpha > max_a + eps || fov_beta > max_b + eps)
        throw ValidationError("field of view exceeds the image axes");

    std::size_t c0 = img.alpha.size(), c1 = 0, r0 = img.beta.size(), r1 = 0;
    for (std::size_t c = 0; c < img.alpha.size(); ++c)
        if (std::abs(img.alpha[c]) <= fov_alpha + eps) {
            c0 = std::min(c0, c);
            c1 = std::max(c1, c);
        }
    for (std::size_t r = 0; r < img.beta.size(); ++r)
        if (std::abs(img.beta[r]) <= fov_beta + eps) {
            r0 = std::min(r0, r);
            r1 = std::max(r1, r);
        }
    if (c0 > c1 || r0 > r1) throw ValidationError("field of view contains no pixels");

    imaging::SceneImage out;
    out.pixels = Raster<double>(r1 - r0 + 1, c1 - c0 + 1);
    for (std::size_t r = r0; r <= r1; ++r)
        for (std::size_t c = c0; c <= c1; ++c)
            out.pixels(r - r0, c - c0) = img.pixels(r, c);
    out.alpha.assign(img.alpha.begin() + static_cast<std::ptrdiff_t>(c0),
                     img.alpha.begin() + static_cast<std::ptrdiff_t>(c1) + 1);
    out.beta.assign(img.beta.begin() + static_cast<std::ptrdiff_t>(r0),
                    img.beta.begin() + static_cast<std::ptrdiff_t>(r1) + 1);
    return out;
}

imaging::SceneImage display_normalized(const imaging::SceneImage& img) {
    imaging::SceneImage out = img;
    double mn = std::numeric_limits<double>::max();
    double mx = std::numeric_limits<double>::lowest();
    for (double v : out.pixels.data()) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    if (mx > mn)
        for (double& v : out.pixels.data()) v = (v - mn) / (mx - mn);
    return out;
}

double fov_ssim(const imaging::SceneImage& reference, const imaging::SceneImage& reconstruction,
                double fov_alpha, double fov_beta) {
    const auto ref = display_normalized(crop_to_fov(reference, fov_alpha, fov_beta));
    const auto rec = display_normalized(crop_to_fov(reconstruction, fov_alpha, fov_beta));
    return ssim(ref, rec);
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["unique_samples"] = unique_samples;
    j["redundant_samples"] = redundant_samples;
    j["avg_sll_db"] = avg_sll_db ? nlohmann::json(*avg_sll_db) : nlohmann::json(nullptr);
    j["psl_db"] = psl_db ? nlohmann::json(*psl_db) : nlohmann::json(nullptr);
    j["ssim"] = ssim ? nlohmann::json(*ssim) : nlohmann::json(nullptr);
    return j.dump(2);
}

} // namespace aim::metrics
