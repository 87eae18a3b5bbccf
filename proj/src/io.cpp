#include "aim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "aim/error.hpp"

namespace aim::io {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

void rename_into_place(const std::string& tmp, const std::string& path) {
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ValidationError("cannot move temporary file into '" + path + "': " + ec.message());
    }
}

std::string temp_name(const std::string& path) { return path + ".tmp"; }

} // namespace

void atomic_write_bytes(const std::string& path, const std::string& bytes) {
    const std::string tmp = temp_name(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write '" + tmp + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw ValidationError("short write to '" + tmp + "'");
    }
    rename_into_place(tmp, path);
}

void atomic_write_text(const std::string& path, const std::string& content) {
    atomic_write_bytes(path, content);
}

void write_pgm16(const std::string& path, const Raster<double>& image) {
    double peak = 0.0;
    for (double v : image.data()) peak = std::max(peak, v);
    const double scale = peak > 0.0 ? 65535.0 / peak : 0.0;

    std::string bytes;
    bytes.reserve(32 + image.size() * 2);
    bytes += "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n65535\n";
    for (std::size_t r = 0; r < image.rows(); ++r)
        for (std::size_t c = 0; c < image.cols(); ++c) {
            const double v = image(r, c);
            const auto q = static_cast<unsigned>(std::lround(std::clamp(v * scale, 0.0, 65535.0)));
            bytes.push_back(static_cast<char>((q >> 8) & 0xff));
            bytes.push_back(static_cast<char>(q & 0xff));
        }
    atomic_write_bytes(path, bytes);
}

void write_csv_raster(const std::string& path, const Raster<double>& image) {
    std::string out;
    for (std::size_t r = 0; r < image.rows(); ++r) {
        for (std::size_t c = 0; c < image.cols(); ++c) {
            if (c) out += ",";
            out += format_double(image(r, c));
        }
        out += "\n";
    }
    atomic_write_text(path, out);
}

void write_image_sidecar(const std::string& path, double cell_size, std::size_t raster,
                         double wavelength_mm) {
    nlohmann::json j;
    j["cell_size"] = cell_size;
    j["raster"] = raster;
    j["wavelength_mm"] = wavelength_mm;
    atomic_write_text(path, j.dump(2) + "\n");
}

void write_sll_csv(const std::string& path, const metrics::SllProfile& profile) {
    std::string out = "angle_deg,level_db\n";
    for (std::size_t k = 0; k < profile.level_db.size(); ++k) {
        out += format_double(static_cast<double>(k) * profile.step_deg);
        out += ",";
        out += format_double(profile.level_db[k]);
        out += "\n";
    }
    atomic_write_text(path, out);
}

} // namespace aim::io
