#pragma once

#include <string>

#include "aim/imaging.hpp"
#include "aim/metrics.hpp"
#include "aim/raster.hpp"

// File export helpers. Every writer goes through a write-to-temp-then-rename
// step so a crash never leaves a half-written artifact behind, and all
// numeric formatting is fixed ("%.12g") so identical inputs produce
// byte-identical files.
namespace aim::io {

std::string format_double(double v);

void atomic_write_text(const std::string& path, const std::string& content);
void atomic_write_bytes(const std::string& path, const std::string& bytes);

// 16-bit binary PGM (P5, maxval 65535, big-endian samples). Pixel values are
// scaled linearly so the image maximum maps to 65535 (an all-zero image
// stays zero).
void write_pgm16(const std::string& path, const Raster<double>& image);

// Raster values as CSV, one row per line.
void write_csv_raster(const std::string& path, const Raster<double>& image);

// Companion metadata for exported images.
void write_image_sidecar(const std::string& path, double cell_size, std::size_t raster,
                         double wavelength_mm);

// `angle_deg,level_db` rows.
void write_sll_csv(const std::string& path, const metrics::SllProfile& profile);

} // namespace aim::io
