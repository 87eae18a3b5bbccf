#include "aim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aim/error.hpp"

namespace aim::geometry {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

const Slot& PositionGrid::slot(int id) const {
    if (id < 1 || id > static_cast<int>(slots.size()))
        throw ValidationError("grid '" + name + "' has no slot " + std::to_string(id));
    return slots[static_cast<std::size_t>(id - 1)];
}

double PositionGrid::extent_x_mm() const {
    double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
    for (const auto& s : slots) {
        lo = std::min(lo, s.x_mm);
        hi = std::max(hi, s.x_mm);
    }
    return slots.empty() ? 0.0 : hi - lo;
}

double PositionGrid::extent_y_mm() const {
    double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
    for (const auto& s : slots) {
        lo = std::min(lo, s.y_mm);
        hi = std::max(hi, s.y_mm);
    }
    return slots.empty() ? 0.0 : hi - lo;
}

double PositionGrid::min_pairwise_spacing_mm() const {
    double best = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < slots.size(); ++i)
        for (std::size_t j = i + 1; j < slots.size(); ++j)
            best = std::min(best, std::hypot(slots[i].x_mm - slots[j].x_mm,
                                             slots[i].y_mm - slots[j].y_mm));
    return best;
}

void PositionGrid::validate(const GridLimits& limits) const {
    if (slots.empty()) throw ValidationError("grid '" + name + "' has no slots");

    std::set<int> ids;
    for (const auto& s : slots) {
        if (!ids.insert(s.id).second)
            throw ValidationError("grid '" + name + "': duplicate slot id " + std::to_string(s.id));
    }
    if (*ids.begin() != 1 || *ids.rbegin() != static_cast<int>(slots.size()))
        throw ValidationError("grid '" + name + "': slot ids must be contiguous from 1 (found " +
                              std::to_string(*ids.begin()) + ".." + std::to_string(*ids.rbegin()) +
                              " for " + std::to_string(slots.size()) + " slots)");

    for (std::size_t i = 0; i < slots.size(); ++i)
        for (std::size_t j = i + 1; j < slots.size(); ++j) {
            const double d = std::hypot(slots[i].x_mm - slots[j].x_mm,
                                        slots[i].y_mm - slots[j].y_mm);
            if (d < limits.min_spacing_mm) {
                std::ostringstream os;
                os << "grid '" << name << "': slots " << slots[i].id << " and " << slots[j].id
                   << " are " << d << " mm apart, below the minimum spacing of "
                   << limits.min_spacing_mm << " mm";
                throw ValidationError(os.str());
            }
        }

    if (extent_x_mm() > limits.max_extent_mm || extent_y_mm() > limits.max_extent_mm) {
        std::ostringstream os;
        os << "grid '" << name << "': extent " << extent_x_mm() << " x " << extent_y_mm()
           << " mm exceeds the per-axis maximum of " << limits.max_extent_mm << " mm";
        throw ValidationError(os.str());
    }
}

PositionGrid load_grid(const std::string& path, const GridLimits& limits) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open grid file '" + path + "'");

    PositionGrid grid;
    grid.name = std::filesystem::path(path).stem().string();

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ValidationError("grid '" + grid.name + "': no slots (empty file)");
    ++lineno;
    if (trim(line) != "id,x_mm,y_mm")
        throw ValidationError("grid file '" + path + "' line 1: expected header 'id,x_mm,y_mm'");

    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        std::istringstream ss(t);
        std::string f0, f1, f2;
        if (!std::getline(ss, f0, ',') || !std::getline(ss, f1, ',') || !std::getline(ss, f2)) {
            throw ValidationError("grid file '" + path + "' line " + std::to_string(lineno) +
                                  ": expected 'id,x_mm,y_mm'");
        }
        Slot s;
        try {
            s.id = std::stoi(trim(f0));
            s.x_mm = std::stod(trim(f1));
            s.y_mm = std::stod(trim(f2));
        } catch (const std::exception&) {
            throw ValidationError("grid file '" + path + "' line " + std::to_string(lineno) +
                                  ": malformed number");
        }
        grid.slots.push_back(s);
    }
    if (grid.slots.empty()) throw ValidationError("grid '" + grid.name + "': no slots");

    std::sort(grid.slots.begin(), grid.slots.end(),
              [](const Slot& a, const Slot& b) { return a.id < b.id; });
    grid.validate(limits);
    return grid;
}

ArrayLayout load_layout(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open layout file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("layout file '" + path + "': " + e.what());
    }
    ArrayLayout layout;
    try {
        layout.grid_name = j.at("grid").get<std::string>();
        layout.indices = j.at("indices").get<std::vector<int>>();
        if (j.contains("n")) {
            const int n = j.at("n").get<int>();
            if (n != static_cast<int>(layout.indices.size()))
                throw ValidationError("layout file '" + path + "': 'n' = " + std::to_string(n) +
                                      " but " + std::to_string(layout.indices.size()) +
                                      " indices listed");
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError("layout file '" + path + "': " + e.what());
    }
    std::sort(layout.indices.begin(), layout.indices.end());
    return layout;
}

void save_layout(const ArrayLayout& layout, const std::string& path) {
    nlohmann::json j;
    j["grid"] = layout.grid_name;
    j["indices"] = layout.indices;
    j["n"] = layout.n();
    // Write-then-rename so an interrupted run never leaves a torn file.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write layout file '" + path + "'");
        out << j.dump(2) << "\n";
        if (!out.flush()) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw ValidationError("cannot write layout file '" + path + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ValidationError("cannot replace layout file '" + path + "'");
    }
}

void validate_layout(const ArrayLayout& layout, const PositionGrid& grid,
                     std::optional<int> expected_n) {
    if (layout.indices.empty()) throw ValidationError("layout has no indices");
    if (!layout.grid_name.empty() && layout.grid_name != grid.name)
        throw ValidationError("layout references grid '" + layout.grid_name +
                              "' but grid '" + grid.name + "' was supplied");
    std::set<int> seen;
    for (int id : layout.indices) {
        if (id < 1 || id > static_cast<int>(grid.slots.size()))
            throw ValidationError("layout index " + std::to_string(id) +
                                  " does not exist on grid '" + grid.name + "' (1.." +
                                  std::to_string(grid.slots.size()) + ")");
        if (!seen.insert(id).second)
            throw ValidationError("layout index " + std::to_string(id) + " appears more than once");
    }
    if (expected_n && layout.n() != *expected_n)
        throw ValidationError("layout has " + std::to_string(layout.n()) +
                              " elements, expected " + std::to_string(*expected_n));
}

long SamplingFunction::total_multiplicity() const {
    long t = 0;
    for (const auto& [cell, mult] : cells) t += mult;
    return t;
}

long SamplingFunction::max_abs_cell() const {
    long m = 0;
    for (const auto& [cell, mult] : cells)
        m = std::max({m, std::labs(cell.first), std::labs(cell.second)});
    return m;
}

void SamplingFunction::validate() const {
    const long n = n_elements;
    if (total_multiplicity() != n * n)
        throw ValidationError("sampling function multiplicity does not total N^2");
    const auto dc = cells.find({0, 0});
    if (dc == cells.end() || dc->second < n)
        throw ValidationError("sampling function is missing the N autocorrelation samples at DC");
    for (const auto& [cell, mult] : cells) {
        const auto conj = cells.find({-cell.first, -cell.second});
        if (conj == cells.end() || conj->second != mult)
            throw ValidationError("sampling function support is not Hermitian-symmetric at (" +
                                  std::to_string(cell.first) + "," + std::to_string(cell.second) + ")");
    }
}

SamplingFunction sampling_function(const ArrayLayout& layout, const PositionGrid& grid,
                                   double wavelength_mm, double cell_size) {
    validate_layout(layout, grid);
    if (wavelength_mm <= 0.0) throw ValidationError("wavelength must be positive");
    if (cell_size <= 0.0) throw ValidationError("cell size must be positive");

    SamplingFunction s;
    s.cell_size = cell_size;
    s.wavelength_mm = wavelength_mm;
    s.n_elements = layout.n();

    const int n = layout.n();
    for (int a = 0; a < n; ++a) {
        const Slot& pa = grid.slot(layout.indices[static_cast<std::size_t>(a)]);
        for (int b = 0; b < n; ++b) {
            const Slot& pb = grid.slot(layout.indices[static_cast<std::size_t>(b)]);
            const double u = (pa.x_mm - pb.x_mm) / wavelength_mm;
            const double v = (pa.y_mm - pb.y_mm) / wavelength_mm;
            ++s.cells[{quantize_cell(u, cell_size), quantize_cell(v, cell_size)}];
        }
    }
    return s;
}

double ApertureFigures::worst_resolution_rad() const {
    if (!feasible()) throw InfeasibleError("aperture resolution undefined on a degenerate axis");
    return std::max(x->resolution_rad, y->resolution_rad);
}

double ApertureFigures::worst_fov_halfwidth() const {
    if (!feasible()) throw InfeasibleError("aperture field of view undefined on a degenerate axis");
    return std::min(x->fov_halfwidth, y->fov_halfwidth);
}

ApertureFigures aperture_figures(const ArrayLayout& layout, const PositionGrid& grid,
                                 double wavelength_mm) {
    validate_layout(layout, grid);
    if (layout.n() < 2) throw ValidationError("aperture figures need at least two elements");
    if (wavelength_mm <= 0.0) throw ValidationError("wavelength must be positive");

    // Coordinates land on the grid file's literal decimals, so exact-zero
    // separations mean "same row/column"; anything else counts as spacing.
    constexpr double kZero = 1e-9;

    ApertureFigures fig;
    for (int axis = 0; axis < 2; ++axis) {
        double largest = 0.0;
        double smallest = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < layout.indices.size(); ++i) {
            const Slot& pi = grid.slot(layout.indices[i]);
            for (std::size_t j = i + 1; j < layout.indices.size(); ++j) {
                const Slot& pj = grid.slot(layout.indices[j]);
                const double d = std::abs(axis == 0 ? pi.x_mm - pj.x_mm : pi.y_mm - pj.y_mm);
                largest = std::max(largest, d);
                if (d > kZero) smallest = std::min(smallest, d);
            }
        }
        if (largest > kZero) {
            AxisFigures f;
            f.largest_baseline_mm = largest;
            f.smallest_spacing_mm = smallest;
            f.resolution_rad = 0.88 * wavelength_mm / largest;
            f.fov_halfwidth = wavelength_mm / (2.0 * smallest);
            (axis == 0 ? fig.x : fig.y) = f;
        }
    }
    return fig;
}

double layout_min_spacing_mm(const ArrayLayout& layout, const PositionGrid& grid) {
    validate_layout(layout, grid);
    if (layout.n() < 2) throw ValidationError("pairwise spacing needs at least two elements");
    double best = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < layout.indices.size(); ++i) {
        const Slot& pi = grid.slot(layout.indices[i]);
        for (std::size_t j = i + 1; j < layout.indices.size(); ++j) {
            const Slot& pj = grid.slot(layout.indices[j]);
            best = std::min(best, std::hypot(pi.x_mm - pj.x_mm, pi.y_mm - pj.y_mm));
        }
    }
    return best;
}

} // namespace aim::geometry
