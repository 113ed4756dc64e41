#pragma once

#include "pat/mesh.hpp"
#include "pat/series.hpp"

#include <filesystem>
#include <string_view>
#include <vector>

namespace pat {

/// Grayscale image with samples rescaled to [0, 1]; row 0 is the top.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;  ///< row-major

    double at(std::size_t col, std::size_t row) const { return values[row * width + col]; }
};

/// Reads binary (P5) or ASCII (P2) PGM with 8- or 16-bit samples.
Raster read_pgm(const std::filesystem::path& path);
/// Writes 16-bit binary PGM; values are clamped to [0, 1].
void write_pgm(const Raster& raster, const std::filesystem::path& path);

/// Bilinear samples of the raster at node positions, the raster spanning the
/// mesh bounding box.
NodalField sample_raster(const Mesh& mesh, const Raster& raster);

/// Multiplies by a cosine taper from 1 at (1 - width) R to 0 at R, where R is
/// the distance from the boundary centroid to the nearest boundary node.
/// Boundary nodes end up exactly zero.
NodalField apply_boundary_cutoff(const Mesh& mesh, const NodalField& field, double width = 0.1);

/// Raster -> admissible initial pressure. An all-zero raster gives the zero
/// field; a nonzero raster whose content lies entirely in the taper zone
/// throws InputError.
NodalField phantom_from_raster(const Mesh& mesh, const Raster& raster);

struct GaussianBump {
    double x, y, sigma, amplitude;
};

NodalField gaussian_bumps(const Mesh& mesh, const std::vector<GaussianBump>& bumps);

/// Smooth tubular curves resembling a vessel tree, peak value 1, already
/// tapered to vanish on the boundary of a disk of the given radius.
NodalField vessel_phantom(const Mesh& mesh, double radius = 1.0);

/// "bumps" or "vessels".
NodalField synthetic_phantom(const Mesh& mesh, std::string_view name);

/// Rasterizes the vessel phantom onto a width x height image over [-1, 1]^2.
Raster vessel_raster(std::size_t width, std::size_t height);

}  // namespace pat
