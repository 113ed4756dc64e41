#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace pat {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Triangle = std::array<std::size_t, 3>;

/**
 * 2D triangulation of a disk-like domain with a single closed boundary curve.
 *
 * Triangles are counterclockwise (positive signed area) and the boundary loop
 * is traversed counterclockwise, so the outward normal lies to the right of
 * the direction of travel. Immutable after construction.
 */
class Mesh {
public:
    /// Validates topology and derives boundary edge lengths and curvature.
    /// Throws TopologyError on any invariant violation.
    Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
         std::vector<std::size_t> boundary_loop);

    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const std::vector<std::size_t>& boundary_loop() const noexcept { return boundary_loop_; }

    /// Length of the edge from boundary_loop[i] to boundary_loop[i+1] (cyclic).
    const std::vector<double>& boundary_edge_lengths() const noexcept { return edge_lengths_; }
    /// Curvature at boundary_loop[i]; positive on convex parts.
    const std::vector<double>& boundary_curvature() const noexcept { return curvature_; }

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_triangles() const noexcept { return triangles_.size(); }
    std::size_t num_boundary_nodes() const noexcept { return boundary_loop_.size(); }
    std::size_t num_edges() const noexcept { return num_edges_; }

    /// Position of each node in the boundary loop, or npos for interior nodes.
    std::size_t boundary_index(std::size_t node) const noexcept { return boundary_slot_[node]; }
    bool is_boundary(std::size_t node) const noexcept { return boundary_slot_[node] != npos; }

    double perimeter() const noexcept;
    double min_edge_length() const noexcept { return min_edge_; }
    double max_edge_length() const noexcept { return max_edge_; }
    double signed_area(std::size_t triangle) const noexcept;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<Point> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<std::size_t> boundary_loop_;
    std::vector<std::size_t> boundary_slot_;
    std::vector<double> edge_lengths_;
    std::vector<double> curvature_;
    std::size_t num_edges_ = 0;
    double min_edge_ = 0.0;
    double max_edge_ = 0.0;
};

/// Concentric-ring triangulation of the disk of the given radius centered at
/// the origin. Ring k carries 6k nodes; the outermost ring lies on the circle.
Mesh generate_disk_mesh(double radius, double h);

/// Signed curvature of the closed polygon through the given points using the
/// circumscribed circle of each consecutive triple. Collinear triples give 0.
std::vector<double> boundary_curvature(const std::vector<Point>& loop);
std::vector<double> boundary_curvature(const Mesh& mesh);

void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);

}  // namespace pat
