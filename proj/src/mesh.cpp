#include "pat/mesh.hpp"

#include "pat/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

namespace pat {

namespace {

double distance(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::uint64_t edge_key(std::size_t a, std::size_t b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

}  // namespace

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
           std::vector<std::size_t> boundary_loop)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      boundary_loop_(std::move(boundary_loop)) {
    const std::size_t n = nodes_.size();
    if (n < 3 || triangles_.empty()) throw TopologyError("mesh: needs at least one triangle");
    if (n >= (std::size_t{1} << 32)) throw ResourceError("mesh: node count exceeds 2^32");

    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        for (auto v : triangles_[t]) {
            if (v >= n) {
                throw TopologyError("mesh: triangle " + std::to_string(t) + " references node " +
                                    std::to_string(v) + " >= " + std::to_string(n));
            }
        }
        if (signed_area(t) <= 0.0) {
            throw TopologyError("mesh: triangle " + std::to_string(t) +
                                " has non-positive signed area (clockwise or degenerate)");
        }
    }

    // Count undirected edges; remember the directed boundary edge a->b for
    // edges that belong to a single triangle.
    std::unordered_map<std::uint64_t, std::pair<int, std::pair<std::size_t, std::size_t>>> edges;
    edges.reserve(3 * triangles_.size());
    for (const auto& tri : triangles_) {
        for (int e = 0; e < 3; ++e) {
            const std::size_t a = tri[e];
            const std::size_t b = tri[(e + 1) % 3];
            auto& entry = edges[edge_key(a, b)];
            ++entry.first;
            entry.second = {a, b};
        }
    }
    num_edges_ = edges.size();

    std::unordered_map<std::size_t, std::size_t> next;
    min_edge_ = std::numeric_limits<double>::infinity();
    max_edge_ = 0.0;
    for (const auto& [key, entry] : edges) {
        if (entry.first > 2) throw TopologyError("mesh: non-manifold edge shared by more than two triangles");
        const auto [a, b] = entry.second;
        const double len = distance(nodes_[a], nodes_[b]);
        min_edge_ = std::min(min_edge_, len);
        max_edge_ = std::max(max_edge_, len);
        if (entry.first == 1) {
            if (!next.emplace(a, b).second) {
                throw TopologyError("mesh: boundary is pinched at node " + std::to_string(a));
            }
        }
    }

    // Count boundary cycles.
    std::size_t loops = 0;
    {
        std::unordered_map<std::size_t, bool> seen;
        for (const auto& [start, unused] : next) {
            if (seen[start]) continue;
            ++loops;
            std::size_t v = start;
            while (!seen[v]) {
                seen[v] = true;
                auto it = next.find(v);
                if (it == next.end()) throw TopologyError("mesh: open boundary chain");
                v = it->second;
            }
        }
    }
    if (loops != 1) {
        throw TopologyError("mesh: expected a single boundary loop, found " + std::to_string(loops));
    }
    if (boundary_loop_.size() != next.size()) {
        throw TopologyError("mesh: boundary loop lists " + std::to_string(boundary_loop_.size()) +
                            " nodes but the triangulation has " + std::to_string(next.size()) +
                            " boundary edges");
    }
    const std::size_t nb = boundary_loop_.size();
    for (std::size_t i = 0; i < nb; ++i) {
        const std::size_t a = boundary_loop_[i];
        const std::size_t b = boundary_loop_[(i + 1) % nb];
        auto it = next.find(a);
        if (a >= n || it == next.end() || it->second != b) {
            throw TopologyError("mesh: boundary loop entry " + std::to_string(i) +
                                " is not a counterclockwise boundary edge");
        }
    }

    const long long euler = static_cast<long long>(n) - static_cast<long long>(num_edges_) +
                            static_cast<long long>(triangles_.size());
    if (euler != 1) {
        throw TopologyError("mesh: Euler characteristic N - E + T = " + std::to_string(euler) +
                            ", expected 1 for a disk");
    }

    boundary_slot_.assign(n, npos);
    edge_lengths_.resize(nb);
    std::vector<Point> loop_points(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        boundary_slot_[boundary_loop_[i]] = i;
        loop_points[i] = nodes_[boundary_loop_[i]];
        edge_lengths_[i] = distance(nodes_[boundary_loop_[i]], nodes_[boundary_loop_[(i + 1) % nb]]);
    }
    curvature_ = pat::boundary_curvature(loop_points);
}

double Mesh::perimeter() const noexcept {
    double sum = 0.0;
    for (double l : edge_lengths_) sum += l;
    return sum;
}

double Mesh::signed_area(std::size_t triangle) const noexcept {
    const auto& t = triangles_[triangle];
    return 0.5 * cross(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]);
}

std::vector<double> boundary_curvature(const std::vector<Point>& loop) {
    const std::size_t nb = loop.size();
    std::vector<double> kappa(nb, 0.0);
    if (nb < 3) return kappa;
    for (std::size_t i = 0; i < nb; ++i) {
        const Point& prev = loop[(i + nb - 1) % nb];
        const Point& cur = loop[i];
        const Point& next = loop[(i + 1) % nb];
        const double twice_area = cross(prev, cur, next);
        const double denom = distance(prev, cur) * distance(cur, next) * distance(prev, next);
        if (twice_area == 0.0 || denom == 0.0) continue;
        // 1/R of the circumscribed circle is 4*area/(abc).
        kappa[i] = 2.0 * twice_area / denom;
    }
    return kappa;
}

std::vector<double> boundary_curvature(const Mesh& mesh) { return mesh.boundary_curvature(); }

Mesh generate_disk_mesh(double radius, double h) {
    if (!(radius > 0.0)) throw InputError("generate_disk_mesh: radius must be positive");
    if (!(h > 0.0) || !(h < radius)) throw InputError("generate_disk_mesh: need 0 < h < radius");

    const double rings_real = std::ceil(radius / h - 1e-9);
    if (rings_real > 4000.0) {
        throw ResourceError("generate_disk_mesh: h = " + std::to_string(h) +
                            " would need more than 4.8e7 nodes");
    }
    const auto rings = static_cast<std::size_t>(rings_real);
    const std::size_t num_nodes = 1 + 3 * rings * (rings + 1);

    auto ring_start = [](std::size_t k) { return k == 0 ? std::size_t{0} : 1 + 3 * k * (k - 1); };
    auto ring_size = [](std::size_t k) { return k == 0 ? std::size_t{1} : 6 * k; };

    std::vector<Point> nodes;
    nodes.reserve(num_nodes);
    nodes.push_back({0.0, 0.0});
    for (std::size_t k = 1; k <= rings; ++k) {
        const double r = (k == rings) ? radius : radius * static_cast<double>(k) / static_cast<double>(rings);
        const std::size_t m = ring_size(k);
        for (std::size_t j = 0; j < m; ++j) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
            nodes.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
    }

    std::vector<Triangle> triangles;
    triangles.reserve(6 * rings * rings);
    for (std::size_t j = 0; j < 6; ++j) {
        triangles.push_back({0, 1 + j, 1 + (j + 1) % 6});
    }
    // Zip consecutive rings together in order of increasing angle.
    for (std::size_t k = 2; k <= rings; ++k) {
        const std::size_t in0 = ring_start(k - 1), min = ring_size(k - 1);
        const std::size_t out0 = ring_start(k), mout = ring_size(k);
        std::size_t i = 0, j = 0;
        while (i < min || j < mout) {
            const bool advance_inner =
                j == mout || (i < min && (i + 1) * mout <= (j + 1) * min);
            if (advance_inner) {
                triangles.push_back({in0 + i % min, out0 + j % mout, in0 + (i + 1) % min});
                ++i;
            } else {
                triangles.push_back({in0 + i % min, out0 + j % mout, out0 + (j + 1) % mout});
                ++j;
            }
        }
    }

    std::vector<std::size_t> loop(ring_size(rings));
    for (std::size_t j = 0; j < loop.size(); ++j) loop[j] = ring_start(rings) + j;
    return Mesh(std::move(nodes), std::move(triangles), std::move(loop));
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("save_mesh: cannot open " + path.string());
    out << "PATMESH 1\n"
        << mesh.num_nodes() << ' ' << mesh.num_triangles() << ' ' << mesh.num_boundary_nodes() << '\n';
    char buf[64];
    for (const auto& p : mesh.nodes()) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x, p.y);
        out << buf;
    }
    for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (auto b : mesh.boundary_loop()) out << b << '\n';
    if (!out) throw InputError("save_mesh: write failed for " + path.string());
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-empty line split into whitespace-separated tokens.
    std::vector<std::string> next(const char* what) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            std::istringstream ss(line);
            std::vector<std::string> tokens;
            for (std::string tok; ss >> tok;) tokens.push_back(tok);
            if (!tokens.empty()) return tokens;
        }
        throw ParseError(std::string("unexpected end of file, expected ") + what, line_no_ + 1);
    }

    std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

template <class T>
T parse_number(const std::string& tok, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("invalid number '" + tok + "'", line);
    }
    return value;
}

void expect_count(const std::vector<std::string>& tokens, std::size_t n, std::size_t line) {
    if (tokens.size() != n) {
        throw ParseError("expected " + std::to_string(n) + " fields, got " + std::to_string(tokens.size()), line);
    }
}

}  // namespace

Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("load_mesh: cannot open " + path.string());
    LineReader reader(in);

    auto header = reader.next("header");
    if (header.size() != 2 || header[0] != "PATMESH" || header[1] != "1") {
        throw ParseError("expected header 'PATMESH 1'", reader.line());
    }
    auto counts = reader.next("counts");
    expect_count(counts, 3, reader.line());
    const auto n = parse_number<std::size_t>(counts[0], reader.line());
    const auto t = parse_number<std::size_t>(counts[1], reader.line());
    const auto b = parse_number<std::size_t>(counts[2], reader.line());

    std::vector<Point> nodes(n);
    for (auto& p : nodes) {
        auto tok = reader.next("node coordinates");
        expect_count(tok, 2, reader.line());
        p = {parse_number<double>(tok[0], reader.line()), parse_number<double>(tok[1], reader.line())};
    }
    std::vector<Triangle> triangles(t);
    for (auto& tri : triangles) {
        auto tok = reader.next("triangle");
        expect_count(tok, 3, reader.line());
        for (int k = 0; k < 3; ++k) {
            tri[k] = parse_number<std::size_t>(tok[k], reader.line());
            if (tri[k] >= n) {
                throw ParseError("triangle references node " + tok[k] + " but N = " + std::to_string(n),
                                 reader.line());
            }
        }
    }
    std::vector<std::size_t> loop(b);
    for (auto& v : loop) {
        auto tok = reader.next("boundary index");
        expect_count(tok, 1, reader.line());
        v = parse_number<std::size_t>(tok[0], reader.line());
        if (v >= n) {
            throw ParseError("boundary index " + tok[0] + " out of range", reader.line());
        }
    }
    return Mesh(std::move(nodes), std::move(triangles), std::move(loop));
}

}  // namespace pat
