#include "pat/phantom.hpp"

#include "pat/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <string>

namespace pat {

namespace {

// Skips whitespace and '#' comments in a PGM header.
class HeaderScanner {
public:
    explicit HeaderScanner(const std::string& bytes) : bytes_(bytes) {}

    std::size_t number(const char* what) {
        skip();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_++] - '0');
            if (++digits > 9) throw InputError(std::string("read_pgm: ") + what + " too large");
        }
        if (digits == 0) throw InputError(std::string("read_pgm: expected ") + what);
        return value;
    }
    std::string token() {
        skip();
        std::string t;
        while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) t += bytes_[pos_++];
        return t;
    }
    /// Position just after the single whitespace byte that ends the header.
    std::size_t data_offset() const { return pos_ + 1; }

private:
    void skip() {
        while (pos_ < bytes_.size()) {
            const char ch = bytes_[pos_];
            if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

double smooth_cutoff(double r, double radius, double width) {
    const double inner = (1.0 - width) * radius;
    if (r <= inner) return 1.0;
    if (r >= radius) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (r - inner) / (radius - inner)));
}

struct Polyline {
    std::vector<Point> points;
    double width;
};

const std::vector<Polyline>& vessel_curves() {
    static const std::vector<Polyline> curves = [] {
        std::vector<Polyline> out;
        auto sample = [](auto fn, double t0, double t1, double width) {
            Polyline line{{}, width};
            for (int i = 0; i <= 200; ++i) line.points.push_back(fn(t0 + (t1 - t0) * i / 200.0));
            return line;
        };
        out.push_back(sample([](double t) { return Point{t, 0.3 * std::sin(2.0 * t) - 0.05}; }, -0.6, 0.6, 0.05));
        out.push_back(sample([](double t) { return Point{0.1 + 0.45 * std::cos(t), -0.1 + 0.45 * std::sin(t)}; },
                             0.6, 2.6, 0.045));
        out.push_back(sample([](double t) { return Point{0.35 * t, 0.1 + 0.4 * t}; }, 0.0, 1.0, 0.04));
        out.push_back(sample([](double t) { return Point{-0.2 - 0.3 * t, -0.2 - 0.25 * t * t}; }, 0.0, 1.0, 0.04));
        return out;
    }();
    return curves;
}

double segment_distance2(const Point& q, const Point& a, const Point& b) {
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    double s = len2 > 0.0 ? ((q.x - a.x) * ex + (q.y - a.y) * ey) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    const double dx = a.x + s * ex - q.x, dy = a.y + s * ey - q.y;
    return dx * dx + dy * dy;
}

// Unit-disk vessel pattern before tapering.
double vessel_value(double x, double y) {
    double value = 0.0;
    const Point q{x, y};
    for (const auto& curve : vessel_curves()) {
        double d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
            d2 = std::min(d2, segment_distance2(q, curve.points[i], curve.points[i + 1]));
        }
        value += std::exp(-0.5 * d2 / (curve.width * curve.width));
    }
    const double bx = x + 0.4, by = y + 0.35;
    value += 0.8 * std::exp(-0.5 * (bx * bx + by * by) / (0.08 * 0.08));
    return value;
}

}  // namespace

Raster read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("read_pgm: cannot open " + path.string());
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    HeaderScanner scan(bytes);
    const std::string magic = scan.token();
    if (magic != "P5" && magic != "P2") throw InputError("read_pgm: " + path.string() + " is not a P2/P5 PGM");
    Raster r;
    r.width = scan.number("width");
    r.height = scan.number("height");
    const std::size_t maxval = scan.number("maxval");
    if (maxval == 0 || maxval > 65535) throw InputError("read_pgm: maxval must be in 1..65535");
    if (r.width < 8 || r.height < 8) {
        throw InputError("read_pgm: raster " + std::to_string(r.width) + "x" + std::to_string(r.height) +
                         " is smaller than 8x8");
    }
    const std::size_t count = r.width * r.height;
    r.values.resize(count);
    const double scale = 1.0 / static_cast<double>(maxval);
    if (magic == "P5") {
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        const std::size_t offset = scan.data_offset();
        if (bytes.size() < offset + count * bytes_per) throw InputError("read_pgm: truncated pixel data");
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t v = bytes_per == 2 ? (std::size_t{p[2 * i]} << 8) | p[2 * i + 1] : p[i];
            r.values[i] = std::min(1.0, static_cast<double>(v) * scale);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            r.values[i] = std::min(1.0, static_cast<double>(scan.number("pixel value")) * scale);
        }
    }
    return r;
}

void write_pgm(const Raster& raster, const std::filesystem::path& path) {
    std::string out = "P5\n" + std::to_string(raster.width) + " " + std::to_string(raster.height) + "\n65535\n";
    for (double v : raster.values) {
        const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
        out.push_back(static_cast<char>(q >> 8));
        out.push_back(static_cast<char>(q & 0xffu));
    }
    write_file_atomic(path, out);
}

NodalField sample_raster(const Mesh& mesh, const Raster& raster) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& p : mesh.nodes()) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double wm1 = static_cast<double>(raster.width - 1);
    const double hm1 = static_cast<double>(raster.height - 1);
    NodalField field = NodalField::zeros(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const Point& p = mesh.nodes()[i];
        const double u = std::clamp((p.x - xmin) / (xmax - xmin), 0.0, 1.0) * wm1;
        const double v = std::clamp((ymax - p.y) / (ymax - ymin), 0.0, 1.0) * hm1;
        const auto c0 = std::min(static_cast<std::size_t>(u), raster.width - 2);
        const auto r0 = std::min(static_cast<std::size_t>(v), raster.height - 2);
        const double fu = u - static_cast<double>(c0), fv = v - static_cast<double>(r0);
        field.values[static_cast<Eigen::Index>(i)] =
            (1 - fu) * (1 - fv) * raster.at(c0, r0) + fu * (1 - fv) * raster.at(c0 + 1, r0) +
            (1 - fu) * fv * raster.at(c0, r0 + 1) + fu * fv * raster.at(c0 + 1, r0 + 1);
    }
    return field;
}

NodalField apply_boundary_cutoff(const Mesh& mesh, const NodalField& field, double width) {
    if (field.size() != mesh.num_nodes()) throw DimensionError("apply_boundary_cutoff: size mismatch");
    if (!(width > 0.0 && width <= 1.0)) throw InputError("apply_boundary_cutoff: width must lie in (0, 1]");
    Point center{0.0, 0.0};
    for (auto b : mesh.boundary_loop()) {
        center.x += mesh.nodes()[b].x;
        center.y += mesh.nodes()[b].y;
    }
    const auto nb = static_cast<double>(mesh.num_boundary_nodes());
    center.x /= nb;
    center.y /= nb;
    double radius = std::numeric_limits<double>::infinity();
    for (auto b : mesh.boundary_loop()) {
        radius = std::min(radius, std::hypot(mesh.nodes()[b].x - center.x, mesh.nodes()[b].y - center.y));
    }
    NodalField out = field;
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const double r = std::hypot(mesh.nodes()[i].x - center.x, mesh.nodes()[i].y - center.y);
        out.values[static_cast<Eigen::Index>(i)] *= mesh.is_boundary(i) ? 0.0 : smooth_cutoff(r, radius, width);
    }
    return out;
}

NodalField phantom_from_raster(const Mesh& mesh, const Raster& raster) {
    const NodalField raw = sample_raster(mesh, raster);
    if (raw.values.cwiseAbs().maxCoeff() == 0.0) return raw;
    NodalField f = apply_boundary_cutoff(mesh, raw);
    if (f.values.norm() < 1e-12) {
        throw InputError("phantom: the boundary cutoff removes all of the image content");
    }
    return f;
}

NodalField gaussian_bumps(const Mesh& mesh, const std::vector<GaussianBump>& bumps) {
    NodalField f = NodalField::zeros(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const Point& p = mesh.nodes()[i];
        double v = 0.0;
        for (const auto& b : bumps) {
            const double dx = p.x - b.x, dy = p.y - b.y;
            v += b.amplitude * std::exp(-0.5 * (dx * dx + dy * dy) / (b.sigma * b.sigma));
        }
        f.values[static_cast<Eigen::Index>(i)] = v;
    }
    return apply_boundary_cutoff(mesh, f);
}

NodalField vessel_phantom(const Mesh& mesh, double radius) {
    NodalField f = NodalField::zeros(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const Point& p = mesh.nodes()[i];
        f.values[static_cast<Eigen::Index>(i)] = vessel_value(p.x / radius, p.y / radius);
    }
    return apply_boundary_cutoff(mesh, f);
}

NodalField synthetic_phantom(const Mesh& mesh, std::string_view name) {
    if (name == "vessels") return vessel_phantom(mesh);
    if (name == "bumps") {
        return gaussian_bumps(mesh, {{0.3, 0.2, 0.12, 1.0}, {-0.35, 0.25, 0.09, 0.7}, {0.05, -0.4, 0.15, 0.8}});
    }
    throw InputError("unknown synthetic phantom '" + std::string(name) + "' (expected bumps or vessels)");
}

Raster vessel_raster(std::size_t width, std::size_t height) {
    Raster r;
    r.width = width;
    r.height = height;
    r.values.resize(width * height);
    for (std::size_t row = 0; row < height; ++row) {
        for (std::size_t col = 0; col < width; ++col) {
            const double x = -1.0 + 2.0 * static_cast<double>(col) / static_cast<double>(width - 1);
            const double y = 1.0 - 2.0 * static_cast<double>(row) / static_cast<double>(height - 1);
            r.values[row * width + col] = std::min(1.0, vessel_value(x, y));
        }
    }
    return r;
}

}  // namespace pat
