#include "pat/series.hpp"

#include "pat/errors.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

namespace pat {

namespace {

constexpr char kSeriesMagic[8] = {'P', 'A', 'T', 'M', 'E', 'A', 'S', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string_view to_string(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::pressure_trace: return "pressure-trace";
        case SeriesKind::voltage: return "voltage";
        case SeriesKind::adjoint_source: return "adjoint-source";
        case SeriesKind::noise: return "noise";
    }
    return "unknown";
}

MeasurementSeries MeasurementSeries::zeros(SeriesKind kind, std::size_t nt, std::size_t nb, double dt) {
    MeasurementSeries s;
    s.kind = kind;
    s.dt = dt;
    s.values = SeriesMatrix::Zero(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nb));
    return s;
}

TimeGrid TimeGrid::fit(double final_time, double max_dt) {
    if (!(final_time > 0.0) || !(max_dt > 0.0)) throw InputError("TimeGrid: T and dt must be positive");
    const double n = std::ceil(final_time / max_dt - 1e-9);
    TimeGrid grid;
    grid.steps = static_cast<std::size_t>(std::max(1.0, n));
    grid.dt = final_time / static_cast<double>(grid.steps);
    return grid;
}

Eigen::VectorXd trapezoid_weights(std::size_t nt, double dt) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nt), dt);
    if (nt == 1) {
        w[0] = 0.0;
    } else if (nt > 1) {
        w[0] *= 0.5;
        w[static_cast<Eigen::Index>(nt) - 1] *= 0.5;
    }
    return w;
}

double series_inner(const MeasurementSeries& a, const MeasurementSeries& b,
                    const Eigen::VectorXd& boundary_weights) {
    if (a.nt() != b.nt() || a.nb() != b.nb() || static_cast<std::size_t>(boundary_weights.size()) != a.nb()) {
        throw DimensionError("series_inner: shape mismatch");
    }
    const Eigen::VectorXd w = trapezoid_weights(a.nt(), a.dt);
    const Eigen::VectorXd per_level = (a.values.array() * b.values.array()).matrix() * boundary_weights;
    return w.dot(per_level);
}

double series_norm(const MeasurementSeries& a, const Eigen::VectorXd& boundary_weights) {
    return std::sqrt(std::max(0.0, series_inner(a, a, boundary_weights)));
}

void write_series(const MeasurementSeries& series, const std::filesystem::path& path) {
    std::string bytes;
    bytes.reserve(32 + 8 * series.values.size());
    bytes.append(kSeriesMagic, sizeof(kSeriesMagic));
    put_u64(bytes, series.nt());
    put_u64(bytes, series.nb());
    put_u64(bytes, std::bit_cast<std::uint64_t>(series.dt));
    for (Eigen::Index i = 0; i < series.values.size(); ++i) {
        put_u64(bytes, std::bit_cast<std::uint64_t>(series.values.data()[i]));
    }
    write_file_atomic(path, bytes);
}

MeasurementSeries read_series(const std::filesystem::path& path, SeriesKind kind) {
    const std::string bytes = read_all(path);
    if (bytes.size() < 32 || std::memcmp(bytes.data(), kSeriesMagic, sizeof(kSeriesMagic)) != 0) {
        throw InputError("read_series: " + path.string() + " is not a PATMEAS1 file");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint64_t nt = get_u64(p + 8);
    const std::uint64_t nb = get_u64(p + 16);
    const double dt = std::bit_cast<double>(get_u64(p + 24));
    if (nb != 0 && nt > (bytes.size() - 32) / 8 / nb) throw InputError("read_series: truncated file " + path.string());
    if (bytes.size() != 32 + 8 * nt * nb) throw InputError("read_series: size mismatch in " + path.string());
    MeasurementSeries s = MeasurementSeries::zeros(kind, nt, nb, dt);
    for (std::uint64_t i = 0; i < nt * nb; ++i) {
        s.values.data()[i] = std::bit_cast<double>(get_u64(p + 32 + 8 * i));
    }
    return s;
}

void write_series_csv(const MeasurementSeries& series, const std::filesystem::path& path,
                      std::string_view header) {
    std::string out(header);
    out += "t";
    for (std::size_t j = 0; j < series.nb(); ++j) out += ",b" + std::to_string(j);
    out += '\n';
    for (std::size_t n = 0; n < series.nt(); ++n) {
        out += format_double(series.dt * static_cast<double>(n));
        for (std::size_t j = 0; j < series.nb(); ++j) {
            out += ',';
            out += format_double(series.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)));
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

void write_field(const NodalField& field, const std::filesystem::path& path) {
    std::string out = "PATFIELD 1\n" + std::to_string(field.size()) + "\n";
    for (Eigen::Index i = 0; i < field.values.size(); ++i) {
        out += format_double(field.values[i]);
        out += '\n';
    }
    write_file_atomic(path, out);
}

NodalField read_field(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("read_field: cannot open " + path.string());
    std::string magic, version;
    std::size_t n = 0;
    if (!(in >> magic >> version >> n) || magic != "PATFIELD" || version != "1") {
        throw ParseError("expected 'PATFIELD 1' and a node count", 1);
    }
    NodalField field = NodalField::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string tok;
        if (!(in >> tok)) throw ParseError("unexpected end of file", i + 3);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw ParseError("invalid number '" + tok + "'", i + 3);
        }
        field.values[static_cast<Eigen::Index>(i)] = v;
    }
    return field;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw InputError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw InputError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string comment_block(std::string_view text) {
    std::string out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        out += "# ";
        out.append(text.substr(start, end - start));
        out += '\n';
        start = end + 1;
    }
    return out;
}

}  // namespace pat
