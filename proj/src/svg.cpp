#include "spinobs/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace spinobs {

namespace {

constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 84.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 52.0;

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

// Five-stop viridis ramp.
const double kViridis[5][3] = {{0x44 / 255.0, 0x01 / 255.0, 0x54 / 255.0},
                               {0x3a / 255.0, 0x52 / 255.0, 0x8b / 255.0},
                               {0x21 / 255.0, 0x91 / 255.0, 0x8c / 255.0},
                               {0x5e / 255.0, 0xc9 / 255.0, 0x62 / 255.0},
                               {0xfd / 255.0, 0xe7 / 255.0, 0x25 / 255.0}};

std::string colormap(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * 4.0;
    const int k = std::min(3, static_cast<int>(pos));
    const double f = pos - k;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(255 * (kViridis[k][0] * (1 - f) + kViridis[k + 1][0] * f))),
                  static_cast<int>(std::lround(255 * (kViridis[k][1] * (1 - f) + kViridis[k + 1][1] * f))),
                  static_cast<int>(std::lround(255 * (kViridis[k][2] * (1 - f) + kViridis[k + 1][2] * f))));
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// A linear or log10 axis mapping data values onto a pixel interval.
struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;
    double px_lo = 0.0, px_hi = 1.0;  // px_hi < px_lo for the y axis

    double map(double v) const {
        const double a = log ? std::log10(lo) : lo;
        const double b = log ? std::log10(hi) : hi;
        const double t = log ? std::log10(v) : v;
        return px_lo + (t - a) / (b - a) * (px_hi - px_lo);
    }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            const int d0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
            const int d1 = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
            for (int d = d0; d <= d1; ++d) out.push_back(std::pow(10.0, d));
            if (out.size() < 2) {  // less than a decade: fall back to linear ticks
                out.clear();
                for (int i = 0; i <= 4; ++i) out.push_back(lo * std::pow(hi / lo, i / 4.0));
            }
            return out;
        }
        const double span = hi - lo;
        const double raw = span / 4.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (raw <= m * mag * (1 + 1e-12)) {
                step = m * mag;
                break;
            }
        const double first = std::ceil(lo / step - 1e-9) * step;
        for (double v = first; v <= hi + 1e-9 * span; v += step) out.push_back(v);
        return out;
    }
};

void check_log_column(const Eigen::MatrixXd& values, long col, bool log, const char* axis_name) {
    if (!log) return;
    for (long r = 0; r < values.rows(); ++r)
        if (values(r, col) <= 0.0) {
            std::ostringstream msg;
            msg << "log-scale " << axis_name << " axis requires positive values; row " << r
                << " has " << values(r, col);
            throw std::invalid_argument(msg.str());
        }
}

Axis make_axis(double lo, double hi, bool log, double px_lo, double px_hi) {
    if (lo == hi) {  // degenerate span: pad so the point sits mid-axis
        if (log) {
            lo /= 2.0;
            hi *= 2.0;
        } else {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    return Axis{lo, hi, log, px_lo, px_hi};
}

void draw_frame(std::ostringstream& svg, const Axis& x, const Axis& y, const PlotOptions& opt) {
    const double x0 = x.px_lo, x1 = x.px_hi, y0 = y.px_lo, y1 = y.px_hi;
    svg << "<rect x='" << x0 << "' y='" << y1 << "' width='" << x1 - x0 << "' height='"
        << y0 - y1 << "' fill='none' stroke='#333'/>\n";
    for (double t : x.ticks()) {
        const double px = x.map(t);
        svg << "<line x1='" << px << "' y1='" << y0 << "' x2='" << px << "' y2='" << y0 + 5
            << "' stroke='#333'/>\n";
        svg << "<text x='" << px << "' y='" << y0 + 18
            << "' font-size='11' text-anchor='middle'>" << fmt(t) << "</text>\n";
    }
    for (double t : y.ticks()) {
        const double py = y.map(t);
        svg << "<line x1='" << x0 - 5 << "' y1='" << py << "' x2='" << x0 << "' y2='" << py
            << "' stroke='#333'/>\n";
        svg << "<text x='" << x0 - 8 << "' y='" << py + 4
            << "' font-size='11' text-anchor='end'>" << fmt(t) << "</text>\n";
    }
    if (!opt.title.empty())
        svg << "<text x='" << (x0 + x1) / 2 << "' y='" << kMarginTop - 12
            << "' font-size='14' text-anchor='middle'>" << xml_escape(opt.title) << "</text>\n";
    if (!opt.x_label.empty())
        svg << "<text x='" << (x0 + x1) / 2 << "' y='" << y0 + 38
            << "' font-size='12' text-anchor='middle'>" << xml_escape(opt.x_label) << "</text>\n";
    if (!opt.y_label.empty())
        svg << "<text x='" << x0 - 52 << "' y='" << (y0 + y1) / 2
            << "' font-size='12' text-anchor='middle' transform='rotate(-90 " << x0 - 52 << " "
            << (y0 + y1) / 2 << ")'>" << xml_escape(opt.y_label) << "</text>\n";
}

void draw_colorbar(std::ostringstream& svg, double lo, double hi, double px, double py_top,
                   double py_bot) {
    const int steps = 24;
    for (int i = 0; i < steps; ++i) {
        const double t0 = static_cast<double>(i) / steps;
        const double y_hi = py_bot + (py_top - py_bot) * (static_cast<double>(i + 1) / steps);
        const double h = (py_bot - py_top) / steps;
        svg << "<rect x='" << px << "' y='" << y_hi << "' width='14' height='" << h + 0.5
            << "' fill='" << colormap(t0 + 0.5 / steps) << "'/>\n";
    }
    svg << "<rect x='" << px << "' y='" << py_top << "' width='14' height='" << py_bot - py_top
        << "' fill='none' stroke='#333'/>\n";
    svg << "<text x='" << px + 18 << "' y='" << py_bot + 4 << "' font-size='10'>" << fmt(lo)
        << "</text>\n";
    svg << "<text x='" << px + 18 << "' y='" << py_top + 4 << "' font-size='10'>" << fmt(hi)
        << "</text>\n";
}

}  // namespace

std::string render_svg(const PlotTable& table, PlotKind kind, const PlotOptions& opt) {
    const long n = table.values.rows();
    const long nc = table.values.cols();
    if (n == 0 || nc == 0) throw std::invalid_argument("cannot plot an empty table");
    if (static_cast<long>(table.columns.size()) != nc)
        throw std::invalid_argument("column names do not match the value columns");
    if (kind == PlotKind::line && nc < 2)
        throw std::invalid_argument("line plots need an x column and at least one series");
    if (kind != PlotKind::line && nc != 3)
        throw std::invalid_argument("scatter and heatmap plots need exactly (x, y, value) columns");

    check_log_column(table.values, 0, opt.log_x, "x");
    for (long c = 1; c < (kind == PlotKind::line ? nc : 2); ++c)
        check_log_column(table.values, c, opt.log_y, "y");

    const double px_x0 = kMarginLeft, px_x1 = opt.width - kMarginRight;
    const double px_y0 = opt.height - kMarginBottom, px_y1 = kMarginTop;

    const Axis x = make_axis(table.values.col(0).minCoeff(), table.values.col(0).maxCoeff(),
                             opt.log_x, px_x0, px_x1);
    double ylo, yhi;
    if (kind == PlotKind::line) {
        ylo = table.values.rightCols(nc - 1).minCoeff();
        yhi = table.values.rightCols(nc - 1).maxCoeff();
    } else {
        ylo = table.values.col(1).minCoeff();
        yhi = table.values.col(1).maxCoeff();
    }
    const Axis y = make_axis(ylo, yhi, opt.log_y, px_y0, px_y1);

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << opt.width << "' height='"
        << opt.height << "' viewBox='0 0 " << opt.width << " " << opt.height << "'>\n";
    if (!opt.config.empty()) {
        std::string safe = opt.config;  // "--" may not appear inside an XML comment
        std::size_t p = 0;
        while ((p = safe.find("--", p)) != std::string::npos) safe.replace(p, 2, "- -");
        svg << "<!-- config: " << safe << " -->\n";
    }
    svg << "<rect width='100%' height='100%' fill='white'/>\n";

    if (kind == PlotKind::line) {
        draw_frame(svg, x, y, opt);
        for (long c = 1; c < nc; ++c) {
            const char* color = kSeriesColors[(c - 1) % 8];
            svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.6' points='";
            for (long r = 0; r < n; ++r)
                svg << x.map(table.values(r, 0)) << "," << y.map(table.values(r, c)) << " ";
            svg << "'/>\n";
            for (long r = 0; r < n; ++r)
                svg << "<circle cx='" << x.map(table.values(r, 0)) << "' cy='"
                    << y.map(table.values(r, c)) << "' r='2.5' fill='" << color << "'/>\n";
            const double ly = px_y1 + 14 * static_cast<double>(c);
            svg << "<line x1='" << px_x1 + 8 << "' y1='" << ly << "' x2='" << px_x1 + 26
                << "' y2='" << ly << "' stroke='" << color << "' stroke-width='1.6'/>\n";
            svg << "<text x='" << px_x1 + 30 << "' y='" << ly + 4 << "' font-size='11'>"
                << xml_escape(table.columns[static_cast<std::size_t>(c)]) << "</text>\n";
        }
    } else if (kind == PlotKind::scatter_color) {
        draw_frame(svg, x, y, opt);
        const double clo = table.values.col(2).minCoeff();
        const double chi = table.values.col(2).maxCoeff();
        const double span = (chi > clo) ? chi - clo : 1.0;
        for (long r = 0; r < n; ++r)
            svg << "<circle cx='" << x.map(table.values(r, 0)) << "' cy='"
                << y.map(table.values(r, 1)) << "' r='3' fill='"
                << colormap((table.values(r, 2) - clo) / span) << "' fill-opacity='0.85'/>\n";
        draw_colorbar(svg, clo, chi, px_x1 + 10, px_y1, px_y0);
        svg << "<text x='" << px_x1 + 10 << "' y='" << px_y1 - 6 << "' font-size='11'>"
            << xml_escape(table.columns[2]) << "</text>\n";
    } else {  // heatmap
        // Recover the rectangular grid from the long-form (x, y, value) rows.
        std::map<double, long> xs, ys;
        for (long r = 0; r < n; ++r) {
            xs.emplace(table.values(r, 0), 0);
            ys.emplace(table.values(r, 1), 0);
        }
        const long nx = static_cast<long>(xs.size()), ny = static_cast<long>(ys.size());
        if (nx * ny != n)
            throw std::invalid_argument("heatmap requires one row per cell of a complete x-y grid");
        long i = 0;
        for (auto& [v, idx] : xs) idx = i++;
        i = 0;
        for (auto& [v, idx] : ys) idx = i++;
        Eigen::MatrixXd grid(ny, nx);
        Eigen::MatrixXd seen = Eigen::MatrixXd::Zero(ny, nx);
        for (long r = 0; r < n; ++r) {
            const long cx = xs[table.values(r, 0)], cy = ys[table.values(r, 1)];
            if (seen(cy, cx) != 0.0)
                throw std::invalid_argument("heatmap requires one row per cell of a complete x-y grid");
            seen(cy, cx) = 1.0;
            grid(cy, cx) = table.values(r, 2);
        }

        // Cell boundaries: midpoints between neighbors (geometric on log axes).
        const auto edges = [](const std::map<double, long>& coords, bool log) {
            std::vector<double> c;
            for (const auto& [v, idx] : coords) c.push_back(v);
            std::vector<double> e(c.size() + 1);
            const auto mid = [log](double a, double b) {
                return log ? std::sqrt(a * b) : (a + b) / 2.0;
            };
            for (std::size_t j = 1; j < c.size(); ++j) e[j] = mid(c[j - 1], c[j]);
            if (c.size() == 1) {
                e[0] = log ? c[0] / 2 : c[0] - 0.5;
                e[1] = log ? c[0] * 2 : c[0] + 0.5;
            } else {
                e[0] = log ? c[0] * c[0] / e[1] : 2 * c[0] - e[1];
                e[c.size()] = log ? c.back() * c.back() / e[c.size() - 1] : 2 * c.back() - e[c.size() - 1];
            }
            return e;
        };
        const std::vector<double> ex = edges(xs, opt.log_x);
        const std::vector<double> ey = edges(ys, opt.log_y);
        const Axis hx = make_axis(ex.front(), ex.back(), opt.log_x, px_x0, px_x1);
        const Axis hy = make_axis(ey.front(), ey.back(), opt.log_y, px_y0, px_y1);

        const double vlo = grid.minCoeff(), vhi = grid.maxCoeff();
        const double span = (vhi > vlo) ? vhi - vlo : 1.0;
        for (long cy = 0; cy < ny; ++cy)
            for (long cx = 0; cx < nx; ++cx) {
                const double rx0 = hx.map(ex[static_cast<std::size_t>(cx)]);
                const double rx1 = hx.map(ex[static_cast<std::size_t>(cx) + 1]);
                const double ry0 = hy.map(ey[static_cast<std::size_t>(cy)]);
                const double ry1 = hy.map(ey[static_cast<std::size_t>(cy) + 1]);
                svg << "<rect x='" << rx0 << "' y='" << ry1 << "' width='" << rx1 - rx0
                    << "' height='" << ry0 - ry1 << "' fill='"
                    << colormap((grid(cy, cx) - vlo) / span) << "'/>\n";
            }
        draw_frame(svg, hx, hy, opt);
        draw_colorbar(svg, vlo, vhi, px_x1 + 10, px_y1, px_y0);
        svg << "<text x='" << px_x1 + 10 << "' y='" << px_y1 - 6 << "' font-size='11'>"
            << xml_escape(table.columns[2]) << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

void emit_svg(const PlotTable& table, PlotKind kind, const std::string& path,
              const PlotOptions& opt) {
    const std::string doc = render_svg(table, kind, opt);  // validate before touching the file
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << doc;
    if (!out.good()) throw std::runtime_error("failed writing " + path);
}

}  // namespace spinobs
