#include "echo/io/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "echo/errors.hpp"
#include "echo/units.hpp"

namespace echo::io {

namespace {

constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 50.0;

const char* kSeriesColors[] = {"#1f6fb4", "#d1495b", "#3a7d44",
                               "#8d5a97", "#c77b2e", "#4a4e69"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;
    double to_unit(double v) const {
        if (log) return (std::log10(v) - std::log10(lo)) /
                        (std::log10(hi) - std::log10(lo));
        return (v - lo) / (hi - lo);
    }
    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            const int d0 = static_cast<int>(std::floor(std::log10(lo)));
            const int d1 = static_cast<int>(std::ceil(std::log10(hi)));
            for (int d = d0; d <= d1; ++d) {
                const double v = std::pow(10.0, d);
                if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12))
                    out.push_back(v);
            }
            if (out.size() < 2) {  // narrow range: fall back to linear ticks
                Axis lin{lo, hi, false};
                return lin.ticks();
            }
            return out;
        }
        const double span = hi - lo;
        const double raw = span / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (raw <= m * mag) {
                step = m * mag;
                break;
            }
        }
        const double first = std::ceil(lo / step) * step;
        for (double v = first; v <= hi + 1e-12 * span; v += step)
            out.push_back(v);
        return out;
    }
};

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series,
                       const PlotOptions& options) {
    if (series.empty()) throw ValidationError("render_svg: no series");
    for (const auto& s : series) {
        if (s.data.size() == 0)
            throw ValidationError("render_svg: empty dataset '" +
                                  s.data.label + "'");
    }
    const auto ref_x = units::find_unit(series[0].data.abscissa_unit);
    const auto ref_y = units::find_unit(series[0].data.ordinate_unit);
    for (const auto& s : series) {
        const auto ux = units::find_unit(s.data.abscissa_unit);
        const auto uy = units::find_unit(s.data.ordinate_unit);
        if (!ux || !ref_x || ux->dim != ref_x->dim)
            throw UnitError("render_svg: mixed abscissa units ('" +
                            series[0].data.abscissa_unit + "' vs '" +
                            s.data.abscissa_unit + "')");
        if (!uy || !ref_y || uy->dim != ref_y->dim)
            throw UnitError("render_svg: mixed ordinate units ('" +
                            series[0].data.ordinate_unit + "' vs '" +
                            s.data.ordinate_unit + "')");
    }

    // ranges over data and overlays, in the first series' units
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    auto scale_x = [&](const PlotSeries& s) {
        return units::convert(1.0, s.data.abscissa_unit,
                              series[0].data.abscissa_unit);
    };
    auto scale_y = [&](const PlotSeries& s) {
        return units::convert(1.0, s.data.ordinate_unit,
                              series[0].data.ordinate_unit);
    };
    for (const auto& s : series) {
        const double sx = scale_x(s), sy = scale_y(s);
        for (std::size_t i = 0; i < s.data.size(); ++i) {
            const double x = s.data.abscissa[i] * sx;
            const double y = s.data.ordinate[i] * sy;
            if (options.log_x && !(x > 0)) continue;
            if (options.log_y && !(y > 0)) continue;
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
        for (std::size_t i = 0; i < s.overlay_x.size(); ++i) {
            const double x = s.overlay_x[i] * sx;
            const double y = s.overlay_y[i] * sy;
            if (options.log_x && !(x > 0)) continue;
            if (options.log_y && !(y > 0)) continue;
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    }
    if (!(x_lo < x_hi)) {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if (!(y_lo < y_hi)) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    if (!options.log_x) {
        const double pad = 0.04 * (x_hi - x_lo);
        x_lo -= pad;
        x_hi += pad;
    }
    if (!options.log_y) {
        const double pad = 0.06 * (y_hi - y_lo);
        y_lo -= pad;
        y_hi += pad;
    }
    const Axis ax{x_lo, x_hi, options.log_x};
    const Axis ay{y_lo, y_hi, options.log_y};

    const double plot_w = options.width - kMarginLeft - kMarginRight;
    const double plot_h = options.height - kMarginTop - kMarginBottom;
    auto px = [&](double v) { return kMarginLeft + ax.to_unit(v) * plot_w; };
    auto py = [&](double v) {
        return kMarginTop + (1.0 - ay.to_unit(v)) * plot_h;
    };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (!options.provenance.empty())
        os << "<!-- " << options.provenance << " -->\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
       << "\" height=\"" << options.height << "\" viewBox=\"0 0 "
       << options.width << " " << options.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // frame
    os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
       << plot_w << "\" height=\"" << plot_h
       << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

    // ticks and grid
    for (double t : ax.ticks()) {
        const double x = px(t);
        os << "<line x1=\"" << fmt(x) << "\" y1=\"" << kMarginTop + plot_h
           << "\" x2=\"" << fmt(x) << "\" y2=\"" << kMarginTop + plot_h + 5
           << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << fmt(x) << "\" y=\"" << kMarginTop + plot_h + 18
           << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">"
           << fmt(t) << "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = py(t);
        os << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << fmt(y)
           << "\" x2=\"" << kMarginLeft << "\" y2=\"" << fmt(y)
           << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(y + 4)
           << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333\">" << fmt(t)
           << "</text>\n";
    }

    // axis labels and title
    const auto& first = series[0].data;
    os << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\""
       << options.height - 10
       << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#111\">"
       << first.abscissa_name << " (" << first.abscissa_unit << ")"
       << (options.log_x ? "  [log]" : "") << "</text>\n";
    os << "<text x=\"14\" y=\"" << kMarginTop + plot_h / 2
       << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#111\" "
          "transform=\"rotate(-90 14 "
       << kMarginTop + plot_h / 2 << ")\">" << first.ordinate_name << " ("
       << first.ordinate_unit << ")" << (options.log_y ? "  [log]" : "")
       << "</text>\n";
    if (!options.title.empty()) {
        os << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"18\" "
           << "font-size=\"14\" text-anchor=\"middle\" fill=\"#111\">"
           << options.title << "</text>\n";
    }

    // series
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kSeriesColors[si % 6];
        const double sx = scale_x(s), sy = scale_y(s);
        // error bars
        for (std::size_t i = 0; i < s.data.size(); ++i) {
            if (!s.data.has_sigma()) break;
            const double x = s.data.abscissa[i] * sx;
            const double y = s.data.ordinate[i] * sy;
            const double e = s.data.sigma[i] * sy;
            if (options.log_x && !(x > 0)) continue;
            if (options.log_y && !(y - e > 0)) continue;
            os << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(py(y - e))
               << "\" x2=\"" << fmt(px(x)) << "\" y2=\"" << fmt(py(y + e))
               << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
        }
        // points
        for (std::size_t i = 0; i < s.data.size(); ++i) {
            const double x = s.data.abscissa[i] * sx;
            const double y = s.data.ordinate[i] * sy;
            if (options.log_x && !(x > 0)) continue;
            if (options.log_y && !(y > 0)) continue;
            os << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        // overlay polyline
        if (!s.overlay_x.empty()) {
            os << "<polyline fill=\"none\" stroke=\"" << color
               << "\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\" points=\"";
            for (std::size_t i = 0; i < s.overlay_x.size(); ++i) {
                const double x = s.overlay_x[i] * sx;
                const double y = s.overlay_y[i] * sy;
                if (options.log_x && !(x > 0)) continue;
                if (options.log_y && !(y > 0)) continue;
                os << fmt(px(x)) << "," << fmt(py(y)) << " ";
            }
            os << "\"/>\n";
        }
        // legend entry
        if (!s.name.empty()) {
            const double ly = kMarginTop + 16 + 16 * si;
            os << "<rect x=\"" << kMarginLeft + plot_w - 150 << "\" y=\""
               << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << color
               << "\"/>\n";
            os << "<text x=\"" << kMarginLeft + plot_w - 136 << "\" y=\"" << ly
               << "\" font-size=\"11\" fill=\"#111\">" << s.name
               << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

void write_svg(const std::filesystem::path& path,
               const std::vector<PlotSeries>& series,
               const PlotOptions& options) {
    const std::string doc = render_svg(series, options);  // may throw: no file
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << doc;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace echo::io
