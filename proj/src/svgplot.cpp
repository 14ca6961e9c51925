#include "leafflow/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "leafflow/csvio.hpp"

namespace leafflow {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, bool log_y)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      log_y_(log_y) {}

void SvgPlot::add_series(const std::string& name, const std::vector<double>& x,
                         const std::vector<double>& y) {
    Series s;
    s.name = name;
    s.x = x;
    s.y = y;
    series_.push_back(std::move(s));
}

void SvgPlot::add_horizontal(const std::string& name, double y) {
    Series s;
    s.name = name;
    s.horizontal = true;
    s.level = y;
    series_.push_back(std::move(s));
}

std::string SvgPlot::render(int width, int height) const {
    const double ml = 70, mr = 160, mt = 40, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    auto note_y = [&](double v) {
        if (log_y_ && !(v > 0.0)) return;
        const double t = log_y_ ? std::log10(v) : v;
        if (!std::isfinite(t)) return;
        y_lo = std::min(y_lo, t);
        y_hi = std::max(y_hi, t);
    };
    for (const auto& s : series_) {
        if (s.horizontal) {
            note_y(s.level);
            continue;
        }
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            note_y(s.y[i]);
        }
    }
    if (!std::isfinite(x_lo)) { x_lo = 0; x_hi = 1; }
    if (!std::isfinite(y_lo)) { y_lo = 0; y_hi = 1; }
    if (x_hi <= x_lo) x_hi = x_lo + 1;
    if (y_hi <= y_lo) y_hi = y_lo + 1;
    const double y_pad = 0.05 * (y_hi - y_lo);
    y_lo -= y_pad;
    y_hi += y_pad;

    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) {
        const double t = log_y_ ? std::log10(std::max(y, 1e-300)) : y;
        return mt + ph - (t - y_lo) / (y_hi - y_lo) * ph;
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">" << title_ << "</text>\n";

    // frame and ticks
    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    const int nticks = 5;
    for (int k = 0; k <= nticks; ++k) {
        const double fx = x_lo + (x_hi - x_lo) * k / nticks;
        const double gx = px(fx);
        svg << "<line x1=\"" << gx << "\" y1=\"" << mt + ph << "\" x2=\"" << gx << "\" y2=\""
            << mt + ph + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << gx << "\" y=\"" << mt + ph + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(fx) << "</text>\n";
        const double fy = y_lo + (y_hi - y_lo) * k / nticks;
        const double gy = mt + ph - ph * k / nticks;
        const double label = log_y_ ? std::pow(10.0, fy) : fy;
        svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << gy << "\" x2=\"" << ml << "\" y2=\""
            << gy << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << gy + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(label) << "</text>\n";
    }
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label_
        << "</text>\n"
        << "<text x=\"18\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << y_label_ << "</text>\n";

    int color = 0;
    double legend_y = mt + 14;
    for (const auto& s : series_) {
        const char* c = kColors[color % 8];
        ++color;
        if (s.horizontal) {
            svg << "<line x1=\"" << ml << "\" y1=\"" << py(s.level) << "\" x2=\"" << ml + pw
                << "\" y2=\"" << py(s.level) << "\" stroke=\"" << c
                << "\" stroke-dasharray=\"6 4\"/>\n";
        } else {
            svg << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                if (log_y_ && !(s.y[i] > 0.0)) continue;
                svg << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
            }
            svg << "\"/>\n";
        }
        svg << "<line x1=\"" << ml + pw + 8 << "\" y1=\"" << legend_y - 4 << "\" x2=\""
            << ml + pw + 28 << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << c << "\"/>\n"
            << "<text x=\"" << ml + pw + 33 << "\" y=\"" << legend_y
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.name << "</text>\n";
        legend_y += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

void SvgPlot::save(const std::string& path, int width, int height) const {
    write_text_file(path, render(width, height));
}

}  // namespace leafflow
