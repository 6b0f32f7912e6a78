#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "evopf/io.hpp"

namespace evopf {

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

const char* kPalette[] = {"#1f6fb2", "#c24f3a", "#3a8f5c", "#8a5fb2", "#b2872a", "#4f6d7a"};

} // namespace

std::string svg_line_chart(const std::string& title, const std::vector<std::string>& labels,
                           const std::vector<std::vector<double>>& series) {
    if (series.empty() || labels.size() != series.size()) {
        throw InputError("chart needs one label per series");
    }
    const std::size_t n = series.front().size();
    if (n < 2) throw InputError("chart series need at least two points");
    for (const auto& s : series) {
        if (s.size() != n) throw InputError("chart series lengths must agree");
    }

    double lo = series[0][0], hi = series[0][0];
    for (const auto& s : series) {
        for (double v : s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi - lo < 1e-12) {
        const double pad = std::max(1e-6, std::abs(hi) * 0.1);
        lo -= pad;
        hi += pad;
    } else {
        const double pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
    }

    const double W = 640, H = 360, ml = 64, mr = 16, mt = 36, mb = 40;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto sx = [&](std::size_t i) { return ml + pw * static_cast<double>(i) / (n - 1); };
    auto sy = [&](double v) { return mt + ph * (1.0 - (v - lo) / (hi - lo)); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 360\" "
           "font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"640\" height=\"360\" fill=\"white\"/>\n";
    out << "<text x=\"" << fixed2(ml) << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";

    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        const double y = sy(v);
        out << "<line x1=\"" << fixed2(ml) << "\" y1=\"" << fixed2(y) << "\" x2=\""
            << fixed2(ml + pw) << "\" y2=\"" << fixed2(y)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fixed2(ml - 6) << "\" y=\"" << fixed2(y + 4)
            << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
    }
    const std::size_t x_step = std::max<std::size_t>(1, (n - 1) / 8);
    for (std::size_t i = 0; i < n; i += x_step) {
        out << "<text x=\"" << fixed2(sx(i)) << "\" y=\"" << fixed2(mt + ph + 16)
            << "\" text-anchor=\"middle\">" << i << "</text>\n";
    }
    out << "<line x1=\"" << fixed2(ml) << "\" y1=\"" << fixed2(mt) << "\" x2=\"" << fixed2(ml)
        << "\" y2=\"" << fixed2(mt + ph) << "\" stroke=\"#444444\"/>\n";
    out << "<line x1=\"" << fixed2(ml) << "\" y1=\"" << fixed2(mt + ph) << "\" x2=\""
        << fixed2(ml + pw) << "\" y2=\"" << fixed2(mt + ph) << "\" stroke=\"#444444\"/>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) out << " ";
            out << fixed2(sx(i)) << "," << fixed2(sy(series[s][i]));
        }
        out << "\"/>\n";
        out << "<text x=\"" << fixed2(ml + pw - 4) << "\" y=\""
            << fixed2(mt + 14 + 14 * static_cast<double>(s)) << "\" text-anchor=\"end\" fill=\""
            << color << "\">" << labels[s] << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace evopf
