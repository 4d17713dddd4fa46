#include "scb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace scb {

namespace {

constexpr double kWidth = 800, kHeight = 480;
constexpr double kLeft = 80, kRight = 160, kTop = 30, kBottom = 60;
constexpr std::size_t kMaxPoints = 2000;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double v, int digits = 2)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string tick(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string unit_of(const std::string& s)
{
    if (s.rfind("p_", 0) == 0) return "W";
    if (s.rfind("i", 0) == 0) return "A";
    return "V";
}

std::string label_of(const std::string& s)
{
    // Legend uses circuit role names.
    if (s.rfind("il_o", 0) == 0) return "LO current";
    if (s.rfind("il_", 0) == 0) return "L" + s.substr(3) + " current";
    if (s.rfind("vcb_", 0) == 0) return "CB" + s.substr(4) + " voltage";
    if (s == "vc_o") return "CO voltage";
    if (s.rfind("vc_", 0) == 0) return "C" + s.substr(3) + " voltage";
    if (s.rfind("vs_", 0) == 0) return "S" + s.substr(3) + " voltage";
    if (s.rfind("vd_", 0) == 0) return "D" + s.substr(3) + " voltage";
    return s;
}

}  // namespace

void write_svg(const Trace& tr, const std::vector<std::string>& signals, std::ostream& os)
{
    if (signals.empty()) throw std::invalid_argument("write_svg: empty signal list");
    if (tr.rows.size() < 2) throw std::invalid_argument("write_svg: trace has fewer than two samples");
    std::vector<int> cols;
    for (const auto& s : signals) cols.push_back(tr.col(s));

    const double t0 = tr.rows.front()[0], t1 = tr.rows.back()[0];
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& r : tr.rows)
        for (int c : cols) {
            lo = std::min(lo, r[c]);
            hi = std::max(hi, r[c]);
        }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        hi += 0.5;
        lo -= 0.5;
    }
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto X = [&](double t) { return kLeft + (t - t0) / (t1 - t0) * pw; };
    auto Y = [&](double v) { return kTop + (hi - v) / (hi - lo) * ph; };

    std::string units;
    for (const auto& s : signals)
        if (units.find(unit_of(s)) == std::string::npos) units += (units.empty() ? "" : ", ") + unit_of(s);

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double tv = t0 + (t1 - t0) * i / 4, vv = lo + (hi - lo) * i / 4;
        os << "<text x=\"" << fixed(X(tv)) << "\" y=\"" << fixed(kTop + ph + 18) << "\" text-anchor=\"middle\">"
           << tick(tv) << "</text>\n";
        os << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(Y(vv) + 4) << "\" text-anchor=\"end\">"
           << tick(vv) << "</text>\n";
    }
    os << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << fixed(kHeight - 15)
       << "\" text-anchor=\"middle\">time (s)</text>\n";
    os << "<text x=\"18\" y=\"" << fixed(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << fixed(kTop + ph / 2) << ")\">value (" << units << ")</text>\n";

    const std::size_t stride = std::max<std::size_t>(1, (tr.rows.size() + kMaxPoints - 1) / kMaxPoints);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < tr.rows.size(); i += stride) {
            const auto& r = tr.rows[i];
            os << fixed(X(r[0])) << ',' << fixed(Y(r[cols[k]])) << ' ';
        }
        const auto& last = tr.rows.back();
        os << fixed(X(last[0])) << ',' << fixed(Y(last[cols[k]])) << "\"/>\n";
        const double ly = kTop + 10 + 18 * static_cast<double>(k);
        os << "<line x1=\"" << fixed(kLeft + pw + 10) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(kLeft + pw + 30)
           << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << fixed(kLeft + pw + 35) << "\" y=\"" << fixed(ly + 4) << "\">" << label_of(signals[k])
           << "</text>\n";
    }
    os << "</svg>\n";
}

void write_svg(const Trace& tr, const std::vector<std::string>& signals, const std::string& path)
{
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    write_svg(tr, signals, f);
}

}  // namespace scb
