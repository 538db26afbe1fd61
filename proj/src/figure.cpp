#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lagdist/io.hpp"

namespace lagdist {

namespace {

constexpr double kPanelWidth = 360.0;
constexpr double kPanelHeight = 260.0;
constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 44.0;
constexpr int kColumns = 3;

std::string escape(std::string_view s) {
    std::string out;
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

struct Panel {
    int days;
    double q;
    Method method;
    std::vector<const GridRow*> rows;
};

// m axis is logarithmic: the grid runs from 1 to 60.
void draw_panel(std::ostream& out, const Panel& panel, double x0, double y0) {
    const double plot_w = kPanelWidth - kMarginLeft - kMarginRight;
    const double plot_h = kPanelHeight - kMarginTop - kMarginBottom;
    const double left = x0 + kMarginLeft;
    const double top = y0 + kMarginTop;

    double m_lo = panel.rows.front()->m;
    double m_hi = m_lo;
    double y_hi = 0.0;
    for (const auto* r : panel.rows) {
        m_lo = std::min<double>(m_lo, r->m);
        m_hi = std::max<double>(m_hi, r->m);
        if (std::isfinite(r->mean_l2))
            y_hi = std::max(y_hi, r->mean_l2);
        y_hi = std::max(y_hi, r->min_l2);
    }
    if (y_hi <= 0.0)
        y_hi = 1.0;
    y_hi *= 1.1;
    const double log_lo = std::log(m_lo);
    const double log_span = std::max(std::log(m_hi) - log_lo, 1e-9);

    auto px = [&](double m) {
        const double frac = m_hi > m_lo ? (std::log(m) - log_lo) / log_span : 0.5;
        return left + frac * plot_w;
    };
    auto py = [&](double v) { return top + plot_h * (1.0 - v / y_hi); };

    fmt::print(out, "<g class=\"panel\">\n");
    fmt::print(out,
               "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
               "stroke=\"#444\"/>\n",
               left, top, plot_w, plot_h);
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
               left + plot_w / 2, y0 + 18.0,
               escape(fmt::format("N = {} days, q = {} ({})", panel.days, panel.q, to_string(panel.method))));

    for (const auto* r : panel.rows) {
        const double x = px(r->m);
        fmt::print(out, "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#444\"/>\n",
                   x, top + plot_h, top + plot_h + 4);
        fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                   x, top + plot_h + 15, r->m);
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = y_hi * i / 4.0;
        fmt::print(out, "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#444\"/>\n",
                   left - 4, py(v), left);
        fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n",
                   left - 6, py(v) + 3, v);
    }
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"middle\">m</text>\n",
               left + plot_w / 2, top + plot_h + 32);
    fmt::print(out,
               "<text x=\"{0:.2f}\" y=\"{1:.2f}\" font-size=\"11\" text-anchor=\"middle\" "
               "transform=\"rotate(-90 {0:.2f} {1:.2f})\">L2 distance</text>\n",
               x0 + 14, top + plot_h / 2);

    std::string mean_pts;
    std::string min_pts;
    for (const auto* r : panel.rows) {
        if (std::isfinite(r->mean_l2))
            mean_pts += fmt::format("{:.2f},{:.2f} ", px(r->m), py(r->mean_l2));
        min_pts += fmt::format("{:.2f},{:.2f} ", px(r->m), py(r->min_l2));
    }
    if (!mean_pts.empty())
        mean_pts.pop_back();
    min_pts.pop_back();
    fmt::print(out, "<polyline class=\"mean\" points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
               mean_pts);
    fmt::print(out,
               "<polyline class=\"min\" points=\"{}\" fill=\"none\" stroke=\"#555\" stroke-width=\"1.5\" "
               "stroke-dasharray=\"4 3\"/>\n",
               min_pts);

    const double lx = left + plot_w - 110;
    fmt::print(out, "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#1f77b4\"/>\n",
               lx, top + 12, lx + 16);
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">mean estimate</text>\n", lx + 20, top + 15);
    fmt::print(out,
               "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#555\" "
               "stroke-dasharray=\"4 3\"/>\n",
               lx, top + 26, lx + 16);
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">minimum possible</text>\n", lx + 20,
               top + 29);
    fmt::print(out, "</g>\n");
}

}  // namespace

void write_figure_svg(std::ostream& out, const GridResult& result) {
    std::map<std::tuple<int, int, double>, Panel> by_key;
    std::vector<std::tuple<int, int, double>> order;
    for (const auto& r : result.rows) {
        const auto key = std::make_tuple(static_cast<int>(r.method), r.days, r.q);
        auto [it, inserted] = by_key.try_emplace(key, Panel{r.days, r.q, r.method, {}});
        if (inserted)
            order.push_back(key);
        it->second.rows.push_back(&r);
    }
    for (auto& [key, panel] : by_key)
        std::ranges::sort(panel.rows, {}, [](const GridRow* r) { return r->m; });

    const int count = static_cast<int>(order.size());
    const int cols = std::max(1, std::min(kColumns, count));
    const int rows = std::max(1, (count + cols - 1) / cols);
    const double width = cols * kPanelWidth;
    const double height = rows * kPanelHeight;

    fmt::print(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    fmt::print(out,
               "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
               "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\">\n",
               width, height);
    fmt::print(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (int i = 0; i < count; ++i)
        draw_panel(out, by_key.at(order[static_cast<std::size_t>(i)]), (i % cols) * kPanelWidth,
                   (i / cols) * kPanelHeight);
    fmt::print(out, "</svg>\n");
}

}  // namespace lagdist
