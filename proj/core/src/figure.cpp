#include "ninlab/figure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include "ninlab/common.hpp"
#include "ninlab/csv.hpp"

namespace ninlab {

FigureKind figure_kind_from_string(const std::string& s) {
    if (s == "trajectories") return FigureKind::trajectories;
    if (s == "phases") return FigureKind::phases;
    if (s == "timescales") return FigureKind::timescales;
    throw ConfigError("unknown figure kind '" + s + "'");
}

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 70.0, kRight = 830.0, kTop = 40.0, kBottom = 480.0;

const char* kSeriesColors[] = {"#1f77b4", "#9467bd", "#2ca02c", "#d62728",
                               "#8c564b", "#17becf", "#ff7f0e", "#7f7f7f"};

const char* phase_color(const std::string& label) {
    if (label == "decoupled") return "#c6dbef";
    if (label == "decay") return "#9ecae1";
    if (label == "catapult") return "#fdd0a2";
    if (label == "divergent") return "#fcae91";
    return "#eeeeee";
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Short human label for a tick value.
std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double place(double v, double a, double b) const {
        double x = v;
        double l = lo, h = hi;
        if (log) {
            x = std::log10(v);
            l = std::log10(lo);
            h = std::log10(hi);
        }
        if (h <= l) h = l + 1.0;
        return a + (x - l) / (h - l) * (b - a);
    }
};

struct Series {
    std::string name;
    std::vector<double> x, y;
    bool dashed = false;
};

std::vector<double> finite_positive(const std::vector<Series>& ss, bool positive) {
    std::vector<double> v;
    for (const auto& s : ss)
        for (double y : s.y)
            if (std::isfinite(y) && (!positive || y > 0.0)) v.push_back(y);
    return v;
}

Axis y_axis_for(const std::vector<Series>& series) {
    Axis ax;
    const std::vector<double> pos = finite_positive(series, true);
    const std::vector<double> all = finite_positive(series, false);
    if (all.empty()) throw DataError("figure: no finite data to plot");
    // Log scale when everything positive and the spread warrants it.
    if (pos.size() == all.size()) {
        const double mx = *std::max_element(pos.begin(), pos.end());
        const double mn = *std::min_element(pos.begin(), pos.end());
        if (mn > 0.0 && mx / mn > 50.0) {
            ax.log = true;
            ax.lo = mn;
            ax.hi = mx;
            return ax;
        }
    }
    ax.lo = *std::min_element(all.begin(), all.end());
    ax.hi = *std::max_element(all.begin(), all.end());
    if (ax.lo == ax.hi) {
        ax.lo -= 1.0;
        ax.hi += 1.0;
    }
    return ax;
}

std::vector<double> ticks_for(const Axis& ax, int approx = 6) {
    std::vector<double> t;
    if (ax.log) {
        const int e0 = static_cast<int>(std::floor(std::log10(ax.lo)));
        const int e1 = static_cast<int>(std::ceil(std::log10(ax.hi)));
        const int step = std::max(1, (e1 - e0) / approx);
        for (int e = e0; e <= e1; e += step) t.push_back(std::pow(10.0, e));
        return t;
    }
    const double span = ax.hi - ax.lo;
    const double raw = span / approx;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    const double first = std::ceil(ax.lo / step) * step;
    for (double v = first; v <= ax.hi + 1e-9 * span; v += step) t.push_back(v);
    return t;
}

class SvgBuilder {
public:
    SvgBuilder() {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
             << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
             << kHeight << "\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    void band(double x0, double x1, const char* color) {
        out_ << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(kTop) << "\" width=\""
             << fmt(std::max(0.0, x1 - x0)) << "\" height=\"" << fmt(kBottom - kTop)
             << "\" fill=\"" << color << "\" fill-opacity=\"0.55\"/>\n";
    }

    void axes(const Axis& x, const Axis& y, const std::string& xlabel,
              const std::string& ylabel) {
        out_ << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
             << fmt(kRight - kLeft) << "\" height=\"" << fmt(kBottom - kTop)
             << "\" fill=\"none\" stroke=\"#333333\"/>\n";
        for (double tv : ticks_for(x)) {
            if (tv < x.lo - 1e-12 || tv > x.hi * (x.log ? 1.0000001 : 1.0) + 1e-12) continue;
            const double px = x.place(tv, kLeft, kRight);
            out_ << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kBottom) << "\" x2=\""
                 << fmt(px) << "\" y2=\"" << fmt(kBottom + 5) << "\" stroke=\"#333333\"/>\n";
            out_ << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kBottom + 20)
                 << "\" font-size=\"12\" text-anchor=\"middle\">" << tick_label(tv)
                 << "</text>\n";
        }
        for (double tv : ticks_for(y)) {
            if (tv < y.lo - 1e-12 || tv > y.hi + 1e-12) continue;
            const double py = y.place(tv, kBottom, kTop);
            out_ << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(py) << "\" x2=\""
                 << fmt(kLeft) << "\" y2=\"" << fmt(py) << "\" stroke=\"#333333\"/>\n";
            out_ << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py + 4)
                 << "\" font-size=\"12\" text-anchor=\"end\">" << tick_label(tv)
                 << "</text>\n";
        }
        out_ << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"" << fmt(kHeight - 14)
             << "\" font-size=\"14\" text-anchor=\"middle\">" << xlabel << "</text>\n";
        out_ << "<text x=\"18\" y=\"" << fmt((kTop + kBottom) / 2)
             << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
             << fmt((kTop + kBottom) / 2) << ")\">" << ylabel << "</text>\n";
    }

    void polyline(const Series& s, const Axis& x, const Axis& y, const char* color) {
        std::ostringstream pts;
        bool open = false;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double yv = s.y[i];
            if (!std::isfinite(yv) || (y.log && yv <= 0.0)) {
                if (open) {
                    out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\""
                         << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\""
                         << pts.str() << "\"/>\n";
                    pts.str("");
                    open = false;
                }
                continue;
            }
            pts << fmt(x.place(s.x[i], kLeft, kRight)) << ',' << fmt(y.place(yv, kBottom, kTop))
                << ' ';
            open = true;
        }
        if (open)
            out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\""
                 << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << pts.str()
                 << "\"/>\n";
    }

    void legend(const std::vector<Series>& series) {
        double ly = kTop + 14.0;
        for (std::size_t i = 0; i < series.size(); ++i) {
            const char* color = kSeriesColors[i % (sizeof(kSeriesColors) / sizeof(char*))];
            out_ << "<line x1=\"" << fmt(kLeft + 10) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
                 << fmt(kLeft + 34) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
                 << "\" stroke-width=\"2\"" << (series[i].dashed ? " stroke-dasharray=\"6 4\"" : "")
                 << "/>\n";
            out_ << "<text x=\"" << fmt(kLeft + 40) << "\" y=\"" << fmt(ly)
                 << "\" font-size=\"12\">" << series[i].name << "</text>\n";
            ly += 16.0;
        }
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
};

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

std::string render_series_chart(std::vector<Series> series, const std::string& xlabel,
                                const std::string& ylabel,
                                const std::vector<std::pair<double, std::string>>* bands =
                                    nullptr) {
    if (series.empty()) throw DataError("figure: nothing to plot");
    Axis x;
    bool any = false;
    for (const auto& s : series)
        for (double v : s.x) {
            if (!any) {
                x.lo = x.hi = v;
                any = true;
            }
            x.lo = std::min(x.lo, v);
            x.hi = std::max(x.hi, v);
        }
    if (!any) throw DataError("figure: series have no points");
    if (x.lo == x.hi) x.hi = x.lo + 1.0;
    const Axis y = y_axis_for(series);

    SvgBuilder svg;
    if (bands && !bands->empty()) {
        // Each entry is (grid x, label); bands extend halfway to neighbours.
        for (std::size_t i = 0; i < bands->size(); ++i) {
            const double cx = (*bands)[i].first;
            const double left =
                i == 0 ? x.lo : 0.5 * ((*bands)[i - 1].first + cx);
            const double right =
                i + 1 == bands->size() ? x.hi : 0.5 * (cx + (*bands)[i + 1].first);
            svg.band(x.place(left, kLeft, kRight), x.place(right, kLeft, kRight),
                     phase_color((*bands)[i].second));
        }
    }
    for (std::size_t i = 0; i < series.size(); ++i)
        svg.polyline(series[i], x, y,
                     kSeriesColors[i % (sizeof(kSeriesColors) / sizeof(char*))]);
    svg.axes(x, y, xlabel, ylabel);
    svg.legend(series);
    return svg.finish();
}

std::string render_trajectories(std::span<const std::string> paths) {
    std::vector<Series> series;
    for (const auto& path : paths) {
        const CsvTable t = read_csv(path);
        if (t.rows.empty()) throw DataError("figure: empty CSV " + path);
        std::vector<double> steps = t.column_as_doubles("step");
        const bool mlp = t.has_column("niw_norm");
        const std::string niw_col = mlp ? "niw_norm" : "w_ni";
        if (!t.has_column(niw_col)) (void)t.column(niw_col); // throws with the name
        Series niw{stem_of(path) + " " + niw_col, steps, {}, false};
        for (double v : t.column_as_doubles(niw_col)) niw.y.push_back(std::fabs(v));
        series.push_back(std::move(niw));
        const std::string loss_col = mlp ? "train_loss" : "loss";
        Series loss{stem_of(path) + " " + loss_col, steps, t.column_as_doubles(loss_col),
                    true};
        series.push_back(std::move(loss));
    }
    return render_series_chart(std::move(series), "step", "NIW norm / loss");
}

std::string render_phases(std::span<const std::string> paths) {
    if (paths.size() != 1) throw ConfigError("figure: phases takes exactly one CSV");
    const CsvTable t = read_csv(paths[0]);
    if (t.rows.empty()) throw DataError("figure: empty CSV " + paths[0]);
    const std::size_t label_col = t.column("label");
    std::vector<double> sigma = t.column_as_doubles("sigma_eps");
    std::vector<double> tau = t.column_as_doubles("tau_niw");

    std::vector<std::pair<double, std::string>> bands;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        bands.emplace_back(sigma[r], t.rows[r][label_col]);

    std::vector<Series> series;
    series.push_back({"tau_niw", sigma, tau, false});
    return render_series_chart(std::move(series), "sigma_eps", "decay time [steps]", &bands);
}

std::string render_timescales(std::span<const std::string> paths) {
    if (paths.size() != 1) throw ConfigError("figure: timescales takes exactly one CSV");
    const CsvTable t = read_csv(paths[0]);
    if (t.rows.empty()) throw DataError("figure: empty CSV " + paths[0]);
    std::vector<double> sigma = t.column_as_doubles("sigma_eps");
    std::vector<Series> series;
    for (const char* col : {"tau_niw_fit", "tau_train_fit", "tau_test_fit"})
        series.push_back({col, sigma, t.column_as_doubles(col), false});
    return render_series_chart(std::move(series), "sigma_eps", "fitted tau");
}

} // namespace

std::string render_figure(std::span<const std::string> csv_paths, FigureKind kind) {
    if (csv_paths.empty()) throw ConfigError("figure: no input CSVs");
    switch (kind) {
        case FigureKind::trajectories: return render_trajectories(csv_paths);
        case FigureKind::phases: return render_phases(csv_paths);
        case FigureKind::timescales: return render_timescales(csv_paths);
    }
    throw ConfigError("figure: bad kind");
}

void emit_figure(std::span<const std::string> csv_paths, FigureKind kind,
                 const std::string& out_svg) {
    const std::string svg = render_figure(csv_paths, kind);
    write_text_file(out_svg, svg);
}

} // namespace ninlab
