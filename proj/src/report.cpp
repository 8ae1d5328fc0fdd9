#include "ssd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "bytes.hpp"
#include "ssd/error.hpp"

namespace ssd {

std::vector<std::string> experiment_names() {
    return {"sweep-defense", "sweep-attack", "category-stats", "subset-table", "min-iters"};
}

bool is_experiment_name(const std::string& name) {
    const auto names = experiment_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Result (de)serialization

namespace {

Json sweep_json(const SweepResult& s) {
    Json j;
    j["name"] = s.name;
    j["axis"] = s.axis;
    j["accuracy"] = s.accuracy;
    j["n"] = s.n;
    j["fingerprint"] = s.fingerprint;
    return j;
}

SweepResult sweep_from(const Json& j) {
    SweepResult s;
    s.name = j.at("name").get<std::string>();
    s.axis = j.at("axis").get<std::vector<double>>();
    s.accuracy = j.at("accuracy").get<std::vector<double>>();
    s.n = j.at("n").get<std::size_t>();
    s.fingerprint = j.at("fingerprint").get<std::string>();
    if (s.axis.size() != s.accuracy.size()) throw FormatError("sweep \"" + s.name + "\": axis/accuracy length mismatch");
    return s;
}

} // namespace

Json result_to_json(const ExperimentResult& r) {
    Json j;
    j["experiment"] = r.experiment;
    j["model_fingerprint"] = r.model_fingerprint;
    j["attack"] = r.attack;
    j["defense"] = r.defense;
    j["seed"] = r.seed;
    Json sweeps = Json::array();
    for (const auto& s : r.sweeps) sweeps.push_back(sweep_json(s));
    j["sweeps"] = std::move(sweeps);
    if (r.categories) {
        Json c;
        c["level"] = r.category_level;
        c["classes"] = r.categories->classes;
        c["accuracy"] = r.categories->accuracy;
        c["counts"] = r.categories->counts;
        j["categories"] = std::move(c);
    }
    if (r.table) {
        Json t;
        t["size"] = r.subset_size;
        t["methods"] = r.table->methods;
        t["accuracy"] = r.table->accuracy;
        t["subset_sizes"] = r.table->subset_sizes;
        j["table"] = std::move(t);
    }
    if (r.experiment == "min-iters") {
        Json m = Json::array();
        for (const auto& rec : r.min_iterations) {
            Json e;
            e["id"] = rec.sample_id;
            e["true_label"] = rec.true_label;
            e["min_iterations"] = rec.min_iterations ? Json(*rec.min_iterations) : Json(nullptr);
            std::string bits;
            for (char c : rec.correct_at) bits.push_back(c ? '1' : '0');
            e["correct_at"] = bits;
            m.push_back(std::move(e));
        }
        j["cap"] = r.cap;
        j["min_iterations"] = std::move(m);
    }
    return j;
}

ExperimentResult result_from_json(const Json& j) {
    try {
        ExperimentResult r;
        r.experiment = j.at("experiment").get<std::string>();
        if (!is_experiment_name(r.experiment)) throw FormatError("unknown experiment \"" + r.experiment + "\"");
        r.model_fingerprint = j.at("model_fingerprint").get<std::string>();
        r.attack = j.at("attack");
        r.defense = j.at("defense");
        r.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& s : j.at("sweeps")) r.sweeps.push_back(sweep_from(s));
        if (j.contains("categories")) {
            const auto& c = j.at("categories");
            CategoryStats cs;
            r.category_level = c.at("level").get<double>();
            cs.classes = c.at("classes").get<std::vector<int>>();
            cs.accuracy = c.at("accuracy").get<std::vector<double>>();
            cs.counts = c.at("counts").get<std::vector<std::size_t>>();
            r.categories = std::move(cs);
        }
        if (j.contains("table")) {
            const auto& t = j.at("table");
            SubsetTable st;
            r.subset_size = t.at("size").get<std::size_t>();
            st.methods = t.at("methods").get<std::vector<std::string>>();
            st.accuracy = t.at("accuracy").get<std::vector<std::vector<double>>>();
            st.subset_sizes = t.at("subset_sizes").get<std::vector<std::size_t>>();
            r.table = std::move(st);
        }
        if (j.contains("min_iterations")) {
            r.cap = j.at("cap").get<int>();
            for (const auto& e : j.at("min_iterations")) {
                MinIterationRecord rec;
                rec.sample_id = e.at("id").get<std::size_t>();
                rec.true_label = e.at("true_label").get<int>();
                if (!e.at("min_iterations").is_null()) rec.min_iterations = e.at("min_iterations").get<int>();
                for (char c : e.at("correct_at").get<std::string>()) rec.correct_at.push_back(c == '1');
                r.min_iterations.push_back(std::move(rec));
            }
        }
        return r;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("result: ") + e.what());
    }
}

void save_result(const ExperimentResult& r, const std::filesystem::path& path) {
    detail::write_text(path, result_to_json(r).dump(2) + "\n");
}

ExperimentResult load_result(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("result file not found: " + path.string());
    const auto bytes = detail::read_file(path);
    try {
        return result_from_json(Json::parse(bytes.begin(), bytes.end()));
    } catch (const Json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 640.0, kHeight = 400.0;
constexpr double kLeft = 64.0, kRight = 24.0, kTop = 40.0, kBottom = 56.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fx(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

class Svg {
public:
    Svg(const std::string& title, const std::string& xlabel, const std::string& ylabel) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fx(kWidth) << "\" height=\"" << fx(kHeight)
             << "\" viewBox=\"0 0 " << fx(kWidth) << ' ' << fx(kHeight)
             << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        text(kWidth / 2, 22, title, "middle", 14);
        text(kWidth / 2, kHeight - 12, xlabel, "middle");
        out_ << "<text x=\"16\" y=\"" << fx(kHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
             << fx(kHeight / 2) << ")\">" << escape(ylabel) << "</text>\n";
        line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, "#000");
        line(kLeft, kTop, kLeft, kHeight - kBottom, "#000");
    }

    static double px(double t) { return kLeft + t * (kWidth - kLeft - kRight); }
    static double py(double t) { return kHeight - kBottom - t * (kHeight - kTop - kBottom); }

    void text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 11) {
        out_ << "<text x=\"" << fx(x) << "\" y=\"" << fx(y) << "\" text-anchor=\"" << anchor << '"';
        if (size != 11) out_ << " font-size=\"" << size << '"';
        out_ << '>' << escape(s) << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const char* color) {
        out_ << "<line x1=\"" << fx(x1) << "\" y1=\"" << fx(y1) << "\" x2=\"" << fx(x2) << "\" y2=\"" << fx(y2)
             << "\" stroke=\"" << color << "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const char* color) {
        out_ << "<rect x=\"" << fx(x) << "\" y=\"" << fx(y) << "\" width=\"" << fx(w) << "\" height=\"" << fx(h)
             << "\" fill=\"" << color << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
        out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out_ << (i ? " " : "") << fx(pts[i].first) << ',' << fx(pts[i].second);
        }
        out_ << "\"/>\n";
        for (const auto& [x, y] : pts) {
            out_ << "<circle cx=\"" << fx(x) << "\" cy=\"" << fx(y) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }
    }

    void y_ticks(double max_value) {
        for (int i = 0; i <= 5; ++i) {
            const double t = i / 5.0;
            line(kLeft - 4, py(t), kLeft, py(t), "#000");
            if (i > 0) line(kLeft, py(t), kWidth - kRight, py(t), "#e0e0e0");
            text(kLeft - 6, py(t) + 4, format_number(t * max_value), "end");
        }
    }

    void legend(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            const double y = kTop + 6 + 16.0 * static_cast<double>(i);
            rect(kWidth - kRight - 120, y - 8, 10, 10, kColors[i % 5]);
            text(kWidth - kRight - 105, y, names[i], "start");
        }
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
};

std::string line_plot(const std::string& title, const std::string& xlabel, const std::vector<SweepResult>& series) {
    Svg svg(title, xlabel, "accuracy");
    svg.y_ticks(1.0);
    double lo = 0.0, hi = 1.0;
    if (!series.empty() && !series.front().axis.empty()) {
        lo = *std::min_element(series.front().axis.begin(), series.front().axis.end());
        hi = *std::max_element(series.front().axis.begin(), series.front().axis.end());
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const auto tx = [&](double v) { return Svg::px(hi > lo ? (v - lo) / span : 0.5); };
    if (!series.empty()) {
        const auto& axis = series.front().axis;
        const std::size_t stride = std::max<std::size_t>(1, (axis.size() + 9) / 10);
        for (std::size_t i = 0; i < axis.size(); i += stride) {
            svg.line(tx(axis[i]), Svg::py(0), tx(axis[i]), Svg::py(0) + 4, "#000");
            svg.text(tx(axis[i]), Svg::py(0) + 16, format_number(axis[i]));
        }
    }
    std::vector<std::string> names;
    for (std::size_t s = 0; s < series.size(); ++s) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < series[s].axis.size(); ++i) {
            pts.emplace_back(tx(series[s].axis[i]), Svg::py(std::clamp(series[s].accuracy[i], 0.0, 1.0)));
        }
        svg.polyline(pts, kColors[s % 5]);
        names.push_back(series[s].name);
    }
    if (series.size() > 1) svg.legend(names);
    return svg.finish();
}

std::string bar_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<std::string>& labels, const std::vector<double>& values, double max_value,
                     const std::vector<int>& colors = {}) {
    Svg svg(title, xlabel, ylabel);
    const double top = max_value > 0 ? max_value : 1.0;
    svg.y_ticks(top);
    const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(1, values.size()));
    const std::size_t stride = std::max<std::size_t>(1, (labels.size() + 19) / 20);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = kLeft + slot * static_cast<double>(i);
        const double h = Svg::py(0) - Svg::py(std::clamp(values[i] / top, 0.0, 1.0));
        svg.rect(x + slot * 0.1, Svg::py(0) - h, slot * 0.8, h, kColors[(colors.empty() ? 0 : colors[i]) % 5]);
        if (i % stride == 0) svg.text(x + slot / 2, Svg::py(0) + 16, labels[i]);
    }
    return svg.finish();
}

// CSV and SVG bodies plus the summary entry for one result.
struct Rendered {
    std::vector<std::pair<std::string, std::string>> files; // suffix -> content
    Json summary;
};

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string row;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) row.push_back(',');
        row += c;
        first = false;
    }
    row.push_back('\n');
    return row;
}

std::string n(std::size_t v) { return std::to_string(v); }

Rendered render(const ExperimentResult& r) {
    Rendered out;
    Json& s = out.summary;
    s["experiment"] = r.experiment;
    s["model_fingerprint"] = r.model_fingerprint;
    s["attack"] = r.attack;
    s["defense"] = r.defense;

    if (r.experiment == "sweep-defense") {
        if (r.sweeps.size() != 1) throw FormatError("sweep-defense result needs one sweep");
        const auto& sw = r.sweeps.front();
        std::string csv = csv_row({"strength", "accuracy"});
        for (std::size_t i = 0; i < sw.axis.size(); ++i) csv += csv_row({format_number(sw.axis[i]), format_number(sw.accuracy[i])});
        out.files.emplace_back(".csv", csv);
        out.files.emplace_back(".svg", line_plot("Defended accuracy vs smoothing strength", "strength", r.sweeps));
        s["axis"] = sw.axis;
        s["values"] = sw.accuracy;
        s["n"] = sw.n;
    } else if (r.experiment == "sweep-attack") {
        if (r.sweeps.size() != 2) throw FormatError("sweep-attack result needs defended and undefended sweeps");
        const auto& d = r.sweeps[0];
        const auto& u = r.sweeps[1];
        std::string csv = csv_row({"iterations", "defended", "undefended"});
        for (std::size_t i = 0; i < d.axis.size(); ++i) {
            csv += csv_row({format_number(d.axis[i]), format_number(d.accuracy[i]), format_number(u.accuracy[i])});
        }
        out.files.emplace_back(".csv", csv);
        out.files.emplace_back(".svg", line_plot("Accuracy vs attack iterations", "attack iterations", r.sweeps));
        s["axis"] = d.axis;
        s["values"] = d.accuracy;
        s["undefended"] = u.accuracy;
        s["n"] = d.n;
    } else if (r.experiment == "category-stats") {
        if (!r.categories) throw FormatError("category-stats result has no categories");
        const auto& c = *r.categories;
        std::string csv = csv_row({"rank", "class", "count", "accuracy"});
        std::vector<std::string> labels;
        std::size_t total = 0;
        for (std::size_t i = 0; i < c.classes.size(); ++i) {
            csv += csv_row({n(i), std::to_string(c.classes[i]), n(c.counts[i]), format_number(c.accuracy[i])});
            labels.push_back(std::to_string(c.classes[i]));
            total += c.counts[i];
        }
        out.files.emplace_back(".csv", csv);
        out.files.emplace_back(".svg", bar_plot("Per-class defended accuracy (ascending)", "class", "accuracy", labels,
                                                c.accuracy, 1.0));
        s["axis"] = c.classes;
        s["values"] = c.accuracy;
        s["counts"] = c.counts;
        s["level"] = r.category_level;
        s["n"] = total;
    } else if (r.experiment == "subset-table") {
        if (!r.table) throw FormatError("subset-table result has no table");
        const auto& t = *r.table;
        std::string csv = csv_row({"subset_method", "defense_method", "accuracy"});
        std::vector<std::string> labels;
        std::vector<double> values;
        std::vector<int> colors;
        for (std::size_t i = 0; i < t.methods.size(); ++i) {
            for (std::size_t j = 0; j < t.methods.size(); ++j) {
                csv += csv_row({t.methods[i], t.methods[j], format_number(t.accuracy[i][j])});
                labels.push_back(std::to_string(i) + "/" + std::to_string(j));
                values.push_back(t.accuracy[i][j]);
                colors.push_back(static_cast<int>(j));
            }
        }
        out.files.emplace_back(".csv", csv);
        std::string svg = bar_plot("Accuracy on optimal subsets (subset/defense)", "subset method / defense method",
                                   "accuracy", labels, values, 1.0, colors);
        out.files.emplace_back(".svg", svg);
        s["axis"] = t.methods;
        s["values"] = t.accuracy;
        s["subset_sizes"] = t.subset_sizes;
        s["size"] = r.subset_size;
        s["n"] = t.subset_sizes.empty() ? 0 : *std::min_element(t.subset_sizes.begin(), t.subset_sizes.end());
    } else { // min-iters
        const auto bins = min_iteration_histogram(r.min_iterations, r.cap);
        std::string csv = csv_row({"min_iterations", "count"});
        std::vector<std::string> labels;
        std::vector<double> values;
        Json axis = Json::array();
        for (std::size_t k = 0; k < bins.size(); ++k) {
            const bool last = k + 1 == bins.size();
            const std::string label = last ? "undefendable" : std::to_string(k);
            csv += csv_row({label, n(bins[k])});
            labels.push_back(last ? "U" : label);
            values.push_back(static_cast<double>(bins[k]));
            if (last) {
                axis.push_back(label);
            } else {
                axis.push_back(k);
            }
        }
        out.files.emplace_back(".csv", csv);
        const double top = values.empty() ? 1.0 : *std::max_element(values.begin(), values.end());
        out.files.emplace_back(".svg", bar_plot("Minimum defense iterations", "iterations (U = undefendable)",
                                                "samples", labels, values, top));
        std::vector<double> fixed;
        std::string fixed_csv = csv_row({"iterations", "accuracy"});
        if (!r.min_iterations.empty()) {
            for (int k = 0; k <= r.cap; ++k) {
                fixed.push_back(fixed_iteration_accuracy(r.min_iterations, k));
                fixed_csv += csv_row({std::to_string(k), format_number(fixed.back())});
            }
            fixed_csv += csv_row({"adaptive", format_number(adaptive_upper_bound_accuracy(r.min_iterations))});
        }
        out.files.emplace_back("_fixed.csv", fixed_csv);
        s["axis"] = std::move(axis);
        s["values"] = bins;
        s["cap"] = r.cap;
        s["fixed_accuracy"] = fixed;
        s["adaptive_accuracy"] =
            r.min_iterations.empty() ? Json(nullptr) : Json(adaptive_upper_bound_accuracy(r.min_iterations));
        s["n"] = r.min_iterations.size();
    }
    s["seed"] = r.seed;
    return out;
}

} // namespace

std::vector<std::filesystem::path> emit_report(const std::vector<ExperimentResult>& results,
                                               const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    std::vector<std::filesystem::path> written;
    std::map<std::string, int> seen;
    Json entries = Json::array();
    for (const auto& r : results) {
        Rendered rendered = render(r);
        const int k = ++seen[r.experiment];
        const std::string stem = k == 1 ? r.experiment : r.experiment + "_" + std::to_string(k);
        Json files = Json::array();
        for (const auto& [suffix, content] : rendered.files) {
            const auto path = out_dir / (stem + suffix);
            detail::write_text(path, content);
            written.push_back(path);
            files.push_back(stem + suffix);
        }
        rendered.summary["files"] = std::move(files);
        entries.push_back(std::move(rendered.summary));
    }
    Json summary;
    summary["entries"] = std::move(entries);
    const auto path = out_dir / "summary.json";
    detail::write_text(path, summary.dump(2) + "\n");
    written.push_back(path);
    return written;
}

} // namespace ssd
