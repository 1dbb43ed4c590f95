#include "naop/report.hpp"

#include <sstream>

#include "naop/csv.hpp"
#include "naop/error.hpp"

namespace naop {

using nlohmann::json;

json to_json(const EvalReport& r) {
    json pr = json::array();
    for (const auto& p : r.pr) pr.push_back({{"precision", p.precision}, {"recall", p.recall}, {"threshold", p.threshold}});
    return {{"method", r.method},
            {"variant", r.variant},
            {"h", r.h},
            {"fold", r.fold},
            {"ap", r.ap},
            {"positive_rate", r.positive_rate()},
            {"counts",
             {{"n_valid_gt", r.counts.n_valid_gt},
              {"n_predictions", r.counts.n_predictions},
              {"tp", r.counts.tp},
              {"fp", r.counts.fp}}},
            {"pr", pr}};
}

json to_json(const LopoReport& r) {
    json folds = json::array();
    for (const auto& f : r.folds)
        folds.push_back({{"subject", f.subject},
                         {"n_train_tracks", f.n_train_tracks},
                         {"n_test_tracks", f.n_test_tracks},
                         {"skipped", f.skipped},
                         {"report", to_json(f.report)}});
    return {{"method", r.method},     {"variant", r.variant}, {"h", r.h},
            {"levels", r.levels},     {"mean_ap", r.mean_ap}, {"mean_positive_rate", r.mean_positive_rate},
            {"folds", folds}};
}

json to_json(const std::vector<LoooRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"class", r.object_class},
                       {"ap_without", r.ap_without},
                       {"ap_with", r.ap_with},
                       {"n_test", r.n_test},
                       {"n_active", r.n_active}});
    return out;
}

json to_json(const std::vector<TimeRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"offset", r.offset}, {"ap", r.ap}, {"positive_rate", r.positive_rate}, {"n_folds", r.n_folds}});
    return out;
}

json to_json(const std::vector<FireRateRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"threshold", r.threshold},
                       {"frac_active_fired", r.frac_active_fired},
                       {"precision", r.precision},
                       {"recall", r.recall},
                       {"n_active_gt", r.n_active_gt},
                       {"n_active_fired", r.n_active_fired}});
    return out;
}

json to_json(const std::vector<SweepRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"scheme", r.scheme},
                       {"h", r.h},
                       {"levels", r.levels},
                       {"variant", r.variant},
                       {"mean_ap", r.mean_ap},
                       {"mean_positive_rate", r.mean_positive_rate}});
    return out;
}

std::string pr_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "threshold,precision,recall\n";
    for (const auto& p : r.pr)
        os << fmt_double(p.threshold) << ',' << fmt_double(p.precision) << ',' << fmt_double(p.recall) << '\n';
    return os.str();
}

std::string folds_csv(const LopoReport& r) {
    std::ostringstream os;
    os << "subject,n_train_tracks,n_test_tracks,skipped,ap,positive_rate,n_valid_gt,n_predictions\n";
    for (const auto& f : r.folds)
        os << csv_field(f.subject) << ',' << f.n_train_tracks << ',' << f.n_test_tracks << ',' << (f.skipped ? 1 : 0)
           << ',' << fmt_double(f.report.ap) << ',' << fmt_double(f.report.positive_rate()) << ','
           << f.report.counts.n_valid_gt << ',' << f.report.counts.n_predictions << '\n';
    os << "mean,,,," << fmt_double(r.mean_ap) << ',' << fmt_double(r.mean_positive_rate) << ",,\n";
    return os.str();
}

std::string looo_csv(const std::vector<LoooRow>& rows) {
    std::ostringstream os;
    os << "class,ap_without,ap_with,n_test,n_active\n";
    for (const auto& r : rows)
        os << csv_field(r.object_class) << ',' << fmt_double(r.ap_without) << ',' << fmt_double(r.ap_with) << ','
           << r.n_test << ',' << r.n_active << '\n';
    return os.str();
}

std::string time_csv(const std::vector<TimeRow>& rows) {
    std::ostringstream os;
    os << "offset,ap,positive_rate,n_folds\n";
    for (const auto& r : rows)
        os << r.offset << ',' << fmt_double(r.ap) << ',' << fmt_double(r.positive_rate) << ',' << r.n_folds << '\n';
    return os.str();
}

std::string fire_rate_csv(const std::vector<FireRateRow>& rows) {
    std::ostringstream os;
    os << "threshold,frac_active_fired,precision,recall,n_active_gt,n_active_fired\n";
    for (const auto& r : rows)
        os << fmt_double(r.threshold) << ',' << fmt_double(r.frac_active_fired) << ',' << fmt_double(r.precision)
           << ',' << fmt_double(r.recall) << ',' << r.n_active_gt << ',' << r.n_active_fired << '\n';
    return os.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "scheme,h,levels,variant,mean_ap,mean_positive_rate\n";
    for (const auto& r : rows)
        os << r.scheme << ',' << r.h << ',' << r.levels << ',' << r.variant << ',' << fmt_double(r.mean_ap) << ','
           << fmt_double(r.mean_positive_rate) << '\n';
    return os.str();
}

namespace {

void collect(const json& doc, std::vector<PrCurve>& out) {
    if (doc.is_array()) {
        for (const auto& x : doc) collect(x, out);
        return;
    }
    if (!doc.is_object()) return;
    if (doc.contains("pr") && doc["pr"].is_array()) {
        PrCurve c;
        c.label = doc.value("method", std::string("report"));
        const auto variant = doc.value("variant", std::string());
        if (!variant.empty() && variant != "-") c.label += "/" + variant;
        const auto fold = doc.value("fold", std::string());
        if (!fold.empty()) c.label += " " + fold;
        c.ap = doc.value("ap", 0.0);
        for (const auto& p : doc["pr"])
            c.points.push_back({p.at("precision").get<double>(), p.at("recall").get<double>(),
                                p.value("threshold", 0.0)});
        out.push_back(std::move(c));
        return;
    }
    if (doc.contains("skipped") && doc["skipped"].is_boolean() && doc["skipped"].get<bool>()) return;
    for (const auto& [key, value] : doc.items()) collect(value, out);
}

}  // namespace

std::vector<PrCurve> curves_from_json(const json& doc) {
    std::vector<PrCurve> out;
    try {
        collect(doc, out);
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("malformed PR curve: ") + e.what());
    }
    if (out.empty()) fail(ErrorCode::Format, "report contains no PR curve");
    return out;
}

std::string render_pr_svg(const std::vector<PrCurve>& curves, int width, int height) {
    if (width < 200 || height < 150) fail(ErrorCode::InvalidArgument, "plot size too small");
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const double left = 60, right = 180, top = 20, bottom = 50;
    const double pw = width - left - right, ph = height - top - bottom;
    auto X = [&](double r) { return left + r * pw; };
    auto Y = [&](double p) { return top + (1.0 - p) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int i = 0; i <= 10; ++i) {
        const double v = i / 10.0;
        os << "<line x1=\"" << X(v) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(v) << "\" y2=\"" << Y(1)
           << "\" stroke=\"#eee\"/>\n";
        os << "<line x1=\"" << X(0) << "\" y1=\"" << Y(v) << "\" x2=\"" << X(1) << "\" y2=\"" << Y(v)
           << "\" stroke=\"#eee\"/>\n";
        os << "<text x=\"" << X(v) << "\" y=\"" << Y(0) + 15 << "\" text-anchor=\"middle\">" << v << "</text>\n";
        os << "<text x=\"" << X(0) - 6 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
    }
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << X(0.5) << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">recall</text>\n";
    os << "<text transform=\"translate(16," << Y(0.5) << ") rotate(-90)\" text-anchor=\"middle\">precision</text>\n";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        const char* color = palette[i % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : c.points) os << X(p.recall) << ',' << Y(p.precision) << ' ';
        os << "\"/>\n";
        const double ly = top + 14 * static_cast<double>(i) + 8;
        os << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 30
           << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        std::string label = c.label;
        for (auto [from, to] : {std::pair{'&', "&amp;"}, std::pair{'<', "&lt;"}, std::pair{'>', "&gt;"}}) {
            std::string escaped;
            for (char ch : label) escaped += ch == from ? std::string(to) : std::string(1, ch);
            label = escaped;
        }
        char ap[32];
        std::snprintf(ap, sizeof ap, "%.3f", c.ap);
        os << "<text x=\"" << width - right + 34 << "\" y=\"" << ly + 4 << "\">" << label << " (AP " << ap
           << ")</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string curves_csv(const std::vector<PrCurve>& curves) {
    std::ostringstream os;
    os << "curve,ap,threshold,precision,recall\n";
    for (const auto& c : curves)
        for (const auto& p : c.points)
            os << csv_field(c.label) << ',' << fmt_double(c.ap) << ',' << fmt_double(p.threshold) << ','
               << fmt_double(p.precision) << ',' << fmt_double(p.recall) << '\n';
    return os.str();
}

}  // namespace naop
