#pragma once

#include "ppgbp/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace ppgbp {

inline nlohmann::json report_to_json(const EvalReport& rep) {
    using nlohmann::json;
    auto metrics_json = [](const RegressionMetrics& m) {
        return json{{"n", m.n},
                    {"mae", m.mae},
                    {"sd_residual", m.sd_residual},
                    {"pearson_r", m.pearson_r}};
    };
    auto ba_json = [](const BlandAltman& ba) {
        return json{{"bias", ba.bias}, {"loa_low", ba.loa_low}, {"loa_high", ba.loa_high}};
    };
    json j;
    j["overall"] = metrics_json(rep.overall);
    j["bland_altman"] = ba_json(rep.ba);
    json strata = json::array();
    for (const auto& s : rep.strata) {
        json sj;
        sj["rhythm"] = rhythm_to_string(s.rhythm);
        sj["n"] = s.n;
        sj["sufficient"] = s.sufficient;
        if (s.sufficient) {
            sj["metrics"] = metrics_json(s.metrics);
            sj["bland_altman"] = ba_json(s.ba);
        }
        if (s.vs_nsr) {
            sj["vs_nsr"] = {{"u", s.vs_nsr->u},
                            {"p_two_sided", s.vs_nsr->p_two_sided},
                            {"exact", s.vs_nsr->exact}};
        }
        strata.push_back(std::move(sj));
    }
    j["strata"] = std::move(strata);
    if (rep.classification) {
        const auto& c = *rep.classification;
        nlohmann::json cj;
        cj["n"] = c.n;
        cj["accuracy"] = c.accuracy;
        auto put = [&](const char* k, const std::optional<double>& v) {
            if (v) cj[k] = *v;
            else cj[k] = nullptr;
        };
        put("ppv", c.ppv);
        put("npv", c.npv);
        put("sensitivity", c.sensitivity);
        put("specificity", c.specificity);
        cj["confusion"] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
        j["classification"] = std::move(cj);
    }
    return j;
}

// Fixed-width text table: overall row plus one row per rhythm stratum.
inline std::string report_to_table(const EvalReport& rep) {
    std::ostringstream os;
    os << std::fixed;
    auto row = [&](const std::string& name, std::size_t n, const RegressionMetrics& m,
                   const std::optional<MannWhitneyResult>& vs) {
        os << std::left << std::setw(16) << name << std::right << std::setw(6) << n
           << std::setw(10) << std::setprecision(3) << m.pearson_r << std::setw(10)
           << std::setprecision(2) << m.mae << std::setw(10) << m.sd_residual;
        if (vs)
            os << std::setw(12) << std::setprecision(4) << vs->p_two_sided
               << (vs->exact ? "  exact" : "  asymptotic");
        os << "\n";
    };
    os << std::left << std::setw(16) << "Group" << std::right << std::setw(6) << "n"
       << std::setw(10) << "r" << std::setw(10) << "MAE" << std::setw(10) << "SD"
       << std::setw(12) << "p(vs NSR)" << "\n";
    os << std::string(70, '-') << "\n";
    row("All", rep.overall.n, rep.overall, std::nullopt);
    for (const auto& s : rep.strata) {
        if (!s.sufficient) {
            os << std::left << std::setw(16) << rhythm_to_string(s.rhythm) << std::right
               << std::setw(6) << s.n << "  (insufficient n)\n";
            continue;
        }
        row(rhythm_to_string(s.rhythm), s.n, s.metrics, s.vs_nsr);
    }
    if (rep.classification) {
        const auto& c = *rep.classification;
        auto fmt = [](const std::optional<double>& v) {
            if (!v) return std::string("n/a");
            std::ostringstream s;
            s << std::fixed << std::setprecision(3) << *v;
            return s.str();
        };
        os << "\nClassification (n=" << c.n << "): accuracy=" << std::setprecision(3)
           << c.accuracy << " ppv=" << fmt(c.ppv) << " npv=" << fmt(c.npv)
           << " sensitivity=" << fmt(c.sensitivity) << " specificity=" << fmt(c.specificity)
           << "\n";
    }
    return os.str();
}

// Bland-Altman pairs as CSV for external plotting.
inline void write_bland_altman_csv(const BlandAltman& ba, std::ostream& os) {
    os << "mean,difference\n";
    for (const auto& [mean, diff] : ba.pairs)
        os << nlohmann::json(mean).dump() << "," << nlohmann::json(diff).dump() << "\n";
}

namespace detail {

struct SvgAxis {
    double lo, hi;
    double x0, x1; // pixel range
    double map(double v) const { return x0 + (v - lo) / (hi - lo) * (x1 - x0); }
};

} // namespace detail

// Static SVG with a correlation scatter (left) and Bland-Altman plot (right).
inline std::string report_to_svg(const EvalReport& rep, const std::vector<double>& pred,
                                 const std::vector<double>& truth) {
    const double w = 900, h = 420;
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    auto bounds = [](const std::vector<double>& v) {
        double lo = v[0], hi = v[0];
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        const double pad = std::max(1.0, 0.05 * (hi - lo));
        return std::pair<double, double>{lo - pad, hi + pad};
    };

    // scatter: truth (x) vs prediction (y)
    auto [tlo, thi] = bounds(truth);
    auto [plo, phi] = bounds(pred);
    detail::SvgAxis sx{tlo, thi, 60, 420};
    detail::SvgAxis sy{plo, phi, 380, 40};
    os << "<text x=\"240\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">Prediction vs truth "
          "(r="
       << std::setprecision(3) << rep.overall.pearson_r << ")</text>\n"
       << std::setprecision(2);
    os << "<rect x=\"60\" y=\"40\" width=\"360\" height=\"340\" fill=\"none\" "
          "stroke=\"black\"/>\n";
    const double dlo = std::max(tlo, plo), dhi = std::min(thi, phi);
    os << "<line x1=\"" << sx.map(dlo) << "\" y1=\"" << sy.map(dlo) << "\" x2=\"" << sx.map(dhi)
       << "\" y2=\"" << sy.map(dhi) << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
    for (std::size_t i = 0; i < pred.size(); ++i)
        os << "<circle cx=\"" << sx.map(truth[i]) << "\" cy=\"" << sy.map(pred[i])
           << "\" r=\"2.5\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";

    // Bland-Altman: mean (x) vs difference (y)
    std::vector<double> means, diffs;
    for (const auto& [m, d] : rep.ba.pairs) {
        means.push_back(m);
        diffs.push_back(d);
    }
    auto [mlo, mhi] = bounds(means);
    auto [ylo0, yhi0] = bounds(diffs);
    const double ylo = std::min(ylo0, rep.ba.loa_low - 1.0);
    const double yhi = std::max(yhi0, rep.ba.loa_high + 1.0);
    detail::SvgAxis bx{mlo, mhi, 500, 860};
    detail::SvgAxis by{ylo, yhi, 380, 40};
    os << "<text x=\"680\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">Bland-Altman "
          "(bias="
       << rep.ba.bias << ")</text>\n";
    os << "<rect x=\"500\" y=\"40\" width=\"360\" height=\"340\" fill=\"none\" "
          "stroke=\"black\"/>\n";
    for (double yv : {rep.ba.bias, rep.ba.loa_low, rep.ba.loa_high})
        os << "<line x1=\"500\" y1=\"" << by.map(yv) << "\" x2=\"860\" y2=\"" << by.map(yv)
           << "\" stroke=\"" << (yv == rep.ba.bias ? "black" : "gray")
           << "\" stroke-dasharray=\"4\"/>\n";
    for (std::size_t i = 0; i < means.size(); ++i)
        os << "<circle cx=\"" << bx.map(means[i]) << "\" cy=\"" << by.map(diffs[i])
           << "\" r=\"2.5\" fill=\"indianred\" fill-opacity=\"0.6\"/>\n";
    os << "</svg>\n";
    return os.str();
}

} // namespace ppgbp
