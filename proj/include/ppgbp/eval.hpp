#pragma once

#include "ppgbp/errors.hpp"
#include "ppgbp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ppgbp {

struct RegressionMetrics {
    std::size_t n = 0;
    double mae = 0.0;         // mean |pred - truth|, mm Hg
    double sd_residual = 0.0; // sample SD of (pred - truth)
    double pearson_r = 0.0;
};

struct BlandAltman {
    double bias = 0.0; // mean (pred - truth)
    double loa_low = 0.0;
    double loa_high = 0.0;
    std::vector<std::pair<double, double>> pairs; // (mean, difference)
};

struct ClassificationMetrics {
    std::size_t n = 0;
    double accuracy = 0.0;
    std::optional<double> ppv, npv, sensitivity, specificity;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct MannWhitneyResult {
    double u = 0.0;
    double p_two_sided = 1.0;
    bool exact = false; // which path produced the p-value
};

struct McNemarResult {
    double statistic = 0.0;
    double p = 1.0;
    bool exact = false;
};

inline RegressionMetrics regression_metrics(const std::vector<double>& pred,
                                            const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("regression_metrics: length mismatch");
    const std::size_t n = pred.size();
    if (n < 2) throw LengthMismatch("regression_metrics: need at least 2 pairs");

    RegressionMetrics m;
    m.n = n;
    double sum_abs = 0.0, sum_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred[i] - truth[i];
        sum_abs += std::abs(d);
        sum_d += d;
    }
    m.mae = sum_abs / n;
    const double dbar = sum_d / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred[i] - truth[i] - dbar;
        ss += d * d;
    }
    m.sd_residual = std::sqrt(ss / (n - 1));

    double mp = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mp += pred[i]; mt += truth[i]; }
    mp /= n; mt /= n;
    double spp = 0.0, stt = 0.0, spt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        spp += (pred[i] - mp) * (pred[i] - mp);
        stt += (truth[i] - mt) * (truth[i] - mt);
        spt += (pred[i] - mp) * (truth[i] - mt);
    }
    if (stt == 0.0) throw DegenerateVariance("regression_metrics: truth has zero variance");
    if (pred == truth) {
        m.pearson_r = 1.0; // exact equality; avoids 0/0 when both are constant
    } else if (spp == 0.0) {
        throw DegenerateVariance("regression_metrics: predictions have zero variance");
    } else {
        m.pearson_r = spt / std::sqrt(spp * stt);
    }
    return m;
}

inline BlandAltman bland_altman(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("bland_altman: length mismatch");
    const std::size_t n = pred.size();
    if (n < 2) throw LengthMismatch("bland_altman: need at least 2 pairs");
    BlandAltman ba;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = pred[i] - truth[i];
        ba.pairs.emplace_back(0.5 * (pred[i] + truth[i]), diff);
        sum += diff;
    }
    ba.bias = sum / n;
    double ss = 0.0;
    for (const auto& [mean, diff] : ba.pairs) ss += (diff - ba.bias) * (diff - ba.bias);
    const double sd = std::sqrt(ss / (n - 1));
    ba.loa_low = ba.bias - 1.96 * sd;
    ba.loa_high = ba.bias + 1.96 * sd;
    return ba;
}

inline ClassificationMetrics classification_metrics(const std::vector<bool>& pred_class,
                                                    const std::vector<bool>& true_class) {
    if (pred_class.size() != true_class.size())
        throw LengthMismatch("classification_metrics: length mismatch");
    if (pred_class.empty()) throw LengthMismatch("classification_metrics: empty input");
    ClassificationMetrics m;
    m.n = pred_class.size();
    for (std::size_t i = 0; i < m.n; ++i) {
        if (pred_class[i] && true_class[i]) ++m.tp;
        else if (pred_class[i] && !true_class[i]) ++m.fp;
        else if (!pred_class[i] && true_class[i]) ++m.fn;
        else ++m.tn;
    }
    m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.n);
    auto rate = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.ppv = rate(m.tp, m.tp + m.fp);
    m.npv = rate(m.tn, m.tn + m.fn);
    m.sensitivity = rate(m.tp, m.tp + m.fn);
    m.specificity = rate(m.tn, m.tn + m.fp);
    return m;
}

namespace detail {

// Midranks of the pooled sample; also reports whether any ties exist.
inline std::pair<std::vector<double>, bool> midranks(const std::vector<double>& pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> ranks(n);
    bool ties = false;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        if (j > i) ties = true;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return {ranks, ties};
}

// Exact null distribution of U for tie-free samples: f(m, u) = number of
// rank configurations of m "a" observations among m+n with statistic u.
inline double mann_whitney_exact_p(double u_obs, std::size_t na, std::size_t nb) {
    const std::size_t umax = na * nb;
    // c(m, n, u) = c(m-1, n, u-n) + c(m, n-1, u), rolled over m
    std::vector<std::vector<double>> prev(nb + 1, std::vector<double>(umax + 1, 0.0));
    for (std::size_t n = 0; n <= nb; ++n) prev[n][0] = 1.0;
    auto cur = prev;
    for (std::size_t m = 1; m <= na; ++m) {
        for (std::size_t n = 0; n <= nb; ++n)
            for (std::size_t u = 0; u <= umax; ++u) {
                double v = (u >= n) ? prev[n][u - n] : 0.0;
                if (n > 0) v += cur[n - 1][u];
                cur[n][u] = v;
            }
        std::swap(prev, cur);
    }
    const auto& dist = prev[nb];
    double total = 0.0;
    for (double v : dist) total += v;
    const double u_small = std::min(u_obs, static_cast<double>(umax) - u_obs);
    double tail = 0.0;
    for (std::size_t u = 0; u <= umax; ++u)
        if (static_cast<double>(u) <= u_small + 1e-12) tail += dist[u];
    return std::min(1.0, 2.0 * tail / total);
}

} // namespace detail

// Rank-sum U with midranks. Exact p (full enumeration of the null U
// distribution) for tie-free samples with na*nb <= 400; otherwise the normal
// approximation with tie and continuity corrections.
inline MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                        const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw EmptySample("mann_whitney_u: empty sample");
    const std::size_t na = a.size(), nb = b.size();
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    auto [ranks, ties] = detail::midranks(pooled);

    double ra = 0.0;
    for (std::size_t i = 0; i < na; ++i) ra += ranks[i];
    const double u = ra - static_cast<double>(na) * (na + 1) / 2.0;

    MannWhitneyResult res;
    res.u = u;
    if (!ties && na * nb <= 400) {
        res.exact = true;
        res.p_two_sided = detail::mann_whitney_exact_p(u, na, nb);
        return res;
    }

    const double n = static_cast<double>(na + nb);
    const double mean_u = static_cast<double>(na) * nb / 2.0;
    double tie_sum = 0.0;
    {
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_sum += t * t * t - t;
            i = j + 1;
        }
    }
    const double var_u =
        static_cast<double>(na) * nb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    if (var_u <= 0.0) {
        res.p_two_sided = 1.0; // all values identical
        return res;
    }
    const double z = (std::abs(u - mean_u) - 0.5) / std::sqrt(var_u);
    res.p_two_sided = std::min(1.0, std::erfc(std::max(0.0, z) / std::sqrt(2.0)));
    return res;
}

// Paired binary-outcome test on the discordant counts. Exact binomial below
// b + c = 25, continuity-corrected chi-square above.
inline McNemarResult mcnemar(std::size_t b_discordant, std::size_t c_discordant) {
    McNemarResult res;
    const std::size_t n = b_discordant + c_discordant;
    if (n == 0) {
        res.p = 1.0;
        res.exact = true;
        return res;
    }
    if (n >= 25) {
        const double d = std::abs(static_cast<double>(b_discordant) -
                                  static_cast<double>(c_discordant));
        const double num = std::max(d - 1.0, 0.0);
        res.statistic = num * num / static_cast<double>(n);
        res.p = std::erfc(std::sqrt(res.statistic / 2.0)); // chi-square(1) tail
        return res;
    }
    res.exact = true;
    const std::size_t k = std::min(b_discordant, c_discordant);
    // 2 * P(Bin(n, 0.5) <= k), clamped
    double cdf = 0.0;
    double log_half_n = static_cast<double>(n) * std::log(0.5);
    for (std::size_t i = 0; i <= k; ++i) {
        double log_c = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
        cdf += std::exp(log_c + log_half_n);
    }
    res.statistic = static_cast<double>(k);
    res.p = std::min(1.0, 2.0 * cdf);
    return res;
}

struct SessionResult {
    std::string session_id;
    double pred = 0.0;
    double truth = 0.0;
    Rhythm rhythm = Rhythm::NSR;
};

struct StratumReport {
    Rhythm rhythm = Rhythm::NSR;
    std::size_t n = 0;
    bool sufficient = false;
    RegressionMetrics metrics{};
    BlandAltman ba{};
    std::optional<MannWhitneyResult> vs_nsr; // absolute errors vs the NSR stratum
};

struct EvalReport {
    RegressionMetrics overall{};
    BlandAltman ba{};
    std::vector<StratumReport> strata;
    std::optional<ClassificationMetrics> classification;
};

// Overall metrics plus one stratum per rhythm present, each compared to NSR
// by a Mann-Whitney test on absolute errors.
inline EvalReport stratified_report(const std::vector<SessionResult>& results) {
    if (results.size() < 2) throw LengthMismatch("stratified_report: need at least 2 results");
    std::vector<double> pred, truth;
    for (const auto& r : results) {
        pred.push_back(r.pred);
        truth.push_back(r.truth);
    }
    EvalReport rep;
    rep.overall = regression_metrics(pred, truth);
    rep.ba = bland_altman(pred, truth);

    std::vector<double> nsr_abs_err;
    for (const auto& r : results)
        if (r.rhythm == Rhythm::NSR) nsr_abs_err.push_back(std::abs(r.pred - r.truth));

    for (Rhythm rh : {Rhythm::NSR, Rhythm::AF, Rhythm::FrequentEctopy, Rhythm::Paced}) {
        std::vector<double> p, t, abs_err;
        for (const auto& r : results)
            if (r.rhythm == rh) {
                p.push_back(r.pred);
                t.push_back(r.truth);
                abs_err.push_back(std::abs(r.pred - r.truth));
            }
        if (p.empty()) continue;
        StratumReport sr;
        sr.rhythm = rh;
        sr.n = p.size();
        sr.sufficient = p.size() >= 2;
        if (sr.sufficient) {
            sr.metrics = regression_metrics(p, t);
            sr.ba = bland_altman(p, t);
        }
        if (rh != Rhythm::NSR && !abs_err.empty() && !nsr_abs_err.empty())
            sr.vs_nsr = mann_whitney_u(abs_err, nsr_abs_err);
        rep.strata.push_back(std::move(sr));
    }
    return rep;
}

} // namespace ppgbp
