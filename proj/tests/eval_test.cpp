#include "ppgbp/eval.hpp"
#include "ppgbp/report_io.hpp"
#include "ppgbp/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ppgbp;

namespace {

TEST(RegressionMetrics, SmallExample) {
    const std::vector<double> pred{1.0, 2.0, 3.0};
    const std::vector<double> truth{1.0, 2.0, 4.0};
    const auto m = regression_metrics(pred, truth);
    EXPECT_EQ(m.n, 3u);
    EXPECT_NEAR(m.mae, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(m.sd_residual, std::sqrt(1.0 / 3.0), 1e-12);
    EXPECT_NEAR(m.pearson_r, 3.0 / std::sqrt(2.0 * 14.0 / 3.0), 1e-12);
}

TEST(RegressionMetrics, PerfectPrediction) {
    const std::vector<double> v{3.0, 7.0, 9.0};
    const auto m = regression_metrics(v, v);
    EXPECT_DOUBLE_EQ(m.mae, 0.0);
    EXPECT_DOUBLE_EQ(m.sd_residual, 0.0);
    EXPECT_DOUBLE_EQ(m.pearson_r, 1.0);
}

TEST(RegressionMetrics, AntiCorrelated) {
    const std::vector<double> truth{1.0, 2.0, 3.0};
    const std::vector<double> pred{3.0, 2.0, 1.0};
    EXPECT_NEAR(regression_metrics(pred, truth).pearson_r, -1.0, 1e-12);
}

TEST(RegressionMetrics, ConstantBiasHasZeroSd) {
    const std::vector<double> truth{1.0, 2.0, 3.0};
    const std::vector<double> pred{6.0, 7.0, 8.0};
    const auto m = regression_metrics(pred, truth);
    EXPECT_DOUBLE_EQ(m.mae, 5.0);
    EXPECT_DOUBLE_EQ(m.sd_residual, 0.0);
    EXPECT_NEAR(m.pearson_r, 1.0, 1e-12);
}

TEST(RegressionMetrics, Errors) {
    EXPECT_THROW(regression_metrics({1.0}, {1.0, 2.0}), LengthMismatch);
    EXPECT_THROW(regression_metrics({1.0}, {1.0}), LengthMismatch);
    EXPECT_THROW(regression_metrics({1.0, 2.0}, {5.0, 5.0}), DegenerateVariance);
    EXPECT_THROW(regression_metrics({5.0, 5.0}, {1.0, 2.0}), DegenerateVariance);
}

TEST(BlandAltman, SmallExample) {
    const std::vector<double> pred{1.0, 2.0, 3.0};
    const std::vector<double> truth{1.0, 2.0, 4.0};
    const auto ba = bland_altman(pred, truth);
    EXPECT_NEAR(ba.bias, -1.0 / 3.0, 1e-12);
    const double sd = std::sqrt(1.0 / 3.0);
    EXPECT_NEAR(ba.loa_low, -1.0 / 3.0 - 1.96 * sd, 1e-12);
    EXPECT_NEAR(ba.loa_high, -1.0 / 3.0 + 1.96 * sd, 1e-12);
    ASSERT_EQ(ba.pairs.size(), 3u);
    EXPECT_DOUBLE_EQ(ba.pairs[2].first, 3.5);
    EXPECT_DOUBLE_EQ(ba.pairs[2].second, -1.0);
}

TEST(BlandAltman, CoverageOnGaussianErrors) {
    // ~95% of differences fall inside the limits of agreement
    Rng rng(17);
    std::vector<double> pred, truth;
    for (int i = 0; i < 5000; ++i) {
        const double t = rng.uniform(90.0, 150.0);
        truth.push_back(t);
        pred.push_back(t + rng.normal(2.0, 5.0));
    }
    const auto ba = bland_altman(pred, truth);
    EXPECT_NEAR(ba.bias, 2.0, 0.3);
    std::size_t inside = 0;
    for (const auto& [mean, diff] : ba.pairs)
        inside += (diff >= ba.loa_low && diff <= ba.loa_high);
    const double frac = static_cast<double>(inside) / ba.pairs.size();
    EXPECT_GT(frac, 0.935);
    EXPECT_LT(frac, 0.965);
}

TEST(ClassificationMetrics, ConfusionAndRates) {
    const std::vector<bool> pred{true, true, false, false, true};
    const std::vector<bool> truth{true, false, true, false, true};
    const auto m = classification_metrics(pred, truth);
    EXPECT_EQ(m.tp, 2u);
    EXPECT_EQ(m.fp, 1u);
    EXPECT_EQ(m.fn, 1u);
    EXPECT_EQ(m.tn, 1u);
    EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
    EXPECT_DOUBLE_EQ(*m.ppv, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*m.npv, 0.5);
    EXPECT_DOUBLE_EQ(*m.sensitivity, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*m.specificity, 0.5);
}

TEST(ClassificationMetrics, UndefinedRatesAreNull) {
    // no positive predictions: ppv undefined
    const auto m = classification_metrics({false, false}, {true, false});
    EXPECT_FALSE(m.ppv.has_value());
    EXPECT_TRUE(m.npv.has_value());
    // no negatives in truth: specificity undefined
    const auto m2 = classification_metrics({true, false}, {true, true});
    EXPECT_FALSE(m2.specificity.has_value());
}

TEST(MannWhitney, ExactSmallSamples) {
    // complete separation of 2 vs 2: U = 0, two-sided p = 2/6
    auto r = mann_whitney_u({1.0, 2.0}, {3.0, 4.0});
    EXPECT_TRUE(r.exact);
    EXPECT_DOUBLE_EQ(r.u, 0.0);
    EXPECT_NEAR(r.p_two_sided, 1.0 / 3.0, 1e-12);

    // interleaved: U = 1, p = 2 * (1 + 1) / 6
    r = mann_whitney_u({1.0, 3.0}, {2.0, 4.0});
    EXPECT_TRUE(r.exact);
    EXPECT_DOUBLE_EQ(r.u, 1.0);
    EXPECT_NEAR(r.p_two_sided, 2.0 / 3.0, 1e-12);
}

TEST(MannWhitney, ExactSymmetry) {
    const std::vector<double> a{1.0, 5.0, 9.0, 11.0};
    const std::vector<double> b{2.0, 3.0, 7.0, 8.0, 10.0};
    const auto r1 = mann_whitney_u(a, b);
    const auto r2 = mann_whitney_u(b, a);
    ASSERT_TRUE(r1.exact);
    EXPECT_NEAR(r1.p_two_sided, r2.p_two_sided, 1e-12);
    EXPECT_DOUBLE_EQ(r1.u + r2.u, static_cast<double>(a.size() * b.size()));
}

TEST(MannWhitney, TiesForceAsymptotic) {
    const auto r = mann_whitney_u({1.0, 2.0, 2.0}, {2.0, 3.0, 4.0});
    EXPECT_FALSE(r.exact);
    EXPECT_GT(r.p_two_sided, 0.0);
    EXPECT_LE(r.p_two_sided, 1.0);
}

TEST(MannWhitney, LargeSamplesAsymptotic) {
    std::vector<double> a, b;
    for (int i = 0; i < 21; ++i) {
        a.push_back(i);             // 0..20
        b.push_back(i + 0.5);       // interleaved, no ties
    }
    const auto r = mann_whitney_u(a, b); // 21*21 = 441 > 400
    EXPECT_FALSE(r.exact);
    EXPECT_GT(r.p_two_sided, 0.5); // nearly identical distributions
}

TEST(MannWhitney, SeparationGivesSmallP) {
    std::vector<double> a, b;
    for (int i = 0; i < 15; ++i) {
        a.push_back(i);
        b.push_back(100.0 + i);
    }
    const auto r = mann_whitney_u(a, b);
    EXPECT_TRUE(r.exact); // 225 <= 400, tie-free
    EXPECT_LT(r.p_two_sided, 1e-4);
}

TEST(MannWhitney, AsymptoticMatchesExactModerately) {
    // same data through both paths should roughly agree
    std::vector<double> a{1.0, 4.0, 6.0, 9.0, 13.0, 14.0, 17.0};
    std::vector<double> b{2.0, 3.0, 5.0, 7.0, 8.0, 10.0, 11.0};
    const auto exact = mann_whitney_u(a, b);
    ASSERT_TRUE(exact.exact);
    // force the asymptotic path with a duplicate value appended to each side
    auto a2 = a;
    auto b2 = b;
    a2.push_back(20.0);
    b2.push_back(20.0);
    const auto asym = mann_whitney_u(a2, b2);
    ASSERT_FALSE(asym.exact);
    EXPECT_NEAR(exact.p_two_sided, asym.p_two_sided, 0.15);
}

TEST(MannWhitney, EmptySampleThrows) {
    EXPECT_THROW(mann_whitney_u({}, {1.0}), EmptySample);
    EXPECT_THROW(mann_whitney_u({1.0}, {}), EmptySample);
}

TEST(McNemar, ExactBinomial) {
    // b=1, c=9: p = 2 * sum_{i<=1} C(10,i) / 2^10 = 22/1024
    const auto r = mcnemar(1, 9);
    EXPECT_TRUE(r.exact);
    EXPECT_NEAR(r.p, 22.0 / 1024.0, 1e-12);
}

TEST(McNemar, ExactBalancedClampsToOne) {
    const auto r = mcnemar(5, 5);
    EXPECT_TRUE(r.exact);
    EXPECT_DOUBLE_EQ(r.p, 1.0);
}

TEST(McNemar, NoDiscordantPairs) {
    const auto r = mcnemar(0, 0);
    EXPECT_DOUBLE_EQ(r.p, 1.0);
}

TEST(McNemar, ChiSquareLargeCounts) {
    // b=20, c=10: stat = (|10|-1)^2 / 30 = 2.7, p = chi2(1) upper tail
    const auto r = mcnemar(20, 10);
    EXPECT_FALSE(r.exact);
    EXPECT_NEAR(r.statistic, 2.7, 1e-12);
    EXPECT_NEAR(r.p, 0.10035, 1e-4);
}

TEST(McNemar, SymmetricInArguments) {
    const auto r1 = mcnemar(20, 10);
    const auto r2 = mcnemar(10, 20);
    EXPECT_DOUBLE_EQ(r1.p, r2.p);
    const auto e1 = mcnemar(2, 8);
    const auto e2 = mcnemar(8, 2);
    EXPECT_DOUBLE_EQ(e1.p, e2.p);
}

std::vector<SessionResult> make_results() {
    Rng rng(3);
    std::vector<SessionResult> out;
    int id = 0;
    auto add = [&](Rhythm rh, std::size_t n, double err_sd) {
        for (std::size_t i = 0; i < n; ++i) {
            SessionResult r;
            r.session_id = "s" + std::to_string(id++);
            r.rhythm = rh;
            r.truth = rng.uniform(95.0, 145.0);
            r.pred = r.truth + rng.normal(0.0, err_sd);
            out.push_back(r);
        }
    };
    add(Rhythm::NSR, 30, 4.0);
    add(Rhythm::AF, 15, 12.0);
    add(Rhythm::Paced, 10, 4.0);
    return out;
}

TEST(StratifiedReport, StructureAndComparisons) {
    const auto results = make_results();
    const auto rep = stratified_report(results);
    EXPECT_EQ(rep.overall.n, results.size());
    ASSERT_EQ(rep.strata.size(), 3u); // NSR, AF, Paced present
    EXPECT_EQ(rep.strata[0].rhythm, Rhythm::NSR);
    EXPECT_FALSE(rep.strata[0].vs_nsr.has_value());
    EXPECT_EQ(rep.strata[1].rhythm, Rhythm::AF);
    ASSERT_TRUE(rep.strata[1].vs_nsr.has_value());
    // AF errors are much larger than NSR errors
    EXPECT_LT(rep.strata[1].vs_nsr->p_two_sided, 0.01);
    EXPECT_GT(rep.strata[1].metrics.mae, rep.strata[0].metrics.mae);
    // Paced errors match NSR errors in distribution
    ASSERT_TRUE(rep.strata[2].vs_nsr.has_value());
    EXPECT_GT(rep.strata[2].vs_nsr->p_two_sided, 0.05);
}

TEST(StratifiedReport, SmallStratumMarkedInsufficient) {
    auto results = make_results();
    SessionResult lone;
    lone.session_id = "lonely";
    lone.rhythm = Rhythm::FrequentEctopy;
    lone.truth = 120.0;
    lone.pred = 125.0;
    results.push_back(lone);
    const auto rep = stratified_report(results);
    ASSERT_EQ(rep.strata.size(), 4u);
    EXPECT_EQ(rep.strata[2].rhythm, Rhythm::FrequentEctopy);
    EXPECT_FALSE(rep.strata[2].sufficient);
    EXPECT_EQ(rep.strata[2].n, 1u);
}

TEST(ReportIo, JsonHasExpectedKeys) {
    const auto rep = stratified_report(make_results());
    const auto j = report_to_json(rep);
    EXPECT_TRUE(j.contains("overall"));
    EXPECT_TRUE(j.contains("bland_altman"));
    EXPECT_TRUE(j.at("strata").is_array());
    EXPECT_EQ(j.at("overall").at("n").get<std::size_t>(), rep.overall.n);
    EXPECT_FALSE(j.contains("classification"));
}

TEST(ReportIo, TableMentionsEveryStratum) {
    const auto rep = stratified_report(make_results());
    const auto table = report_to_table(rep);
    EXPECT_NE(table.find("All"), std::string::npos);
    EXPECT_NE(table.find("NSR"), std::string::npos);
    EXPECT_NE(table.find("AF"), std::string::npos);
    EXPECT_NE(table.find("Paced"), std::string::npos);
}

TEST(ReportIo, SvgIsWellFormedEnough) {
    const auto results = make_results();
    std::vector<double> pred, truth;
    for (const auto& r : results) {
        pred.push_back(r.pred);
        truth.push_back(r.truth);
    }
    const auto rep = stratified_report(results);
    const auto svg = report_to_svg(rep, pred, truth);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    // one scatter circle per session in each panel
    std::size_t circles = 0, pos = 0;
    while ((pos = svg.find("<circle", pos)) != std::string::npos) {
        ++circles;
        ++pos;
    }
    EXPECT_EQ(circles, 2 * results.size());
}

} // namespace
