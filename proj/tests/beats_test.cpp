#include "ppgbp/beats.hpp"
#include "ppgbp/rng.hpp"
#include "ppgbp/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ppgbp;

namespace {

TimeSeries normalized_sine(double freq, double fs, double duration_s) {
    TimeSeries x;
    x.fs = fs;
    const std::size_t n = static_cast<std::size_t>(duration_s * fs);
    for (std::size_t i = 0; i < n; ++i)
        x.samples.push_back(0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * freq * i / fs));
    return x;
}

Beat make_beat(std::vector<double> samples, std::size_t peak = 0) {
    Beat b;
    b.samples = std::move(samples);
    b.peak_index = peak;
    return b;
}

TEST(SegmentBeats, SineGeometry) {
    const auto x = normalized_sine(1.0, 60.0, 10.5);
    const auto peaks = detect_peaks(x, {});
    ASSERT_EQ(peaks.size(), 11u);
    const auto beats = segment_beats(x, peaks);
    ASSERT_EQ(beats.size(), 10u);
    // the first foot is clipped at the signal start, so skip beat 0
    EXPECT_LE(beats[0].samples.size(), 60u);
    for (std::size_t k = 1; k < beats.size(); ++k) {
        const auto& b = beats[k];
        EXPECT_GE(b.samples.size(), 59u);
        EXPECT_LE(b.samples.size(), 61u);
        // exactly one detected peak inside: the one it was built around
        EXPECT_LT(b.peak_index, b.samples.size());
        EXPECT_NEAR(b.samples[b.peak_index], 1.0, 1e-6);
    }
}

TEST(SegmentBeats, TwoPeaksGiveOneBeat) {
    const auto x = normalized_sine(1.0, 60.0, 2.2);
    const auto peaks = detect_peaks(x, {});
    ASSERT_EQ(peaks.size(), 2u);
    const auto beats = segment_beats(x, peaks);
    ASSERT_EQ(beats.size(), 1u);
    EXPECT_EQ(beats[0].start_index + beats[0].peak_index, peaks[0]);
}

TEST(SegmentBeats, FootIsLowOnSyntheticPulses) {
    MorphParams m;
    auto session = synth_session({}, m, 30.0, {}, 7);
    auto norm = minmax_normalize(session.signal);
    const auto peaks = detect_peaks(norm, {});
    ASSERT_GE(peaks.size(), 10u);
    const auto beats = segment_beats(norm, peaks);
    for (const auto& b : beats)
        EXPECT_LT(b.samples.front(), 0.3 * b.samples[b.peak_index]);
}

TEST(SegmentBeats, FewerThanTwoPeaksThrows) {
    const auto x = normalized_sine(1.0, 60.0, 1.0);
    EXPECT_THROW(segment_beats(x, {}), FewerThanTwoPeaks);
}

TEST(ComputeTemplate, IdenticalBeats) {
    std::vector<Beat> beats(4, make_beat({0.0, 0.5, 1.0, 0.25, 0.1}));
    const auto tpl = compute_template(beats);
    ASSERT_EQ(tpl.template_len, 5u);
    for (std::size_t i = 0; i < 5; ++i)
        EXPECT_NEAR(tpl.samples[i], beats[0].samples[i], 1e-12);
}

TEST(ComputeTemplate, MeanOfConstants) {
    std::vector<Beat> beats{make_beat(std::vector<double>(10, 0.0)),
                            make_beat(std::vector<double>(10, 1.0))};
    const auto tpl = compute_template(beats);
    for (double v : tpl.samples) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(ComputeTemplate, MedianLength) {
    std::vector<Beat> beats{make_beat(std::vector<double>(50, 0.0)),
                            make_beat(std::vector<double>(60, 0.0)),
                            make_beat(std::vector<double>(70, 0.0))};
    EXPECT_EQ(compute_template(beats).template_len, 60u);
}

TEST(ComputeTemplate, PermutationInvariant) {
    Rng rng(3);
    std::vector<Beat> beats;
    for (int k = 0; k < 7; ++k) {
        std::vector<double> s(40 + k);
        for (auto& v : s) v = rng.uniform();
        beats.push_back(make_beat(std::move(s)));
    }
    const auto t1 = compute_template(beats);
    std::reverse(beats.begin(), beats.end());
    const auto t2 = compute_template(beats);
    ASSERT_EQ(t1.template_len, t2.template_len);
    for (std::size_t i = 0; i < t1.samples.size(); ++i)
        EXPECT_NEAR(t1.samples[i], t2.samples[i], 1e-12);
}

TEST(ComputeTemplate, NoBeatsThrows) {
    EXPECT_THROW(compute_template({}), NoBeats);
}

TEST(BeatSqi, IdenticalBeatIsOne) {
    auto beat = make_beat({0.0, 0.4, 1.0, 0.6, 0.2});
    const auto tpl = compute_template({beat});
    EXPECT_NEAR(beat_sqi(beat, tpl), 1.0, 1e-12);
}

TEST(BeatSqi, NegatedBeatClampsToZero) {
    auto beat = make_beat({0.0, 0.4, 1.0, 0.6, 0.2});
    const auto tpl = compute_template({beat});
    Beat neg = beat;
    for (auto& v : neg.samples) v = -v;
    EXPECT_DOUBLE_EQ(beat_sqi(neg, tpl), 0.0);
}

TEST(BeatSqi, NoiseBeatScoresLow) {
    MorphParams m;
    auto smooth = make_beat(synth_beat(m, 0.85, 60.0));
    const auto tpl = compute_template({smooth});
    Rng rng(42);
    Beat noise;
    noise.samples.resize(tpl.template_len);
    for (auto& v : noise.samples) v = rng.uniform();
    EXPECT_LT(beat_sqi(noise, tpl), 0.8);
}

TEST(BeatSqi, AffineInvariance) {
    MorphParams m;
    auto beat = make_beat(synth_beat(m, 0.85, 60.0));
    const auto tpl = compute_template({beat, make_beat(synth_beat(m, 0.9, 60.0))});
    const double q1 = beat_sqi(beat, tpl);
    Beat scaled = beat;
    for (auto& v : scaled.samples) v = 3.7 * v + 11.0;
    EXPECT_NEAR(beat_sqi(scaled, tpl), q1, 1e-9);
}

TEST(BeatSqi, ConstantBeatThrows) {
    auto tpl = compute_template({make_beat({0.0, 1.0, 0.0})});
    EXPECT_THROW(beat_sqi(make_beat({0.5, 0.5, 0.5}), tpl), ZeroVariance);
}

TEST(SelectWindows, SingleQualifyingWindow) {
    const auto w = select_windows({0.9, 0.9, 0.9, 0.9, 0.9});
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].start_beat_index, 0u);
    EXPECT_NEAR(w[0].mean_sqi, 0.9, 1e-12);
}

TEST(SelectWindows, TooFewBeats) {
    EXPECT_TRUE(select_windows({0.9, 0.9, 0.9, 0.9}).empty());
}

TEST(SelectWindows, RankingAndTieBreak) {
    // dyadic values so both tied window means are exactly equal
    const auto w = select_windows({0.9375, 0.9375, 0.9375, 0.9375, 0.9375, 0.6875, 0.9375});
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(w[0].start_beat_index, 0u);
    EXPECT_DOUBLE_EQ(w[0].mean_sqi, 0.9375);
    // windows at 1 and 2 share mean 0.8875; tie keeps the smaller start first
    EXPECT_EQ(w[1].start_beat_index, 1u);
    EXPECT_EQ(w[2].start_beat_index, 2u);
    EXPECT_DOUBLE_EQ(w[1].mean_sqi, 0.8875);
    EXPECT_DOUBLE_EQ(w[2].mean_sqi, w[1].mean_sqi);
}

TEST(SelectWindows, CapAndThreshold) {
    std::vector<double> sqis(40, 0.95);
    const auto w = select_windows(sqis);
    EXPECT_LE(w.size(), kMaxWindows);
    for (const auto& win : w) EXPECT_GT(win.mean_sqi, kSqiThreshold);

    std::vector<double> low(40, 0.5);
    EXPECT_TRUE(select_windows(low).empty());
}

TEST(ScreenSession, TooFewPeaks) {
    // 49 well-separated peaks
    TimeSeries x{std::vector<double>(49 * 40 + 40, 0.0), 60.0};
    for (int k = 0; k < 49; ++k) x.samples[20 + 40 * k] = 1.0;
    const auto res = screen_session(x, {});
    EXPECT_EQ(res.status, ScreenStatus::ExcludedTooFewPeaks);
    EXPECT_EQ(res.peak_count, 49u);
}

TEST(ScreenSession, CleanSyntheticAccepted) {
    MorphParams m;
    auto session = synth_session({}, m, 60.0, {}, 11);
    const auto res = screen_session(minmax_normalize(session.signal), {});
    EXPECT_EQ(res.status, ScreenStatus::Accepted);
    ASSERT_TRUE(res.best_window_sqi.has_value());
    EXPECT_GT(*res.best_window_sqi, 0.95);
    EXPECT_GE(res.peak_count, kMinPeaks);
}

TEST(ScreenSession, NoisyBeatsExcludedLowSqi) {
    // enough sharp peaks but alternating-shape beats: correlation to the
    // template stays low
    Rng rng(5);
    TimeSeries x{std::vector<double>(60 * 40 + 40, 0.0), 60.0};
    for (int k = 0; k < 60; ++k) {
        const std::size_t base = 40 * k;
        x.samples[base + 20] = 1.0;
        // random filler between peaks destroys beat-shape consistency
        for (std::size_t i = 0; i < 40; ++i)
            if (i != 20) x.samples[base + i] = 0.65 * rng.uniform();
    }
    const auto res = screen_session(x, {});
    EXPECT_EQ(res.status, ScreenStatus::ExcludedLowSqi);
}

TEST(ScreenSession, AcceptedImpliesThresholds) {
    MorphParams m;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto session = synth_session({}, m, 60.0, {0.01, 0.02}, seed);
        const auto res = screen_session(minmax_normalize(session.signal), {});
        if (res.status == ScreenStatus::Accepted) {
            EXPECT_GE(res.peak_count, kMinPeaks);
            ASSERT_TRUE(res.best_window_sqi.has_value());
            EXPECT_GT(*res.best_window_sqi, kSqiThreshold);
        }
    }
}

TEST(PadBeat, PadsWithZeros) {
    auto padded = pad_beat(make_beat(std::vector<double>(300, 0.5)));
    ASSERT_EQ(padded.size(), kPaddedBeatLen);
    for (std::size_t i = 0; i < 300; ++i) EXPECT_DOUBLE_EQ(padded[i], 0.5);
    for (std::size_t i = 300; i < kPaddedBeatLen; ++i) EXPECT_DOUBLE_EQ(padded[i], 0.0);
}

TEST(PadBeat, ExactLengthUnchanged) {
    auto padded = pad_beat(make_beat(std::vector<double>(512, 0.25)));
    for (double v : padded) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(PadBeat, TooLongThrows) {
    EXPECT_THROW(pad_beat(make_beat(std::vector<double>(513, 0.0))), BeatTooLong);
}

} // namespace
