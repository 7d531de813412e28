#pragma once

#include "ppgbp/errors.hpp"
#include "ppgbp/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace ppgbp {

inline constexpr std::size_t kPaddedBeatLen = 512;
inline constexpr std::size_t kWindowBeats = 5;
inline constexpr std::size_t kMaxWindows = 20;
inline constexpr double kSqiThreshold = 0.8;
inline constexpr std::size_t kMinPeaks = 50;

// One foot-to-foot pulse segment cut from the filtered, normalized signal.
struct Beat {
    std::vector<double> samples;
    std::size_t peak_index = 0;  // offset of the systolic peak inside samples
    std::size_t start_index = 0; // position of samples[0] in the parent signal
};

struct BeatTemplate {
    std::vector<double> samples;
    std::size_t template_len = 0; // median beat length of the session
};

struct BeatWindow {
    std::size_t start_beat_index = 0;
    double mean_sqi = 0.0;
};

enum class ScreenStatus { Accepted, ExcludedTooFewPeaks, ExcludedLowSqi };

struct ScreenResult {
    ScreenStatus status = ScreenStatus::ExcludedTooFewPeaks;
    std::size_t peak_count = 0;
    std::optional<double> best_window_sqi;
};

// Linear-interpolation resample to a fixed length (>= 2).
inline std::vector<double> resample_linear(const std::vector<double>& x, std::size_t len) {
    std::vector<double> out(len);
    if (x.size() == 1) {
        std::fill(out.begin(), out.end(), x[0]);
        return out;
    }
    const double step = static_cast<double>(x.size() - 1) / static_cast<double>(len - 1);
    for (std::size_t j = 0; j < len; ++j) {
        const double pos = step * static_cast<double>(j);
        const std::size_t i = std::min(static_cast<std::size_t>(pos), x.size() - 2);
        const double frac = pos - static_cast<double>(i);
        out[j] = x[i] * (1.0 - frac) + x[i + 1] * frac;
    }
    return out;
}

// Cut one beat per adjacent peak pair. The systolic foot of a beat is the
// minimum-valued sample in the min_distance-wide window ending at its peak
// (earliest index on ties); the beat runs from its foot to the next foot.
inline std::vector<Beat> segment_beats(const TimeSeries& x,
                                       const std::vector<std::size_t>& peaks,
                                       const PeakSpec& spec = {}) {
    if (peaks.size() < 2) throw FewerThanTwoPeaks("segment_beats: need at least 2 peaks");
    const auto& s = x.samples;
    auto foot_of = [&](std::size_t peak) {
        const std::size_t lo =
            peak >= static_cast<std::size_t>(spec.min_distance) ? peak - spec.min_distance + 1 : 0;
        std::size_t best = lo;
        for (std::size_t i = lo + 1; i <= peak; ++i)
            if (s[i] < s[best]) best = i;
        return best;
    };
    std::vector<Beat> beats;
    beats.reserve(peaks.size() - 1);
    for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
        const std::size_t a = foot_of(peaks[k]);
        const std::size_t b = foot_of(peaks[k + 1]);
        Beat beat;
        beat.start_index = a;
        beat.peak_index = peaks[k] - a;
        beat.samples.assign(s.begin() + a, s.begin() + b);
        beats.push_back(std::move(beat));
    }
    return beats;
}

// Pointwise mean of all beats after resampling each to the session's
// median beat length.
inline BeatTemplate compute_template(const std::vector<Beat>& beats) {
    if (beats.empty()) throw NoBeats("compute_template: no beats");
    std::vector<std::size_t> lens;
    lens.reserve(beats.size());
    for (const auto& b : beats) lens.push_back(b.samples.size());
    std::sort(lens.begin(), lens.end());
    std::size_t med;
    if (lens.size() % 2 == 1) {
        med = lens[lens.size() / 2];
    } else {
        med = (lens[lens.size() / 2 - 1] + lens[lens.size() / 2] + 1) / 2;
    }
    med = std::max<std::size_t>(med, 2);

    BeatTemplate tpl;
    tpl.template_len = med;
    tpl.samples.assign(med, 0.0);
    for (const auto& b : beats) {
        auto r = resample_linear(b.samples, med);
        for (std::size_t i = 0; i < med; ++i) tpl.samples[i] += r[i];
    }
    for (double& v : tpl.samples) v /= static_cast<double>(beats.size());
    return tpl;
}

namespace detail {

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) { ma += a[i]; mb += b[i]; }
    ma /= n; mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw ZeroVariance("pearson: constant input");
    return sab / std::sqrt(saa * sbb);
}

} // namespace detail

// Template-matching SQI: Pearson correlation between the beat (resampled to
// the template length) and the template, clamped below at 0.
inline double beat_sqi(const Beat& beat, const BeatTemplate& tpl) {
    if (beat.samples.size() < 2) throw ZeroVariance("beat_sqi: beat too short");
    const auto r = resample_linear(beat.samples, tpl.template_len);
    return std::max(0.0, detail::pearson(r, tpl.samples));
}

// All stride-1 windows of `window` consecutive beats whose mean SQI clears
// the threshold, best-first (ties keep the earlier start), capped at
// max_windows.
inline std::vector<BeatWindow> select_windows(const std::vector<double>& sqis,
                                              std::size_t window = kWindowBeats,
                                              std::size_t max_windows = kMaxWindows,
                                              double threshold = kSqiThreshold) {
    std::vector<BeatWindow> out;
    if (sqis.size() < window) return out;
    for (std::size_t start = 0; start + window <= sqis.size(); ++start) {
        double mean = 0.0;
        for (std::size_t i = 0; i < window; ++i) mean += sqis[start + i];
        mean /= static_cast<double>(window);
        if (mean > threshold) out.push_back({start, mean});
    }
    std::stable_sort(out.begin(), out.end(), [](const BeatWindow& a, const BeatWindow& b) {
        if (a.mean_sqi != b.mean_sqi) return a.mean_sqi > b.mean_sqi;
        return a.start_beat_index < b.start_beat_index;
    });
    if (out.size() > max_windows) out.resize(max_windows);
    return out;
}

// Session-level screening: enough peaks, and at least one five-beat window
// above the SQI threshold.
inline ScreenResult screen_session(const TimeSeries& x, const PeakSpec& spec = {}) {
    ScreenResult res;
    const auto peaks = detect_peaks(x, spec);
    res.peak_count = peaks.size();
    if (peaks.size() < kMinPeaks) {
        res.status = ScreenStatus::ExcludedTooFewPeaks;
        return res;
    }
    const auto beats = segment_beats(x, peaks, spec);
    const auto tpl = compute_template(beats);
    std::vector<double> sqis;
    sqis.reserve(beats.size());
    for (const auto& b : beats) {
        double q;
        try {
            q = beat_sqi(b, tpl);
        } catch (const ZeroVariance&) {
            q = 0.0; // constant beat carries no pulse information
        }
        sqis.push_back(q);
    }
    const auto windows = select_windows(sqis);
    if (windows.empty()) {
        res.status = ScreenStatus::ExcludedLowSqi;
        return res;
    }
    res.status = ScreenStatus::Accepted;
    res.best_window_sqi = windows.front().mean_sqi;
    return res;
}

// Zero-pad a beat to the fixed model input length.
inline std::vector<double> pad_beat(const Beat& beat, std::size_t target = kPaddedBeatLen) {
    if (beat.samples.size() > target)
        throw BeatTooLong("pad_beat: beat length " + std::to_string(beat.samples.size()) +
                          " exceeds " + std::to_string(target));
    std::vector<double> out(target, 0.0);
    std::copy(beat.samples.begin(), beat.samples.end(), out.begin());
    return out;
}

} // namespace ppgbp
