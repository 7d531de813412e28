#pragma once

#include "ppgbp/beats.hpp"
#include "ppgbp/io.hpp"
#include "ppgbp/signal.hpp"

#include <string>
#include <vector>

namespace ppgbp {

struct PipelineOptions {
    FilterSpec filter{};
    PeakSpec peaks{};
    std::size_t window_beats = kWindowBeats;
    std::size_t max_windows = kMaxWindows;
    double sqi_threshold = kSqiThreshold;
    std::size_t min_peak_count = kMinPeaks;
    bool sqi_screen = true; // false replicates the rhythm-experiment path
};

struct SessionPipelineResult {
    ScreenResult screen;
    std::vector<WindowRecord> windows;
};

// Filter -> normalize -> peak detection -> screening -> beat segmentation ->
// SQI -> window selection -> padding. With sqi_screen off, every stride-1
// window is kept regardless of SQI (screening is reported but not enforced).
inline SessionPipelineResult run_session_pipeline(const std::string& session_id,
                                                  const std::string& subject_id,
                                                  const TimeSeries& raw,
                                                  const PipelineOptions& opt = {}) {
    SessionPipelineResult res;
    const auto filtered = minmax_normalize(bandpass_filter(raw, opt.filter));
    const auto peaks = detect_peaks(filtered, opt.peaks);
    res.screen.peak_count = peaks.size();

    if (peaks.size() < opt.min_peak_count && opt.sqi_screen) {
        res.screen.status = ScreenStatus::ExcludedTooFewPeaks;
        return res;
    }
    if (peaks.size() < 2) {
        res.screen.status = ScreenStatus::ExcludedTooFewPeaks;
        return res;
    }

    const auto beats = segment_beats(filtered, peaks, opt.peaks);
    const auto tpl = compute_template(beats);
    std::vector<double> sqis;
    sqis.reserve(beats.size());
    for (const auto& b : beats) {
        double q;
        try {
            q = beat_sqi(b, tpl);
        } catch (const ZeroVariance&) {
            q = 0.0;
        }
        sqis.push_back(q);
    }

    const double threshold = opt.sqi_screen ? opt.sqi_threshold : -1.0;
    auto windows = select_windows(sqis, opt.window_beats, opt.max_windows, threshold);

    if (opt.sqi_screen && windows.empty()) {
        res.screen.status = ScreenStatus::ExcludedLowSqi;
        return res;
    }
    res.screen.status = ScreenStatus::Accepted;
    if (!windows.empty()) res.screen.best_window_sqi = windows.front().mean_sqi;

    for (const auto& w : windows) {
        bool too_long = false;
        WindowRecord rec;
        rec.session_id = session_id;
        rec.subject_id = subject_id;
        rec.start_beat_index = w.start_beat_index;
        rec.mean_sqi = w.mean_sqi;
        for (std::size_t i = 0; i < opt.window_beats; ++i) {
            const auto& beat = beats[w.start_beat_index + i];
            if (beat.samples.size() > kPaddedBeatLen) {
                too_long = true; // beats longer than the model input are unusable
                break;
            }
            rec.beats.push_back(pad_beat(beat));
        }
        if (!too_long) res.windows.push_back(std::move(rec));
    }
    return res;
}

} // namespace ppgbp
