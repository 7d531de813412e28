#pragma once

#include "ppgbp/errors.hpp"
#include "ppgbp/features.hpp"
#include "ppgbp/frame.hpp"
#include "ppgbp/rng.hpp"
#include "ppgbp/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace ppgbp {

// Two-Gaussian pulse morphology: a systolic bump at mu1 and a dicrotic bump
// at mu2 = mu1 + 0.18 s. The dicrotic ratio a2 and the systolic timing mu1
// carry the blood-pressure information (see bp_from_morphology).
struct MorphParams {
    double a1 = 0.8;     // systolic amplitude, [0.6, 1.0]
    double a2 = 0.5;     // dicrotic/systolic ratio, [0.3, 0.9]
    double mu1 = 0.15;   // systolic peak time, [0.10, 0.25] s
    double sigma1 = 0.04;
    double sigma2 = 0.08;

    double mu2() const { return mu1 + 0.18; }

    void validate() const {
        if (!(a1 >= 0.6 && a1 <= 1.0) || !(a2 >= 0.0 && a2 <= 0.9) ||
            !(mu1 >= 0.10 && mu1 <= 0.25) || sigma1 <= 0.0 || sigma2 <= 0.0)
            throw InvalidMorphology("morphology parameters out of range");
    }
};

enum class Rhythm { NSR = 0, AF, FrequentEctopy, Paced };

inline const char* rhythm_to_string(Rhythm r) {
    switch (r) {
        case Rhythm::NSR: return "NSR";
        case Rhythm::AF: return "AF";
        case Rhythm::FrequentEctopy: return "FrequentEctopy";
        case Rhythm::Paced: return "Paced";
    }
    return "NSR";
}

inline Rhythm rhythm_from_string(const std::string& s) {
    if (s == "NSR") return Rhythm::NSR;
    if (s == "AF") return Rhythm::AF;
    if (s == "FrequentEctopy") return Rhythm::FrequentEctopy;
    if (s == "Paced") return Rhythm::Paced;
    throw UnknownRhythmLabel("unknown rhythm label: " + s);
}

// RR-interval generators per rhythm class.
//   NSR:   RR ~ N(0.85, 0.02) s
//   AF:    RR ~ U(0.5, 1.1) s, beat amplitude coupled to the preceding RR
//   FrequentEctopy: NSR base with every 6th beat premature (RR x 0.6, next
//          RR x 1.4, amplitude x 0.7) -- well above 1 ectopic beat/min
//   Paced: RR exactly 1.0 s
struct RhythmPattern {
    Rhythm kind = Rhythm::NSR;
    double nsr_rr_mean = 0.85;
    double nsr_rr_sd = 0.02;
    double af_rr_lo = 0.5;
    double af_rr_hi = 1.1;
    int ectopy_period = 6;
    double ectopy_early = 0.6;
    double ectopy_late = 1.4;
    double ectopy_amp = 0.7;
    double paced_rr = 1.0;
};

struct NoiseSpec {
    double white_sd = 0.0;
    double wander_amp = 0.0; // 0.25 Hz baseline wander amplitude
};

struct SynthSession {
    std::string id;
    TimeSeries signal;
    Rhythm rhythm = Rhythm::NSR;
    double true_sbp = 0.0;
    double true_dbp = 0.0;
    SubjectProfile profile;
    std::uint64_t seed = 0;
};

// One pulse sampled on [0, rr) at rate fs.
inline std::vector<double> synth_beat(const MorphParams& m, double rr, double fs) {
    m.validate();
    if (rr < m.mu2() + 2.0 * m.sigma2)
        throw InvalidMorphology("synth_beat: rr too short for dicrotic peak");
    const std::size_t n = static_cast<std::size_t>(rr * fs);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double d1 = (t - m.mu1) / m.sigma1;
        const double d2 = (t - m.mu2()) / m.sigma2;
        out[i] = m.a1 * std::exp(-0.5 * d1 * d1) + m.a1 * m.a2 * std::exp(-0.5 * d2 * d2);
    }
    return out;
}

struct BpValue {
    double sbp;
    double dbp;
};

// Ground-truth mapping from morphology to blood pressure. Linear by design
// so synthetic end-to-end tests have an exact oracle:
//   sbp = 90 + 50*a2 + 80*(0.25 - mu1)   (~[94, 147] mm Hg)
//   dbp = 60 + 25*a2
inline BpValue bp_from_morphology(const MorphParams& m) {
    m.validate();
    return {90.0 + 50.0 * m.a2 + 80.0 * (0.25 - m.mu1), 60.0 + 25.0 * m.a2};
}

// RR sequence covering at least duration_s seconds.
inline std::vector<double> rr_sequence(const RhythmPattern& pattern, double duration_s, Rng& rng) {
    std::vector<double> rrs;
    double t = 0.0;
    std::size_t beat = 0;
    while (t < duration_s) {
        double rr = 0.0;
        switch (pattern.kind) {
            case Rhythm::NSR:
                rr = rng.normal(pattern.nsr_rr_mean, pattern.nsr_rr_sd);
                break;
            case Rhythm::AF:
                rr = rng.uniform(pattern.af_rr_lo, pattern.af_rr_hi);
                break;
            case Rhythm::FrequentEctopy: {
                double base = rng.normal(pattern.nsr_rr_mean, pattern.nsr_rr_sd);
                const std::size_t phase = beat % static_cast<std::size_t>(pattern.ectopy_period);
                if (phase == static_cast<std::size_t>(pattern.ectopy_period) - 1)
                    rr = base * pattern.ectopy_early;
                else if (phase == 0 && beat > 0)
                    rr = base * pattern.ectopy_late;
                else
                    rr = base;
                break;
            }
            case Rhythm::Paced:
                rr = pattern.paced_rr;
                break;
        }
        rr = std::max(rr, 0.45);
        rrs.push_back(rr);
        t += rr;
        ++beat;
    }
    return rrs;
}

inline bool is_ectopic_beat(const RhythmPattern& pattern, std::size_t beat_index) {
    return pattern.kind == Rhythm::FrequentEctopy &&
           beat_index % static_cast<std::size_t>(pattern.ectopy_period) ==
               static_cast<std::size_t>(pattern.ectopy_period) - 1;
}

// Profile with plausible ranges, drawn independently of the morphology so a
// synthetic subject's demographics carry no blood-pressure signal.
inline SubjectProfile random_profile(Rng rng) {
    SubjectProfile p;
    p.age = std::floor(rng.uniform(40.0, 90.0));
    p.male = rng.bernoulli(0.7);
    p.bmi = std::round(rng.uniform(19.0, 40.0) * 10.0) / 10.0;
    const double r = rng.uniform();
    if (r < 0.80) p.race = Race::WhiteNonHispanic;
    else if (r < 0.81) p.race = Race::WhiteHispanic;
    else if (r < 0.95) p.race = Race::Asian;
    else if (r < 0.96) p.race = Race::Black;
    else p.race = Race::OtherUnknown;
    for (auto& h : p.history) h = rng.bernoulli(0.3);
    for (auto& m : p.medications) m = rng.bernoulli(0.3);
    p.repeat_visit = rng.bernoulli(0.06);
    return p;
}

// Concatenated beats per the rhythm's RR sequence, plus white noise and
// 0.25 Hz baseline wander. AF couples beat amplitude to the preceding RR.
inline SynthSession synth_session(const RhythmPattern& pattern, const MorphParams& m,
                                  double duration_s, const NoiseSpec& noise,
                                  std::uint64_t seed, double fs = 60.0) {
    if (duration_s < 10.0) throw InvalidMorphology("synth_session: duration must be >= 10 s");
    m.validate();
    Rng rng(seed);

    SynthSession s;
    s.rhythm = pattern.kind;
    s.seed = seed;
    const auto bp = bp_from_morphology(m);
    s.true_sbp = bp.sbp;
    s.true_dbp = bp.dbp;
    s.signal.fs = fs;

    const auto rrs = rr_sequence(pattern, duration_s, rng);
    const double rr_mean = pattern.kind == Rhythm::AF
                               ? 0.5 * (pattern.af_rr_lo + pattern.af_rr_hi)
                               : pattern.nsr_rr_mean;
    for (std::size_t k = 0; k < rrs.size(); ++k) {
        MorphParams beat_m = m;
        if (pattern.kind == Rhythm::AF)
            beat_m.a1 = std::clamp(m.a1 * rrs[k] / rr_mean, 0.6, 1.0);
        if (is_ectopic_beat(pattern, k))
            beat_m.a1 = std::clamp(m.a1 * pattern.ectopy_amp, 0.6, 1.0);
        const double rr = std::max(rrs[k], beat_m.mu2() + 2.0 * beat_m.sigma2);
        auto beat = synth_beat(beat_m, rr, fs);
        s.signal.samples.insert(s.signal.samples.end(), beat.begin(), beat.end());
    }

    Rng noise_rng = rng.fork(1);
    for (std::size_t i = 0; i < s.signal.samples.size(); ++i) {
        const double t = static_cast<double>(i) / fs;
        double v = s.signal.samples[i];
        if (noise.wander_amp > 0.0)
            v += noise.wander_amp * std::sin(2.0 * std::numbers::pi * 0.25 * t);
        if (noise.white_sd > 0.0) v += noise_rng.normal(0.0, noise.white_sd);
        s.signal.samples[i] = v;
    }

    s.profile = random_profile(rng.fork(2));
    return s;
}

// Constant synthetic face frames whose green mean tracks the given signal;
// exercises the frame-to-rPPG path end to end.
inline std::vector<Frame> frames_from_signal(const TimeSeries& sig, std::size_t width = 144,
                                             std::size_t height = 144) {
    double lo = sig.samples[0], hi = sig.samples[0];
    for (double v : sig.samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<Frame> frames;
    frames.reserve(sig.samples.size());
    for (double v : sig.samples) {
        Frame f;
        f.width = width;
        f.height = height;
        const auto g = static_cast<std::uint8_t>(std::lround(60.0 + 120.0 * (v - lo) / span));
        f.pixels.assign(width * height * 3, 0);
        for (std::size_t i = 0; i < width * height; ++i) {
            f.pixels[i * 3 + 0] = 150;
            f.pixels[i * 3 + 1] = g;
            f.pixels[i * 3 + 2] = 110;
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

} // namespace ppgbp
