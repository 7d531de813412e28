#pragma once

#include "ppgbp/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace ppgbp {

// Uniformly sampled scalar signal.
struct TimeSeries {
    std::vector<double> samples;
    double fs = 60.0; // Hz

    std::size_t size() const { return samples.size(); }
};

// Second-order Butterworth bandpass. Defaults follow the pulse-waveform
// preprocessing used throughout the pipeline (0.7-16 Hz passband).
struct FilterSpec {
    int order = 2;
    double f_lo = 0.7;  // Hz
    double f_hi = 16.0; // Hz
    bool zero_phase = true;
};

struct PeakSpec {
    double min_height = 0.7;  // normalized units
    int min_distance = 20;    // samples
};

namespace detail {

// Expand a polynomial from its (complex) roots; returns real coefficients,
// highest order first. Imaginary parts must cancel (conjugate root pairs).
inline std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> c{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i] * r;
        }
        c = std::move(next);
    }
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

struct Biquad4 {
    // order-4 transfer function, b/a length 5, a[0] == 1
    std::array<double, 5> b{};
    std::array<double, 5> a{};
};

// Design a digital bandpass from the order-2 analog Butterworth lowpass
// prototype: lowpass->bandpass transform, then bilinear transform with
// frequency prewarping. Matches the conventional (scipy-style) design.
inline Biquad4 design_butter_bandpass(const FilterSpec& spec, double fs) {
    if (!(spec.f_lo > 0.0) || !(spec.f_hi < fs / 2.0) || !(spec.f_lo < spec.f_hi))
        throw InvalidCutoffs("bandpass cutoffs must satisfy 0 < f_lo < f_hi < fs/2");

    const double fs2 = 2.0 * fs;
    const double w1 = fs2 * std::tan(std::numbers::pi * spec.f_lo / fs);
    const double w2 = fs2 * std::tan(std::numbers::pi * spec.f_hi / fs);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    // analog lowpass prototype poles for N=2
    const int n = 2;
    std::vector<std::complex<double>> lp_poles;
    for (int k = 0; k < n; ++k) {
        double theta = std::numbers::pi * (2.0 * k + 1.0 + n) / (2.0 * n);
        lp_poles.emplace_back(std::cos(theta), std::sin(theta));
    }

    // lowpass -> bandpass: each pole p maps to the two roots of
    // s^2 - p*bw*s + w0^2 = 0; N zeros appear at s = 0.
    std::vector<std::complex<double>> poles;
    for (const auto& p : lp_poles) {
        std::complex<double> pb = p * bw;
        std::complex<double> disc = std::sqrt(pb * pb - 4.0 * w0sq);
        poles.push_back((pb + disc) / 2.0);
        poles.push_back((pb - disc) / 2.0);
    }
    std::vector<std::complex<double>> zeros(n, 0.0);
    double gain = std::pow(bw, n);

    // bilinear transform
    std::complex<double> num(1.0, 0.0), den(1.0, 0.0);
    for (const auto& z : zeros) num *= (fs2 - z);
    for (const auto& p : poles) den *= (fs2 - p);
    double gain_z = gain * (num / den).real();

    std::vector<std::complex<double>> zz, zp;
    for (const auto& z : zeros) zz.push_back((fs2 + z) / (fs2 - z));
    for (const auto& p : poles) zp.push_back((fs2 + p) / (fs2 - p));
    while (zz.size() < zp.size()) zz.emplace_back(-1.0, 0.0);

    auto bpoly = poly_from_roots(zz);
    auto apoly = poly_from_roots(zp);

    Biquad4 f;
    for (int i = 0; i < 5; ++i) {
        f.b[i] = gain_z * bpoly[i];
        f.a[i] = apoly[i];
    }
    return f;
}

// Analog Butterworth bandpass magnitude (order-2 prototype) at frequency
// f_hz for a digital filter designed at rate fs, i.e. evaluated at the
// prewarped frequency. Single-pass magnitude; square it for zero-phase.
inline double butter_bandpass_gain(const FilterSpec& spec, double fs, double f_hz) {
    const double fs2 = 2.0 * fs;
    const double w1 = fs2 * std::tan(std::numbers::pi * spec.f_lo / fs);
    const double w2 = fs2 * std::tan(std::numbers::pi * spec.f_hi / fs);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;
    const double w = fs2 * std::tan(std::numbers::pi * f_hz / fs);
    if (w == 0.0) return 0.0;
    const double u = (w * w - w0sq) / (bw * w);
    return 1.0 / std::sqrt(1.0 + u * u * u * u);
}

// Direct form II transposed with initial conditions.
inline std::vector<double> lfilter(const Biquad4& f, const std::vector<double>& x,
                                   std::array<double, 4> zi = {}) {
    std::vector<double> y(x.size());
    auto z = zi;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double xn = x[i];
        double yn = f.b[0] * xn + z[0];
        z[0] = f.b[1] * xn - f.a[1] * yn + z[1];
        z[1] = f.b[2] * xn - f.a[2] * yn + z[2];
        z[2] = f.b[3] * xn - f.a[3] * yn + z[3];
        z[3] = f.b[4] * xn - f.a[4] * yn;
        y[i] = yn;
    }
    return y;
}

// Steady-state initial conditions for a unit step (lfilter_zi): solve
// (I - A^T) zi = B with A the direct-form-II-transposed state matrix.
inline std::array<double, 4> lfilter_zi(const Biquad4& f) {
    const int n = 4;
    double A[4][4] = {};
    for (int i = 0; i < n; ++i) A[i][0] = -f.a[i + 1];
    for (int i = 0; i < n - 1; ++i) A[i][i + 1] = 1.0;
    double M[4][5];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) M[i][j] = (i == j ? 1.0 : 0.0) - A[i][j];
        M[i][n] = f.b[i + 1] - f.a[i + 1] * f.b[0];
    }
    // gaussian elimination with partial pivoting
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        for (int j = 0; j <= n; ++j) std::swap(M[c][j], M[piv][j]);
        for (int r = c + 1; r < n; ++r) {
            double t = M[r][c] / M[c][c];
            for (int j = c; j <= n; ++j) M[r][j] -= t * M[c][j];
        }
    }
    std::array<double, 4> zi{};
    for (int r = n - 1; r >= 0; --r) {
        double s = M[r][n];
        for (int j = r + 1; j < n; ++j) s -= M[r][j] * zi[j];
        zi[r] = s / M[r][r];
    }
    return zi;
}

} // namespace detail

// Zero-phase (forward-backward) or single-pass Butterworth bandpass.
// Forward-backward mode reflect-pads by three times the filter tap count
// (odd extension) and seeds each pass with step-matched initial conditions,
// so DC rejection holds from the first sample.
inline TimeSeries bandpass_filter(const TimeSeries& x, const FilterSpec& spec) {
    const auto f = detail::design_butter_bandpass(spec, x.fs);
    const std::size_t padlen = 3 * 5; // 3 x taps
    if (x.samples.size() <= std::max<std::size_t>(padlen, 3 * static_cast<std::size_t>(spec.order)))
        throw SignalTooShort("bandpass_filter: need more than " + std::to_string(padlen) + " samples");

    if (!spec.zero_phase) {
        auto zi = detail::lfilter_zi(f);
        std::array<double, 4> z0;
        for (int i = 0; i < 4; ++i) z0[i] = zi[i] * x.samples.front();
        return {detail::lfilter(f, x.samples, z0), x.fs};
    }

    const auto& s = x.samples;
    const std::size_t n = s.size();
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * s.front() - s[i]);
    ext.insert(ext.end(), s.begin(), s.end());
    for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * s.back() - s[n - 1 - i]);

    const auto zi = detail::lfilter_zi(f);
    std::array<double, 4> z0;
    for (int i = 0; i < 4; ++i) z0[i] = zi[i] * ext.front();
    auto fwd = detail::lfilter(f, ext, z0);

    std::reverse(fwd.begin(), fwd.end());
    for (int i = 0; i < 4; ++i) z0[i] = zi[i] * fwd.front();
    auto bwd = detail::lfilter(f, fwd, z0);
    std::reverse(bwd.begin(), bwd.end());

    return {std::vector<double>(bwd.begin() + padlen, bwd.begin() + padlen + n), x.fs};
}

// Affine map of the samples onto [0, 1].
inline TimeSeries minmax_normalize(const TimeSeries& x) {
    if (x.samples.empty()) throw ConstantSignal("minmax_normalize: empty signal");
    auto [lo, hi] = std::minmax_element(x.samples.begin(), x.samples.end());
    if (*hi == *lo) throw ConstantSignal("minmax_normalize: max == min");
    TimeSeries out{std::vector<double>(x.samples.size()), x.fs};
    const double inv = 1.0 / (*hi - *lo);
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        out.samples[i] = (x.samples[i] - *lo) * inv;
    return out;
}

// Strict local maxima with a height floor, thinned so any two survivors are
// at least min_distance apart. When two candidates collide, the taller one
// wins; equal heights keep the earlier index.
inline std::vector<std::size_t> detect_peaks(const TimeSeries& x, const PeakSpec& spec) {
    const auto& s = x.samples;
    std::vector<std::size_t> cand;
    for (std::size_t i = 1; i + 1 < s.size(); ++i)
        if (s[i] > s[i - 1] && s[i] > s[i + 1] && s[i] >= spec.min_height)
            cand.push_back(i);

    std::vector<std::size_t> order(cand.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (s[cand[a]] != s[cand[b]]) return s[cand[a]] > s[cand[b]];
        return cand[a] < cand[b];
    });

    std::vector<bool> keep(cand.size(), false);
    std::vector<std::size_t> kept;
    for (std::size_t oi : order) {
        const std::size_t idx = cand[oi];
        bool blocked = false;
        for (std::size_t k : kept) {
            if ((k > idx ? k - idx : idx - k) < static_cast<std::size_t>(spec.min_distance)) {
                blocked = true;
                break;
            }
        }
        if (!blocked) {
            keep[oi] = true;
            kept.push_back(idx);
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cand.size(); ++i)
        if (keep[i]) out.push_back(cand[i]);
    return out;
}

namespace detail {

// In-place iterative radix-2 FFT; n must be a power of two.
inline void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                auto u = a[i + k];
                auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

} // namespace detail

struct SignalStats {
    double skewness;
    double excess_kurtosis;
    double snr_db;
};

// Population-moment skewness/kurtosis plus a periodogram SNR: power in the
// 0.7-4 Hz pulse band against power everywhere else below Nyquist. The mean
// is removed before the periodogram so the DC bin does not count as noise.
inline SignalStats signal_stats(const TimeSeries& x) {
    const auto& s = x.samples;
    const std::size_t n = s.size();
    if (n < 3) throw ZeroVariance("signal_stats: need at least 3 samples");
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : s) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n; m3 /= n; m4 /= n;
    if (m2 == 0.0) throw ZeroVariance("signal_stats: constant signal");

    std::size_t nfft = 1;
    while (nfft < n) nfft <<= 1;
    std::vector<std::complex<double>> spec(nfft, 0.0);
    for (std::size_t i = 0; i < n; ++i) spec[i] = s[i] - mean;
    detail::fft_pow2(spec);

    double band = 0.0, rest = 0.0;
    for (std::size_t k = 1; k <= nfft / 2; ++k) {
        const double f = x.fs * static_cast<double>(k) / static_cast<double>(nfft);
        const double p = std::norm(spec[k]);
        if (f >= 0.7 && f <= 4.0) band += p;
        else rest += p;
    }
    double snr;
    if (rest == 0.0) snr = std::numeric_limits<double>::infinity();
    else if (band == 0.0) snr = -std::numeric_limits<double>::infinity();
    else snr = 10.0 * std::log10(band / rest);

    return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0, snr};
}

} // namespace ppgbp
