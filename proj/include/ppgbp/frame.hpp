#pragma once

#include "ppgbp/errors.hpp"
#include "ppgbp/signal.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace ppgbp {

inline constexpr std::size_t kRoiSize = 72;

// Row-major 8-bit RGB frame.
struct Frame {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels; // width*height*3, RGB interleaved

    std::uint8_t at(std::size_t row, std::size_t col, std::size_t ch) const {
        return pixels[(row * width + col) * 3 + ch];
    }
    std::uint8_t& at(std::size_t row, std::size_t col, std::size_t ch) {
        return pixels[(row * width + col) * 3 + ch];
    }
};

// 72x72 inclusion mask for spatial averaging. Defaults to excluding a
// horizontal eye band (rows 18-32 inclusive) of a face-centered crop.
struct RoiMask {
    std::array<bool, kRoiSize * kRoiSize> included{};

    bool at(std::size_t row, std::size_t col) const { return included[row * kRoiSize + col]; }
    void set(std::size_t row, std::size_t col, bool v) { included[row * kRoiSize + col] = v; }

    static RoiMask full() {
        RoiMask m;
        m.included.fill(true);
        return m;
    }
    static RoiMask default_mask() {
        RoiMask m = full();
        for (std::size_t r = 18; r <= 32; ++r)
            for (std::size_t c = 0; c < kRoiSize; ++c) m.set(r, c, false);
        return m;
    }
    std::size_t count() const {
        std::size_t n = 0;
        for (bool b : included) n += b;
        return n;
    }
};

// Box-average (area) downsampling per channel, rounded to nearest.
inline Frame downsample_frame(const Frame& src, std::size_t out_w = kRoiSize,
                              std::size_t out_h = kRoiSize) {
    if (src.width < out_w || src.height < out_h)
        throw SourceTooSmall("downsample_frame: source smaller than target");
    Frame out;
    out.width = out_w;
    out.height = out_h;
    out.pixels.assign(out_w * out_h * 3, 0);
    for (std::size_t r = 0; r < out_h; ++r) {
        const std::size_t r0 = r * src.height / out_h;
        const std::size_t r1 = (r + 1) * src.height / out_h;
        for (std::size_t c = 0; c < out_w; ++c) {
            const std::size_t c0 = c * src.width / out_w;
            const std::size_t c1 = (c + 1) * src.width / out_w;
            for (std::size_t ch = 0; ch < 3; ++ch) {
                double acc = 0.0;
                for (std::size_t i = r0; i < r1; ++i)
                    for (std::size_t j = c0; j < c1; ++j) acc += src.at(i, j, ch);
                acc /= static_cast<double>((r1 - r0) * (c1 - c0));
                out.at(r, c, ch) = static_cast<std::uint8_t>(std::lround(acc));
            }
        }
    }
    return out;
}

namespace detail {

inline double spatial_average_channel(const Frame& f, const RoiMask& mask, std::size_t ch) {
    if (f.width != kRoiSize || f.height != kRoiSize)
        throw FrameShapeMismatch("spatial average: frame must be 72x72");
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < kRoiSize; ++r)
        for (std::size_t c = 0; c < kRoiSize; ++c)
            if (mask.at(r, c)) {
                acc += f.at(r, c, ch);
                ++n;
            }
    if (n == 0) throw EmptyMask("spatial average: mask excludes every cell");
    return acc / static_cast<double>(n);
}

} // namespace detail

// Mean of the green channel over mask-included cells.
inline double spatial_average_green(const Frame& f, const RoiMask& mask) {
    return detail::spatial_average_channel(f, mask, 1);
}

// One rPPG sample per frame, in frame order.
inline TimeSeries extract_rppg(const std::vector<Frame>& frames, double fs, const RoiMask& mask) {
    if (frames.empty()) throw EmptyInput("extract_rppg: no frames");
    TimeSeries out;
    out.fs = fs;
    out.samples.reserve(frames.size());
    for (const auto& f : frames) out.samples.push_back(spatial_average_green(f, mask));
    return out;
}

// Per-frame R/G/B means; R and B are exposed for inspection only, nothing
// downstream consumes them.
struct RgbMeans {
    TimeSeries r, g, b;
};

inline RgbMeans extract_rgb_means(const std::vector<Frame>& frames, double fs, const RoiMask& mask) {
    if (frames.empty()) throw EmptyInput("extract_rgb_means: no frames");
    RgbMeans out;
    out.r.fs = out.g.fs = out.b.fs = fs;
    for (const auto& f : frames) {
        out.r.samples.push_back(detail::spatial_average_channel(f, mask, 0));
        out.g.samples.push_back(detail::spatial_average_channel(f, mask, 1));
        out.b.samples.push_back(detail::spatial_average_channel(f, mask, 2));
    }
    return out;
}

} // namespace ppgbp
