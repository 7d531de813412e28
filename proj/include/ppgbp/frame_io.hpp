#pragma once

#include "ppgbp/errors.hpp"
#include "ppgbp/frame.hpp"

#include <json.hpp>
#include <png.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace ppgbp {

// Frame manifest: {"fs": 60, "frames": ["f000001.png", ...]}; raw .rgb24
// frames additionally need "width" and "height".
struct FrameManifest {
    double fs = 60.0;
    std::vector<std::string> frames;
    std::size_t width = 0;  // rgb24 only
    std::size_t height = 0; // rgb24 only
};

inline FrameManifest read_frame_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    FrameManifest m;
    m.fs = j.at("fs").get<double>();
    m.frames = j.at("frames").get<std::vector<std::string>>();
    m.width = j.value("width", std::size_t{0});
    m.height = j.value("height", std::size_t{0});
    return m;
}

inline Frame read_png_rgb(const std::string& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!fp) throw ParseError("cannot open: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw ParseError("libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("png read failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    // normalize anything to 8-bit RGB
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    Frame f;
    f.width = png_get_image_width(png, info);
    f.height = png_get_image_height(png, info);
    f.pixels.resize(f.width * f.height * 3);
    std::vector<png_bytep> rows(f.height);
    for (std::size_t r = 0; r < f.height; ++r) rows[r] = f.pixels.data() + r * f.width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return f;
}

inline void write_png_rgb(const Frame& f, const std::string& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw ParseError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw ParseError("libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ParseError("png write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(f.width), static_cast<png_uint_32>(f.height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(f.height);
    for (std::size_t r = 0; r < f.height; ++r)
        rows[r] = const_cast<png_bytep>(f.pixels.data() + r * f.width * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline Frame read_rgb24(const std::string& path, std::size_t width, std::size_t height) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open: " + path);
    Frame f;
    f.width = width;
    f.height = height;
    f.pixels.resize(width * height * 3);
    is.read(reinterpret_cast<char*>(f.pixels.data()),
            static_cast<std::streamsize>(f.pixels.size()));
    if (static_cast<std::size_t>(is.gcount()) != f.pixels.size())
        throw ParseError("rgb24 frame truncated: " + path);
    return f;
}

inline void write_rgb24(const Frame& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParseError("cannot open for writing: " + path);
    os.write(reinterpret_cast<const char*>(f.pixels.data()),
             static_cast<std::streamsize>(f.pixels.size()));
}

// Load one manifest frame by name (dispatches on extension).
inline Frame read_manifest_frame(const std::string& dir, const FrameManifest& m,
                                 const std::string& name) {
    const std::string path = dir + "/" + name;
    if (name.size() >= 4 && name.substr(name.size() - 4) == ".png") return read_png_rgb(path);
    if (name.size() >= 6 && name.substr(name.size() - 6) == ".rgb24") {
        if (m.width == 0 || m.height == 0)
            throw ParseError("manifest: rgb24 frames require width/height");
        return read_rgb24(path, m.width, m.height);
    }
    throw ParseError("unsupported frame format: " + name);
}

} // namespace ppgbp
