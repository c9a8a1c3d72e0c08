#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crm/geometry.hpp"

namespace crm {

// 8-bit RGB raster, row-major, interleaved.
struct Image {
    int64_t width = 0;
    int64_t height = 0;
    std::vector<unsigned char> pixels;  // 3 * width * height

    static Image solid(int64_t w, int64_t h, unsigned char r, unsigned char g,
                       unsigned char b);

    ImageDims dims() const { return {width, height}; }

    unsigned char* at(int64_t x, int64_t y) { return pixels.data() + 3 * (y * width + x); }
    const unsigned char* at(int64_t x, int64_t y) const {
        return pixels.data() + 3 * (y * width + x);
    }

    void fill_rect(const BoundingBox& box, unsigned char r, unsigned char g,
                   unsigned char b);

    bool operator==(const Image&) const = default;
};

// Binary PPM (P6, maxval 255) is the harness raster format: lossless and
// byte-stable, so content hashes are reproducible. P5 reads as grayscale.
Image decode_ppm(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> encode_ppm(const Image& img);

Image load_image(const std::filesystem::path& path);
void save_image(const Image& img, const std::filesystem::path& path);

// 8-bit RGB PNG with stored (uncompressed) deflate blocks; used only to put
// images on the wire in a format chat endpoints accept.
std::vector<unsigned char> encode_png(const Image& img);

std::string base64_encode(const std::vector<unsigned char>& bytes);

}  // namespace crm
