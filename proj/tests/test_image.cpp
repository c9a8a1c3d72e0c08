#include <doctest.h>

#include <cstdint>

#include "crm/error.hpp"
#include "crm/image.hpp"

using namespace crm;

TEST_CASE("ppm round trip") {
    Image img = Image::solid(5, 3, 10, 20, 30);
    img.at(2, 1)[0] = 250;
    auto bytes = encode_ppm(img);
    Image back = decode_ppm(bytes);
    CHECK(back == img);
}

TEST_CASE("ppm decode rejects junk") {
    std::string junk = "JUNK";
    CHECK_THROWS_AS(decode_ppm(std::vector<unsigned char>(junk.begin(), junk.end())),
                    Error);
    std::string truncated = "P6\n4 4\n255\n";
    CHECK_THROWS_AS(
        decode_ppm(std::vector<unsigned char>(truncated.begin(), truncated.end())), Error);
}

TEST_CASE("ppm decode handles comments and P5") {
    std::string p5 = "P5\n# comment\n2 2\n255\n";
    p5 += std::string("\x01\x02\x03\x04", 4);
    Image img = decode_ppm(std::vector<unsigned char>(p5.begin(), p5.end()));
    CHECK(img.width == 2);
    CHECK(img.at(0, 0)[0] == 1);
    CHECK(img.at(0, 0)[1] == 1);  // grayscale expanded
    CHECK(img.at(1, 1)[2] == 4);
}

TEST_CASE("fill_rect clamps to bounds") {
    Image img = Image::solid(4, 4, 255, 255, 255);
    img.fill_rect({2, 2, 10, 10}, 0, 0, 0);
    CHECK(img.at(3, 3)[0] == 0);
    CHECK(img.at(1, 1)[0] == 255);
}

namespace {

// Independent reader for the stored-deflate zlib stream the encoder emits.
std::vector<unsigned char> inflate_stored(const std::vector<unsigned char>& z) {
    std::vector<unsigned char> out;
    size_t pos = 2;  // zlib header
    for (;;) {
        REQUIRE(pos + 5 <= z.size());
        unsigned char final = z[pos] & 1;
        REQUIRE((z[pos] >> 1) == 0);  // stored block type
        size_t len = z[pos + 1] | (size_t(z[pos + 2]) << 8);
        size_t nlen = z[pos + 3] | (size_t(z[pos + 4]) << 8);
        REQUIRE(((len ^ nlen) & 0xffff) == 0xffff);
        pos += 5;
        out.insert(out.end(), z.begin() + pos, z.begin() + pos + len);
        pos += len;
        if (final) break;
    }
    return out;
}

}  // namespace

TEST_CASE("png encoder produces a parsable stored-deflate stream") {
    Image img = Image::solid(3, 2, 1, 2, 3);
    img.at(1, 0)[0] = 99;
    auto png = encode_png(img);

    // signature
    REQUIRE(png.size() > 8);
    CHECK(png[0] == 0x89);
    CHECK(png[1] == 'P');

    // IHDR dims (big endian at offsets 16..23)
    auto be32 = [&](size_t off) {
        return (uint32_t(png[off]) << 24) | (uint32_t(png[off + 1]) << 16) |
               (uint32_t(png[off + 2]) << 8) | uint32_t(png[off + 3]);
    };
    CHECK(be32(16) == 3);
    CHECK(be32(20) == 2);

    // locate IDAT, reinflate, compare scanlines
    size_t idat = 0;
    for (size_t i = 8; i + 8 < png.size(); ++i) {
        if (png[i] == 'I' && png[i + 1] == 'D' && png[i + 2] == 'A' && png[i + 3] == 'T') {
            idat = i;
            break;
        }
    }
    REQUIRE(idat > 0);
    uint32_t idat_len = be32(idat - 4);
    std::vector<unsigned char> z(png.begin() + static_cast<ptrdiff_t>(idat + 4),
                                 png.begin() + static_cast<ptrdiff_t>(idat + 4 + idat_len));
    auto raw = inflate_stored(z);
    REQUIRE(raw.size() == 2 * (1 + 3 * 3));
    CHECK(raw[0] == 0);  // filter byte
    CHECK(raw[1] == 1);
    CHECK(raw[4] == 99);  // modified pixel
}

TEST_CASE("base64") {
    CHECK(base64_encode({}) == "");
    CHECK(base64_encode({'M', 'a', 'n'}) == "TWFu");
    CHECK(base64_encode({'M', 'a'}) == "TWE=");
    CHECK(base64_encode({'M'}) == "TQ==");
}
