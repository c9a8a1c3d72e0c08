#include "crm/image.hpp"

#include <array>
#include <cctype>
#include <fstream>

#include "crm/error.hpp"

namespace crm {

Image Image::solid(int64_t w, int64_t h, unsigned char r, unsigned char g,
                   unsigned char b) {
    Image img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<size_t>(3 * w * h));
    for (size_t i = 0; i + 2 < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

void Image::fill_rect(const BoundingBox& box, unsigned char r, unsigned char g,
                      unsigned char b) {
    auto clamped = clamp_box(box, dims());
    if (!clamped) return;
    for (int64_t y = clamped->y; y < clamped->bottom(); ++y) {
        for (int64_t x = clamped->x; x < clamped->right(); ++x) {
            unsigned char* p = at(x, y);
            p[0] = r;
            p[1] = g;
            p[2] = b;
        }
    }
}

namespace {

// Reads one PPM header token, skipping whitespace and '#' comments.
std::string next_token(const std::vector<unsigned char>& bytes, size_t& pos) {
    while (pos < bytes.size()) {
        unsigned char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(c)) {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
        tok.push_back(static_cast<char>(bytes[pos]));
        ++pos;
    }
    return tok;
}

int64_t parse_dim(const std::string& tok) {
    if (tok.empty()) throw Error("undecodable-image", "truncated header");
    for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw Error("undecodable-image", "non-numeric header field '" + tok + "'");
    }
    return std::stoll(tok);
}

}  // namespace

Image decode_ppm(const std::vector<unsigned char>& bytes) {
    size_t pos = 0;
    std::string magic = next_token(bytes, pos);
    if (magic != "P6" && magic != "P5")
        throw Error("undecodable-image", "unsupported magic '" + magic + "'");
    int64_t w = parse_dim(next_token(bytes, pos));
    int64_t h = parse_dim(next_token(bytes, pos));
    int64_t maxval = parse_dim(next_token(bytes, pos));
    if (w <= 0 || h <= 0) throw Error("undecodable-image", "non-positive dimensions");
    if (maxval != 255) throw Error("undecodable-image", "only maxval 255 supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw Error("undecodable-image", "missing header terminator");
    ++pos;  // single whitespace after maxval, then raster

    Image img;
    img.width = w;
    img.height = h;
    size_t n = static_cast<size_t>(w) * static_cast<size_t>(h);
    img.pixels.resize(3 * n);
    size_t channels = magic == "P6" ? 3 : 1;
    if (bytes.size() - pos < channels * n)
        throw Error("undecodable-image", "truncated raster data");
    if (channels == 3) {
        std::copy(bytes.begin() + static_cast<ptrdiff_t>(pos),
                  bytes.begin() + static_cast<ptrdiff_t>(pos + 3 * n), img.pixels.begin());
    } else {
        for (size_t i = 0; i < n; ++i) {
            unsigned char g = bytes[pos + i];
            img.pixels[3 * i] = g;
            img.pixels[3 * i + 1] = g;
            img.pixels[3 * i + 2] = g;
        }
    }
    return img;
}

std::vector<unsigned char> encode_ppm(const Image& img) {
    std::string header = "P6\n" + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

Image load_image(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("image-missing", "cannot open " + path.string());
    std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(f),
                                     std::istreambuf_iterator<char>()};
    try {
        return decode_ppm(bytes);
    } catch (const Error& e) {
        throw Error("undecodable-image", path.string() + ": " + e.what());
    }
}

void save_image(const Image& img, const std::filesystem::path& path) {
    auto bytes = encode_ppm(img);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("out-dir-unwritable", "cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// ---------------------------------------------------------------------------
// PNG (stored deflate) + base64
// ---------------------------------------------------------------------------

namespace {

uint32_t crc32_of(const unsigned char* data, size_t len, uint32_t crc = 0) {
    static std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xffffffffu;
    for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

void push_be32(std::vector<unsigned char>& v, uint32_t x) {
    v.push_back(static_cast<unsigned char>(x >> 24));
    v.push_back(static_cast<unsigned char>(x >> 16));
    v.push_back(static_cast<unsigned char>(x >> 8));
    v.push_back(static_cast<unsigned char>(x));
}

void push_chunk(std::vector<unsigned char>& out, const char type[4],
                const std::vector<unsigned char>& payload) {
    push_be32(out, static_cast<uint32_t>(payload.size()));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    push_be32(out, crc32_of(out.data() + crc_start, out.size() - crc_start));
}

}  // namespace

std::vector<unsigned char> encode_png(const Image& img) {
    // Raw scanlines with filter byte 0.
    std::vector<unsigned char> raw;
    raw.reserve(static_cast<size_t>(img.height) * (1 + 3 * img.width));
    for (int64_t y = 0; y < img.height; ++y) {
        raw.push_back(0);
        const unsigned char* row = img.at(0, y);
        raw.insert(raw.end(), row, row + 3 * img.width);
    }

    // zlib stream: header, stored deflate blocks (max 65535 each), adler32.
    std::vector<unsigned char> z;
    z.push_back(0x78);
    z.push_back(0x01);
    size_t off = 0;
    while (off < raw.size() || raw.empty()) {
        size_t chunk = std::min<size_t>(raw.size() - off, 65535);
        bool final = off + chunk == raw.size();
        z.push_back(final ? 1 : 0);
        z.push_back(static_cast<unsigned char>(chunk & 0xff));
        z.push_back(static_cast<unsigned char>(chunk >> 8));
        z.push_back(static_cast<unsigned char>(~chunk & 0xff));
        z.push_back(static_cast<unsigned char>((~chunk >> 8) & 0xff));
        z.insert(z.end(), raw.begin() + static_cast<ptrdiff_t>(off),
                 raw.begin() + static_cast<ptrdiff_t>(off + chunk));
        off += chunk;
        if (final || raw.empty()) break;
    }
    uint32_t a = 1, b = 0;
    for (unsigned char c : raw) {
        a = (a + c) % 65521;
        b = (b + a) % 65521;
    }
    push_be32(z, (b << 16) | a);

    std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<unsigned char> ihdr;
    push_be32(ihdr, static_cast<uint32_t>(img.width));
    push_be32(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type RGB
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter
    ihdr.push_back(0);   // interlace
    push_chunk(out, "IHDR", ihdr);
    push_chunk(out, "IDAT", z);
    push_chunk(out, "IEND", {});
    return out;
}

std::string base64_encode(const std::vector<unsigned char>& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
    }
    if (i + 1 == bytes.size()) {
        uint32_t v = bytes[i] << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

}  // namespace crm
