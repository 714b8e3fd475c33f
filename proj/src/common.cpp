#include "ivt/common.hpp"

#include <cstdio>
#include <ctime>

namespace ivt {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("invalid hex character");
}

constexpr char kB64Url[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

int b64_index(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '-') return 62;
    if (c == '_') return 63;
    throw std::invalid_argument("invalid base64url character");
}
}  // namespace

std::string hex_encode(ByteView data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (unsigned char b : data) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0f]);
    }
    return out;
}

Bytes hex_decode(const std::string& hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd hex length");
    Bytes out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<unsigned char>(hex_nibble(hex[2 * i]) << 4 | hex_nibble(hex[2 * i + 1]));
    }
    return out;
}

std::string base64url_encode(ByteView data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        unsigned v = data[i] << 16 | data[i + 1] << 8 | data[i + 2];
        out.push_back(kB64Url[v >> 18]);
        out.push_back(kB64Url[(v >> 12) & 63]);
        out.push_back(kB64Url[(v >> 6) & 63]);
        out.push_back(kB64Url[v & 63]);
    }
    size_t rem = data.size() - i;
    if (rem == 1) {
        unsigned v = data[i] << 16;
        out.push_back(kB64Url[v >> 18]);
        out.push_back(kB64Url[(v >> 12) & 63]);
    } else if (rem == 2) {
        unsigned v = data[i] << 16 | data[i + 1] << 8;
        out.push_back(kB64Url[v >> 18]);
        out.push_back(kB64Url[(v >> 12) & 63]);
        out.push_back(kB64Url[(v >> 6) & 63]);
    }
    return out;  // unpadded, per JWS convention
}

Bytes base64url_decode(const std::string& text) {
    if (text.size() % 4 == 1) throw std::invalid_argument("invalid base64url length");
    Bytes out;
    out.reserve(text.size() / 4 * 3 + 2);
    size_t i = 0;
    for (; i + 4 <= text.size(); i += 4) {
        unsigned v = b64_index(text[i]) << 18 | b64_index(text[i + 1]) << 12 |
                     b64_index(text[i + 2]) << 6 | b64_index(text[i + 3]);
        out.push_back(static_cast<unsigned char>(v >> 16));
        out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
        out.push_back(static_cast<unsigned char>(v & 0xff));
    }
    size_t rem = text.size() - i;
    if (rem == 2) {
        unsigned v = b64_index(text[i]) << 18 | b64_index(text[i + 1]) << 12;
        out.push_back(static_cast<unsigned char>(v >> 16));
    } else if (rem == 3) {
        unsigned v = b64_index(text[i]) << 18 | b64_index(text[i + 1]) << 12 | b64_index(text[i + 2]) << 6;
        out.push_back(static_cast<unsigned char>(v >> 16));
        out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    }
    return out;
}

std::string Timestamp::to_string() const {
    std::time_t t = static_cast<std::time_t>(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

Timestamp Timestamp::parse(const std::string& iso) {
    std::tm tm{};
    int y, mo, d, h, mi, s;
    char z = 0;
    if (std::sscanf(iso.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 || z != 'Z') {
        throw std::invalid_argument("bad timestamp: " + iso);
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
        throw std::invalid_argument("timestamp field out of range: " + iso);
    }
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    return {static_cast<std::int64_t>(timegm(&tm))};
}

}  // namespace ivt
