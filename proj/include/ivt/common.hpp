#pragma once

// Shared small types: byte buffers, hex/base64url codecs, UTC timestamps.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ivt {

using Bytes = std::vector<unsigned char>;
using ByteView = std::span<const unsigned char>;

inline Bytes to_bytes(const std::string& s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

std::string hex_encode(ByteView data);
Bytes hex_decode(const std::string& hex);  // throws std::invalid_argument

std::string base64url_encode(ByteView data);
Bytes base64url_decode(const std::string& text);  // throws std::invalid_argument

// Seconds since the Unix epoch, always rendered as "YYYY-MM-DDTHH:MM:SSZ".
struct Timestamp {
    std::int64_t secs = 0;

    auto operator<=>(const Timestamp&) const = default;

    std::string to_string() const;
    static Timestamp parse(const std::string& iso);  // throws std::invalid_argument
};

// Signed duration in seconds.
struct Duration {
    std::int64_t secs = 0;

    static Duration days(std::int64_t d) { return {d * 86400}; }
    static Duration hours(std::int64_t h) { return {h * 3600}; }

    auto operator<=>(const Duration&) const = default;
};

inline Timestamp operator+(Timestamp t, Duration d) { return {t.secs + d.secs}; }
inline Timestamp operator-(Timestamp t, Duration d) { return {t.secs - d.secs}; }

}  // namespace ivt
