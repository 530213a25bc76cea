#pragma once

// Shared helpers for the line-oriented text formats.

#include <boost/crc.hpp>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "foilgen/error.hpp"

namespace foilgen::textio {

// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string join(const double* v, std::size_t n, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += sep;
        out += fmt(v[i]);
    }
    return out;
}

inline std::string join(const std::vector<double>& v, const char* sep) { return join(v.data(), v.size(), sep); }

inline std::string crc32_hex(std::string_view text) {
    boost::crc_32_type crc;
    crc.process_bytes(text.data(), text.size());
    char hex[16];
    std::snprintf(hex, sizeof hex, "%08x", static_cast<unsigned>(crc.checksum()));
    return hex;
}

inline double parse_double(std::string_view s, const char* what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw FormatError(std::string("cannot parse ") + what + " '" + std::string(s) + "'");
    }
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, const char* what) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw FormatError(std::string("cannot parse ") + what + " '" + std::string(s) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return parts;
        start = pos + 1;
    }
}

inline constexpr std::string_view kTrailer = "END checksum=";

inline std::string seal(std::string body) {
    const std::string crc = crc32_hex(body);
    body += std::string(kTrailer) + crc + "\n";
    return body;
}

// Verifies the checksum trailer and returns the body lines (without it).
inline std::vector<std::string_view> unseal(std::string_view text, const char* what) {
    std::string_view body = text;
    if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
    const std::size_t last = body.rfind('\n');
    if (last == std::string_view::npos || body.substr(last + 1, kTrailer.size()) != kTrailer) {
        throw ChecksumError(std::string(what) + " is truncated (no checksum trailer)");
    }
    const std::string_view content = text.substr(0, last + 1);
    if (body.substr(last + 1 + kTrailer.size()) != crc32_hex(content)) {
        throw ChecksumError(std::string(what) + " checksum mismatch");
    }
    return split_on(content.substr(0, content.size() - 1), '\n');
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view text);

}  // namespace foilgen::textio
