#include "curator/digest.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <cctype>

namespace curator {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
    SHA256(bytes.data(), bytes.size(), digest.data());
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(digest.size() * 2);
    for (auto b : digest) {
        out += kHex[b >> 4];
        out += kHex[b & 0xf];
    }
    return out;
}

std::string sha256_hex(std::string_view text) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string content_id(std::span<const std::uint8_t> bytes) { return sha256_hex(bytes).substr(0, 16); }

std::string content_id(std::string_view text) { return sha256_hex(text).substr(0, 16); }

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    if (bytes.empty()) return out;
    auto n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::optional<Bytes> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) return std::nullopt;
    if (text.empty()) return Bytes{};
    Bytes out(text.size() / 4 * 3);
    auto n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) return std::nullopt;
    // EVP_DecodeBlock keeps the zero bytes that stand in for '=' padding.
    std::size_t pad = 0;
    if (text.back() == '=') ++pad;
    if (text.size() >= 2 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

namespace {

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) | b[at + 3];
}

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::optional<ImageSize> probe_jpeg(std::span<const std::uint8_t> b) {
    std::size_t pos = 2;
    while (pos + 4 <= b.size()) {
        if (b[pos] != 0xFF) return std::nullopt;
        auto marker = b[pos + 1];
        if (marker == 0xFF) {
            ++pos;
            continue;
        }
        if (marker == 0xD8 || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) {
            pos += 2;
            continue;
        }
        auto length = be16(b, pos + 2);
        bool is_sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
        if (is_sof) {
            if (pos + 9 > b.size()) return std::nullopt;
            return ImageSize{be16(b, pos + 7), be16(b, pos + 5)};
        }
        pos += 2 + length;
    }
    return std::nullopt;
}

}  // namespace

std::optional<ImageSize> probe_image_size(std::span<const std::uint8_t> b) {
    static constexpr std::array<std::uint8_t, 8> kPng = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (b.size() >= 24 && std::equal(kPng.begin(), kPng.end(), b.begin())) {
        if (!std::equal(b.begin() + 12, b.begin() + 16, "IHDR")) return std::nullopt;
        return ImageSize{be32(b, 16), be32(b, 20)};
    }
    if (b.size() >= 4 && b[0] == 0xFF && b[1] == 0xD8) return probe_jpeg(b);
    if (b.size() >= 10 && b[0] == 'G' && b[1] == 'I' && b[2] == 'F') {
        return ImageSize{b[6] | (b[7] << 8), b[8] | (b[9] << 8)};
    }
    return std::nullopt;
}

namespace {

struct MediaTypeEntry {
    std::string_view ext;
    std::string_view type;
};

constexpr std::array<MediaTypeEntry, 12> kMediaTypes{{
    {"png", "image/png"},
    {"jpg", "image/jpeg"},
    {"jpeg", "image/jpeg"},
    {"gif", "image/gif"},
    {"svg", "image/svg+xml"},
    {"html", "text/html"},
    {"txt", "text/plain"},
    {"json", "application/json"},
    {"pdf", "application/pdf"},
    {"mp4", "video/mp4"},
    {"csv", "text/csv"},
    {"xml", "application/xml"},
}};

}  // namespace

std::string media_type_for_extension(std::string_view ext) {
    std::string lower(ext);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& e : kMediaTypes) {
        if (e.ext == lower) return std::string(e.type);
    }
    return "application/octet-stream";
}

std::string extension_for_media_type(std::string_view media_type) {
    for (const auto& e : kMediaTypes) {
        if (e.type == media_type) return std::string(e.ext);
    }
    return "bin";
}

}  // namespace curator
