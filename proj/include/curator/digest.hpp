#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "curator/model.hpp"

namespace curator {

/// Lowercase hex SHA-256 of the input.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// Resource / document identifier: first 16 hex chars of SHA-256.
std::string content_id(std::span<const std::uint8_t> bytes);
std::string content_id(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// std::nullopt on malformed input.
std::optional<Bytes> base64_decode(std::string_view text);

struct ImageSize {
    std::int64_t width = 0;
    std::int64_t height = 0;
};

/// Reads pixel dimensions from a PNG, JPEG or GIF header.
std::optional<ImageSize> probe_image_size(std::span<const std::uint8_t> bytes);

/// Media type guessed from a file extension ("png" -> "image/png").
std::string media_type_for_extension(std::string_view ext);
/// Preferred file extension for a media type, without the dot.
std::string extension_for_media_type(std::string_view media_type);

}  // namespace curator
