#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "curator/model.hpp"

namespace curator::zip {

/// Archive contents keyed by entry path. std::map keeps entries sorted,
/// which is also the order they are written in.
using Entries = std::map<std::string, Bytes>;

/// Writes a zip with STORED entries in sorted path order. With `epoch`
/// every entry gets that modification time (clamped to the DOS range,
/// 1980..2107); otherwise the current time is used.
Bytes write(const Entries& entries, std::optional<std::int64_t> epoch);

/// Reads STORED and DEFLATE entries. Throws IoError on malformed archives
/// or CRC mismatches. Directory entries are skipped.
Entries read(std::span<const std::uint8_t> archive);

/// True when the bytes start with a local-file or end-of-central-directory signature.
bool looks_like_zip(std::span<const std::uint8_t> bytes);

}  // namespace curator::zip
