#include "curator/export/zip.hpp"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <ctime>

#include "curator/errors.hpp"

namespace curator::zip {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;

void put16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get16(std::span<const std::uint8_t> b, std::size_t at) {
    if (at + 2 > b.size()) throw IoError("zip: truncated archive");
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get32(std::span<const std::uint8_t> b, std::size_t at) {
    if (at + 4 > b.size()) throw IoError("zip: truncated archive");
    return std::uint32_t{b[at]} | (std::uint32_t{b[at + 1]} << 8) | (std::uint32_t{b[at + 2]} << 16) |
           (std::uint32_t{b[at + 3]} << 24);
}

struct DosTime {
    std::uint16_t time = 0;
    std::uint16_t date = (1 << 5) | 1;  // 1980-01-01
};

DosTime dos_time(std::int64_t epoch) {
    using namespace std::chrono;
    constexpr std::int64_t kMin = 315532800;   // 1980-01-01T00:00:00Z
    constexpr std::int64_t kMax = 4354819198;  // 2107-12-31T23:59:58Z
    epoch = std::clamp(epoch, kMin, kMax);
    const sys_seconds tp{seconds{epoch}};
    const auto day = floor<days>(tp);
    const year_month_day ymd{day};
    const hh_mm_ss hms{tp - day};
    DosTime t;
    t.time = static_cast<std::uint16_t>((hms.hours().count() << 11) | (hms.minutes().count() << 5) | (hms.seconds().count() / 2));
    t.date = static_cast<std::uint16_t>(((static_cast<int>(ymd.year()) - 1980) << 9) | (static_cast<unsigned>(ymd.month()) << 5) |
                                        static_cast<unsigned>(ymd.day()));
    return t;
}

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
    auto crc = crc32(0L, Z_NULL, 0);
    std::size_t pos = 0;
    while (pos < data.size()) {
        auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - pos, 1u << 30));
        crc = crc32(crc, data.data() + pos, chunk);
        pos += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

Bytes inflate_raw(std::span<const std::uint8_t> in, std::size_t expected) {
    Bytes out(expected);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw IoError("zip: inflateInit failed");
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    auto rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != expected) throw IoError("zip: corrupt deflate stream");
    return out;
}

}  // namespace

Bytes write(const Entries& entries, std::optional<std::int64_t> epoch) {
    const auto stamp = dos_time(epoch.value_or(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count()));
    Bytes out;
    Bytes central;
    for (const auto& [name, data] : entries) {
        if (data.size() > 0xFFFFFFFEu || out.size() > 0xFFFFFFFEu) throw IoError("zip: archive too large (no zip64 support)");
        const auto offset = static_cast<std::uint32_t>(out.size());
        const auto crc = crc_of(data);
        const auto size = static_cast<std::uint32_t>(data.size());
        const auto name_len = static_cast<std::uint16_t>(name.size());
        // local header: version 10, flag bit 11 (UTF-8 names), method 0 (stored)
        put32(out, kLocalSig);
        put16(out, 10);
        put16(out, 0x0800);
        put16(out, 0);
        put16(out, stamp.time);
        put16(out, stamp.date);
        put32(out, crc);
        put32(out, size);
        put32(out, size);
        put16(out, name_len);
        put16(out, 0);
        out.insert(out.end(), name.begin(), name.end());
        out.insert(out.end(), data.begin(), data.end());

        put32(central, kCentralSig);
        put16(central, 0x031e);  // made by: unix, zip 3.0
        put16(central, 10);
        put16(central, 0x0800);
        put16(central, 0);
        put16(central, stamp.time);
        put16(central, stamp.date);
        put32(central, crc);
        put32(central, size);
        put32(central, size);
        put16(central, name_len);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put32(central, 0100644u << 16);  // -rw-r--r--
        put32(central, offset);
        central.insert(central.end(), name.begin(), name.end());
    }
    const auto central_offset = static_cast<std::uint32_t>(out.size());
    const auto central_size = static_cast<std::uint32_t>(central.size());
    out.insert(out.end(), central.begin(), central.end());
    put32(out, kEndSig);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put32(out, central_size);
    put32(out, central_offset);
    put16(out, 0);
    return out;
}

Entries read(std::span<const std::uint8_t> archive) {
    if (archive.size() < 22) throw IoError("zip: archive too small");
    // The end record sits in the last 22 + 65535 bytes.
    std::size_t end = std::string::npos;
    const std::size_t floor = archive.size() > 22 + 65535 ? archive.size() - 22 - 65535 : 0;
    for (std::size_t pos = archive.size() - 22 + 1; pos-- > floor;) {
        if (get32(archive, pos) == kEndSig) {
            end = pos;
            break;
        }
    }
    if (end == std::string::npos) throw IoError("zip: end of central directory not found");
    const auto count = get16(archive, end + 10);
    std::size_t pos = get32(archive, end + 16);
    Entries out;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (get32(archive, pos) != kCentralSig) throw IoError("zip: bad central directory entry");
        const auto flags = get16(archive, pos + 8);
        const auto method = get16(archive, pos + 10);
        const auto crc = get32(archive, pos + 16);
        const auto csize = get32(archive, pos + 20);
        const auto usize = get32(archive, pos + 24);
        const auto name_len = get16(archive, pos + 28);
        const auto extra_len = get16(archive, pos + 30);
        const auto comment_len = get16(archive, pos + 32);
        const auto local = get32(archive, pos + 42);
        if (pos + 46 + name_len > archive.size()) throw IoError("zip: truncated entry name");
        std::string name(reinterpret_cast<const char*>(archive.data() + pos + 46), name_len);
        pos += 46 + name_len + extra_len + comment_len;
        if (flags & 0x1) throw IoError("zip: encrypted entries are not supported");
        if (name.empty() || name.back() == '/') continue;
        if (get32(archive, local) != kLocalSig) throw IoError("zip: bad local header for " + name);
        const std::size_t data_at = std::size_t{local} + 30 + get16(archive, local + 26) + get16(archive, local + 28);
        if (data_at + csize > archive.size()) throw IoError("zip: truncated data for " + name);
        auto raw = archive.subspan(data_at, csize);
        Bytes data;
        if (method == 0) {
            data.assign(raw.begin(), raw.end());
        } else if (method == 8) {
            data = inflate_raw(raw, usize);
        } else {
            throw IoError("zip: unsupported compression method for " + name);
        }
        if (crc_of(data) != crc) throw IoError("zip: CRC mismatch for " + name);
        out[name] = std::move(data);
    }
    return out;
}

bool looks_like_zip(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) return false;
    auto sig = get32(bytes, 0);
    return sig == kLocalSig || sig == kEndSig;
}

}  // namespace curator::zip
