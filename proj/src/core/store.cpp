#include "curator/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <set>

#include "curator/canonical.hpp"
#include "curator/digest.hpp"
#include "curator/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace curator {

namespace {

constexpr std::string_view kHex = "0123456789abcdef";

bool token_safe(char c, bool first) {
    if (c == '.') return !first;
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
}

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

json parse_json(const Bytes& bytes, const std::string& what) {
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw DomainError("malformed-input", what, "malformed store file " + what + ": " + e.what());
    }
}

std::string blob_name(const Resource& r) {
    return "resources/" + r.id + "." + extension_for_media_type(r.media_type);
}

}  // namespace

std::string id_token(std::string_view id) {
    std::string out;
    for (std::size_t i = 0; i < id.size(); ++i) {
        const char c = id[i];
        if (token_safe(c, i == 0)) {
            out += c;
        } else {
            const auto b = static_cast<unsigned char>(c);
            out += '_';
            out += kHex[b >> 4];
            out += kHex[b & 0xf];
        }
    }
    return out;
}

std::string id_from_token(std::string_view token) {
    std::string out;
    for (std::size_t i = 0; i < token.size(); ++i) {
        if (token[i] == '_' && i + 2 < token.size()) {
            auto hi = kHex.find(token[i + 1]);
            auto lo = kHex.find(token[i + 2]);
            if (hi != std::string_view::npos && lo != std::string_view::npos) {
                out += static_cast<char>((hi << 4) | lo);
                i += 2;
                continue;
            }
        }
        out += token[i];
    }
    return out;
}

zip::Entries store_entries(const Collection& c) {
    auto report = validate_collection(c);
    if (!report.empty()) throw InvalidCollection(std::move(report));
    zip::Entries out;
    out["meta"] = to_bytes(canonical_dump({{"format", kCollectionFormat}, {"schema_version", c.schema.version}}));
    out["schema"] = to_bytes(canonical_dump(to_json(c.schema)));
    for (const auto& [id, doc] : c.documents) out["docs/" + id_token(id)] = to_bytes(canonical_document(doc));
    json index = json::array();
    for (const auto& [id, r] : c.resources) {
        index.push_back(to_json(r, false));
        if (r.kind == ResourceKind::LocalFile && r.data) out[blob_name(r)] = *r.data;
    }
    out["resources/index"] = to_bytes(canonical_dump(index));
    json annotations = json::array();
    for (const auto& [id, a] : c.annotations) annotations.push_back(to_json(a));
    out["annotations"] = to_bytes(canonical_dump(annotations));
    json records = json::array();
    std::string ops;
    for (const auto& r : c.log) {
        records.push_back(to_json(r));
        ops += r.op + "\n";
    }
    out["log/records"] = to_bytes(canonical_dump(records));
    out["log/ops.cdsl"] = to_bytes(ops);
    return out;
}

Collection load_store_entries(const zip::Entries& entries) {
    auto get = [&](const std::string& name) -> const Bytes& {
        auto it = entries.find(name);
        if (it == entries.end()) throw DomainError("malformed-input", name, "store is missing '" + name + "'");
        return it->second;
    };
    auto meta = parse_json(get("meta"), "meta");
    if (!meta.is_object() || meta.value("format", "") != kCollectionFormat) {
        throw DomainError("malformed-input", "meta", "unsupported store format");
    }
    Collection c;
    c.schema = schema_from_json(parse_json(get("schema"), "schema"));
    for (const auto& [name, bytes] : entries) {
        if (!name.starts_with("docs/")) continue;
        auto doc = document_from_json(parse_json(bytes, name));
        if (id_token(doc.id) != name.substr(5)) throw DomainError("malformed-input", name, "document file name does not match its id");
        auto id = doc.id;
        c.documents.emplace(std::move(id), std::move(doc));
    }
    for (const auto& j : parse_json(get("resources/index"), "resources/index")) {
        auto r = resource_from_json(j);
        if (r.kind == ResourceKind::LocalFile) {
            r.data = std::make_shared<const Bytes>(get(blob_name(r)));
        }
        auto id = r.id;
        c.resources.emplace(std::move(id), std::move(r));
    }
    for (const auto& j : parse_json(get("annotations"), "annotations")) {
        auto a = annotation_from_json(j);
        auto id = a.id;
        c.annotations.emplace(std::move(id), std::move(a));
    }
    for (const auto& j : parse_json(get("log/records"), "log/records")) c.log.push_back(log_record_from_json(j));
    return c;
}

Bytes read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    static std::atomic<unsigned> counter{0};
    tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_file_atomic(const fs::path& path, std::string_view text) {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

bool is_store(const fs::path& path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) return fs::exists(path / "meta", ec);
    if (!fs::is_regular_file(path, ec)) return false;
    try {
        auto bytes = read_file(path);
        if (!zip::looks_like_zip(bytes)) return false;
        return zip::read(bytes).contains("meta");
    } catch (const IoError&) {
        return false;
    }
}

Collection load_store(const fs::path& path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        zip::Entries entries;
        for (const auto& e : fs::recursive_directory_iterator(path)) {
            if (!e.is_regular_file()) continue;
            auto rel = fs::relative(e.path(), path).generic_string();
            if (rel.starts_with(".") || rel.find("/.") != std::string::npos) continue;
            if (rel.find(".tmp-") != std::string::npos) continue;
            entries[rel] = read_file(e.path());
        }
        return load_store_entries(entries);
    }
    if (!fs::exists(path, ec)) throw IoError("no collection store at " + path.string());
    return load_store_entries(zip::read(read_file(path)));
}

void save_store_zip(const Collection& c, const fs::path& path) {
    write_file_atomic(path, zip::write(store_entries(c), 0));
}

void save_store(const Collection& c, const fs::path& path) {
    std::error_code ec;
    if (fs::is_regular_file(path, ec)) {
        save_store_zip(c, path);
        return;
    }
    const auto entries = store_entries(c);
    fs::create_directories(path);
    for (const auto& [name, bytes] : entries) write_file_atomic(path / name, bytes);
    // drop blobs and documents that are no longer part of the collection
    for (const char* sub : {"docs", "resources"}) {
        if (!fs::is_directory(path / sub)) continue;
        std::vector<fs::path> stale;
        for (const auto& e : fs::directory_iterator(path / sub)) {
            auto rel = fs::relative(e.path(), path).generic_string();
            if (!entries.contains(rel)) stale.push_back(e.path());
        }
        for (const auto& p : stale) fs::remove_all(p);
    }
}

StoreLock::StoreLock(const fs::path& store) {
    auto lock_path = store;
    lock_path += ".lock";
    fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + lock_path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw IoError("collection store is locked by another process: " + store.string());
    }
}

StoreLock::~StoreLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

}  // namespace curator
