#pragma once

/// @file store.hpp
/// @brief On-disk collection store (`.clv`), as a directory or a zip.
///
/// Layout (all text files canonical, LF-terminated):
///   meta                 format id + schema version
///   schema               schema tree
///   docs/<token>         one file per document
///   resources/index      resource metadata
///   resources/<id>.<ext> local blobs
///   annotations          annotation list
///   log/ops.cdsl         applied curation ops, one DSL line each
///   log/records          timestamps and versions for each logged op
/// Dotfiles inside a directory store (import cursor, caches) are left alone.

#include <filesystem>
#include <string>
#include <string_view>

#include "curator/export/zip.hpp"
#include "curator/model.hpp"

namespace curator {

/// Reversible mapping of an id onto [A-Za-z0-9._-]; other bytes become "_hh".
std::string id_token(std::string_view id);
std::string id_from_token(std::string_view token);

zip::Entries store_entries(const Collection& c);
Collection load_store_entries(const zip::Entries& entries);

/// Loads a directory or zip store. Throws IoError / DomainError.
Collection load_store(const std::filesystem::path& path);

/// Writes `c` to `path`. An existing zip file stays a zip; anything else is
/// written as a directory. Refuses invalid collections.
void save_store(const Collection& c, const std::filesystem::path& path);
void save_store_zip(const Collection& c, const std::filesystem::path& path);

/// True when `path` is a directory store or a zip containing `meta`.
bool is_store(const std::filesystem::path& path);

/// Advisory exclusive lock on `<store>.lock`, held for the object's lifetime.
class StoreLock {
public:
    explicit StoreLock(const std::filesystem::path& store);
    ~StoreLock();
    StoreLock(const StoreLock&) = delete;
    StoreLock& operator=(const StoreLock&) = delete;

private:
    int fd_ = -1;
};

Bytes read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace curator
