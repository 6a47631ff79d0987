#pragma once

// Binary time-tag files.
//
// Layout (all integers little-endian):
//   header, 16 bytes:  "CTAG" | u16 version (=1) | u16 reserved | u64 count
//   record, 16 bytes:  u64 time_ps | u16 channel | u16 flags | u32 reserved

#include "qdcascade/timetag.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>

namespace qdcascade {

inline constexpr std::size_t tag_header_size = 16;
inline constexpr std::size_t tag_record_size = 16;
inline constexpr std::uint16_t tag_format_version = 1;

struct TagWriteOptions {
    /// Reject unsorted input instead of sorting a copy before writing.
    bool strict = false;
};

/// Serializes tags into the file layout. Input must be time-sorted unless
/// options.strict is false, in which case a sorted copy is encoded.
std::string encode_tags(std::span<TimeTag const> tags,
                        TagWriteOptions options = {});

/// Writes a tag file and returns the number of records written.
std::uint64_t write_tags(std::span<TimeTag const> tags,
                         std::filesystem::path const &path,
                         TagWriteOptions options = {});

/// Sequential reader over one tag file.
class TagReader {
  public:
    explicit TagReader(std::filesystem::path const &path);

    /// Record count declared by the header.
    [[nodiscard]] std::uint64_t record_count() const noexcept {
        return record_count_;
    }

    [[nodiscard]] std::uint64_t records_read() const noexcept {
        return next_record_;
    }

    /// Appends up to max_records tags to out; returns how many were read.
    /// Returns 0 at end of data. Throws TruncationError when the file ends
    /// inside the next record.
    std::size_t read(TagStream &out, std::size_t max_records);

  private:
    std::ifstream in_;
    std::uint64_t record_count_ = 0;
    std::uint64_t complete_records_ = 0;
    std::uint64_t next_record_ = 0;
    std::vector<unsigned char> buffer_;
};

/// Reads an entire tag file.
TagStream read_tags(std::filesystem::path const &path);

/// Parses an in-memory file image.
TagStream decode_tags(std::span<std::byte const> bytes);

} // namespace qdcascade
