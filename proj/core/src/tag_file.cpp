#include "qdcascade/tag_file.hpp"

#include "qdcascade/errors.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace qdcascade {

namespace {

constexpr std::array<char, 4> magic = {'C', 'T', 'A', 'G'};

void put_u16(unsigned char *p, std::uint16_t v) noexcept {
    p[0] = static_cast<unsigned char>(v & 0xFFu);
    p[1] = static_cast<unsigned char>(v >> 8);
}

void put_u32(unsigned char *p, std::uint32_t v) noexcept {
    for (int i = 0; i < 4; ++i)
        p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
}

void put_u64(unsigned char *p, std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i)
        p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
}

std::uint16_t get_u16(unsigned char const *p) noexcept {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t get_u64(unsigned char const *p) noexcept {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

void encode_header(unsigned char *p, std::uint64_t count) noexcept {
    std::memcpy(p, magic.data(), magic.size());
    put_u16(p + 4, tag_format_version);
    put_u16(p + 6, 0);
    put_u64(p + 8, count);
}

void encode_record(unsigned char *p, TimeTag const &tag) noexcept {
    put_u64(p, tag.time);
    put_u16(p + 8, tag.channel);
    put_u16(p + 10, tag.flags);
    put_u32(p + 12, 0);
}

TimeTag decode_record(unsigned char const *p) noexcept {
    return {get_u64(p), get_u16(p + 8), get_u16(p + 10)};
}

// Returns the declared record count.
std::uint64_t decode_header(unsigned char const *p) {
    if (std::memcmp(p, magic.data(), magic.size()) != 0)
        throw FormatError("tag file: bad magic (expected \"CTAG\")");
    auto const version = get_u16(p + 4);
    if (version != tag_format_version) {
        throw FormatError("tag file: unsupported version " +
                          std::to_string(version));
    }
    return get_u64(p + 8);
}

std::span<TimeTag const> sorted_view(std::span<TimeTag const> tags,
                                     TagWriteOptions options,
                                     TagStream &scratch) {
    auto const bad = first_unsorted_index(tags);
    if (bad == tags.size())
        return tags;
    if (options.strict) {
        throw ContractError("write_tags: input not sorted by time at index " +
                            std::to_string(bad));
    }
    scratch.assign(tags.begin(), tags.end());
    sort_by_time(scratch);
    return scratch;
}

} // namespace

std::string encode_tags(std::span<TimeTag const> tags,
                        TagWriteOptions options) {
    TagStream scratch;
    auto const view = sorted_view(tags, options, scratch);
    std::string out(tag_header_size + view.size() * tag_record_size, '\0');
    auto *p = reinterpret_cast<unsigned char *>(out.data());
    encode_header(p, view.size());
    p += tag_header_size;
    for (auto const &tag : view) {
        encode_record(p, tag);
        p += tag_record_size;
    }
    return out;
}

std::uint64_t write_tags(std::span<TimeTag const> tags,
                         std::filesystem::path const &path,
                         TagWriteOptions options) {
    TagStream scratch;
    auto const view = sorted_view(tags, options, scratch);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");

    std::array<unsigned char, tag_header_size> header{};
    encode_header(header.data(), view.size());
    out.write(reinterpret_cast<char const *>(header.data()), header.size());

    constexpr std::size_t block = 4096;
    std::vector<unsigned char> buf(block * tag_record_size);
    for (std::size_t start = 0; start < view.size(); start += block) {
        auto const n = std::min(block, view.size() - start);
        for (std::size_t i = 0; i < n; ++i)
            encode_record(buf.data() + i * tag_record_size, view[start + i]);
        out.write(reinterpret_cast<char const *>(buf.data()),
                  static_cast<std::streamsize>(n * tag_record_size));
    }
    if (!out)
        throw IoError("write failed for " + path.string());
    return view.size();
}

TagReader::TagReader(std::filesystem::path const &path)
    : in_(path, std::ios::binary) {
    if (!in_)
        throw IoError("cannot open " + path.string());
    std::error_code ec;
    auto const file_size = std::filesystem::file_size(path, ec);
    if (ec)
        throw IoError("cannot stat " + path.string());
    if (file_size < tag_header_size)
        throw FormatError("tag file: header truncated in " + path.string());

    std::array<unsigned char, tag_header_size> header{};
    in_.read(reinterpret_cast<char *>(header.data()), header.size());
    record_count_ = decode_header(header.data());

    auto const payload = file_size - tag_header_size;
    complete_records_ = std::min<std::uint64_t>(payload / tag_record_size,
                                                record_count_);
    if (payload / tag_record_size > record_count_ ||
        (payload / tag_record_size == record_count_ &&
         payload % tag_record_size != 0)) {
        throw FormatError("tag file: trailing bytes after " +
                          std::to_string(record_count_) + " records");
    }
}

std::size_t TagReader::read(TagStream &out, std::size_t max_records) {
    if (next_record_ == record_count_)
        return 0;
    if (next_record_ == complete_records_) {
        throw TruncationError(
            "tag file: truncated record " + std::to_string(next_record_),
            tag_header_size + next_record_ * tag_record_size);
    }
    auto const n = static_cast<std::size_t>(std::min<std::uint64_t>(
        max_records, complete_records_ - next_record_));
    buffer_.resize(n * tag_record_size);
    in_.read(reinterpret_cast<char *>(buffer_.data()),
             static_cast<std::streamsize>(buffer_.size()));
    if (static_cast<std::size_t>(in_.gcount()) != buffer_.size())
        throw IoError("tag file: short read");
    out.reserve(out.size() + n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(decode_record(buffer_.data() + i * tag_record_size));
    next_record_ += n;
    return n;
}

TagStream read_tags(std::filesystem::path const &path) {
    TagReader reader(path);
    TagStream tags;
    tags.reserve(static_cast<std::size_t>(reader.record_count()));
    while (reader.read(tags, 1 << 16) > 0) {
    }
    return tags;
}

TagStream decode_tags(std::span<std::byte const> bytes) {
    if (bytes.size() < tag_header_size)
        throw FormatError("tag file: header truncated");
    auto const *p = reinterpret_cast<unsigned char const *>(bytes.data());
    auto const count = decode_header(p);
    auto const payload = bytes.size() - tag_header_size;
    auto const complete = payload / tag_record_size;
    if (complete > count || (complete == count && payload % tag_record_size))
        throw FormatError("tag file: trailing bytes after records");
    TagStream tags;
    tags.reserve(static_cast<std::size_t>(complete));
    for (std::uint64_t i = 0; i < count; ++i) {
        if (i == complete) {
            throw TruncationError("tag file: truncated record " +
                                      std::to_string(i),
                                  tag_header_size + i * tag_record_size);
        }
        tags.push_back(decode_record(p + tag_header_size +
                                     i * tag_record_size));
    }
    return tags;
}

} // namespace qdcascade
