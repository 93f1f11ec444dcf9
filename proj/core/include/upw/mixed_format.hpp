#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "upw/image.hpp"

namespace upw {

// UPWMIX1 container, little-endian:
//   header  = "UPWMIX1\0" | u32 version (1) | u64 record count
//   record  = u8 tag | payload
//   tag 0   = text:  u64 byte length | UTF-8 bytes
//   tag 1   = image: u32 width | u32 height | width*height*3 RGB bytes
//
// Decoding errors: bad magic, version or tag -> Format; input ending inside a
// header, tag, length field or text payload -> Truncation (with byte offset);
// invalid UTF-8 -> Encoding; zero dimensions or image dimensions that run past
// the available payload -> Corruption; bytes after the last record -> Corruption.

struct TextRecord {
    std::string utf8;
    friend bool operator==(const TextRecord&, const TextRecord&) = default;
};

struct ImageRecord {
    RgbImage image;
    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

using MixedRecord = std::variant<TextRecord, ImageRecord>;

inline constexpr std::uint32_t kMixedVersion = 1;

bool is_valid_utf8(std::string_view bytes) noexcept;

void write_mixed(std::ostream& out, std::span<const MixedRecord> records);
std::vector<std::uint8_t> write_mixed(std::span<const MixedRecord> records);
void write_mixed(const std::filesystem::path& path, std::span<const MixedRecord> records);

std::vector<MixedRecord> read_mixed(std::span<const std::uint8_t> bytes);
std::vector<MixedRecord> read_mixed(const std::filesystem::path& path);

// Single-pass record iterator over a stream; holds at most one record.
class MixedReader {
public:
    explicit MixedReader(std::istream& in);
    ~MixedReader();
    MixedReader(const MixedReader&) = delete;
    MixedReader& operator=(const MixedReader&) = delete;

    std::uint64_t declared_count() const noexcept { return count_; }
    std::uint64_t records_read() const noexcept { return read_; }
    std::uint64_t offset() const noexcept;

    // Next record, or nullopt once all declared records were read and the
    // stream is verified to end there.
    std::optional<MixedRecord> next();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint64_t count_ = 0;
    std::uint64_t read_ = 0;
};

}  // namespace upw
