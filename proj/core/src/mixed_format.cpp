#include "upw/mixed_format.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "upw/error.hpp"

namespace upw {
namespace {

constexpr char kMagic[8] = {'U', 'P', 'W', 'M', 'I', 'X', '1', '\0'};
constexpr std::uint8_t kTextTag = 0;
constexpr std::uint8_t kImageTag = 1;
constexpr std::size_t kChunk = 1 << 16;

void validate(const MixedRecord& record) {
    if (const auto* text = std::get_if<TextRecord>(&record)) {
        if (!is_valid_utf8(text->utf8)) throw Error(ErrorKind::Encoding, "text record is not valid UTF-8");
    } else {
        const RgbImage& img = std::get<ImageRecord>(record).image;
        if (img.empty()) throw Error(ErrorKind::EmptyImage, "image record needs dimensions >= 1");
        if (img.width > UINT32_MAX || img.height > UINT32_MAX) throw Error(ErrorKind::Corruption, "image too large");
        if (img.pixels.size() != img.width * img.height * 3) {
            throw Error(ErrorKind::Corruption, "image payload does not match its dimensions");
        }
    }
}

// Reads exactly n bytes in bounded chunks so a bogus length cannot force a
// huge allocation up front. Returns false on a short read.
bool read_chunked(detail::LeReader& r, std::uint64_t n, std::string& out) {
    out.clear();
    while (out.size() < n) {
        const std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n - out.size()));
        const std::size_t old = out.size();
        out.resize(old + want);
        const std::size_t got = r.read_some(out.data() + old, want);
        if (got != want) {
            out.resize(old + got);
            return false;
        }
    }
    return true;
}

MixedRecord read_record(detail::LeReader& r) {
    const std::uint64_t record_start = r.offset();
    const std::uint8_t tag = r.u8("record tag");
    if (tag == kTextTag) {
        const std::uint64_t len = r.u64("text length");
        TextRecord rec;
        if (!read_chunked(r, len, rec.utf8)) {
            throw TruncationError(r.offset(), "text record starting at " + std::to_string(record_start) + " declares " +
                                                  std::to_string(len) + " bytes");
        }
        if (!is_valid_utf8(rec.utf8)) {
            throw Error(ErrorKind::Encoding, "text record at byte offset " + std::to_string(record_start) +
                                                 " is not valid UTF-8");
        }
        return rec;
    }
    if (tag == kImageTag) {
        const std::uint32_t w = r.u32("image width");
        const std::uint32_t h = r.u32("image height");
        if (w == 0 || h == 0) {
            throw Error(ErrorKind::Corruption, "image record at byte offset " + std::to_string(record_start) +
                                                   " has a zero dimension");
        }
        const std::uint64_t payload = std::uint64_t{w} * h * 3;
        std::string raw;
        if (!read_chunked(r, payload, raw)) {
            throw Error(ErrorKind::Corruption, "image record at byte offset " + std::to_string(record_start) + " is " +
                                                   std::to_string(w) + "x" + std::to_string(h) + " but only " +
                                                   std::to_string(raw.size()) + " payload bytes follow (ends at " +
                                                   std::to_string(r.offset()) + ")");
        }
        ImageRecord rec{RgbImage(w, h)};
        std::memcpy(rec.image.pixels.data(), raw.data(), raw.size());
        return rec;
    }
    throw Error(ErrorKind::Format, "unknown record tag " + std::to_string(tag) + " at byte offset " +
                                       std::to_string(record_start));
}

}  // namespace

bool is_valid_utf8(std::string_view bytes) noexcept {
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(bytes[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= n) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            const auto cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        constexpr std::uint32_t kMin[4] = {0, 0x80, 0x800, 0x10000};
        if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += extra + 1;
    }
    return true;
}

void write_mixed(std::ostream& out, std::span<const MixedRecord> records) {
    for (const MixedRecord& rec : records) validate(rec);
    detail::LeWriter w(out);
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kMixedVersion);
    w.u64(records.size());
    for (const MixedRecord& rec : records) {
        if (const auto* text = std::get_if<TextRecord>(&rec)) {
            w.u8(kTextTag);
            w.u64(text->utf8.size());
            w.bytes(text->utf8.data(), text->utf8.size());
        } else {
            const RgbImage& img = std::get<ImageRecord>(rec).image;
            w.u8(kImageTag);
            w.u32(static_cast<std::uint32_t>(img.width));
            w.u32(static_cast<std::uint32_t>(img.height));
            w.bytes(img.pixels.data(), img.pixels.size());
        }
    }
}

std::vector<std::uint8_t> write_mixed(std::span<const MixedRecord> records) {
    std::ostringstream out(std::ios::binary);
    write_mixed(out, records);
    const std::string s = out.str();
    return {s.begin(), s.end()};
}

void write_mixed(const std::filesystem::path& path, std::span<const MixedRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    write_mixed(out, records);
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

struct MixedReader::Impl {
    explicit Impl(std::istream& in) : reader(in) {}
    detail::LeReader reader;
};

MixedReader::MixedReader(std::istream& in) : impl_(std::make_unique<Impl>(in)) {
    auto& r = impl_->reader;
    char magic[8];
    r.bytes(magic, sizeof magic, "file magic");
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error(ErrorKind::Format, "not a UPWMIX1 file (bad magic)");
    const std::uint32_t version = r.u32("version");
    if (version != kMixedVersion) throw Error(ErrorKind::Format, "unsupported UPWMIX version " + std::to_string(version));
    count_ = r.u64("record count");
}

MixedReader::~MixedReader() = default;

std::uint64_t MixedReader::offset() const noexcept { return impl_->reader.offset(); }

std::optional<MixedRecord> MixedReader::next() {
    auto& r = impl_->reader;
    if (read_ == count_) {
        if (!r.at_end()) {
            throw Error(ErrorKind::Corruption, "trailing bytes after the declared " + std::to_string(count_) +
                                                   " records (at byte offset " + std::to_string(r.offset()) + ")");
        }
        return std::nullopt;
    }
    MixedRecord rec = read_record(r);
    ++read_;
    return rec;
}

std::vector<MixedRecord> read_mixed(std::span<const std::uint8_t> bytes) {
    detail::SpanBuf buf(bytes);
    std::istream in(&buf);
    MixedReader reader(in);
    std::vector<MixedRecord> out;
    while (auto rec = reader.next()) out.push_back(std::move(*rec));
    return out;
}

std::vector<MixedRecord> read_mixed(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    MixedReader reader(in);
    std::vector<MixedRecord> out;
    while (auto rec = reader.next()) out.push_back(std::move(*rec));
    return out;
}

}  // namespace upw
