#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <streambuf>
#include <string>

#include "upw/error.hpp"

namespace upw::detail {

// Read-only streambuf over a byte span.
class SpanBuf : public std::streambuf {
public:
    explicit SpanBuf(std::span<const std::uint8_t> bytes) {
        char* begin = const_cast<char*>(reinterpret_cast<const char*>(bytes.data()));
        setg(begin, begin, begin + bytes.size());
    }
};

class LeWriter {
public:
    explicit LeWriter(std::ostream& out) : out_(out) {}

    void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

private:
    void put(std::uint64_t v, int n) {
        char buf[8];
        for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out_.write(buf, n);
    }
    std::ostream& out_;
};

// Little-endian reader that tracks its byte offset and reports short reads
// as TruncationError.
class LeReader {
public:
    explicit LeReader(std::istream& in) : in_(in) {}

    std::uint64_t offset() const noexcept { return offset_; }

    // Reads up to n bytes; returns the number actually read.
    std::size_t read_some(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        const auto got = static_cast<std::size_t>(in_.gcount());
        offset_ += got;
        return got;
    }

    void bytes(void* data, std::size_t n, const char* what) {
        const std::uint64_t start = offset_;
        if (read_some(data, n) != n) throw TruncationError(offset_, std::string("truncated ") + what + " starting at " + std::to_string(start));
    }
    std::uint8_t u8(const char* what) {
        std::uint8_t v = 0;
        bytes(&v, 1, what);
        return v;
    }
    std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(get(4, what)); }
    std::uint64_t u64(const char* what) { return get(8, what); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::uint64_t get(int n, const char* what) {
        unsigned char buf[8] = {};
        bytes(buf, static_cast<std::size_t>(n), what);
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    }
    std::istream& in_;
    std::uint64_t offset_ = 0;
};

}  // namespace upw::detail
