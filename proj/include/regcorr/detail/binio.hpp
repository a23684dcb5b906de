#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "regcorr/error.hpp"

namespace regcorr::detail {

// Little-endian binary encode/decode over in-memory buffers. Files are read
// whole so decode errors can report exact byte offsets.

class ByteWriter {
public:
    void put_bytes(const void* src, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(src);
        buf_.insert(buf_.end(), p, p + n);
    }
    void put_u8(std::uint8_t v) { buf_.push_back(v); }
    void put_u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
    }
    void put_f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_u32(bits);
    }
    void put_f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
    }

    const std::vector<unsigned char>& bytes() const { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::vector<unsigned char> bytes) : buf_(std::move(bytes)) {}

    std::uint64_t offset() const { return pos_; }
    std::uint64_t remaining() const { return buf_.size() - pos_; }

    void require(std::uint64_t n, const char* what) const {
        if (remaining() < n) throw FormatError(std::string("truncated file: expected ") + what, pos_);
    }

    void get_bytes(void* dst, std::size_t n, const char* what) {
        require(n, what);
        std::memcpy(dst, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t get_u8(const char* what) {
        require(1, what);
        return buf_[pos_++];
    }
    std::uint32_t get_u32(const char* what) {
        require(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float get_f32(const char* what) {
        std::uint32_t bits = get_u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double get_f64(const char* what) {
        require(8, what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
        pos_ += 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

private:
    std::vector<unsigned char> buf_;
    std::uint64_t pos_ = 0;
};

std::vector<unsigned char> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<unsigned char>& bytes);

}  // namespace regcorr::detail
