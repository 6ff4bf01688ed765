#pragma once

// Little-endian encode/decode helpers shared by the binary file formats.

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hd::io {

class ByteWriter {
public:
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    template <class T>
    void le(T value) {
        static_assert(std::is_unsigned_v<T>);
        for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
    }

    void f64(double value) {
        std::uint64_t bits;
        std::memcpy(&bits, &value, sizeof bits);
        le(bits);
    }

    void u32_array(const std::uint32_t* data, std::size_t n) {
        buf_.reserve(buf_.size() + 4 * n);
        for (std::size_t i = 0; i < n; ++i) le(data[i]);
    }

    const std::vector<char>& buffer() const { return buf_; }

private:
    std::vector<char> buf_;
};

class ByteReader {
public:
    ByteReader(const char* data, std::size_t size, std::string what) : p_(data), end_(data + size), what_(std::move(what)) {}

    std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }

    std::string_view bytes(std::size_t n) {
        need(n);
        std::string_view out(p_, n);
        p_ += n;
        return out;
    }

    template <class T>
    T le() {
        static_assert(std::is_unsigned_v<T>);
        need(sizeof(T));
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<unsigned char>(p_[i])) << (8 * i);
        p_ += sizeof(T);
        return value;
    }

    double f64() {
        const auto bits = le<std::uint64_t>();
        double value;
        std::memcpy(&value, &bits, sizeof value);
        return value;
    }

    void u32_array(std::uint32_t* out, std::size_t n) {
        if (n > remaining() / 4) fail();
        for (std::size_t i = 0; i < n; ++i) out[i] = le<std::uint32_t>();
    }

    [[noreturn]] void fail() const { throw std::runtime_error(what_ + ": truncated file"); }

private:
    void need(std::size_t n) const {
        if (n > remaining()) fail();
    }

    const char* p_;
    const char* end_;
    std::string what_;
};

std::vector<char> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<char>& bytes);

}  // namespace hd::io
