#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <zlib.h>

#include "udemd/error.hpp"

namespace udemd::binary {

inline std::uint32_t crc32_of(const std::vector<unsigned char>& bytes, std::size_t length) {
    return static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(length)));
}

/// Little-endian encoder.
class Writer {
public:
    template <typename T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                     std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                        std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
        U bits;
        std::memcpy(&bits, &value, sizeof bits);
        for (std::size_t b = 0; b < sizeof bits; ++b) bytes_.push_back(static_cast<unsigned char>(bits >> (8 * b)));
    }

    void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

    void put_string(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        put_bytes(s);
    }

    /// Appends the CRC-32 of everything written so far.
    void seal() { put(crc32_of(bytes_, bytes_.size())); }

    const std::vector<unsigned char>& bytes() const noexcept { return bytes_; }

private:
    std::vector<unsigned char> bytes_;
};

/// Little-endian decoder. Running out of bytes is reported as a checksum
/// failure since it means the payload was truncated.
class Reader {
public:
    explicit Reader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                     std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                        std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
        require(pos_ + sizeof(U) <= bytes_.size(), ErrorCode::ChecksumFailure, "truncated payload");
        U bits = 0;
        for (std::size_t b = 0; b < sizeof bits; ++b) bits |= static_cast<U>(bytes_[pos_ + b]) << (8 * b);
        pos_ += sizeof bits;
        T value;
        std::memcpy(&value, &bits, sizeof value);
        return value;
    }

    std::string get_bytes(std::size_t count) {
        require(pos_ + count <= bytes_.size(), ErrorCode::ChecksumFailure, "truncated payload");
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + count));
        pos_ += count;
        return s;
    }

    std::string get_string() { return get_bytes(get<std::uint32_t>()); }

    /// Reads a count that prefixes `element_size`-byte records, refusing
    /// counts that cannot fit in the remaining bytes.
    std::uint64_t get_count(std::size_t element_size) {
        const auto count = get<std::uint64_t>();
        require(element_size == 0 || count <= remaining() / element_size, ErrorCode::ChecksumFailure,
                "truncated payload");
        return count;
    }

    /// Checks the trailing CRC over everything before it.
    void verify_seal() {
        const std::size_t body = pos_;
        const auto stored = get<std::uint32_t>();
        require(stored == crc32_of(bytes_, body), ErrorCode::ChecksumFailure, "CRC mismatch");
        require(pos_ == bytes_.size(), ErrorCode::ChecksumFailure, "trailing bytes after checksum");
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    std::vector<unsigned char> bytes_;
    std::size_t pos_ = 0;
};

} // namespace udemd::binary
