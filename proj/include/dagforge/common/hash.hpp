#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

namespace dagforge {

// Project-wide stable digest: SHA-256 (OpenSSL EVP). Everything that needs a
// reproducible identity (cache keys, artifact versions, run ids, the mock
// provider's value stream) is derived from it.
inline std::array<unsigned char, 32> sha256_raw(std::string_view data) {
    std::array<unsigned char, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw std::runtime_error("sha256 failed");
    }
    return out;
}

inline std::string to_hex(const unsigned char* bytes, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        s.push_back(digits[bytes[i] >> 4]);
        s.push_back(digits[bytes[i] & 0xf]);
    }
    return s;
}

inline std::string sha256_hex(std::string_view data) {
    auto raw = sha256_raw(data);
    return to_hex(raw.data(), raw.size());
}

// First 8 digest bytes as a big-endian unsigned integer. This is the "d" the
// mock provider draws scalars from.
inline std::uint64_t sha256_u64(std::string_view data) {
    auto raw = sha256_raw(data);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | raw[static_cast<std::size_t>(i)];
    return v;
}

// Length-prefixed framing so distinct field tuples can never collide as a
// concatenated byte string.
inline std::string frame_fields(const std::vector<std::string_view>& fields) {
    std::string buf;
    for (auto f : fields) {
        buf += std::to_string(f.size());
        buf.push_back(':');
        buf.append(f.data(), f.size());
    }
    return buf;
}

}  // namespace dagforge
