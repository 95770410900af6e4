#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace metacomment {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

// 64-bit FNV-1a, chainable through `state`.
std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t state = kFnvOffset);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t state = kFnvOffset);

template <typename T>
std::uint64_t fnv1a64_of(std::span<const T> values, std::uint64_t state = kFnvOffset) {
    return fnv1a64(std::as_bytes(values), state);
}

std::string to_hex(std::uint64_t value);

// Hash of a file's bytes, hex encoded. Throws DataError if unreadable.
std::string hash_file(const std::filesystem::path& path);

}  // namespace metacomment
