#include "metacomment/util/hash.hpp"

#include <array>
#include <fstream>

#include "metacomment/util/error.hpp"

namespace metacomment {

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t state) {
    for (const std::byte b : bytes) {
        state ^= static_cast<std::uint64_t>(b);
        state *= 0x100000001b3ULL;
    }
    return state;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t state) {
    return fnv1a64(std::as_bytes(std::span(text.data(), text.size())), state);
}

std::string to_hex(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::array<char, 1 << 16> buffer{};
    std::uint64_t state = kFnvOffset;
    while (in) {
        in.read(buffer.data(), buffer.size());
        const auto got = static_cast<std::size_t>(in.gcount());
        state = fnv1a64(std::string_view(buffer.data(), got), state);
    }
    return to_hex(state);
}

}  // namespace metacomment
