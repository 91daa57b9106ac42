#pragma once

#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

// Little-endian integer helpers shared by the binary formats.
namespace rbissim::wire {

template <typename T>
    requires std::is_integral_v<T>
void put_le(std::vector<std::uint8_t>& out, T value)
{
    using U = std::make_unsigned_t<T>;
    auto v = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        v = static_cast<U>(v >> 8);
    }
}

/// Caller guarantees bytes.size() >= sizeof(T).
template <typename T>
    requires std::is_integral_v<T>
T get_le(std::span<const std::uint8_t> bytes)
{
    using U = std::make_unsigned_t<T>;
    U v = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) v = static_cast<U>((v << 8) | bytes[i]);
    return static_cast<T>(v);
}

} // namespace rbissim::wire
