#pragma once

#include <string>
#include <string_view>

namespace g2p {
namespace utf8 {

// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::u32string decode(std::string_view s);

// Encodes code points back to UTF-8.
std::string encode(std::u32string_view s);

std::string encode(char32_t c);

}  // namespace utf8
}  // namespace g2p
