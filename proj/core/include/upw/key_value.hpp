#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace upw {

// Flat "key = value" text. Blank lines and lines starting with '#' are skipped.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::istream& in);
KeyValues parse_key_values(std::string_view text);

// Typed lookups that consume the key from `kv` so callers can reject leftovers.
std::size_t take_size(KeyValues& kv, std::string_view key, std::size_t fallback);
double take_double(KeyValues& kv, std::string_view key, double fallback);
std::uint64_t take_u64(KeyValues& kv, std::string_view key, std::uint64_t fallback);
std::string take_string(KeyValues& kv, std::string_view key, std::string fallback);

// Throws ErrorKind::Config naming the first unknown key.
void reject_unknown_keys(const KeyValues& kv);

}  // namespace upw
