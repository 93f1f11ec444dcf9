#include "upw/key_value.hpp"

#include <charconv>
#include <cstdint>
#include <istream>
#include <sstream>

#include "upw/error.hpp"

namespace upw {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(std::string_view key, const std::string& text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorKind::Config, "config key '" + std::string(key) + "': cannot parse '" + text + "'");
    }
    return value;
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Config, "config line " + std::to_string(line_no) + ": expected key=value");
        }
        std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw Error(ErrorKind::Config, "config line " + std::to_string(line_no) + ": empty key");
        if (kv.count(key)) throw Error(ErrorKind::Config, "config key '" + key + "' given twice");
        kv.emplace(std::move(key), trim(std::string_view(t).substr(eq + 1)));
    }
    return kv;
}

KeyValues parse_key_values(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_key_values(in);
}

std::size_t take_size(KeyValues& kv, std::string_view key, std::size_t fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const auto v = parse_number<std::size_t>(key, it->second);
    kv.erase(it);
    return v;
}

std::uint64_t take_u64(KeyValues& kv, std::string_view key, std::uint64_t fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const auto v = parse_number<std::uint64_t>(key, it->second);
    kv.erase(it);
    return v;
}

double take_double(KeyValues& kv, std::string_view key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const auto v = parse_number<double>(key, it->second);
    kv.erase(it);
    return v;
}

std::string take_string(KeyValues& kv, std::string_view key, std::string fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::string v = it->second;
    kv.erase(it);
    return v;
}

void reject_unknown_keys(const KeyValues& kv) {
    if (!kv.empty()) throw Error(ErrorKind::Config, "unknown config key '" + kv.begin()->first + "'");
}

}  // namespace upw
