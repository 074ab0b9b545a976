#include "l2e/config.hpp"

#include <istream>

#include "l2e/error.hpp"

namespace l2e {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::map<std::string, std::string> read_key_values(std::istream& in)
{
    std::map<std::string, std::string> out;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(raw.substr(0, raw.find('#')));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config line " + std::to_string(line) + ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw InvalidArgument("config line " + std::to_string(line) + ": empty key");
        if (!out.emplace(key, value).second)
            throw InvalidArgument("config line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    return out;
}

} // namespace l2e
