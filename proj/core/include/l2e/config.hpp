#pragma once

#include <iosfwd>
#include <map>
#include <string>

namespace l2e {

/// Reads `key = value` lines. '#' starts a comment; blank lines are ignored.
/// Lines without '=', empty keys and repeated keys throw InvalidArgument.
std::map<std::string, std::string> read_key_values(std::istream& in);

} // namespace l2e
