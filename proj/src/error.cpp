#include "depsev/error.hpp"

namespace depsev {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error("parse", source + ":" + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace depsev
