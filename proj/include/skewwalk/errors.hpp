#pragma once

#include <stdexcept>
#include <string>

namespace skewwalk {

inline constexpr const char* kVersion = "0.1.0";

/// Bad command line or out-of-range configuration value (CLI exit status 2).
struct usage_error : std::runtime_error {
  explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

/// Request exceeds the declared memory/size budget (CLI exit status 3).
struct resource_error : std::runtime_error {
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace skewwalk
