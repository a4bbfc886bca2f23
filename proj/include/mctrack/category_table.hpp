#pragma once

#include <map>
#include <string>

namespace mctrack {

/// A value with optional per-category overrides.
template <class T>
struct CategoryTable {
  T fallback{};
  std::map<std::string, T> overrides;

  const T& at(const std::string& category) const {
    const auto it = overrides.find(category);
    return it == overrides.end() ? fallback : it->second;
  }

  T& set(const std::string& category, T value) {
    return overrides.insert_or_assign(category, std::move(value)).first->second;
  }
};

bool is_vehicle_category(const std::string& category);

}  // namespace mctrack
