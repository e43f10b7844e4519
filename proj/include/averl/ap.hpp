#ifndef AVERL_AP_HPP
#define AVERL_AP_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "averl/common.hpp"

namespace averl {

// A letter is one element of 2^AP: bit i set means proposition i holds.
using Letter = std::uint32_t;

// Ordered set of atomic propositions shared between an MDP's labeling and a
// safety automaton's alphabet. Order matters: bit positions and the automaton
// transition table are derived from it.
class ApRegistry {
 public:
  ApRegistry() = default;
  explicit ApRegistry(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() > kMaxProps)
      throw ConfigError("too many atomic propositions (limit " +
                        std::to_string(kMaxProps) + ")");
    for (std::size_t i = 0; i < names_.size(); ++i)
      for (std::size_t j = i + 1; j < names_.size(); ++j)
        if (names_[i] == names_[j])
          throw ConfigError("duplicate atomic proposition: " + names_[i]);
  }

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int i) const { return names_[i]; }

  // Letters per transition-table row. Dense tables cap the registry size.
  static constexpr int kMaxProps = 20;
  std::uint32_t alphabet_size() const { return 1u << names_.size(); }

  bool contains(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }

  int index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw UnknownAtomError("unknown proposition: " + name);
    return static_cast<int>(it - names_.begin());
  }

  Letter letter(const std::vector<std::string>& true_props) const {
    Letter l = 0;
    for (const auto& p : true_props) l |= Letter{1} << index(p);
    return l;
  }

  std::vector<std::string> props_of(Letter l) const {
    std::vector<std::string> out;
    for (int i = 0; i < size(); ++i)
      if (l & (Letter{1} << i)) out.push_back(names_[i]);
    return out;
  }

  bool operator==(const ApRegistry& other) const { return names_ == other.names_; }
  bool operator!=(const ApRegistry& other) const { return !(*this == other); }

 private:
  std::vector<std::string> names_;
};

inline bool letter_has(Letter l, int prop_index) {
  return (l >> prop_index) & 1u;
}

}  // namespace averl

#endif  // AVERL_AP_HPP
