#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace amortlab {

// A heap address. Root allocations are single-component paths; cells
// allocated while a thunk t is being forced or speculated live under t,
// so the same computation always produces the same names.
class Pointer {
 public:
  Pointer() = default;
  explicit Pointer(std::vector<std::uint32_t> path) : path_(std::move(path)) {}

  static Pointer root(std::uint32_t index) { return Pointer({index}); }

  Pointer child(std::uint32_t index) const;
  Pointer parent() const;

  std::span<const std::uint32_t> path() const { return path_; }
  bool is_root() const { return path_.size() == 1; }
  bool empty() const { return path_.empty(); }
  std::uint32_t last() const { return path_.back(); }

  // True if this pointer lives strictly below `owner`.
  bool is_under(const Pointer& owner) const;

  // "3.0.1"
  std::string str() const;
  static std::optional<Pointer> parse(std::string_view text);

  auto operator<=>(const Pointer&) const = default;
  bool operator==(const Pointer&) const = default;

 private:
  std::vector<std::uint32_t> path_;
};

}  // namespace amortlab
