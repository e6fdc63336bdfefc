#include "amortlab/pointer.hpp"

#include <charconv>

namespace amortlab {

Pointer Pointer::child(std::uint32_t index) const {
  std::vector<std::uint32_t> path = path_;
  path.push_back(index);
  return Pointer(std::move(path));
}

Pointer Pointer::parent() const {
  std::vector<std::uint32_t> path = path_;
  if (!path.empty()) path.pop_back();
  return Pointer(std::move(path));
}

bool Pointer::is_under(const Pointer& owner) const {
  if (path_.size() <= owner.path_.size()) return false;
  for (std::size_t i = 0; i < owner.path_.size(); ++i) {
    if (path_[i] != owner.path_[i]) return false;
  }
  return true;
}

std::string Pointer::str() const {
  std::string out;
  for (std::size_t i = 0; i < path_.size(); ++i) {
    if (i > 0) out += '.';
    out += std::to_string(path_[i]);
  }
  return out;
}

std::optional<Pointer> Pointer::parse(std::string_view text) {
  std::vector<std::uint32_t> path;
  std::size_t pos = 0;
  while (true) {
    std::size_t dot = text.find('.', pos);
    std::string_view part = text.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
    if (part.empty()) return std::nullopt;
    std::uint32_t value = 0;
    auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || end != part.data() + part.size()) return std::nullopt;
    path.push_back(value);
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return Pointer(std::move(path));
}

}  // namespace amortlab
