#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ember {

// The reader-facing parts of a news item.
enum class Component { Headline, Image, Comment, Body };

inline constexpr std::array<Component, 4> kAllComponents{
    Component::Headline, Component::Image, Component::Comment, Component::Body};

char component_letter(Component c);
std::optional<Component> component_from_letter(char c);
std::string component_name(Component c);

// Components in the order readers encounter them; default H, I, C, B.
class ReadingOrder {
 public:
  ReadingOrder();
  explicit ReadingOrder(std::vector<Component> order);
  // Parses letters such as "HICB"; throws ConfigError on duplicates, unknown
  // letters or fewer than two components.
  static ReadingOrder parse(std::string_view letters);

  const std::vector<Component>& components() const noexcept { return order_; }
  std::size_t size() const noexcept { return order_.size(); }
  bool contains(Component c) const;
  std::size_t rank(Component c) const;
  Component last() const { return order_.back(); }
  std::string letters() const;
  ReadingOrder without(Component c) const;

  friend bool operator==(const ReadingOrder&, const ReadingOrder&) = default;

 private:
  std::vector<Component> order_;
};

// An unordered component pair stored with the earlier-read component first.
struct ComponentPair {
  Component first;
  Component second;
  std::string letters() const;
  bool involves(Component c) const { return first == c || second == c; }
  Component partner(Component c) const { return first == c ? second : first; }
  friend bool operator==(const ComponentPair&, const ComponentPair&) = default;
};

// Parses "HI" into a pair oriented by `order`.
ComponentPair parse_pair(std::string_view letters, const ReadingOrder& order);

// All n(n-1)/2 pairs sorted by (rank of the later component, rank of the
// earlier component). For H,I,C,B this yields HI, HC, IC, HB, IB, CB.
std::vector<ComponentPair> pair_order(const ReadingOrder& order);

}  // namespace ember
