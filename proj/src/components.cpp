#include "ember/components.hpp"

#include <algorithm>

#include "ember/error.hpp"

namespace ember {

char component_letter(Component c) {
  switch (c) {
    case Component::Headline: return 'H';
    case Component::Image: return 'I';
    case Component::Comment: return 'C';
    case Component::Body: return 'B';
  }
  return '?';
}

std::optional<Component> component_from_letter(char c) {
  switch (c) {
    case 'H': case 'h': return Component::Headline;
    case 'I': case 'i': return Component::Image;
    case 'C': case 'c': return Component::Comment;
    case 'B': case 'b': return Component::Body;
    default: return std::nullopt;
  }
}

std::string component_name(Component c) {
  switch (c) {
    case Component::Headline: return "headline";
    case Component::Image: return "image";
    case Component::Comment: return "comment";
    case Component::Body: return "body";
  }
  return "unknown";
}

ReadingOrder::ReadingOrder() : order_(kAllComponents.begin(), kAllComponents.end()) {}

ReadingOrder::ReadingOrder(std::vector<Component> order) : order_(std::move(order)) {
  if (order_.size() < 2)
    throw ConfigError("a reading order needs at least two components");
  for (std::size_t i = 0; i < order_.size(); ++i)
    for (std::size_t j = i + 1; j < order_.size(); ++j)
      if (order_[i] == order_[j])
        throw ConfigError(std::string("duplicate component '") +
                          component_letter(order_[i]) + "' in reading order");
}

ReadingOrder ReadingOrder::parse(std::string_view letters) {
  std::vector<Component> order;
  for (char ch : letters) {
    auto c = component_from_letter(ch);
    if (!c) throw ConfigError(std::string("unknown component letter '") + ch + "'");
    order.push_back(*c);
  }
  return ReadingOrder(std::move(order));
}

bool ReadingOrder::contains(Component c) const {
  return std::find(order_.begin(), order_.end(), c) != order_.end();
}

std::size_t ReadingOrder::rank(Component c) const {
  auto it = std::find(order_.begin(), order_.end(), c);
  if (it == order_.end())
    throw ConfigError(std::string("component '") + component_letter(c) +
                      "' is not in the reading order");
  return static_cast<std::size_t>(it - order_.begin());
}

std::string ReadingOrder::letters() const {
  std::string s;
  for (auto c : order_) s += component_letter(c);
  return s;
}

ReadingOrder ReadingOrder::without(Component c) const {
  std::vector<Component> rest;
  for (auto x : order_)
    if (x != c) rest.push_back(x);
  return ReadingOrder(std::move(rest));
}

std::string ComponentPair::letters() const {
  return {component_letter(first), component_letter(second)};
}

ComponentPair parse_pair(std::string_view letters, const ReadingOrder& order) {
  if (letters.size() != 2) throw ConfigError("pair must be two letters: " + std::string(letters));
  auto a = component_from_letter(letters[0]);
  auto b = component_from_letter(letters[1]);
  if (!a || !b || *a == *b) throw ConfigError("invalid pair: " + std::string(letters));
  if (order.rank(*a) > order.rank(*b)) std::swap(a, b);
  return {*a, *b};
}

std::vector<ComponentPair> pair_order(const ReadingOrder& order) {
  std::vector<ComponentPair> pairs;
  const auto& c = order.components();
  // Outer loop over the later component, inner over the earlier one.
  for (std::size_t later = 1; later < c.size(); ++later)
    for (std::size_t earlier = 0; earlier < later; ++earlier)
      pairs.push_back({c[earlier], c[later]});
  return pairs;
}

}  // namespace ember
