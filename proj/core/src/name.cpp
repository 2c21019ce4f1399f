#include "v6ready/name.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace v6ready {

namespace {

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool needs_escape(unsigned char c) {
  return c == '.' || c == '\\' || c == '"' || c == ';' || c == '(' || c == ')' || c <= 0x20 ||
         c >= 0x7f;
}

}  // namespace

void DomainName::validate(const std::vector<std::string>& labels) {
  std::size_t wire = 1;
  for (const auto& label : labels) {
    if (label.empty()) throw NameError(NameError::Code::EmptyLabel, "empty label");
    if (label.size() > kMaxLabel)
      throw NameError(NameError::Code::LabelTooLong, "label exceeds 63 bytes: " + label);
    wire += label.size() + 1;
  }
  if (wire > kMaxWire) throw NameError(NameError::Code::NameTooLong, "name exceeds 255 bytes");
}

DomainName DomainName::parse(std::string_view text) {
  if (text.empty()) throw NameError(NameError::Code::EmptyLabel, "empty name");
  if (text == ".") return {};

  std::vector<std::string> labels;
  std::string current;
  bool pending = false;  // a label has been started
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\\') {
      if (i + 1 >= text.size()) throw NameError(NameError::Code::BadEscape, "dangling escape");
      if (std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
        int value = 0;
        for (int k = 1; k <= 3; ++k) {
          if (i + k >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i + k])))
            throw NameError(NameError::Code::BadEscape, "bad \\DDD escape");
          value = value * 10 + (text[i + k] - '0');
        }
        if (value > 255) throw NameError(NameError::Code::BadEscape, "\\DDD escape above 255");
        current.push_back(ascii_lower(static_cast<char>(value)));
        i += 3;
      } else {
        current.push_back(ascii_lower(text[i + 1]));
        ++i;
      }
      pending = true;
      continue;
    }
    if (c == '.') {
      if (current.empty()) throw NameError(NameError::Code::EmptyLabel, "empty label in name");
      labels.push_back(std::move(current));
      current.clear();
      pending = false;
      continue;
    }
    current.push_back(ascii_lower(c));
    pending = true;
  }
  if (pending) labels.push_back(std::move(current));
  validate(labels);
  return DomainName(std::move(labels));
}

DomainName DomainName::from_labels(std::vector<std::string> labels) {
  for (auto& label : labels) std::transform(label.begin(), label.end(), label.begin(), ascii_lower);
  validate(labels);
  return DomainName(std::move(labels));
}

DomainName DomainName::parent() const {
  if (labels_.empty()) throw NameError(NameError::Code::RootHasNoParent, "root has no parent");
  return DomainName(std::vector<std::string>(labels_.begin() + 1, labels_.end()));
}

DomainName DomainName::child(std::string_view label) const {
  std::vector<std::string> labels;
  labels.reserve(labels_.size() + 1);
  labels.emplace_back(label);
  labels.insert(labels.end(), labels_.begin(), labels_.end());
  return from_labels(std::move(labels));
}

DomainName DomainName::suffix(std::size_t count) const {
  if (count >= labels_.size()) return *this;
  return DomainName(std::vector<std::string>(labels_.end() - static_cast<std::ptrdiff_t>(count),
                                             labels_.end()));
}

std::string DomainName::to_string() const {
  if (labels_.empty()) return ".";
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) out.push_back('.');
    for (unsigned char c : labels_[i]) {
      if (!needs_escape(c)) {
        out.push_back(static_cast<char>(c));
      } else if (c > 0x20 && c < 0x7f) {
        out.push_back('\\');
        out.push_back(static_cast<char>(c));
      } else {
        char buf[5];
        std::snprintf(buf, sizeof buf, "\\%03u", c);
        out += buf;
      }
    }
  }
  return out;
}

std::string DomainName::to_fqdn() const {
  return labels_.empty() ? "." : to_string() + ".";
}

std::size_t DomainName::wire_length() const noexcept {
  std::size_t n = 1;
  for (const auto& l : labels_) n += l.size() + 1;
  return n;
}

bool DomainName::is_subdomain_of(const DomainName& zone) const noexcept {
  if (zone.labels_.size() > labels_.size()) return false;
  return std::equal(zone.labels_.rbegin(), zone.labels_.rend(), labels_.rbegin());
}

std::strong_ordering operator<=>(const DomainName& a, const DomainName& b) noexcept {
  auto ia = a.labels_.rbegin();
  auto ib = b.labels_.rbegin();
  for (; ia != a.labels_.rend() && ib != b.labels_.rend(); ++ia, ++ib) {
    if (auto c = ia->compare(*ib); c != 0)
      return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return a.labels_.size() <=> b.labels_.size();
}

DomainName normalize(std::string_view text) { return DomainName::parse(text); }

bool is_in_bailiwick(const DomainName& name, const DomainName& zone) noexcept {
  return name.is_subdomain_of(zone);
}

std::vector<DomainName> enclosing_zones(const DomainName& name) {
  std::vector<DomainName> out;
  out.reserve(name.label_count() + 1);
  for (std::size_t n = 0; n <= name.label_count(); ++n) out.push_back(name.suffix(n));
  return out;
}

std::size_t DomainNameHash::operator()(const DomainName& n) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto& l : n.labels()) {
    for (unsigned char c : l) h = (h ^ c) * 0x100000001b3ULL;
    h = (h ^ '.') * 0x100000001b3ULL;
  }
  return h;
}

}  // namespace v6ready
