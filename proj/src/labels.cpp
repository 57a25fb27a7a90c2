#include "qinst/labels.hpp"

#include <algorithm>
#include <set>

#include "qinst/error.hpp"

namespace qinst {

namespace {

void append_escaped(std::string& out, const Label& part) {
  for (std::size_t i = 0; i < part.size();) {
    if (part[i] == '\\') {
      out += "\\\\";
      ++i;
    } else if (part.compare(i, kPairSeparator.size(), kPairSeparator) == 0) {
      out += '\\';
      out += kPairSeparator;
      i += kPairSeparator.size();
    } else {
      out += part[i++];
    }
  }
}

}  // namespace

Label pair_label(const Label& x, const Label& y) {
  std::string out;
  out.reserve(x.size() + y.size() + kPairSeparator.size());
  append_escaped(out, x);
  out += kPairSeparator;
  append_escaped(out, y);
  return out;
}

std::optional<std::pair<Label, Label>> split_pair_label(const Label& label) {
  std::string first;
  for (std::size_t i = 0; i < label.size();) {
    if (label[i] == '\\' && i + 1 < label.size()) {
      if (label[i + 1] == '\\') {
        first += '\\';
        i += 2;
        continue;
      }
      if (label.compare(i + 1, kPairSeparator.size(), kPairSeparator) == 0) {
        first += kPairSeparator;
        i += 1 + kPairSeparator.size();
        continue;
      }
    }
    if (label.compare(i, kPairSeparator.size(), kPairSeparator) == 0) {
      std::string second;
      for (std::size_t j = i + kPairSeparator.size(); j < label.size();) {
        if (label[j] == '\\' && j + 1 < label.size()) {
          if (label[j + 1] == '\\') {
            second += '\\';
            j += 2;
            continue;
          }
          if (label.compare(j + 1, kPairSeparator.size(), kPairSeparator) == 0) {
            second += kPairSeparator;
            j += 1 + kPairSeparator.size();
            continue;
          }
        }
        if (label.compare(j, kPairSeparator.size(), kPairSeparator) == 0) return std::nullopt;
        second += label[j++];
      }
      return std::make_pair(first, second);
    }
    first += label[i++];
  }
  return std::nullopt;
}

void require_unique(const Labels& labels, const char* context) {
  std::set<Label> seen;
  for (const auto& l : labels)
    if (!seen.insert(l).second) throw Error(ErrorKind::LabelMismatch, std::string(context) + ": duplicate label '" + l + "'");
}

std::size_t index_of(const Labels& labels, const Label& label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw Error(ErrorKind::LabelMismatch, "unknown outcome label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace qinst
