#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qinst {

using Label = std::string;
using Labels = std::vector<Label>;

/// Separator between the two halves of a paired outcome label.
inline constexpr std::string_view kPairSeparator = "⊗";

/// Joins (x, y) into "x⊗y". Backslashes and separators inside x or y are
/// escaped with a backslash so split_pair_label inverts this exactly.
Label pair_label(const Label& x, const Label& y);

/// Inverse of pair_label; nullopt if the label has no unescaped separator.
std::optional<std::pair<Label, Label>> split_pair_label(const Label& label);

/// Throws LabelMismatch on duplicates.
void require_unique(const Labels& labels, const char* context);

/// Position of label in labels; throws LabelMismatch when absent.
std::size_t index_of(const Labels& labels, const Label& label);

}  // namespace qinst
