#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "hallucount/core/types.hpp"

namespace hallucount::facts {

struct CategoryAlias {
  std::string_view key;  // already in alias_key() form
  FactCategory category;
};

/// The alias table. This is the only place free-form category strings from
/// model output are mapped onto FactCategory.
std::span<const CategoryAlias> category_aliases();

/// Lowercase, '&' read as "and", every non-alphanumeric byte dropped:
/// "Labs & Imaging", "labs_and_imaging" and "LabsAndImaging" share one key.
std::string alias_key(std::string_view raw);

std::optional<FactCategory> normalize_category(std::string_view raw);

}  // namespace hallucount::facts
