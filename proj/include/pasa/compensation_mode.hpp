#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace pasa {

/// How unselected key blocks contribute to a query row.
enum class CompensationMode {
  kHardDrop,            ///< skipped entirely
  kZerothOrder,         ///< centroid logit times the block's value sum
  kFirstOrderGlobal,    ///< + one shared first-order matrix (mean of all H_j)
  kFirstOrderGrouped,   ///< + per-group mean of H_j
  kFirstOrderPerBlock,  ///< + each block's own H_j
};

inline constexpr std::array<CompensationMode, 5> kAllModes = {
    CompensationMode::kHardDrop, CompensationMode::kZerothOrder, CompensationMode::kFirstOrderGlobal,
    CompensationMode::kFirstOrderGrouped, CompensationMode::kFirstOrderPerBlock};

std::string_view to_string(CompensationMode mode);
/// Accepts the canonical names from to_string plus "pisa" and "pasa".
std::optional<CompensationMode> parse_mode(std::string_view name);

inline bool is_first_order(CompensationMode m) {
  return m == CompensationMode::kFirstOrderGlobal || m == CompensationMode::kFirstOrderGrouped ||
         m == CompensationMode::kFirstOrderPerBlock;
}

}  // namespace pasa
