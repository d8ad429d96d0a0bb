#pragma once

#include <string_view>
#include <vector>

#include "toolcall.hpp"

namespace toolexpander {

enum class RewardVariant { Plain, SelfExemplifying };

struct RewardMode {
  RewardVariant variant = RewardVariant::Plain;
  double bonus = 0.01;
  int min_examples_exclusive = 3;

  void validate() const;
};

std::string_view to_string(RewardVariant v);
RewardVariant reward_variant_from_string(std::string_view s);

struct RewardBreakdown {
  bool result_ok = false;
  bool format_ok = false;
  bool fewshot_ok = false;
  double value = 0.0;
};

/// Multiset equality under exact ToolCall equality.
bool check_result(const std::vector<ToolCall>& pred, const std::vector<ToolCall>& truth);

/// Plain: exactly one tool_call block that parses, other tags allowed,
/// whitespace-only stray text. Self-exemplifying: exactly examples, think,
/// tool_call in that order, each parseable, whitespace-only stray text.
bool check_format(std::string_view text, const RewardMode& mode);

/// More than `min_examples_exclusive` schema-valid, pairwise distinct examples.
bool check_fewshots(std::string_view text, const RewardMode& mode);

/// {0, 1} for plain, {0, 1, 1 + bonus} for self-exemplifying.
RewardBreakdown reward(std::string_view text, const Sample& sample, const RewardMode& mode);

}  // namespace toolexpander
