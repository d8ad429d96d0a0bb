#include "reward.hpp"

#include <cmath>
#include <set>

#include "error.hpp"
#include "response_parser.hpp"

namespace toolexpander {

namespace {

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::vector<const Segment*> tagged_segments(const TaggedOutput& out) {
  std::vector<const Segment*> segs;
  for (const auto& s : out.segments) {
    if (s.kind != BlockKind::Stray) segs.push_back(&s);
  }
  return segs;
}

}  // namespace

void RewardMode::validate() const {
  if (!(bonus > 0.0) || !std::isfinite(bonus)) throw config_error("reward bonus must be > 0");
  if (min_examples_exclusive < 0) throw config_error("min_examples_exclusive must be >= 0");
}

std::string_view to_string(RewardVariant v) {
  return v == RewardVariant::Plain ? "plain" : "self_exemplifying";
}

RewardVariant reward_variant_from_string(std::string_view s) {
  if (s == "plain") return RewardVariant::Plain;
  if (s == "self_exemplifying") return RewardVariant::SelfExemplifying;
  throw config_error("unknown reward mode '" + std::string(s) + "'");
}

bool check_result(const std::vector<ToolCall>& pred, const std::vector<ToolCall>& truth) {
  if (pred.size() != truth.size()) return false;
  std::vector<bool> used(truth.size(), false);
  for (const auto& p : pred) {
    bool matched = false;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (!used[i] && p == truth[i]) {
        used[i] = matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

bool check_format(std::string_view text, const RewardMode& mode) {
  try {
    const TaggedOutput out = extract_tags(text);
    if (!blank(out.stray_text)) return false;
    if (out.tool_call_blocks.size() != 1) return false;
    parse_tool_calls(out.tool_call_blocks.front());
    if (mode.variant == RewardVariant::Plain) return true;

    const auto segs = tagged_segments(out);
    if (segs.size() != 3 || segs[0]->kind != BlockKind::Examples ||
        segs[1]->kind != BlockKind::Think || segs[2]->kind != BlockKind::ToolCall) {
      return false;
    }
    parse_examples(segs[0]->text);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

bool check_fewshots(std::string_view text, const RewardMode& mode) {
  if (mode.variant != RewardVariant::SelfExemplifying) return false;
  try {
    const TaggedOutput out = extract_tags(text);
    if (out.examples_blocks.size() != 1) return false;
    const ParsedExamples parsed = parse_examples(out.examples_blocks.front());
    std::set<std::string> distinct;
    for (const auto& ex : parsed.examples) distinct.insert(canonical(ex));
    return distinct.size() > static_cast<std::size_t>(mode.min_examples_exclusive);
  } catch (const ParseError&) {
    return false;
  }
}

RewardBreakdown reward(std::string_view text, const Sample& sample, const RewardMode& mode) {
  RewardBreakdown r;
  r.format_ok = check_format(text, mode);
  if (!r.format_ok) return r;

  const TaggedOutput out = extract_tags(text);
  r.result_ok = check_result(parse_tool_calls(out.tool_call_blocks.front()), sample.ground_truth);
  if (mode.variant == RewardVariant::SelfExemplifying) r.fewshot_ok = check_fewshots(text, mode);

  if (r.result_ok) {
    r.value = r.fewshot_ok ? 1.0 + mode.bonus : 1.0;
  }
  return r;
}

}  // namespace toolexpander
