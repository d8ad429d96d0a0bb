#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "toolcall.hpp"

namespace toolexpander {

enum class BlockKind { Stray, Think, ToolCall, Examples };

std::string_view tag_name(BlockKind kind);

struct Segment {
  BlockKind kind = BlockKind::Stray;
  std::string text;  // block contents without the tags
};

/// Model output split on the literal tags `<think>`, `<tool_call>` and
/// `<examples>`. `segments` keeps document order; the per-kind lists and
/// `stray_text` are projections of it.
struct TaggedOutput {
  std::vector<Segment> segments;
  std::vector<std::string> think_blocks;
  std::vector<std::string> tool_call_blocks;
  std::vector<std::string> examples_blocks;
  std::string stray_text;

  /// Re-emits the tags around each block; equals the parsed input exactly.
  std::string reconstruct() const;
};

/// Tags are case-sensitive, attribute-free and never nest. Throws
/// ParseError(UnclosedTag) with the byte offset of the open tag, or
/// ParseError(OverlappingTags) when another tag appears inside a block or a
/// close tag has no matching open.
TaggedOutput extract_tags(std::string_view text);

/// Accepts one `{"name":..,"arguments":{..}}` object or an array of them.
std::vector<ToolCall> parse_tool_calls(std::string_view block);

struct ParsedExamples {
  std::vector<FewShotExample> examples;
  std::size_t dropped = 0;
};

/// Elements failing the example schema are dropped and counted; only an
/// unparseable block (or a non-array) throws JsonInvalid.
ParsedExamples parse_examples(std::string_view block);

struct ParsedResponse {
  std::vector<ToolCall> calls;
  std::vector<FewShotExample> examples;
  bool has_think = false;
  bool has_examples = false;
};

ParsedResponse parse_response(std::string_view text);

/// Exemplars first, then the query. Without exemplars the query verbatim.
std::string render_guided_query(const GuidedSample& sample);

}  // namespace toolexpander
