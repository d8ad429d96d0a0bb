#include "response_parser.hpp"

#include <array>

#include "error.hpp"

namespace toolexpander {

namespace {

struct TagLiteral {
  BlockKind kind;
  std::string_view open;
  std::string_view close;
};

constexpr std::array<TagLiteral, 3> kTags = {{
    {BlockKind::Think, "<think>", "</think>"},
    {BlockKind::ToolCall, "<tool_call>", "</tool_call>"},
    {BlockKind::Examples, "<examples>", "</examples>"},
}};

const TagLiteral& literal_for(BlockKind kind) {
  for (const auto& t : kTags) {
    if (t.kind == kind) return t;
  }
  return kTags[0];
}

struct TagHit {
  std::size_t pos = std::string_view::npos;
  const TagLiteral* tag = nullptr;
  bool closing = false;
};

// Earliest open or close literal at or after `from`.
TagHit next_tag(std::string_view text, std::size_t from) {
  TagHit best;
  for (const auto& t : kTags) {
    for (bool closing : {false, true}) {
      const std::size_t p = text.find(closing ? t.close : t.open, from);
      if (p < best.pos) best = {p, &t, closing};
    }
  }
  return best;
}

Json parse_json(std::string_view block) {
  try {
    return Json::parse(block.begin(), block.end());
  } catch (const Json::exception& e) {
    throw ParseError(ParseErrorKind::JsonInvalid, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string_view tag_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::Think: return "think";
    case BlockKind::ToolCall: return "tool_call";
    case BlockKind::Examples: return "examples";
    case BlockKind::Stray: return "";
  }
  return "";
}

std::string TaggedOutput::reconstruct() const {
  std::string out;
  for (const auto& seg : segments) {
    if (seg.kind == BlockKind::Stray) {
      out += seg.text;
      continue;
    }
    const auto& lit = literal_for(seg.kind);
    out += lit.open;
    out += seg.text;
    out += lit.close;
  }
  return out;
}

TaggedOutput extract_tags(std::string_view text) {
  TaggedOutput out;
  auto push = [&](BlockKind kind, std::string_view body) {
    if (kind == BlockKind::Stray) {
      if (body.empty()) return;
      out.stray_text += body;
    } else if (kind == BlockKind::Think) {
      out.think_blocks.emplace_back(body);
    } else if (kind == BlockKind::ToolCall) {
      out.tool_call_blocks.emplace_back(body);
    } else {
      out.examples_blocks.emplace_back(body);
    }
    out.segments.push_back({kind, std::string(body)});
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const TagHit open = next_tag(text, pos);
    if (open.tag == nullptr) break;
    if (open.closing) {
      throw ParseError(ParseErrorKind::OverlappingTags,
                       "unmatched </" + std::string(tag_name(open.tag->kind)) + "> at byte " +
                           std::to_string(open.pos),
                       std::string(tag_name(open.tag->kind)), open.pos);
    }
    push(BlockKind::Stray, text.substr(pos, open.pos - pos));
    const std::size_t body_start = open.pos + open.tag->open.size();
    const TagHit close = next_tag(text, body_start);
    const std::string name(tag_name(open.tag->kind));
    if (close.tag == nullptr) {
      throw ParseError(ParseErrorKind::UnclosedTag,
                       "unclosed <" + name + "> at byte " + std::to_string(open.pos), name,
                       open.pos);
    }
    if (close.tag != open.tag || !close.closing) {
      throw ParseError(ParseErrorKind::OverlappingTags,
                       "tag inside <" + name + "> at byte " + std::to_string(close.pos), name,
                       close.pos);
    }
    push(open.tag->kind, text.substr(body_start, close.pos - body_start));
    pos = close.pos + close.tag->close.size();
  }
  if (pos < text.size()) push(BlockKind::Stray, text.substr(pos));
  return out;
}

std::vector<ToolCall> parse_tool_calls(std::string_view block) {
  const Json j = parse_json(block);
  std::vector<ToolCall> calls;
  if (j.is_array()) {
    for (const auto& item : j) calls.push_back(tool_call_from_json(item));
  } else if (j.is_object()) {
    calls.push_back(tool_call_from_json(j));
  } else {
    throw ParseError(ParseErrorKind::JsonInvalid, "tool call block is neither object nor array");
  }
  return calls;
}

ParsedExamples parse_examples(std::string_view block) {
  const Json j = parse_json(block);
  if (!j.is_array()) {
    throw ParseError(ParseErrorKind::JsonInvalid, "examples block must be a JSON array");
  }
  ParsedExamples out;
  for (const auto& item : j) {
    try {
      FewShotExample ex = example_from_json(item);
      validate_example(ex);
      out.examples.push_back(std::move(ex));
    } catch (const Error&) {
      ++out.dropped;
    }
  }
  return out;
}

ParsedResponse parse_response(std::string_view text) {
  const TaggedOutput tagged = extract_tags(text);
  ParsedResponse r;
  r.has_think = !tagged.think_blocks.empty();
  r.has_examples = !tagged.examples_blocks.empty();
  for (const auto& b : tagged.tool_call_blocks) {
    auto calls = parse_tool_calls(b);
    r.calls.insert(r.calls.end(), calls.begin(), calls.end());
  }
  for (const auto& b : tagged.examples_blocks) {
    auto parsed = parse_examples(b);
    r.examples.insert(r.examples.end(), parsed.examples.begin(), parsed.examples.end());
  }
  return r;
}

std::string render_guided_query(const GuidedSample& sample) {
  if (sample.exemplars.empty()) return sample.base.query;
  std::string out = "Here are some examples of how the available tools are used.\n";
  std::size_t n = 0;
  for (const auto& ex : sample.exemplars) {
    out += "\n### Example " + std::to_string(++n) + "\n";
    out += "Tools: " + tools_to_json(ex.tools).dump() + "\n";
    out += "Question: " + ex.question + "\n";
    out += "Answer: " + calls_to_json(ex.answers).dump() + "\n";
  }
  out += "\n### Question\n";
  out += sample.base.query;
  return out;
}

}  // namespace toolexpander
