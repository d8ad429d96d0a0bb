#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "toolcall.hpp"

namespace toolexpander {

/// Reads one JSON object per line. Blank lines are skipped; anything else
/// that fails to parse or validate raises Error(Data) naming the 1-based line.
Dataset load_dataset(const std::filesystem::path& path);
Dataset read_dataset(std::istream& in);

GuidedSample guided_sample_from_json(const Json& j);
Json guided_sample_to_json(const GuidedSample& gs);

void write_dataset(std::ostream& out, const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);

}  // namespace toolexpander
