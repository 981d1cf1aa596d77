#pragma once

#include <filesystem>
#include <string>

#include "mrsens/identify.hpp"
#include "mrsens/observed_law.hpp"

namespace mrsens {

// Versioned JSON with exact double round-trip (shortest decimal form).
std::string observed_law_to_json(const ObservedLaw& law);
ObservedLaw observed_law_from_json(const std::string& text);
void save_observed_law(const ObservedLaw& law, const std::filesystem::path& path);
ObservedLaw load_observed_law(const std::filesystem::path& path);

// The identified law: spec echo, tilt, per-k conditional tables g_k with
// explicit schemas, and the per-k missing-response scalars.
std::string full_law_to_json(const FullLawResult& res);
void save_full_law(const FullLawResult& res, const std::filesystem::path& path);

// Shortest round-trip decimal rendering used for all CSV output.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mrsens
