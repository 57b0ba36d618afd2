#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "deltabox/spectral.hpp"

namespace deltabox::io {

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

/// "# k_max=<int>" then one "k,re_a,im_a" line per mode, %.17g.
std::string format_state(const SpectralCoefficients& c, const std::string& comment = "");
SpectralCoefficients parse_state(const std::string& text);

void write_state(const std::filesystem::path& path, const SpectralCoefficients& c,
                 const std::string& comment = "");
SpectralCoefficients read_state(const std::filesystem::path& path);

/// Rows "k,re_c,im_c"; '#' comments and a column-name row are skipped.
/// Unlisted modes up to k_max are zero.
SpectralCoefficients parse_coefficient_table(const std::string& text, int k_max);

} // namespace deltabox::io
