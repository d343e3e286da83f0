#pragma once

#include <string>
#include <variant>

#include "nlscma/codebook.hpp"

namespace nlscma {

inline constexpr int kCodebookSchemaVersion = 1;

using AnyCodebook = std::variant<NonlinearCodebook, LinearCodebook>;

std::string codebook_to_json(const NonlinearCodebook& cb);
std::string codebook_to_json(const LinearCodebook& lcb);
std::string codebook_to_json(const AnyCodebook& cb);
AnyCodebook codebook_from_json(const std::string& text);

AnyCodebook load_codebook(const std::string& path);
void save_codebook(const std::string& path, const AnyCodebook& cb);

ResourceTables tables_of(const AnyCodebook& cb);

/// Per-resource constellation dump for plotting: one row per local entry.
std::string constellation_csv(const AnyCodebook& cb);

std::string read_text_file(const std::string& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace nlscma
