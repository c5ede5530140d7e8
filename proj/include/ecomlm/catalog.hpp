#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "ecomlm/money.hpp"

namespace ecomlm::catalog {

inline const std::vector<std::string>& supported_languages() {
    static const std::vector<std::string> langs = {"en", "de", "es", "fr", "it"};
    return langs;
}

struct Aspect {
    std::string key;
    std::string value;
    bool operator==(const Aspect&) const = default;
};

struct Listing {
    std::string id;
    std::string title;
    std::vector<std::string> category; // >= 1 segment, rendered joined with ":"
    std::optional<Money> price;
    std::vector<Aspect> aspects;       // keys unique per listing
    std::string language;

    std::string category_str() const;
};

// One rejected input line.
struct LineDiagnostic {
    size_t line;        // 1-based
    std::string field;  // offending field, empty if the whole line is bad
    std::string message;
};

struct Catalog {
    std::string source_path;
    std::vector<Listing> listings; // file order
    std::vector<LineDiagnostic> diagnostics;
};

struct ValueCount {
    std::string value;
    uint64_t count = 0;
    bool operator==(const ValueCount&) const = default;
};

struct StatsKey {
    std::string language;
    std::string category; // ":"-joined
    std::string key;
    auto operator<=>(const StatsKey&) const = default;
};

// Per-(language, category, aspect-key) value frequencies, ordered by count
// descending with lexicographic tiebreak on the value.
struct AspectStats {
    std::map<StatsKey, std::vector<ValueCount>> entries;

    const std::vector<ValueCount>* find(const std::string& language,
                                        const std::string& category,
                                        const std::string& key) const;
};

// Reads a line-delimited JSON catalog. Malformed lines are skipped and
// reported in Catalog::diagnostics; an unreadable file or a duplicate
// listing id throws DataError.
Catalog load_catalog(const std::string& path);

// Parses one already-split line; used by load_catalog and fixture builders.
// Returns nullopt and fills `diag` when the line is invalid.
std::optional<Listing> parse_listing_line(const std::string& line, size_t line_no,
                                          std::vector<LineDiagnostic>& diags);

AspectStats compute_aspect_stats(const Catalog& cat);

} // namespace ecomlm::catalog
