#include "ecomlm/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "ecomlm/errors.hpp"

namespace ecomlm::catalog {

using nlohmann::json;

std::string Listing::category_str() const {
    std::string out;
    for (size_t i = 0; i < category.size(); ++i) {
        if (i) out += ':';
        out += category[i];
    }
    return out;
}

const std::vector<ValueCount>* AspectStats::find(const std::string& language,
                                                 const std::string& category,
                                                 const std::string& key) const {
    const auto it = entries.find(StatsKey{language, category, key});
    return it == entries.end() ? nullptr : &it->second;
}

namespace {

bool reject(std::vector<LineDiagnostic>& diags, size_t line_no,
            const std::string& field, const std::string& message) {
    diags.push_back(LineDiagnostic{line_no, field, message});
    return false;
}

bool validate_and_fill(const json& j, size_t line_no, Listing& out,
                       std::vector<LineDiagnostic>& diags) {
    if (!j.is_object()) {
        return reject(diags, line_no, "", "line is not a JSON object");
    }

    const auto str_field = [&](const char* name, std::string& dst) {
        const auto it = j.find(name);
        if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
            return reject(diags, line_no, name, std::string("missing or empty string field \"") + name + "\"");
        }
        dst = it->get<std::string>();
        return true;
    };

    if (!str_field("id", out.id)) return false;
    if (!str_field("title", out.title)) return false;

    const auto cat = j.find("category");
    if (cat == j.end() || !cat->is_array() || cat->empty()) {
        return reject(diags, line_no, "category", "category must be a non-empty array of strings");
    }
    for (const auto& seg : *cat) {
        if (!seg.is_string() || seg.get<std::string>().empty()) {
            return reject(diags, line_no, "category", "category segments must be non-empty strings");
        }
        out.category.push_back(seg.get<std::string>());
    }

    if (const auto price = j.find("price"); price != j.end() && !price->is_null()) {
        if (!price->is_object() || !price->contains("amount") || !price->contains("currency") ||
            !(*price)["amount"].is_string() || !(*price)["currency"].is_string()) {
            return reject(diags, line_no, "price", "price must be {amount: string, currency: string}");
        }
        const auto units = Money::parse_minor_units((*price)["amount"].get<std::string>());
        if (!units) {
            return reject(diags, line_no, "price",
                          "amount must be a positive decimal with exactly 2 fractional digits");
        }
        const auto currency = (*price)["currency"].get<std::string>();
        if (currency.size() != 3) {
            return reject(diags, line_no, "price", "currency must be a 3-letter code");
        }
        out.price = Money{*units, currency};
    }

    if (const auto aspects = j.find("aspects"); aspects != j.end() && !aspects->is_null()) {
        if (!aspects->is_array()) {
            return reject(diags, line_no, "aspects", "aspects must be an array");
        }
        std::unordered_set<std::string> seen;
        for (const auto& a : *aspects) {
            if (!a.is_object() || !a.contains("key") || !a.contains("value") ||
                !a["key"].is_string() || !a["value"].is_string() ||
                a["key"].get<std::string>().empty() || a["value"].get<std::string>().empty()) {
                return reject(diags, line_no, "aspects", "each aspect must be {key, value} with non-empty strings");
            }
            Aspect asp{a["key"].get<std::string>(), a["value"].get<std::string>()};
            if (!seen.insert(asp.key).second) {
                return reject(diags, line_no, "aspects", "duplicate aspect key \"" + asp.key + "\"");
            }
            out.aspects.push_back(std::move(asp));
        }
    }

    if (!str_field("language", out.language)) return false;
    const auto& langs = supported_languages();
    if (std::find(langs.begin(), langs.end(), out.language) == langs.end()) {
        return reject(diags, line_no, "language", "language \"" + out.language + "\" not one of {en, de, es, fr, it}");
    }
    return true;
}

} // namespace

std::optional<Listing> parse_listing_line(const std::string& line, size_t line_no,
                                          std::vector<LineDiagnostic>& diags) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
        diags.push_back(LineDiagnostic{line_no, "", "malformed JSON"});
        return std::nullopt;
    }
    Listing l;
    if (!validate_and_fill(j, line_no, l, diags)) return std::nullopt;
    return l;
}

Catalog load_catalog(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read catalog file: " + path);
    }
    Catalog cat;
    cat.source_path = path;

    std::unordered_map<std::string, size_t> id_lines;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto l = parse_listing_line(line, line_no, cat.diagnostics);
        if (!l) continue;
        const auto prev = id_lines.find(l->id);
        if (prev != id_lines.end()) {
            throw DataError("duplicate listing id \"" + l->id + "\" at line " +
                            std::to_string(line_no) + " (first seen at line " +
                            std::to_string(prev->second) + ")");
        }
        id_lines.emplace(l->id, line_no);
        cat.listings.push_back(std::move(*l));
    }
    return cat;
}

AspectStats compute_aspect_stats(const Catalog& cat) {
    std::map<StatsKey, std::map<std::string, uint64_t>> counts;
    for (const auto& l : cat.listings) {
        const std::string category = l.category_str();
        for (const auto& a : l.aspects) {
            ++counts[StatsKey{l.language, category, a.key}][a.value];
        }
    }
    AspectStats stats;
    for (auto& [key, value_counts] : counts) {
        std::vector<ValueCount> ordered;
        ordered.reserve(value_counts.size());
        for (const auto& [value, count] : value_counts) {
            ordered.push_back(ValueCount{value, count});
        }
        std::sort(ordered.begin(), ordered.end(), [](const ValueCount& a, const ValueCount& b) {
            if (a.count != b.count) return a.count > b.count;
            return a.value < b.value;
        });
        stats.entries.emplace(key, std::move(ordered));
    }
    return stats;
}

} // namespace ecomlm::catalog
