#include "ecomlm/money.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>

namespace ecomlm {

std::string Rational::str() const {
    char buf[64];
    if (den == 1) {
        std::snprintf(buf, sizeof(buf), "%" PRId64, num);
    } else {
        std::snprintf(buf, sizeof(buf), "%" PRId64 "/%" PRId64, num, den);
    }
    return buf;
}

std::optional<int64_t> Money::parse_minor_units(const std::string& amount) {
    // <digits>.<dd>, no sign, no separators
    const auto dot = amount.find('.');
    if (dot == std::string::npos || dot == 0 || amount.size() - dot - 1 != 2) {
        return std::nullopt;
    }
    int64_t units = 0;
    for (size_t i = 0; i < amount.size(); ++i) {
        if (i == dot) continue;
        const char c = amount[i];
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        if (units > (INT64_MAX - (c - '0')) / 10) return std::nullopt;
        units = units * 10 + (c - '0');
    }
    if (units <= 0) return std::nullopt;
    return units;
}

std::string Money::amount_str() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%" PRId64 ".%02" PRId64,
                  minor_units / 100, minor_units % 100);
    return buf;
}

std::string Money::symbol() const {
    if (currency == "USD") return "$";
    if (currency == "EUR") return "€";
    if (currency == "GBP") return "£";
    if (currency == "JPY") return "¥";
    return currency + " ";
}

std::optional<Money> Money::scaled(const Rational& f) const {
    if (f.num <= 0 || f.den <= 0) return std::nullopt;
    // round-half-up of (minor_units * num) / den, kept exact in 128 bits
    const auto p = static_cast<__int128>(minor_units) * f.num;
    const __int128 scaled_units = (2 * p + f.den) / (2 * static_cast<__int128>(f.den));
    if (scaled_units <= 0 || scaled_units > INT64_MAX) return std::nullopt;
    return Money{static_cast<int64_t>(scaled_units), currency};
}

} // namespace ecomlm
