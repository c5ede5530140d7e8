#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ecomlm {

// Positive rational, used for price perturbation factors.
struct Rational {
    int64_t num = 1;
    int64_t den = 1;

    bool operator==(const Rational& o) const { return num * o.den == o.num * den; }
    std::string str() const;
};

// Exact decimal amount with 2 fractional digits, carried as integer minor
// units. Never goes through binary floating point.
struct Money {
    int64_t minor_units = 0; // e.g. 81600 for $816.00
    std::string currency;    // 3-letter code

    // Parses "816.00" style strings; requires exactly 2 fractional digits
    // and a strictly positive value.
    static std::optional<int64_t> parse_minor_units(const std::string& amount);

    // "816.00" — two decimals, no thousands separators.
    std::string amount_str() const;

    // "$" for USD; other currencies map to their symbol or fall back to
    // "<CODE> " (rendering outside USD is not validated against any
    // reference formatting).
    std::string symbol() const;

    // minor_units scaled by f, rounded half-up to 2 decimals. nullopt when
    // the result would not be strictly positive or would overflow.
    std::optional<Money> scaled(const Rational& f) const;

    bool operator==(const Money& o) const {
        return minor_units == o.minor_units && currency == o.currency;
    }
};

} // namespace ecomlm
