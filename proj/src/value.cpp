#include "blendcube/value.hpp"

#include <charconv>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "blendcube/errors.hpp"

namespace blendcube {

std::string Value::str() const {
    return is_text() ? text() : format_number(decimal());
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
    if (a.data_.index() != b.data_.index()) {
        return a.is_text() ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    if (a.is_text()) {
        return a.text().compare(b.text()) <=> 0;
    }
    const double x = a.decimal();
    const double y = b.decimal();
    if (x < y) return std::strong_ordering::less;
    if (y < x) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string_view to_string(ValueType type) {
    return type == ValueType::Text ? "text" : "decimal";
}

std::string format_number(double number) {
    if (number == 0.0) {
        return "0";  // avoids "-0"
    }
    return fmt::format("{}", number);
}

double parse_decimal(std::string_view text) {
    std::string_view body = text;
    if (!body.empty() && body.front() == '+') {
        body.remove_prefix(1);
    }
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), out);
    if (body.empty() || ec != std::errc{} || ptr != body.data() + body.size() || !std::isfinite(out)) {
        throw TypeMismatchError("not a decimal value: '" + std::string(text) + "'");
    }
    return out;
}

std::string fold_identifier(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (std::size_t i = 0; i < name.size(); ++i) {
        const auto c = static_cast<unsigned char>(name[i]);
        if (c < 0x80) {
            out.push_back(static_cast<char>(std::tolower(c)));
            continue;
        }
        // Two-byte UTF-8 sequences in the Latin-1 supplement.
        if (c == 0xC3 && i + 1 < name.size()) {
            const auto d = static_cast<unsigned char>(name[++i]);
            const unsigned code = 0xC0u + (d & 0x3Fu);
            static constexpr std::string_view table =
                "aaaaaaaceeeeiiiidnooooo*ouuuuyts"   // U+00C0..U+00DF
                "aaaaaaaceeeeiiiidnooooo/ouuuuyty";  // U+00E0..U+00FF
            const char folded = table[code - 0xC0u];
            if (folded != '*' && folded != '/') {
                out.push_back(folded);
            }
            continue;
        }
        out.push_back('_');
        while (i + 1 < name.size() && (static_cast<unsigned char>(name[i + 1]) & 0xC0u) == 0x80u) {
            ++i;
        }
    }
    return out;
}

}  // namespace blendcube
