#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <variant>

namespace blendcube {

enum class ValueType { Text, Decimal };

// Attribute values are either text or decimal; there is no null.
class Value {
public:
    Value() : data_(std::string{}) {}
    Value(std::string text) : data_(std::move(text)) {}
    Value(const char* text) : data_(std::string(text)) {}
    Value(double number) : data_(number) {}

    ValueType type() const { return data_.index() == 0 ? ValueType::Text : ValueType::Decimal; }
    bool is_text() const { return data_.index() == 0; }
    bool is_decimal() const { return data_.index() == 1; }

    const std::string& text() const { return std::get<std::string>(data_); }
    double decimal() const { return std::get<double>(data_); }

    // Display form; decimals use the shortest round-trip representation.
    std::string str() const;

    // Total order used for header sorting: decimals before text, then natural order.
    friend std::strong_ordering operator<=>(const Value& a, const Value& b);
    friend bool operator==(const Value& a, const Value& b) { return (a <=> b) == 0; }

private:
    std::variant<std::string, double> data_;
};

std::string_view to_string(ValueType type);

std::string format_number(double number);

// Parses a decimal literal; throws TypeMismatchError when the text is not a number.
double parse_decimal(std::string_view text);

// Lowercase ASCII form of an identifier with Latin-1 diacritics removed ("Densité" -> "densite").
std::string fold_identifier(std::string_view name);

}  // namespace blendcube

template <>
struct std::hash<blendcube::Value> {
    std::size_t operator()(const blendcube::Value& v) const noexcept {
        return v.is_text() ? std::hash<std::string>{}(v.text()) : std::hash<double>{}(v.decimal());
    }
};
