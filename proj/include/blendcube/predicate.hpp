#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "blendcube/value.hpp"

namespace blendcube {

enum class CompareOp { Eq, Ne, Lt, Gt, Le, Ge };

std::string_view to_string(CompareOp op);

// Selection predicate over dimension attributes:
//   attr (=|<>|<|>|<=|>=) literal, combined with AND / OR / NOT and parentheses.
struct Predicate {
    enum class Kind { True, False, Compare, And, Or, Not };

    Kind kind = Kind::True;
    std::string attribute;
    CompareOp op = CompareOp::Eq;
    Value literal;
    std::vector<Predicate> children;

    static Predicate always() { return {}; }
    static Predicate never();
    static Predicate compare(std::string attribute, CompareOp op, Value literal);
    static Predicate conj(Predicate a, Predicate b);
    static Predicate disj(Predicate a, Predicate b);
    static Predicate negate(Predicate p);

    bool is_true() const { return kind == Kind::True; }

    friend bool operator==(const Predicate&, const Predicate&) = default;
};

// Parses predicate text. Error columns are 1-based and shifted by column_offset.
Predicate parse_predicate(std::string_view text, std::size_t column_offset = 0);

// Canonical text; parse_predicate(to_string(p)) == p.
std::string to_string(const Predicate& pred);

std::set<std::string> referenced_attributes(const Predicate& pred);

bool compare_values(const Value& lhs, CompareOp op, const Value& rhs);

// Type-checks every comparison. type_of returns nullopt for unknown attributes.
void check_predicate(const Predicate& pred,
                     const std::function<std::optional<ValueType>(const std::string&)>& type_of);

// value_of(attribute) -> const Value&
template <class Lookup>
bool evaluate_predicate(const Predicate& pred, Lookup&& value_of) {
    switch (pred.kind) {
    case Predicate::Kind::True:
        return true;
    case Predicate::Kind::False:
        return false;
    case Predicate::Kind::Compare:
        return compare_values(value_of(pred.attribute), pred.op, pred.literal);
    case Predicate::Kind::And:
        for (const auto& child : pred.children) {
            if (!evaluate_predicate(child, value_of)) return false;
        }
        return true;
    case Predicate::Kind::Or:
        for (const auto& child : pred.children) {
            if (evaluate_predicate(child, value_of)) return true;
        }
        return false;
    case Predicate::Kind::Not:
        return !evaluate_predicate(pred.children.front(), value_of);
    }
    return false;
}

}  // namespace blendcube
