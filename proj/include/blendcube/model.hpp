#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "blendcube/predicate.hpp"
#include "blendcube/value.hpp"

namespace blendcube {

inline constexpr std::string_view kIdAttribute = "Id";
inline constexpr std::string_view kAllAttribute = "All";
inline constexpr std::string_view kAllValue = "all";

enum class Aggregation { Avg, Sum, Max, Min, Count };

std::string_view to_string(Aggregation f);
std::optional<Aggregation> parse_aggregation(std::string_view name);

struct Attribute {
    std::string name;
    ValueType type = ValueType::Text;
    std::string column;  // relational column name
};

// An elementary path of parameters from Id (finest) to All (coarsest).
struct Hierarchy {
    std::string name;
    std::vector<std::string> params;
    std::map<std::string, std::vector<std::string>> weak;
};

// attributes[0] is Id and attributes.back() is All; every instance row holds one
// value per attribute in the same order.
struct Dimension {
    std::string name;
    std::string table;
    std::vector<Attribute> attributes;
    std::vector<Hierarchy> hierarchies;
    std::vector<std::vector<Value>> instances;

    std::optional<std::size_t> find_attribute(std::string_view attribute) const;
    std::size_t attribute_index(std::string_view attribute) const;  // throws UnknownNameError
    const Hierarchy* find_hierarchy(std::string_view hierarchy) const;
    const Hierarchy& hierarchy(std::string_view hierarchy) const;  // throws UnknownNameError
    std::size_t size() const { return instances.size(); }
    std::string key_column() const;

    // Creates a dimension holding only the Id and All attributes.
    static Dimension make(std::string name, std::string table = {});
    // Inserts a declared attribute before All.
    void add_attribute(Attribute attribute);
};

struct Measure {
    std::string name;
    std::string column;
    Aggregation function = Aggregation::Sum;
};

struct FactLink {
    std::string dimension;
    std::string foreign_key;
};

struct FactInstance {
    std::string id;
    std::vector<double> measures;
    std::vector<std::string> refs;      // one dimension Id per link
    std::vector<std::uint32_t> targets; // resolved instance indices, filled by resolve_links
};

struct Fact {
    std::string name;
    std::string table;
    std::vector<Measure> measures;
    std::vector<FactLink> links;
    std::vector<FactInstance> instances;

    std::optional<std::size_t> find_measure(std::string_view measure) const;
    std::optional<std::size_t> find_link(std::string_view dimension) const;
    std::string key_column() const;
};

struct Constellation {
    std::string name;
    std::vector<Fact> facts;
    std::vector<Dimension> dimensions;
    std::map<std::string, std::set<std::string>> star;

    const Fact* find_fact(std::string_view fact) const;
    const Fact& fact(std::string_view fact) const;  // throws UnknownNameError
    const Dimension* find_dimension(std::string_view dimension) const;
    const Dimension& dimension(std::string_view dimension) const;  // throws UnknownNameError
    Dimension* find_dimension(std::string_view dimension);
};

struct Violation {
    std::string location;
    std::string message;
};

std::string to_string(const Violation& v);

// Every violated invariant, including per-hierarchy strictness over instances.
// Empty iff the constellation is well formed.
std::vector<Violation> validate_constellation(const Constellation& c);

// Resolves fact references to dimension instance indices; unresolvable references are left
// for validate_constellation to report.
void resolve_links(Constellation& c);

// Validates and freezes a constellation. Throws ValidationError listing every violation.
std::shared_ptr<const Constellation> seal(Constellation c);

// Read access to one level of a dimension: a stored attribute or a derived per-instance mapping.
struct LevelColumn {
    std::string name;
    ValueType type = ValueType::Text;
    const std::vector<std::vector<Value>>* rows = nullptr;
    std::size_t attribute = 0;
    const std::vector<Value>* mapped = nullptr;

    const Value& at(std::size_t instance) const { return mapped ? (*mapped)[instance] : (*rows)[instance][attribute]; }
};

LevelColumn attribute_column(const Dimension& d, std::string_view attribute);

struct StrictnessBreach {
    Value value;
    std::vector<Value> parents;
};

// First finer value co-occurring with more than one coarser value, if any.
std::optional<StrictnessBreach> find_strictness_breach(std::size_t instance_count, const LevelColumn& fine,
                                                       const LevelColumn& coarse);

// The unique coarse value co-occurring with v at the fine level.
// Throws StrictnessError when there are several and UnknownNameError when v is absent.
Value roll_up(std::size_t instance_count, const LevelColumn& fine, const LevelColumn& coarse, const Value& v);

// parent_of(d, h, from, to, v): to must be strictly coarser than from in h.
Value parent_of(const Dimension& d, const Hierarchy& h, std::string_view p_from, std::string_view p_to,
                const Value& v);

// Active domain of an attribute.
std::set<Value> dom(const Dimension& d, std::string_view attribute);

// Indices of the instances on which pred holds.
std::vector<std::size_t> select_instances(const Dimension& d, const Predicate& pred);

}  // namespace blendcube
