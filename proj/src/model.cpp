#include "blendcube/model.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "blendcube/errors.hpp"

namespace blendcube {

std::string_view to_string(Aggregation f) {
    switch (f) {
    case Aggregation::Avg: return "AVG";
    case Aggregation::Sum: return "SUM";
    case Aggregation::Max: return "MAX";
    case Aggregation::Min: return "MIN";
    case Aggregation::Count: return "COUNT";
    }
    return "?";
}

std::optional<Aggregation> parse_aggregation(std::string_view name) {
    std::string upper(name);
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (upper == "AVG") return Aggregation::Avg;
    if (upper == "SUM") return Aggregation::Sum;
    if (upper == "MAX") return Aggregation::Max;
    if (upper == "MIN") return Aggregation::Min;
    if (upper == "COUNT") return Aggregation::Count;
    return std::nullopt;
}

std::optional<std::size_t> Dimension::find_attribute(std::string_view attribute) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (attributes[i].name == attribute) return i;
    }
    return std::nullopt;
}

std::size_t Dimension::attribute_index(std::string_view attribute) const {
    if (auto i = find_attribute(attribute)) return *i;
    throw UnknownNameError("dimension '" + name + "' has no attribute '" + std::string(attribute) + "'");
}

const Hierarchy* Dimension::find_hierarchy(std::string_view hierarchy) const {
    for (const auto& h : hierarchies) {
        if (h.name == hierarchy) return &h;
    }
    return nullptr;
}

const Hierarchy& Dimension::hierarchy(std::string_view hierarchy) const {
    if (auto h = find_hierarchy(hierarchy)) return *h;
    throw UnknownNameError("dimension '" + name + "' has no hierarchy '" + std::string(hierarchy) + "'");
}

std::string Dimension::key_column() const {
    return "id_" + fold_identifier(name);
}

Dimension Dimension::make(std::string name, std::string table) {
    Dimension d;
    d.table = table.empty() ? name : std::move(table);
    d.name = std::move(name);
    d.attributes.push_back({std::string(kIdAttribute), ValueType::Text, d.key_column()});
    d.attributes.push_back({std::string(kAllAttribute), ValueType::Text, ""});
    return d;
}

void Dimension::add_attribute(Attribute attribute) {
    if (attribute.column.empty()) attribute.column = fold_identifier(attribute.name);
    attributes.insert(attributes.end() - 1, std::move(attribute));
}

std::optional<std::size_t> Fact::find_measure(std::string_view measure) const {
    for (std::size_t i = 0; i < measures.size(); ++i) {
        if (measures[i].name == measure) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> Fact::find_link(std::string_view dimension) const {
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i].dimension == dimension) return i;
    }
    return std::nullopt;
}

std::string Fact::key_column() const {
    return "id_" + fold_identifier(name);
}

const Fact* Constellation::find_fact(std::string_view name_) const {
    for (const auto& f : facts) {
        if (f.name == name_) return &f;
    }
    return nullptr;
}

const Fact& Constellation::fact(std::string_view name_) const {
    if (auto f = find_fact(name_)) return *f;
    throw UnknownNameError("unknown fact '" + std::string(name_) + "'");
}

const Dimension* Constellation::find_dimension(std::string_view name_) const {
    for (const auto& d : dimensions) {
        if (d.name == name_) return &d;
    }
    return nullptr;
}

Dimension* Constellation::find_dimension(std::string_view name_) {
    for (auto& d : dimensions) {
        if (d.name == name_) return &d;
    }
    return nullptr;
}

const Dimension& Constellation::dimension(std::string_view name_) const {
    if (auto d = find_dimension(name_)) return *d;
    throw UnknownNameError("unknown dimension '" + std::string(name_) + "'");
}

std::string to_string(const Violation& v) {
    return v.location + ": " + v.message;
}

LevelColumn attribute_column(const Dimension& d, std::string_view attribute) {
    const std::size_t index = d.attribute_index(attribute);
    LevelColumn col;
    col.name = d.attributes[index].name;
    col.type = d.attributes[index].type;
    col.rows = &d.instances;
    col.attribute = index;
    return col;
}

std::optional<StrictnessBreach> find_strictness_breach(std::size_t instance_count, const LevelColumn& fine,
                                                       const LevelColumn& coarse) {
    std::unordered_map<Value, const Value*> parent;
    std::vector<Value> order;
    for (std::size_t i = 0; i < instance_count; ++i) {
        const Value& v = fine.at(i);
        const Value& p = coarse.at(i);
        auto [it, inserted] = parent.try_emplace(v, &p);
        if (!inserted && *it->second != p) {
            std::set<Value> parents;
            for (std::size_t j = 0; j < instance_count; ++j) {
                if (fine.at(j) == v) parents.insert(coarse.at(j));
            }
            return StrictnessBreach{v, {parents.begin(), parents.end()}};
        }
    }
    return std::nullopt;
}

Value roll_up(std::size_t instance_count, const LevelColumn& fine, const LevelColumn& coarse, const Value& v) {
    const Value* found = nullptr;
    for (std::size_t i = 0; i < instance_count; ++i) {
        if (fine.at(i) != v) continue;
        const Value& p = coarse.at(i);
        if (found && *found != p) {
            throw StrictnessError(fine.name, coarse.name, v.str(),
                                  "non-strict hierarchy: " + fine.name + " value '" + v.str() +
                                      "' rolls up to several " + coarse.name + " values ('" + found->str() +
                                      "', '" + p.str() + "')");
        }
        found = &p;
    }
    if (!found) {
        throw UnknownNameError("value '" + v.str() + "' does not occur in " + fine.name);
    }
    return *found;
}

Value parent_of(const Dimension& d, const Hierarchy& h, std::string_view p_from, std::string_view p_to,
                const Value& v) {
    const auto from = std::find(h.params.begin(), h.params.end(), p_from);
    const auto to = std::find(h.params.begin(), h.params.end(), p_to);
    if (from == h.params.end() || to == h.params.end()) {
        throw UnknownNameError("hierarchy '" + h.name + "' has no parameter '" +
                               std::string(from == h.params.end() ? p_from : p_to) + "'");
    }
    if (to <= from) {
        throw OperatorError("'" + std::string(p_to) + "' is not coarser than '" + std::string(p_from) + "' in " +
                            h.name);
    }
    return roll_up(d.size(), attribute_column(d, p_from), attribute_column(d, p_to), v);
}

std::set<Value> dom(const Dimension& d, std::string_view attribute) {
    const auto col = attribute_column(d, attribute);
    std::set<Value> out;
    for (std::size_t i = 0; i < d.size(); ++i) out.insert(col.at(i));
    return out;
}

std::vector<std::size_t> select_instances(const Dimension& d, const Predicate& pred) {
    check_predicate(pred, [&](const std::string& name) -> std::optional<ValueType> {
        if (auto i = d.find_attribute(name)) return d.attributes[*i].type;
        return std::nullopt;
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& row = d.instances[i];
        if (evaluate_predicate(pred, [&](const std::string& name) -> const Value& {
                return row[d.attribute_index(name)];
            })) {
            out.push_back(i);
        }
    }
    return out;
}

namespace {

void validate_dimension(const Dimension& d, std::vector<Violation>& out) {
    const std::string where = "dimension " + d.name;
    if (d.attributes.size() < 2 || d.attributes.front().name != kIdAttribute ||
        d.attributes.back().name != kAllAttribute) {
        out.push_back({where, "attributes must start with Id and end with All"});
        return;
    }
    std::set<std::string> names;
    for (const auto& a : d.attributes) {
        if (!names.insert(a.name).second) out.push_back({where, "duplicate attribute '" + a.name + "'"});
    }

    const std::size_t all = d.attributes.size() - 1;
    std::unordered_set<std::string> ids;
    bool rows_ok = true;
    for (std::size_t i = 0; i < d.instances.size(); ++i) {
        const auto& row = d.instances[i];
        const std::string at = where + " instance #" + std::to_string(i + 1);
        if (row.size() != d.attributes.size()) {
            rows_ok = false;
            out.push_back({at, "expected " + std::to_string(d.attributes.size()) + " values, found " +
                                   std::to_string(row.size())});
            continue;
        }
        for (std::size_t a = 0; a < row.size(); ++a) {
            if (row[a].type() != d.attributes[a].type) {
                out.push_back({at, "attribute '" + d.attributes[a].name + "' expects a " +
                                       std::string(to_string(d.attributes[a].type)) + " value"});
            }
        }
        if (!row[0].is_text() || !ids.insert(row[0].str()).second) {
            out.push_back({at, "duplicate Id '" + row[0].str() + "'"});
        }
        if (row[all] != Value(std::string(kAllValue))) {
            out.push_back({at, "All attribute must hold 'all'"});
        }
    }

    std::set<std::string> hierarchy_names;
    for (const auto& h : d.hierarchies) {
        const std::string hw = where + " hierarchy " + h.name;
        if (!hierarchy_names.insert(h.name).second) out.push_back({hw, "duplicate hierarchy name"});
        if (h.params.empty() || h.params.front() != kIdAttribute || h.params.back() != kAllAttribute) {
            out.push_back({hw, "path must begin with Id and end with All"});
        }
        std::set<std::string> seen;
        bool resolvable = true;
        for (const auto& p : h.params) {
            if (!seen.insert(p).second) out.push_back({hw, "parameter '" + p + "' repeats (path must be acyclic)"});
            if (!d.find_attribute(p)) {
                out.push_back({hw, "unknown parameter '" + p + "'"});
                resolvable = false;
            }
        }
        for (const auto& [param, weak] : h.weak) {
            if (!seen.count(param)) out.push_back({hw, "weak attributes attached to non-parameter '" + param + "'"});
            for (const auto& w : weak) {
                if (!d.find_attribute(w)) {
                    out.push_back({hw, "unknown weak attribute '" + w + "'"});
                } else if (seen.count(w)) {
                    out.push_back({hw, "weak attribute '" + w + "' is also a parameter"});
                }
            }
        }
        if (!resolvable || !rows_ok) continue;
        for (std::size_t i = 0; i + 1 < h.params.size(); ++i) {
            const auto fine = attribute_column(d, h.params[i]);
            const auto coarse = attribute_column(d, h.params[i + 1]);
            if (auto breach = find_strictness_breach(d.size(), fine, coarse)) {
                std::string parents;
                for (const auto& p : breach->parents) parents += (parents.empty() ? "'" : ", '") + p.str() + "'";
                out.push_back({hw, "strictness violation (" + h.params[i] + ", " + h.params[i + 1] + "): " +
                                       h.params[i] + " '" + breach->value.str() + "' rolls up to " + parents});
            }
        }
    }
}

}  // namespace

void resolve_links(Constellation& c) {
    for (auto& f : c.facts) {
        std::vector<std::unordered_map<std::string, std::uint32_t>> storage(f.links.size());
        for (std::size_t l = 0; l < f.links.size(); ++l) {
            if (const Dimension* d = c.find_dimension(f.links[l].dimension)) {
                for (std::size_t i = 0; i < d->size(); ++i) {
                    storage[l].emplace(d->instances[i][0].str(), static_cast<std::uint32_t>(i));
                }
            }
        }
        for (auto& inst : f.instances) {
            inst.targets.assign(f.links.size(), UINT32_MAX);
            for (std::size_t l = 0; l < f.links.size() && l < inst.refs.size(); ++l) {
                auto it = storage[l].find(inst.refs[l]);
                if (it != storage[l].end()) inst.targets[l] = it->second;
            }
        }
    }
}

std::vector<Violation> validate_constellation(const Constellation& c) {
    std::vector<Violation> out;
    const std::string where = "constellation " + c.name;
    std::set<std::string> names;
    for (const auto& d : c.dimensions) {
        if (!names.insert(d.name).second) out.push_back({where, "duplicate dimension name '" + d.name + "'"});
    }
    names.clear();
    for (const auto& f : c.facts) {
        if (!names.insert(f.name).second) out.push_back({where, "duplicate fact name '" + f.name + "'"});
    }
    for (const auto& [fact, dims] : c.star) {
        if (!c.find_fact(fact)) out.push_back({where, "star maps unknown fact '" + fact + "'"});
    }

    for (const auto& d : c.dimensions) validate_dimension(d, out);

    for (const auto& f : c.facts) {
        const std::string fw = "fact " + f.name;
        auto star = c.star.find(f.name);
        if (star == c.star.end() || star->second.empty()) {
            out.push_back({fw, "star must link the fact to at least one dimension"});
        } else {
            for (const auto& d : star->second) {
                if (!c.find_dimension(d)) out.push_back({fw, "star references unknown dimension '" + d + "'"});
            }
        }
        std::set<std::string> measure_names;
        for (const auto& m : f.measures) {
            if (!measure_names.insert(m.name).second) out.push_back({fw, "duplicate measure '" + m.name + "'"});
        }
        for (const auto& link : f.links) {
            if (!c.find_dimension(link.dimension)) {
                out.push_back({fw, "link to unknown dimension '" + link.dimension + "'"});
            } else if (star == c.star.end() || !star->second.count(link.dimension)) {
                out.push_back({fw, "linked dimension '" + link.dimension + "' is not in star(" + f.name + ")"});
            }
            if (link.foreign_key.empty()) {
                out.push_back({fw, "link to '" + link.dimension + "' has no foreign key"});
            }
        }
        std::unordered_set<std::string> ids;
        for (std::size_t i = 0; i < f.instances.size(); ++i) {
            const auto& inst = f.instances[i];
            const std::string at = fw + " instance " + (inst.id.empty() ? "#" + std::to_string(i + 1) : inst.id);
            if (!inst.id.empty() && !ids.insert(inst.id).second) out.push_back({at, "duplicate fact Id"});
            if (inst.measures.size() != f.measures.size()) {
                out.push_back({at, "expected " + std::to_string(f.measures.size()) + " measure values"});
            }
            if (inst.refs.size() != f.links.size()) {
                out.push_back({at, "expected " + std::to_string(f.links.size()) + " dimension references"});
                continue;
            }
            for (std::size_t l = 0; l < f.links.size(); ++l) {
                const bool resolved = l < inst.targets.size() && inst.targets[l] != UINT32_MAX;
                if (!resolved) {
                    out.push_back({at, "reference '" + inst.refs[l] + "' does not resolve to an instance of " +
                                           f.links[l].dimension});
                }
            }
        }
    }
    return out;
}

std::shared_ptr<const Constellation> seal(Constellation c) {
    resolve_links(c);
    auto problems = validate_constellation(c);
    if (!problems.empty()) {
        std::vector<std::string> lines;
        lines.reserve(problems.size());
        for (const auto& p : problems) lines.push_back(to_string(p));
        std::string message = "constellation '" + c.name + "' is invalid: " + lines.front();
        if (lines.size() > 1) message += " (and " + std::to_string(lines.size() - 1) + " more)";
        throw ValidationError(std::move(lines), message);
    }
    return std::make_shared<const Constellation>(std::move(c));
}

}  // namespace blendcube
