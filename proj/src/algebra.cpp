#include "blendcube/algebra.hpp"

#include <algorithm>

#include "blendcube/errors.hpp"

namespace blendcube {

namespace {

const Hierarchy& choose_hierarchy(const Dimension& d, const std::string& hierarchy) {
    if (!hierarchy.empty()) return d.hierarchy(hierarchy);
    if (d.hierarchies.size() != 1) {
        throw OperatorError("dimension '" + d.name + "' has " + std::to_string(d.hierarchies.size()) +
                            " hierarchies; name one");
    }
    return d.hierarchies.front();
}

void require_linked(const Constellation& c, const Fact& fact, const std::string& dimension) {
    auto star = c.star.find(fact.name);
    if (star == c.star.end() || !star->second.count(dimension) || !fact.find_link(dimension)) {
        throw OperatorError("dimension '" + dimension + "' is not linked to fact '" + fact.name + "'");
    }
}

AxisSpec fresh_axis(const Constellation& c, const Fact& fact, const AxisChoice& choice) {
    const Dimension& d = c.dimension(choice.dimension);
    require_linked(c, fact, d.name);
    const Hierarchy& h = choose_hierarchy(d, choice.hierarchy);
    if (h.params.size() < 2) throw OperatorError("hierarchy '" + h.name + "' has no displayable parameter");
    AxisSpec axis;
    axis.dimension = d.name;
    axis.hierarchy = h.name;
    axis.path = h.params;
    axis.displayed = {h.params[h.params.size() - 2]};
    return axis;
}

std::size_t level_index(const AxisSpec& axis, const std::string& level) {
    auto index = axis.path_index(level);
    if (!index) {
        throw UnknownNameError("'" + level + "' is not a parameter of the " + axis.dimension + " axis (" +
                               axis.hierarchy + ")");
    }
    return *index;
}

std::string unique_level_name(const AxisSpec& axis, const Dimension& d, const std::string& base) {
    auto taken = [&](const std::string& n) {
        return std::find(axis.path.begin(), axis.path.end(), n) != axis.path.end() || axis.find_blend(n) ||
               d.find_attribute(n);
    };
    if (!taken(base)) return base;
    for (int i = 2;; ++i) {
        std::string candidate = base + "_" + std::to_string(i);
        if (!taken(candidate)) return candidate;
    }
}

void check_request_shape(const MTable& t, const BlendRequest& r) {
    const AxisSpec& axis = t.axis(r.dimension);
    auto sup = std::find(axis.displayed.begin(), axis.displayed.end(), r.p_sup);
    auto inf = std::find(axis.displayed.begin(), axis.displayed.end(), r.p_inf);
    if (sup == axis.displayed.end()) throw OperatorError("'" + r.p_sup + "' is not displayed on " + r.dimension);
    if (inf == axis.displayed.end()) throw OperatorError("'" + r.p_inf + "' is not displayed on " + r.dimension);
    if (inf != sup + 1) {
        throw OperatorError("'" + r.p_sup + "' and '" + r.p_inf +
                            "' must be consecutive displayed parameters, the first one coarser");
    }
}

}  // namespace

std::string blend_name(const std::string& p_sup, const std::string& p_inf) {
    return p_sup + "_" + p_inf;
}

MTable display(const Constellation& c, const std::string& fact_name, const std::vector<MeasureRef>& measures,
               const AxisChoice& lines, const AxisChoice& columns) {
    const Fact& fact = c.fact(fact_name);
    if (measures.empty()) throw OperatorError("DISPLAY needs at least one measure");
    for (const auto& m : measures) {
        if (!fact.find_measure(m.measure)) {
            throw UnknownNameError("fact '" + fact.name + "' has no measure '" + m.measure + "'");
        }
    }
    if (lines.dimension == columns.dimension) throw OperatorError("lines and columns must use different dimensions");
    MTable t;
    t.subject = {fact.name, measures};
    t.lines = fresh_axis(c, fact, lines);
    t.columns = fresh_axis(c, fact, columns);
    return t;
}

MTable drilldown(const MTable& t, const Constellation& c, const std::string& dimension, const std::string& param) {
    (void)c;
    MTable out = t;
    AxisSpec& axis = out.axis(dimension);
    const std::size_t target = level_index(axis, param);
    const std::size_t finest = level_index(axis, axis.displayed.back());
    if (param == kAllAttribute || target >= finest) {
        throw OperatorError("cannot drill down to '" + param + "': it is not finer than '" + axis.displayed.back() +
                            "'");
    }
    axis.displayed.push_back(param);
    return out;
}

MTable rollup(const MTable& t, const Constellation& c, const std::string& dimension, const std::string& param) {
    (void)c;
    MTable out = t;
    AxisSpec& axis = out.axis(dimension);
    const std::size_t target = level_index(axis, param);
    const std::size_t coarsest = level_index(axis, axis.displayed.front());
    if (param == kAllAttribute || target > coarsest) {
        throw OperatorError("cannot roll up to '" + param + "': it is above the coarsest displayed parameter '" +
                            axis.displayed.front() + "'");
    }
    std::vector<std::string> kept;
    for (const auto& level : axis.displayed) {
        if (level_index(axis, level) >= target) kept.push_back(level);
    }
    if (kept.empty() || kept.back() != param) kept.push_back(param);
    axis.displayed = std::move(kept);
    return out;
}

MTable rotate(const MTable& t, const Constellation& c, const std::string& old_dimension,
              const std::string& new_dimension, const std::string& hierarchy) {
    MTable out = t;
    AxisSpec& axis = out.axis(old_dimension);
    const AxisSpec& other = (&axis == &out.lines) ? out.columns : out.lines;
    if (other.dimension == new_dimension) {
        throw OperatorError("dimension '" + new_dimension + "' is already displayed on the other axis");
    }
    axis = fresh_axis(c, c.fact(t.subject.fact), {new_dimension, hierarchy});
    out.restriction.erase(old_dimension);
    return out;
}

MTable restrict_table(const MTable& t, const Constellation& c, const std::string& dimension, const Predicate& pred) {
    const Dimension& d = c.dimension(dimension);
    require_linked(c, c.fact(t.subject.fact), d.name);
    const AxisSpec* axis = t.has_axis(d.name) ? &t.axis(d.name) : nullptr;
    check_predicate(pred, [&](const std::string& name) -> std::optional<ValueType> {
        if (axis) {
            if (const BlendParameter* b = axis->find_blend(name)) return b->type;
        }
        if (auto i = d.find_attribute(name)) return d.attributes[*i].type;
        return std::nullopt;
    });
    MTable out = t;
    if (pred.is_true()) {
        out.restriction.erase(d.name);
    } else {
        out.restriction[d.name] = pred;
    }
    return out;
}

namespace {

Partition partition_with_mask(const MTable& t, const BlendRequest& r, const Constellation& c, std::vector<char>& mask) {
    check_request_shape(t, r);
    const AxisSpec& axis = t.axis(r.dimension);
    const Dimension& d = c.dimension(r.dimension);
    mask = predicate_mask(d, &axis, r.pred);
    const auto sup = level_column(d, &axis, r.p_sup);
    const auto inf = level_column(d, &axis, r.p_inf);
    Partition part;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (mask[i]) {
            part.e_sup.insert(sup.at(i));
        } else {
            part.e_inf.insert(inf.at(i));
        }
    }
    return part;
}

}  // namespace

Partition compute_partition(const MTable& t, const BlendRequest& r, const Constellation& c) {
    std::vector<char> mask;
    return partition_with_mask(t, r, c, mask);
}

namespace {

// Derived blend levels are not covered by the sealed strictness guarantee, so their roll-up is
// checked explicitly. Stored parameters of one hierarchy are strict by validation.
void require_strict(const AxisSpec& axis, const Dimension& d, const LevelColumn& inf, const LevelColumn& sup) {
    if (!axis.find_blend(inf.name) && !axis.find_blend(sup.name)) return;
    if (auto breach = find_strictness_breach(d.size(), inf, sup)) {
        throw StrictnessError(inf.name, sup.name, breach->value.str(),
                              "non-strict hierarchy: " + inf.name + " value '" + breach->value.str() +
                                  "' rolls up to several " + sup.name + " values");
    }
}

}  // namespace

Validity check_valid(const Partition& part, const MTable& t, const BlendRequest& r, const Constellation& c) {
    const AxisSpec& axis = t.axis(r.dimension);
    const Dimension& d = c.dimension(r.dimension);
    const auto sup = level_column(d, &axis, r.p_sup);
    const auto inf = level_column(d, &axis, r.p_inf);
    require_strict(axis, d, inf, sup);
    // With a strict roll-up, each instance's own P_sup value is the parent of its P_inf value.
    Validity v;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Value& parent = sup.at(i);
        if (part.e_sup.count(parent) && part.e_inf.count(inf.at(i))) v.offending.insert(parent);
    }
    return v;
}

MTable blend(const MTable& t, const BlendRequest& r, const Constellation& c) {
    std::vector<char> mask;
    const Partition part = partition_with_mask(t, r, c, mask);
    if (part.e_sup.empty() && part.e_inf.empty()) {
        throw OperatorError("BLEND over a dimension without instances");
    }
    const AxisSpec& source_axis = t.axis(r.dimension);
    const Dimension& dim = c.dimension(r.dimension);
    const auto sup_column = level_column(dim, &source_axis, r.p_sup);
    require_strict(source_axis, dim, level_column(dim, &source_axis, r.p_inf), sup_column);
    // An unselected instance whose parent is selected puts that parent in E_sup ∩ parent(E_inf).
    Validity validity;
    for (std::size_t i = 0; i < dim.size(); ++i) {
        if (!mask[i] && part.e_sup.count(sup_column.at(i))) validity.offending.insert(sup_column.at(i));
    }
    if (!validity.ok()) {
        std::vector<std::string> offending;
        std::string list;
        for (const auto& v : validity.offending) {
            offending.push_back(v.str());
            list += (list.empty() ? "'" : ", '") + v.str() + "'";
        }
        throw ConstraintViolation(std::move(offending),
                                  "invalid BLEND predicate: " + r.p_sup + " value(s) " + list +
                                      " are selected while some of their " + r.p_inf +
                                      " values are not (E_sup and parent(E_inf) must be disjoint)");
    }

    MTable out = t;
    AxisSpec& axis = out.axis(r.dimension);
    const Dimension& d = c.dimension(r.dimension);
    const auto sup = level_column(d, &axis, r.p_sup);
    const auto inf = level_column(d, &axis, r.p_inf);

    auto param = std::make_shared<BlendParameter>();
    param->name = unique_level_name(axis, d, blend_name(r.p_sup, r.p_inf));
    param->p_sup = r.p_sup;
    param->s_sup = r.s_sup;
    param->p_inf = r.p_inf;
    param->s_inf = r.s_inf;
    param->pred = r.pred;
    param->e_sup = part.e_sup;
    param->e_inf = part.e_inf;
    if (sup.type != inf.type) {
        throw TypeMismatchError("cannot blend " + std::string(to_string(sup.type)) + " parameter '" + r.p_sup +
                                "' with " + std::string(to_string(inf.type)) + " parameter '" + r.p_inf + "'");
    }
    param->type = sup.type;
    param->values.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) param->values.push_back(mask[i] ? sup.at(i) : inf.at(i));
    param->domain.insert(part.e_sup.begin(), part.e_sup.end());
    param->domain.insert(part.e_inf.begin(), part.e_inf.end());

    // Path (finest first): levels strictly between p_inf and p_sup cannot sit strictly
    // above or below the new level, so they leave the path.
    const std::size_t i_inf = level_index(axis, r.p_inf);
    const std::size_t i_sup = level_index(axis, r.p_sup);
    std::vector<std::string> middle;
    if (r.s_inf == Stamp::Keep) middle.push_back(r.p_inf);
    middle.push_back(param->name);
    if (r.s_sup == Stamp::Keep) middle.push_back(r.p_sup);
    std::vector<std::string> path(axis.path.begin(), axis.path.begin() + static_cast<std::ptrdiff_t>(i_inf));
    path.insert(path.end(), middle.begin(), middle.end());
    path.insert(path.end(), axis.path.begin() + static_cast<std::ptrdiff_t>(i_sup) + 1, axis.path.end());

    // Displayed (coarsest first): the pair is rewritten in place.
    std::vector<std::string> shown;
    for (const auto& level : axis.displayed) {
        if (level == r.p_sup) {
            if (r.s_sup == Stamp::Keep) shown.push_back(r.p_sup);
            shown.push_back(param->name);
            if (r.s_inf == Stamp::Keep) shown.push_back(r.p_inf);
        } else if (level != r.p_inf) {
            shown.push_back(level);
        }
    }

    axis.path = std::move(path);
    axis.displayed = std::move(shown);
    // Blend levels that left the path are unreachable; later blends may still reference them
    // through predicates, so they stay registered.
    axis.blends.push_back(std::move(param));
    return out;
}

}  // namespace blendcube
