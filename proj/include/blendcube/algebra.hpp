#pragma once

#include <set>
#include <string>
#include <vector>

#include "blendcube/model.hpp"
#include "blendcube/mtable.hpp"
#include "blendcube/predicate.hpp"

namespace blendcube {

// BLEND(T, D, P_sup(s_sup), P_inf(s_inf), pred). The source table is passed separately.
struct BlendRequest {
    std::string dimension;
    std::string p_sup;
    Stamp s_sup = Stamp::Drop;
    std::string p_inf;
    Stamp s_inf = Stamp::Drop;
    Predicate pred;

    friend bool operator==(const BlendRequest&, const BlendRequest&) = default;
};

// E_sup: P_sup values of the instances satisfying pred; E_inf: P_inf values of the others.
struct Partition {
    std::set<Value> e_sup;
    std::set<Value> e_inf;
};

struct Validity {
    std::set<Value> offending;  // E_sup ∩ parent(E_inf)
    bool ok() const { return offending.empty(); }
};

struct AxisChoice {
    std::string dimension;
    std::string hierarchy;  // empty: the dimension's only hierarchy

    friend bool operator==(const AxisChoice&, const AxisChoice&) = default;
};

// Builds a table showing the coarsest non-All parameter on each axis, restriction TRUE.
MTable display(const Constellation& c, const std::string& fact, const std::vector<MeasureRef>& measures,
               const AxisChoice& lines, const AxisChoice& columns);

// Appends param, which must be finer than the finest displayed level of the axis.
MTable drilldown(const MTable& t, const Constellation& c, const std::string& dimension, const std::string& param);

// Drops displayed levels finer than param; param is kept (and shown if it was not).
MTable rollup(const MTable& t, const Constellation& c, const std::string& dimension, const std::string& param);

// Replaces the axis showing old_dimension by new_dimension, reset to its coarsest parameter.
MTable rotate(const MTable& t, const Constellation& c, const std::string& old_dimension,
              const std::string& new_dimension, const std::string& hierarchy = {});

// Sets the restriction on a dimension (TRUE clears it). pred may use attributes and, for an axis
// dimension, its blend levels.
MTable restrict_table(const MTable& t, const Constellation& c, const std::string& dimension, const Predicate& pred);

Partition compute_partition(const MTable& t, const BlendRequest& r, const Constellation& c);

// Validity: E_sup must not contain the parent of any E_inf value.
Validity check_valid(const Partition& part, const MTable& t, const BlendRequest& r, const Constellation& c);

// Returns a new table with the blend level spliced in per the stamp scenario.
// Throws ConstraintViolation when check_valid fails.
MTable blend(const MTable& t, const BlendRequest& r, const Constellation& c);

// Concatenated name of the level produced by blending p_sup with p_inf.
std::string blend_name(const std::string& p_sup, const std::string& p_inf);

}  // namespace blendcube
