#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "blendcube/model.hpp"
#include "blendcube/predicate.hpp"

namespace blendcube {

enum class Stamp { Keep, Drop };  // (+) / (-)

inline char stamp_char(Stamp s) { return s == Stamp::Keep ? '+' : '-'; }

// A level derived by BLEND: its domain is E_sup ∪ E_inf and every dimension instance maps
// to the P_sup value (pred holds) or the P_inf value (pred fails).
struct BlendParameter {
    std::string name;
    std::string p_sup;
    Stamp s_sup = Stamp::Drop;
    std::string p_inf;
    Stamp s_inf = Stamp::Drop;
    Predicate pred;
    ValueType type = ValueType::Text;
    std::set<Value> e_sup;
    std::set<Value> e_inf;
    std::set<Value> domain;
    std::vector<Value> values;  // indexed by dimension instance
};

struct AxisSpec {
    std::string dimension;
    std::string hierarchy;
    // Effective hierarchy, finest first: Id ... All, with blend levels spliced in.
    std::vector<std::string> path;
    // Displayed levels, coarsest first.
    std::vector<std::string> displayed;
    // In creation order.
    std::vector<std::shared_ptr<const BlendParameter>> blends;

    const BlendParameter* find_blend(std::string_view level) const;
    // Position in path, or nullopt.
    std::optional<std::size_t> path_index(std::string_view level) const;
};

struct MeasureRef {
    Aggregation function = Aggregation::Sum;
    std::string measure;

    friend bool operator==(const MeasureRef&, const MeasureRef&) = default;
};

std::string label(const MeasureRef& m);

struct Subject {
    std::string fact;
    std::vector<MeasureRef> measures;
};

// A displayed analysis state (subject, lines, columns, restriction).
struct MTable {
    Subject subject;
    AxisSpec lines;
    AxisSpec columns;
    std::map<std::string, Predicate> restriction;  // per dimension; absent means TRUE

    const AxisSpec& axis(std::string_view dimension) const;  // throws UnknownNameError
    AxisSpec& axis(std::string_view dimension);
    bool has_axis(std::string_view dimension) const;
};

// Resolves a level of a dimension for reading, honouring the axis's blend parameters.
LevelColumn level_column(const Dimension& d, const AxisSpec* axis, std::string_view level);

// Per-instance truth of pred, where pred may mention attributes of d and blend levels of axis.
std::vector<char> predicate_mask(const Dimension& d, const AxisSpec* axis, const Predicate& pred);

// Every violated MTable invariant; empty when the table is well formed against c.
std::vector<std::string> validate_mtable(const MTable& t, const Constellation& c);

struct Grid {
    std::string fact;
    std::string line_dimension;
    std::string column_dimension;
    std::vector<std::string> line_levels;
    std::vector<std::string> column_levels;
    std::vector<std::string> measures;
    std::vector<std::vector<Value>> row_headers;
    std::vector<std::vector<Value>> column_headers;
    std::vector<std::optional<double>> cells;  // [row][column][measure]; nullopt is EMPTY

    std::size_t rows() const { return row_headers.size(); }
    std::size_t cols() const { return column_headers.size(); }
    const std::optional<double>& cell(std::size_t row, std::size_t col, std::size_t measure = 0) const {
        return cells[(row * cols() + col) * measures.size() + measure];
    }
    std::optional<std::size_t> find_row(const std::vector<Value>& header) const;
    std::optional<std::size_t> find_column(const std::vector<Value>& header) const;
    // Cell addressed by the finest header values (leaves are unique within one axis).
    std::optional<double> at_leaf(const Value& row_leaf, const Value& col_leaf, std::size_t measure = 0) const;

    friend bool operator==(const Grid&, const Grid&) = default;
};

// Rolls every restriction-passing fact instance up to the displayed levels and aggregates.
Grid evaluate(const MTable& t, const Constellation& c);

// Fixed-width rendering with nested headers; EMPTY cells are blank.
std::string render_text(const Grid& g);

// CSV form used by SAVE and golden comparisons.
std::string grid_to_csv(const Grid& g);

}  // namespace blendcube
