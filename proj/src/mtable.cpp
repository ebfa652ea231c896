#include "blendcube/mtable.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "blendcube/errors.hpp"

namespace blendcube {

const BlendParameter* AxisSpec::find_blend(std::string_view level) const {
    for (const auto& b : blends) {
        if (b->name == level) return b.get();
    }
    return nullptr;
}

std::optional<std::size_t> AxisSpec::path_index(std::string_view level) const {
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] == level) return i;
    }
    return std::nullopt;
}

std::string label(const MeasureRef& m) {
    return std::string(to_string(m.function)) + "(" + m.measure + ")";
}

const AxisSpec& MTable::axis(std::string_view dimension) const {
    if (lines.dimension == dimension) return lines;
    if (columns.dimension == dimension) return columns;
    throw UnknownNameError("dimension '" + std::string(dimension) + "' is not displayed on either axis");
}

AxisSpec& MTable::axis(std::string_view dimension) {
    return const_cast<AxisSpec&>(std::as_const(*this).axis(dimension));
}

bool MTable::has_axis(std::string_view dimension) const {
    return lines.dimension == dimension || columns.dimension == dimension;
}

LevelColumn level_column(const Dimension& d, const AxisSpec* axis, std::string_view level) {
    if (axis) {
        if (const BlendParameter* b = axis->find_blend(level)) {
            LevelColumn col;
            col.name = b->name;
            col.type = b->type;
            col.mapped = &b->values;
            return col;
        }
    }
    return attribute_column(d, level);
}

std::vector<char> predicate_mask(const Dimension& d, const AxisSpec* axis, const Predicate& pred) {
    std::map<std::string, LevelColumn, std::less<>> columns;
    for (const auto& name : referenced_attributes(pred)) {
        const bool known = d.find_attribute(name) || (axis && axis->find_blend(name));
        if (!known) {
            throw UnknownNameError("predicate references '" + name + "', which is not an attribute of " + d.name);
        }
        columns.emplace(name, level_column(d, axis, name));
    }
    check_predicate(pred, [&](const std::string& name) -> std::optional<ValueType> {
        auto it = columns.find(name);
        if (it == columns.end()) return std::nullopt;
        return it->second.type;
    });
    std::vector<char> mask(d.size(), 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        mask[i] = evaluate_predicate(pred, [&](const std::string& name) -> const Value& {
            return columns.find(name)->second.at(i);
        }) ? 1 : 0;
    }
    return mask;
}

namespace {

void validate_axis(const AxisSpec& axis, const Constellation& c, const std::string& where,
                   std::vector<std::string>& out) {
    const Dimension* d = c.find_dimension(axis.dimension);
    if (!d) {
        out.push_back(where + ": unknown dimension '" + axis.dimension + "'");
        return;
    }
    if (!d->find_hierarchy(axis.hierarchy)) {
        out.push_back(where + ": unknown hierarchy '" + axis.hierarchy + "'");
    }
    if (axis.path.size() < 2 || axis.path.front() != kIdAttribute || axis.path.back() != kAllAttribute) {
        out.push_back(where + ": path must run from Id to All");
    }
    std::set<std::string> seen;
    for (const auto& level : axis.path) {
        if (!seen.insert(level).second) out.push_back(where + ": level '" + level + "' repeats in path");
        if (!d->find_attribute(level) && !axis.find_blend(level)) {
            out.push_back(where + ": level '" + level + "' is neither a parameter nor a blend parameter");
        }
    }
    if (axis.displayed.empty()) out.push_back(where + ": no displayed parameter");
    std::optional<std::size_t> previous;
    std::set<std::string> shown;
    for (const auto& level : axis.displayed) {
        if (!shown.insert(level).second) out.push_back(where + ": '" + level + "' displayed twice");
        if (level == kAllAttribute) out.push_back(where + ": All cannot be displayed");
        auto index = axis.path_index(level);
        if (!index) {
            out.push_back(where + ": displayed '" + level + "' is not on the axis path");
            continue;
        }
        if (previous && *index >= *previous) {
            out.push_back(where + ": displayed parameters are not ordered coarse to fine at '" + level + "'");
        }
        previous = index;
    }
    for (const auto& b : axis.blends) {
        if (b->values.size() != d->size()) {
            out.push_back(where + ": blend parameter '" + b->name + "' does not map every instance");
            continue;
        }
        std::set<Value> range(b->values.begin(), b->values.end());
        if (range != b->domain) out.push_back(where + ": blend parameter '" + b->name + "' range differs from domain");
        for (const auto& v : b->domain) {
            if (!b->e_sup.count(v) && !b->e_inf.count(v)) {
                out.push_back(where + ": blend value '" + v.str() + "' is in neither E_sup nor E_inf");
            }
        }
    }
}

struct Accumulator {
    std::size_t count = 0;
    double sum = 0.0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    void add(double v) {
        ++count;
        sum += v;
        min = std::min(min, v);
        max = std::max(max, v);
    }

    std::optional<double> result(Aggregation f) const {
        if (count == 0) return std::nullopt;
        switch (f) {
        case Aggregation::Sum: return sum;
        case Aggregation::Avg: return sum / static_cast<double>(count);
        case Aggregation::Min: return min;
        case Aggregation::Max: return max;
        case Aggregation::Count: return static_cast<double>(count);
        }
        return std::nullopt;
    }
};

struct AxisLayout {
    std::vector<std::vector<Value>> headers;  // sorted
    std::vector<std::uint32_t> slot;          // per dimension instance; UINT32_MAX when restricted out
    std::size_t link = 0;
};

AxisLayout layout_axis(const MTable& t, const AxisSpec& axis, const Fact& fact, const Constellation& c) {
    const Dimension& d = c.dimension(axis.dimension);
    AxisLayout out;
    auto link = fact.find_link(axis.dimension);
    if (!link) {
        throw OperatorError("fact '" + fact.name + "' is not linked to dimension '" + axis.dimension + "'");
    }
    out.link = *link;

    std::vector<LevelColumn> levels;
    levels.reserve(axis.displayed.size());
    for (const auto& level : axis.displayed) levels.push_back(level_column(d, &axis, level));

    std::vector<char> mask;
    if (auto r = t.restriction.find(axis.dimension); r != t.restriction.end() && !r->second.is_true()) {
        mask = predicate_mask(d, &axis, r->second);
    }

    std::vector<std::uint32_t> order;
    order.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (mask.empty() || mask[i]) order.push_back(static_cast<std::uint32_t>(i));
    }
    auto less = [&](std::uint32_t a, std::uint32_t b) {
        for (const auto& l : levels) {
            const auto cmp = l.at(a) <=> l.at(b);
            if (cmp != 0) return cmp < 0;
        }
        return false;
    };
    // Lexicographic tuple order is the display order.
    std::sort(order.begin(), order.end(), less);
    out.slot.assign(d.size(), UINT32_MAX);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::uint32_t i = order[k];
        if (k == 0 || less(order[k - 1], i)) {
            std::vector<Value> tuple;
            tuple.reserve(levels.size());
            for (const auto& l : levels) tuple.push_back(l.at(i));
            out.headers.push_back(std::move(tuple));
        }
        out.slot[i] = static_cast<std::uint32_t>(out.headers.size() - 1);
    }
    return out;
}

std::size_t display_width(std::string_view s) {
    std::size_t n = 0;
    for (char ch : s) {
        if ((static_cast<unsigned char>(ch) & 0xC0u) != 0x80u) ++n;
    }
    return n;
}

std::string pad_left(const std::string& s, std::size_t width) {
    const std::size_t w = display_width(s);
    return w >= width ? s : std::string(width - w, ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    const std::size_t w = display_width(s);
    return w >= width ? s : s + std::string(width - w, ' ');
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

// Value shown at position (index, level) of a header list: blank when it repeats the group above.
std::string nested_label(const std::vector<std::vector<Value>>& headers, std::size_t index, std::size_t level) {
    if (index > 0) {
        bool same = true;
        for (std::size_t l = 0; l <= level && same; ++l) same = headers[index][l] == headers[index - 1][l];
        if (same) return {};
    }
    return headers[index][level].str();
}

std::string cell_text(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string{};
}

}  // namespace

std::vector<std::string> validate_mtable(const MTable& t, const Constellation& c) {
    std::vector<std::string> out;
    const Fact* fact = c.find_fact(t.subject.fact);
    if (!fact) {
        out.push_back("unknown fact '" + t.subject.fact + "'");
        return out;
    }
    if (t.subject.measures.empty()) out.push_back("subject has no measure");
    for (const auto& m : t.subject.measures) {
        if (!fact->find_measure(m.measure)) out.push_back("unknown measure '" + m.measure + "'");
    }
    if (t.lines.dimension == t.columns.dimension) out.push_back("lines and columns use the same dimension");
    auto star = c.star.find(fact->name);
    for (const auto* axis : {&t.lines, &t.columns}) {
        if (star == c.star.end() || !star->second.count(axis->dimension) || !fact->find_link(axis->dimension)) {
            out.push_back("dimension '" + axis->dimension + "' is not linked to fact '" + fact->name + "'");
        }
    }
    validate_axis(t.lines, c, "lines", out);
    validate_axis(t.columns, c, "columns", out);
    for (const auto& [dim, pred] : t.restriction) {
        if (!c.find_dimension(dim)) out.push_back("restriction on unknown dimension '" + dim + "'");
    }
    return out;
}

std::optional<std::size_t> Grid::find_row(const std::vector<Value>& header) const {
    auto it = std::lower_bound(row_headers.begin(), row_headers.end(), header);
    if (it == row_headers.end() || *it != header) return std::nullopt;
    return static_cast<std::size_t>(it - row_headers.begin());
}

std::optional<std::size_t> Grid::find_column(const std::vector<Value>& header) const {
    auto it = std::lower_bound(column_headers.begin(), column_headers.end(), header);
    if (it == column_headers.end() || *it != header) return std::nullopt;
    return static_cast<std::size_t>(it - column_headers.begin());
}

std::optional<double> Grid::at_leaf(const Value& row_leaf, const Value& col_leaf, std::size_t measure) const {
    for (std::size_t r = 0; r < rows(); ++r) {
        if (row_headers[r].back() != row_leaf) continue;
        for (std::size_t col = 0; col < cols(); ++col) {
            if (column_headers[col].back() == col_leaf) return cell(r, col, measure);
        }
        throw UnknownNameError("no column header ending in '" + col_leaf.str() + "'");
    }
    throw UnknownNameError("no row header ending in '" + row_leaf.str() + "'");
}

Grid evaluate(const MTable& t, const Constellation& c) {
    const Fact& fact = c.fact(t.subject.fact);
    if (t.subject.measures.empty()) throw OperatorError("subject has no measure");
    std::vector<std::size_t> measure_index;
    for (const auto& m : t.subject.measures) {
        auto i = fact.find_measure(m.measure);
        if (!i) throw UnknownNameError("fact '" + fact.name + "' has no measure '" + m.measure + "'");
        measure_index.push_back(*i);
    }

    AxisLayout rows = layout_axis(t, t.lines, fact, c);
    AxisLayout cols = layout_axis(t, t.columns, fact, c);

    // Restrictions on dimensions that are not displayed.
    std::vector<std::pair<std::size_t, std::vector<char>>> other_masks;
    for (const auto& [dim, pred] : t.restriction) {
        if (pred.is_true() || t.has_axis(dim)) continue;
        auto link = fact.find_link(dim);
        if (!link) throw OperatorError("restriction on dimension '" + dim + "' not linked to " + fact.name);
        other_masks.emplace_back(*link, predicate_mask(c.dimension(dim), nullptr, pred));
    }

    Grid g;
    g.fact = fact.name;
    g.line_dimension = t.lines.dimension;
    g.column_dimension = t.columns.dimension;
    g.line_levels = t.lines.displayed;
    g.column_levels = t.columns.displayed;
    for (const auto& m : t.subject.measures) g.measures.push_back(label(m));
    g.row_headers = std::move(rows.headers);
    g.column_headers = std::move(cols.headers);

    const std::size_t nm = measure_index.size();
    std::vector<Accumulator> acc(g.rows() * g.cols() * nm);
    for (const auto& inst : fact.instances) {
        const auto lt = inst.targets.at(rows.link);
        const auto ct = inst.targets.at(cols.link);
        if (lt == UINT32_MAX || ct == UINT32_MAX) {
            throw Error("fact instance '" + inst.id + "' has an unresolvable dimension link");
        }
        const auto r = rows.slot[lt];
        const auto col = cols.slot[ct];
        if (r == UINT32_MAX || col == UINT32_MAX) continue;
        bool pass = true;
        for (const auto& [link, mask] : other_masks) {
            const auto target = inst.targets.at(link);
            if (target == UINT32_MAX || !mask[target]) {
                pass = false;
                break;
            }
        }
        if (!pass) continue;
        const std::size_t base = (r * g.cols() + col) * nm;
        for (std::size_t m = 0; m < nm; ++m) acc[base + m].add(inst.measures[measure_index[m]]);
    }

    g.cells.resize(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) g.cells[i] = acc[i].result(t.subject.measures[i % nm].function);
    return g;
}

std::string render_text(const Grid& g) {
    const std::size_t nr = g.line_levels.size();
    const std::size_t nc = g.column_levels.size();
    const std::size_t nm = g.measures.size();
    const bool measure_row = nm > 1;

    // Left block: one column per line level.
    std::vector<std::size_t> left(std::max<std::size_t>(nr, 1), 0);
    for (std::size_t l = 0; l < nr; ++l) {
        left[l] = display_width(g.line_levels[l]);
        for (const auto& h : g.row_headers) left[l] = std::max(left[l], display_width(h[l].str()));
    }
    for (const auto& name : g.column_levels) left.back() = std::max(left.back(), display_width(name));
    if (measure_row) left.back() = std::max<std::size_t>(left.back(), 7);

    const std::size_t ncol = g.cols() * nm;
    std::vector<std::size_t> width(ncol, 0);
    for (std::size_t col = 0; col < g.cols(); ++col) {
        for (std::size_t m = 0; m < nm; ++m) {
            std::size_t& w = width[col * nm + m];
            for (std::size_t l = 0; l < nc; ++l) w = std::max(w, display_width(g.column_headers[col][l].str()));
            if (measure_row) w = std::max(w, display_width(g.measures[m]));
            for (std::size_t r = 0; r < g.rows(); ++r) w = std::max(w, cell_text(g.cell(r, col, m)).size());
        }
    }

    auto left_block = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t l = 0; l < left.size(); ++l) {
            out += pad_right(l < cells.size() ? cells[l] : std::string{}, left[l]);
            out += ' ';
        }
        return out;
    };
    auto trim_right = [](std::string s) {
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s + "\n";
    };

    std::string out;
    std::string measures;
    for (const auto& m : g.measures) measures += (measures.empty() ? "" : ", ") + m;
    out += g.fact + " " + measures + " | lines: " + g.line_dimension + " | columns: " + g.column_dimension + "\n";

    for (std::size_t l = 0; l < nc; ++l) {
        std::vector<std::string> lead(left.size());
        lead.back() = g.column_levels[l];
        std::string line = left_block(lead);
        for (std::size_t col = 0; col < g.cols(); ++col) {
            const std::string text = nested_label(g.column_headers, col, l);
            for (std::size_t m = 0; m < nm; ++m) {
                line += ' ';
                line += pad_right(m == 0 ? text : std::string{}, width[col * nm + m]);
            }
        }
        out += trim_right(line);
    }
    if (measure_row) {
        std::vector<std::string> lead(left.size());
        lead.back() = "measure";
        std::string line = left_block(lead);
        for (std::size_t col = 0; col < g.cols(); ++col) {
            for (std::size_t m = 0; m < nm; ++m) line += ' ' + pad_left(g.measures[m], width[col * nm + m]);
        }
        out += trim_right(line);
    }
    out += trim_right(left_block(g.line_levels));

    for (std::size_t r = 0; r < g.rows(); ++r) {
        std::vector<std::string> lead(left.size());
        for (std::size_t l = 0; l < nr; ++l) lead[l] = nested_label(g.row_headers, r, l);
        std::string line = left_block(lead);
        for (std::size_t col = 0; col < g.cols(); ++col) {
            for (std::size_t m = 0; m < nm; ++m) {
                line += ' ' + pad_left(cell_text(g.cell(r, col, m)), width[col * nm + m]);
            }
        }
        out += trim_right(line);
    }
    return out;
}

std::string grid_to_csv(const Grid& g) {
    const std::size_t nr = std::max<std::size_t>(g.line_levels.size(), 1);
    const std::size_t nm = g.measures.size();
    std::string out;
    auto lead = [&](const std::string& last) {
        std::string s;
        for (std::size_t i = 0; i + 1 < nr; ++i) s += ',';
        return s + csv_field(last);
    };
    for (std::size_t l = 0; l < g.column_levels.size(); ++l) {
        out += lead(g.column_levels[l]);
        for (std::size_t col = 0; col < g.cols(); ++col) {
            for (std::size_t m = 0; m < nm; ++m) out += "," + csv_field(g.column_headers[col][l].str());
        }
        out += "\n";
    }
    out += lead("measure");
    for (std::size_t col = 0; col < g.cols(); ++col) {
        for (std::size_t m = 0; m < nm; ++m) out += "," + csv_field(g.measures[m]);
    }
    out += "\n";
    for (std::size_t l = 0; l < g.line_levels.size(); ++l) out += (l ? "," : "") + csv_field(g.line_levels[l]);
    for (std::size_t i = 0; i < g.cols() * nm; ++i) out += ",";
    out += "\n";
    for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t l = 0; l < g.line_levels.size(); ++l) {
            out += (l ? "," : "") + csv_field(g.row_headers[r][l].str());
        }
        for (std::size_t col = 0; col < g.cols(); ++col) {
            for (std::size_t m = 0; m < nm; ++m) out += "," + cell_text(g.cell(r, col, m));
        }
        out += "\n";
    }
    return out;
}

}  // namespace blendcube
