#include "blendcube/sqlgen.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "blendcube/errors.hpp"

namespace blendcube {

namespace {

const std::set<std::string>& reserved_words() {
    static const std::set<std::string> words = {
        "all",    "and",   "as",     "between", "by",     "case",  "create", "cross", "date",  "delete", "distinct",
        "else",   "end",   "exists", "from",    "full",   "group", "having", "in",    "inner", "insert", "into",
        "is",     "join",  "key",    "left",    "like",   "not",   "null",   "on",    "or",    "order",  "outer",
        "primary", "references", "right", "select", "set", "table", "then", "union", "update", "user", "using",
        "values", "when",  "where",  "with"};
    return words;
}

std::string aggregate_sql(Aggregation f) {
    return std::string(to_string(f));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string indent(const std::string& text, std::size_t n) {
    const std::string pad(n, ' ');
    std::string out = pad;
    for (char ch : text) {
        out += ch;
        if (ch == '\n') out += pad;
    }
    return out;
}

struct MeasureColumn {
    std::string function;
    std::string column;  // fact column
    std::string alias;
};

std::vector<MeasureColumn> measure_columns(const MTable& t, const Fact& fact) {
    std::map<std::string, int> uses;
    for (const auto& m : t.subject.measures) ++uses[m.measure];
    std::vector<MeasureColumn> out;
    for (const auto& m : t.subject.measures) {
        const Measure& measure = fact.measures[*fact.find_measure(m.measure)];
        std::string alias = measure.column;
        if (uses[m.measure] > 1) alias = fold_identifier(std::string(to_string(m.function))) + "_" + measure.column;
        out.push_back({aggregate_sql(m.function), measure.column, alias});
    }
    return out;
}

const Fact& subject_fact(const MTable& t, const Constellation& c) {
    const Fact& fact = c.fact(t.subject.fact);
    for (const auto& m : t.subject.measures) {
        if (!fact.find_measure(m.measure)) throw UnknownNameError("fact '" + fact.name + "' has no measure '" + m.measure + "'");
    }
    return fact;
}

// Column of a stored attribute, or the constant 'all'.
std::string stored_column(const Dimension& d, const std::string& attribute) {
    if (attribute == kAllAttribute) return quote_literal(Value(std::string(kAllValue)));
    return quote_identifier(d.attributes[d.attribute_index(attribute)].column);
}

std::vector<const BlendParameter*> blends_in_order(const MTable& t) {
    std::vector<const BlendParameter*> out;
    for (const auto* axis : {&t.lines, &t.columns}) {
        for (const auto& b : axis->blends) out.push_back(b.get());
    }
    return out;
}

}  // namespace

std::string_view to_string(SqlKind kind) {
    switch (kind) {
    case SqlKind::Ddl: return "ddl";
    case SqlKind::TmQuery: return "tm-query";
    case SqlKind::BlendQuery: return "blend-query";
    }
    return "?";
}

std::string SqlArtifact::text() const {
    return join(statements, "\n\n") + (statements.empty() ? "" : "\n");
}

std::string quote_identifier(std::string_view name) {
    bool plain = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
    for (char ch : name) {
        const auto u = static_cast<unsigned char>(ch);
        if (!(std::isalnum(u) || ch == '_') || u >= 0x80) plain = false;
    }
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (plain && !reserved_words().count(lower)) return std::string(name);
    std::string out = "\"";
    for (char ch : name) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string quote_literal(const Value& v) {
    if (v.is_decimal()) return format_number(v.decimal());
    std::string out = "'";
    for (char ch : v.text()) {
        if (ch == '\'') out += '\'';
        out += ch;
    }
    return out + "'";
}

std::string predicate_sql(const Predicate& pred, const std::function<std::string(const std::string&)>& column_of) {
    switch (pred.kind) {
    case Predicate::Kind::True:
        return "1 = 1";
    case Predicate::Kind::False:
        return "1 = 0";
    case Predicate::Kind::Compare: {
        const std::string op = pred.op == CompareOp::Ne ? "<>" : std::string(to_string(pred.op));
        return column_of(pred.attribute) + " " + op + " " + quote_literal(pred.literal);
    }
    case Predicate::Kind::And:
    case Predicate::Kind::Or: {
        std::vector<std::string> parts;
        for (const auto& child : pred.children) {
            const bool group = child.kind == Predicate::Kind::And || child.kind == Predicate::Kind::Or;
            parts.push_back(group ? "(" + predicate_sql(child, column_of) + ")" : predicate_sql(child, column_of));
        }
        return join(parts, pred.kind == Predicate::Kind::And ? " AND " : " OR ");
    }
    case Predicate::Kind::Not:
        return "NOT (" + predicate_sql(pred.children.front(), column_of) + ")";
    }
    return {};
}

std::string level_column_name(const Dimension& d, const AxisSpec& axis, const std::string& level) {
    if (const BlendParameter* b = axis.find_blend(level)) return quote_identifier(fold_identifier(b->name));
    return stored_column(d, level);
}

SqlArtifact generate_star_ddl(const Constellation& c) {
    SqlArtifact out;
    out.kind = SqlKind::Ddl;
    for (const auto& d : c.dimensions) {
        std::vector<std::string> cols;
        for (std::size_t a = 0; a + 1 < d.attributes.size(); ++a) {
            const auto& attr = d.attributes[a];
            std::string col = "  " + quote_identifier(attr.column) + " ";
            if (a == 0) {
                col += "VARCHAR(64) PRIMARY KEY";
            } else {
                col += attr.type == ValueType::Decimal ? "DECIMAL(18,4) NOT NULL" : "VARCHAR(255) NOT NULL";
            }
            cols.push_back(col);
        }
        out.statements.push_back("CREATE TABLE " + quote_identifier(d.table) + " (\n" + join(cols, ",\n") + "\n);");
    }
    for (const auto& f : c.facts) {
        std::vector<std::string> cols = {"  " + quote_identifier(f.key_column()) + " VARCHAR(64) PRIMARY KEY"};
        for (const auto& l : f.links) {
            const Dimension& d = c.dimension(l.dimension);
            cols.push_back("  " + quote_identifier(l.foreign_key) + " VARCHAR(64) NOT NULL REFERENCES " +
                           quote_identifier(d.table) + " (" + quote_identifier(d.attributes[0].column) + ")");
        }
        for (const auto& m : f.measures) cols.push_back("  " + quote_identifier(m.column) + " DECIMAL(18,4) NOT NULL");
        out.statements.push_back("CREATE TABLE " + quote_identifier(f.table) + " (\n" + join(cols, ",\n") + "\n);");
    }
    return out;
}

SqlArtifact generate_tm_query(const MTable& t, const Constellation& c) {
    if (!t.lines.blends.empty() || !t.columns.blends.empty()) {
        throw OperatorError("table has blend levels; use the blend query");
    }
    const Fact& fact = subject_fact(t, c);
    const std::string ft = quote_identifier(fact.table);

    std::vector<std::string> select;
    for (const auto& m : measure_columns(t, fact)) {
        select.push_back(m.function + "(" + ft + "." + quote_identifier(m.column) + ") AS " + quote_identifier(m.alias));
    }
    std::vector<std::string> group;
    std::vector<std::string> joined;
    auto join_dimension = [&](const std::string& name) {
        if (std::find(joined.begin(), joined.end(), name) == joined.end()) joined.push_back(name);
    };
    auto qualified = [&](const Dimension& d, const std::string& attribute) {
        if (attribute == kAllAttribute) return stored_column(d, attribute);
        return quote_identifier(d.table) + "." + stored_column(d, attribute);
    };
    for (const auto* axis : {&t.columns, &t.lines}) {
        const Dimension& d = c.dimension(axis->dimension);
        join_dimension(d.name);
        for (const auto& level : axis->displayed) {
            if (level == kAllAttribute) continue;
            select.push_back(qualified(d, level));
            group.push_back(qualified(d, level));
        }
    }
    std::vector<std::string> where;
    for (const auto& [dim, pred] : t.restriction) {
        if (pred.is_true()) continue;
        const Dimension& d = c.dimension(dim);
        join_dimension(d.name);
        where.push_back(predicate_sql(pred, [&](const std::string& a) { return qualified(d, a); }));
    }

    std::string sql = "SELECT " + join(select, ", ") + "\nFROM " + ft;
    for (const auto& name : joined) {
        const Dimension& d = c.dimension(name);
        auto link = fact.find_link(name);
        if (!link) throw OperatorError("dimension '" + name + "' is not linked to fact '" + fact.name + "'");
        const std::string dt = quote_identifier(d.table);
        sql += "\nJOIN " + dt + " ON " + ft + "." + quote_identifier(fact.links[*link].foreign_key) + " = " + dt + "." +
               quote_identifier(d.attributes[0].column);
    }
    if (!where.empty()) {
        if (where.size() > 1) {
            for (auto& w : where) w = "(" + w + ")";
        }
        sql += "\nWHERE " + join(where, " AND ");
    }
    if (!group.empty()) sql += "\nGROUP BY " + join(group, ", ");
    return {SqlKind::TmQuery, {sql + ";"}};
}

SqlArtifact generate_blend_query(const MTable& t, const Constellation& c, const SqlSource& source) {
    const auto blends = blends_in_order(t);
    if (blends.empty()) throw OperatorError("table has no blend level");
    const Fact& fact = subject_fact(t, c);
    const Dimension& line_dim = c.dimension(t.lines.dimension);
    const Dimension& col_dim = c.dimension(t.columns.dimension);
    const auto measures = measure_columns(t, fact);

    // Fact-grain columns: measures, then every stored attribute of both axis dimensions.
    std::vector<std::string> columns;
    std::set<std::string> seen;
    auto add_column = [&](const std::string& name) {
        if (!seen.insert(name).second) {
            throw OperatorError("column '" + name + "' occurs twice in the blend relation; rename it in the schema");
        }
        columns.push_back(quote_identifier(name));
    };
    std::set<std::string> measure_cols;
    for (const auto& m : measures) {
        if (measure_cols.insert(m.column).second) add_column(m.column);
    }
    for (const Dimension* d : {&col_dim, &line_dim}) {
        for (std::size_t a = 0; a + 1 < d->attributes.size(); ++a) add_column(d->attributes[a].column);
    }

    std::vector<std::string> ctes;
    std::string from;
    if (source.relation.empty()) {
        const std::string ft = quote_identifier(fact.table);
        std::vector<std::string> select;
        for (const auto& m : measure_cols) select.push_back(ft + "." + quote_identifier(m));
        std::vector<std::string> joined;
        for (const Dimension* d : {&col_dim, &line_dim}) {
            joined.push_back(d->name);
            for (std::size_t a = 0; a + 1 < d->attributes.size(); ++a) {
                select.push_back(quote_identifier(d->table) + "." + quote_identifier(d->attributes[a].column));
            }
        }
        std::vector<std::string> where;
        for (const auto& [dim, pred] : t.restriction) {
            if (pred.is_true() || t.has_axis(dim)) continue;
            const Dimension& d = c.dimension(dim);
            joined.push_back(d.name);
            where.push_back(predicate_sql(pred, [&](const std::string& a) {
                return a == kAllAttribute ? stored_column(d, a) : quote_identifier(d.table) + "." + stored_column(d, a);
            }));
        }
        std::string base = "SELECT " + join(select, ", ") + "\nFROM " + ft;
        for (const auto& name : joined) {
            const Dimension& d = c.dimension(name);
            auto link = fact.find_link(name);
            if (!link) throw OperatorError("dimension '" + name + "' is not linked to fact '" + fact.name + "'");
            const std::string dt = quote_identifier(d.table);
            base += "\nJOIN " + dt + " ON " + ft + "." + quote_identifier(fact.links[*link].foreign_key) + " = " + dt +
                    "." + quote_identifier(d.attributes[0].column);
        }
        if (!where.empty()) {
            if (where.size() > 1) {
                for (auto& w : where) w = "(" + w + ")";
            }
            base += "\nWHERE " + join(where, " AND ");
        }
        ctes.push_back("base AS (\n" + indent(base, 2) + "\n)");
        from = "base";
    } else {
        from = quote_identifier(source.relation);
    }

    // Column expression of a level or attribute name within the current stage.
    auto column_of = [&](const Dimension& d, const AxisSpec& axis, const std::string& name) {
        return level_column_name(d, axis, name);
    };

    std::size_t stage = 0;
    for (const BlendParameter* b : blends) {
        const AxisSpec& axis = std::find_if(t.lines.blends.begin(), t.lines.blends.end(),
                                            [&](const auto& p) { return p.get() == b; }) != t.lines.blends.end()
                                   ? t.lines
                                   : t.columns;
        const Dimension& d = c.dimension(axis.dimension);
        const std::string new_col = fold_identifier(b->name);
        const std::string cols = join(columns, ", ");
        const std::string cond = predicate_sql(b->pred, [&](const std::string& a) { return column_of(d, axis, a); });
        std::string body = "SELECT " + cols + ", " + column_of(d, axis, b->p_sup) + " AS " + quote_identifier(new_col) +
                           "\nFROM " + from + "\nWHERE " + cond + "\nUNION ALL\nSELECT " + cols + ", " +
                           column_of(d, axis, b->p_inf) + " AS " + quote_identifier(new_col) + "\nFROM " + from +
                           "\nWHERE NOT (" + cond + ")";
        add_column(new_col);
        from = "blend_" + std::to_string(++stage);
        ctes.push_back(from + " AS (\n" + indent(body, 2) + "\n)");
    }

    std::vector<std::string> select;
    for (const auto& m : measures) {
        select.push_back(m.function + "(" + quote_identifier(m.column) + ") AS " + quote_identifier(m.alias));
    }
    std::vector<std::string> group;
    for (const auto* axis : {&t.columns, &t.lines}) {
        const Dimension& d = c.dimension(axis->dimension);
        for (const auto& level : axis->displayed) {
            if (level == kAllAttribute) continue;
            const std::string col = column_of(d, *axis, level);
            select.push_back(col);
            group.push_back(col);
        }
    }
    std::vector<std::string> where;
    for (const auto* axis : {&t.columns, &t.lines}) {
        auto r = t.restriction.find(axis->dimension);
        if (r == t.restriction.end() || r->second.is_true()) continue;
        const Dimension& d = c.dimension(axis->dimension);
        where.push_back(predicate_sql(r->second, [&](const std::string& a) { return column_of(d, *axis, a); }));
    }
    std::string sql = "WITH " + join(ctes, ",\n") + "\nSELECT " + join(select, ", ") + "\nFROM " + from;
    if (!where.empty()) {
        if (where.size() > 1) {
            for (auto& w : where) w = "(" + w + ")";
        }
        sql += "\nWHERE " + join(where, " AND ");
    }
    if (!group.empty()) sql += "\nGROUP BY " + join(group, ", ");
    return {SqlKind::BlendQuery, {sql + ";"}};
}

SqlArtifact generate_query(const MTable& t, const Constellation& c, const SqlSource& source) {
    if (t.lines.blends.empty() && t.columns.blends.empty()) return generate_tm_query(t, c);
    return generate_blend_query(t, c, source);
}

}  // namespace blendcube
