#pragma once

#include <string>
#include <vector>

#include "blendcube/model.hpp"
#include "blendcube/mtable.hpp"

namespace blendcube {

enum class SqlKind { Ddl, TmQuery, BlendQuery };

std::string_view to_string(SqlKind kind);

struct SqlArtifact {
    SqlKind kind = SqlKind::TmQuery;
    std::vector<std::string> statements;  // each ';'-terminated

    // Statements joined by blank lines.
    std::string text() const;
};

// Where blend chains read their fact-grain rows from. An empty relation means the star join
// itself; otherwise a stored relation holding the same columns (e.g. "T2").
struct SqlSource {
    std::string relation;
};

// One CREATE TABLE per dimension and fact.
SqlArtifact generate_star_ddl(const Constellation& c);

// Plain table: SELECT f(m), displayed params FROM fact JOIN dims WHERE restriction GROUP BY.
// Throws OperatorError for a table carrying blend levels.
SqlArtifact generate_tm_query(const MTable& t, const Constellation& c);

// Blended table: one UNION ALL stage per blend (in creation order, lines axis first), each
// reading the previous stage, then the outer GROUP BY over the displayed params.
SqlArtifact generate_blend_query(const MTable& t, const Constellation& c, const SqlSource& source = {});

// Dispatches on whether t has blend levels.
SqlArtifact generate_query(const MTable& t, const Constellation& c, const SqlSource& source = {});

// SQL form of a predicate, attributes mapped through column_of.
std::string predicate_sql(const Predicate& pred, const std::function<std::string(const std::string&)>& column_of);

std::string quote_identifier(std::string_view name);
std::string quote_literal(const Value& v);

// Output column name of a displayed level.
std::string level_column_name(const Dimension& d, const AxisSpec& axis, const std::string& level);

}  // namespace blendcube
