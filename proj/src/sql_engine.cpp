#include "blendcube/sql_engine.hpp"

#include <sqlite3.h>

#include "blendcube/errors.hpp"
#include "blendcube/sqlgen.hpp"

namespace blendcube {

namespace {

class Statement {
public:
    Statement(sqlite3* db, const std::string& sql) {
        if (sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK) {
            throw Error(std::string("sqlite: ") + sqlite3_errmsg(db));
        }
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    sqlite3_stmt* get() const { return stmt_; }

private:
    sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace

SqlEngine::SqlEngine(const std::string& url) {
    constexpr std::string_view prefix = "sqlite:";
    if (url.rfind(prefix, 0) != 0) throw Error("unsupported database url '" + url + "' (expected sqlite:<path>)");
    const std::string path = url.substr(prefix.size());
    if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
        std::string message = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        throw IoError("cannot open database '" + path + "': " + message);
    }
}

SqlEngine::~SqlEngine() {
    sqlite3_close(db_);
}

void SqlEngine::execute(const std::string& sql) {
    char* error = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &error) != SQLITE_OK) {
        std::string message = error ? error : "unknown error";
        sqlite3_free(error);
        throw Error("sqlite: " + message);
    }
}

std::vector<std::vector<Value>> SqlEngine::query(const std::string& sql) {
    Statement stmt(db_, sql);
    std::vector<std::vector<Value>> rows;
    const int n = sqlite3_column_count(stmt.get());
    int rc;
    while ((rc = sqlite3_step(stmt.get())) == SQLITE_ROW) {
        std::vector<Value> row;
        row.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            switch (sqlite3_column_type(stmt.get(), i)) {
            case SQLITE_INTEGER:
            case SQLITE_FLOAT:
                row.emplace_back(sqlite3_column_double(stmt.get(), i));
                break;
            default: {
                const auto* text = sqlite3_column_text(stmt.get(), i);
                row.emplace_back(text ? std::string(reinterpret_cast<const char*>(text)) : std::string());
            }
            }
        }
        rows.push_back(std::move(row));
    }
    if (rc != SQLITE_DONE) throw Error(std::string("sqlite: ") + sqlite3_errmsg(db_));
    return rows;
}

void SqlEngine::load(const Constellation& c) {
    for (const auto& statement : generate_star_ddl(c).statements) execute(statement);
    execute("BEGIN");
    auto insert = [&](const std::string& table, std::size_t arity, auto&& bind_rows) {
        std::string sql = "INSERT INTO " + quote_identifier(table) + " VALUES (";
        for (std::size_t i = 0; i < arity; ++i) sql += i ? ", ?" : "?";
        Statement stmt(db_, sql + ")");
        bind_rows(stmt.get());
    };
    auto step = [&](sqlite3_stmt* s) {
        if (sqlite3_step(s) != SQLITE_DONE) throw Error(std::string("sqlite: ") + sqlite3_errmsg(db_));
        sqlite3_reset(s);
    };
    for (const auto& d : c.dimensions) {
        insert(d.table, d.attributes.size() - 1, [&](sqlite3_stmt* s) {
            for (const auto& row : d.instances) {
                for (std::size_t a = 0; a + 1 < d.attributes.size(); ++a) {
                    const int slot = static_cast<int>(a) + 1;
                    if (row[a].is_decimal()) {
                        sqlite3_bind_double(s, slot, row[a].decimal());
                    } else {
                        sqlite3_bind_text(s, slot, row[a].text().c_str(), -1, SQLITE_TRANSIENT);
                    }
                }
                step(s);
            }
        });
    }
    for (const auto& f : c.facts) {
        insert(f.table, 1 + f.links.size() + f.measures.size(), [&](sqlite3_stmt* s) {
            for (const auto& inst : f.instances) {
                int slot = 1;
                sqlite3_bind_text(s, slot++, inst.id.c_str(), -1, SQLITE_TRANSIENT);
                for (const auto& r : inst.refs) sqlite3_bind_text(s, slot++, r.c_str(), -1, SQLITE_TRANSIENT);
                for (double m : inst.measures) sqlite3_bind_double(s, slot++, m);
                step(s);
            }
        });
    }
    execute("COMMIT");
}

Grid grid_from_rows(const Grid& shape, const std::vector<std::vector<Value>>& rows) {
    Grid g = shape;
    for (auto& cell : g.cells) cell.reset();
    const std::size_t nm = g.measures.size();
    const std::size_t nc = g.column_levels.size();
    const std::size_t nl = g.line_levels.size();
    for (const auto& row : rows) {
        if (row.size() != nm + nc + nl) throw Error("query returned " + std::to_string(row.size()) + " columns");
        std::vector<Value> col(row.begin() + static_cast<std::ptrdiff_t>(nm),
                               row.begin() + static_cast<std::ptrdiff_t>(nm + nc));
        std::vector<Value> line(row.begin() + static_cast<std::ptrdiff_t>(nm + nc), row.end());
        auto r = g.find_row(line);
        auto k = g.find_column(col);
        if (!r || !k) throw Error("query returned a header tuple absent from the grid");
        for (std::size_t m = 0; m < nm; ++m) {
            if (!row[m].is_decimal()) throw Error("query returned a non-numeric aggregate");
            g.cells[(*r * g.cols() + *k) * nm + m] = row[m].decimal();
        }
    }
    return g;
}

}  // namespace blendcube
