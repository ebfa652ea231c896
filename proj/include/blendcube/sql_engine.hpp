#pragma once

#include <memory>
#include <string>
#include <vector>

#include "blendcube/model.hpp"
#include "blendcube/mtable.hpp"
#include "blendcube/value.hpp"

struct sqlite3;

namespace blendcube {

// Thin SQLite connection used to cross-check generated SQL.
// url: "sqlite::memory:" or "sqlite:<path>".
class SqlEngine {
public:
    explicit SqlEngine(const std::string& url);
    ~SqlEngine();
    SqlEngine(const SqlEngine&) = delete;
    SqlEngine& operator=(const SqlEngine&) = delete;

    void execute(const std::string& sql);
    // Integer and real columns come back as decimals, everything else as text.
    std::vector<std::vector<Value>> query(const std::string& sql);

    // Creates the star tables and inserts every instance.
    void load(const Constellation& c);

private:
    sqlite3* db_ = nullptr;
};

// Runs a grouped query whose first |measures| columns are aggregates followed by the column
// axis levels and then the line axis levels, and arranges the rows as a grid shaped like g.
// Throws Error when a returned header tuple is not in g.
Grid grid_from_rows(const Grid& shape, const std::vector<std::vector<Value>>& rows);

}  // namespace blendcube
