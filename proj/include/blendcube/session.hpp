#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blendcube/command.hpp"
#include "blendcube/ingest.hpp"

namespace blendcube {

enum ExitStatus { kExitOk = 0, kExitCommandError = 1, kExitIoError = 2 };

// Holds the loaded constellation, the current table and its history for one CLI run.
class Session {
public:
    Session(std::ostream& out, std::ostream& err, std::filesystem::path base_dir = {});

    // Runs one command; errors are reported on err and leave the state unchanged.
    ExitStatus execute(const Command& c);
    ExitStatus execute_line(std::string_view line);

    bool quit() const { return quit_; }
    const MTable* table() const { return history_.empty() ? nullptr : &history_.back(); }
    // Seals pending loads if needed; throws when nothing was loaded.
    const Constellation& constellation();
    Grid grid();

private:
    std::filesystem::path resolve(const std::string& path) const;
    void run(const Command& c);

    std::ostream& out_;
    std::ostream& err_;
    std::filesystem::path base_dir_;
    std::optional<Loader> loader_;
    std::shared_ptr<const Constellation> constellation_;
    std::vector<MTable> history_;
    std::size_t line_ = 0;
    bool quit_ = false;
};

struct RunOptions {
    std::filesystem::path base_dir;   // relative LOAD/SAVE paths
    std::filesystem::path emit_sql;   // SQL of the final table
    std::filesystem::path golden;     // CSV the final grid must equal
    bool prompt = false;              // interactive prompt on err
};

// Reads commands until QUIT or end of input. Returns the worst status seen.
int run_session(std::istream& in, std::ostream& out, std::ostream& err, const RunOptions& options = {});

}  // namespace blendcube
