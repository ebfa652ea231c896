#include "blendcube/session.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "blendcube/errors.hpp"
#include "blendcube/sqlgen.hpp"

namespace blendcube {

namespace {

std::string list_values(const std::vector<std::string>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", '" : "'") + values[i] + "'";
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw IoError("cannot write '" + path.string() + "'");
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace

Session::Session(std::ostream& out, std::ostream& err, std::filesystem::path base_dir)
    : out_(out), err_(err), base_dir_(std::move(base_dir)) {}

std::filesystem::path Session::resolve(const std::string& path) const {
    std::filesystem::path p(path);
    if (p.is_relative() && !base_dir_.empty()) return base_dir_ / p;
    return p;
}

const Constellation& Session::constellation() {
    if (!constellation_) {
        if (!loader_) throw OperatorError("no data loaded; use LOAD DATASET or LOAD SCHEMA first");
        constellation_ = loader_->seal();
        loader_.reset();
    }
    return *constellation_;
}

Grid Session::grid() {
    if (history_.empty()) throw OperatorError("no table yet; start with DISPLAY");
    return evaluate(history_.back(), constellation());
}

void Session::run(const Command& c) {
    switch (c.verb) {
    case Verb::Nop:
        return;
    case Verb::Load:
        if (constellation_) throw OperatorError("data is already sealed; LOAD must precede every other command");
        switch (c.load) {
        case LoadKind::Dataset:
            if (loader_) throw OperatorError("a schema is already being loaded");
            constellation_ = c.path == "sample" ? sample_constellation() : load_dataset(resolve(c.path));
            return;
        case LoadKind::Schema:
            if (loader_) throw OperatorError("a schema is already loaded");
            loader_.emplace(load_schema(resolve(c.path)));
            return;
        case LoadKind::Data:
            if (!loader_) throw OperatorError("LOAD SCHEMA must come before LOAD DATA");
            loader_->load_csv(c.table, resolve(c.path));
            return;
        }
        return;
    case Verb::Show:
        out_ << render_text(grid());
        return;
    case Verb::Sql:
        if (history_.empty()) throw OperatorError("no table yet; start with DISPLAY");
        out_ << generate_query(history_.back(), constellation()).text();
        return;
    case Verb::Undo:
        if (history_.empty()) throw OperatorError("nothing to undo");
        history_.pop_back();
        return;
    case Verb::Save:
        write_text(resolve(c.path), grid_to_csv(grid()));
        return;
    case Verb::Quit:
        quit_ = true;
        return;
    default: {
        const Constellation& cons = constellation();
        history_.push_back(apply_operation(c, table(), cons));
        return;
    }
    }
}

ExitStatus Session::execute(const Command& c) {
    const std::string prefix = line_ ? "error: line " + std::to_string(line_) + ": " : "error: ";
    try {
        run(c);
        return kExitOk;
    } catch (const ConstraintViolation& e) {
        err_ << prefix << e.what() << "\n  offending values: " << list_values(e.offending_values()) << "\n";
    } catch (const ValidationError& e) {
        err_ << prefix << e.what() << "\n";
        for (const auto& p : e.problems()) err_ << "  " << p << "\n";
        return kExitIoError;
    } catch (const IoError& e) {
        err_ << prefix << e.what() << "\n";
        return kExitIoError;
    } catch (const std::filesystem::filesystem_error& e) {
        err_ << prefix << e.what() << "\n";
        return kExitIoError;
    } catch (const Error& e) {
        err_ << prefix << e.what() << "\n";
    }
    return kExitCommandError;
}

ExitStatus Session::execute_line(std::string_view line) {
    ++line_;
    Command c;
    try {
        c = parse_command(line);
    } catch (const ParseError& e) {
        err_ << "error: line " << line_ << ", column " << e.column() << ": " << e.detail() << "\n";
        return kExitCommandError;
    }
    return execute(c);
}

int run_session(std::istream& in, std::ostream& out, std::ostream& err, const RunOptions& options) {
    Session session(out, err, options.base_dir);
    int status = kExitOk;
    std::string line;
    while (!session.quit()) {
        if (options.prompt) err << "blendcube> " << std::flush;
        if (!std::getline(in, line)) break;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        status = std::max<int>(status, session.execute_line(line));
    }
    if (options.emit_sql.empty() && options.golden.empty()) return status;
    if (!session.table()) {
        err << "error: no table to export\n";
        return std::max<int>(status, kExitCommandError);
    }
    try {
        if (!options.emit_sql.empty()) {
            write_text(options.emit_sql, generate_query(*session.table(), session.constellation()).text());
        }
        if (!options.golden.empty()) {
            const auto expected = split_lines(read_text(options.golden));
            const auto actual = split_lines(grid_to_csv(session.grid()));
            if (expected != actual) {
                err << "golden mismatch against " << options.golden.string() << "\n";
                for (std::size_t i = 0; i < std::max(expected.size(), actual.size()); ++i) {
                    const std::string e = i < expected.size() ? expected[i] : "<missing>";
                    const std::string a = i < actual.size() ? actual[i] : "<missing>";
                    if (e != a) err << "  line " << i + 1 << ": expected '" << e << "', got '" << a << "'\n";
                }
                status = std::max<int>(status, kExitCommandError);
            }
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return std::max<int>(status, kExitCommandError);
    }
    return status;
}

}  // namespace blendcube
