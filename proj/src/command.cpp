#include "blendcube/command.hpp"

#include <cctype>

#include "blendcube/errors.hpp"

namespace blendcube {

namespace {

bool is_name_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x80) return true;
    return std::isalnum(u) || c == '_' || c == '-' || c == '#' || c == '.' || c == '$';
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(a[i])) != std::toupper(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

constexpr std::string_view kKeywords[] = {"LINES", "COLUMNS", "WHERE", "SCHEMA", "DATA", "DATASET"};

class CommandParser {
public:
    explicit CommandParser(std::string_view text) : text_(text) {}

    Command parse() {
        skip_ws();
        if (at_end() || text_.substr(pos_, 1) == "#" || text_.substr(pos_, 2) == "--") return {};
        const std::size_t verb_at = pos_;
        const std::string verb = bare_word();
        if (verb.empty()) fail("expected a command");
        Command c;
        if (iequals(verb, "LOAD")) {
            c.verb = Verb::Load;
            const std::size_t kind_at = pos_;
            const std::string kind = bare_word();
            if (iequals(kind, "SCHEMA")) {
                c.load = LoadKind::Schema;
                c.path = path("schema path");
            } else if (iequals(kind, "DATA")) {
                c.load = LoadKind::Data;
                c.table = name("table name");
                c.path = path("CSV path");
            } else if (iequals(kind, "DATASET")) {
                c.load = LoadKind::Dataset;
                c.path = path("dataset directory");
            } else {
                fail_at(kind_at, "expected SCHEMA, DATA or DATASET");
            }
        } else if (iequals(verb, "DISPLAY")) {
            c.verb = Verb::Display;
            c.fact = name("fact name");
            do {
                c.measures.push_back(measure());
            } while (accept(','));
            keyword("LINES");
            c.lines.dimension = name("dimension name");
            if (!peek_keyword("COLUMNS")) c.lines.hierarchy = name("hierarchy name");
            keyword("COLUMNS");
            c.columns.dimension = name("dimension name");
            if (!done()) c.columns.hierarchy = name("hierarchy name");
        } else if (iequals(verb, "DRILLDOWN") || iequals(verb, "ROLLUP")) {
            c.verb = iequals(verb, "ROLLUP") ? Verb::Rollup : Verb::Drilldown;
            c.dimension = name("dimension name");
            c.param = name("parameter name");
        } else if (iequals(verb, "ROTATE")) {
            c.verb = Verb::Rotate;
            c.dimension = name("dimension name");
            c.param = name("dimension name");
            if (!done()) c.hierarchy = name("hierarchy name");
        } else if (iequals(verb, "BLEND")) {
            c.verb = Verb::Blend;
            c.blend.dimension = name("dimension name");
            c.blend.p_sup = name("upper parameter");
            c.blend.s_sup = stamp();
            c.blend.p_inf = name("lower parameter");
            c.blend.s_inf = stamp();
            keyword("WHERE");
            c.blend.pred = rest_predicate();
        } else if (iequals(verb, "RESTRICT")) {
            c.verb = Verb::Restrict;
            c.dimension = name("dimension name");
            keyword("WHERE");
            c.pred = rest_predicate();
        } else if (iequals(verb, "SHOW")) {
            c.verb = Verb::Show;
        } else if (iequals(verb, "SQL")) {
            c.verb = Verb::Sql;
        } else if (iequals(verb, "UNDO")) {
            c.verb = Verb::Undo;
        } else if (iequals(verb, "SAVE")) {
            c.verb = Verb::Save;
            c.path = path("output path");
        } else if (iequals(verb, "QUIT") || iequals(verb, "EXIT")) {
            c.verb = Verb::Quit;
        } else {
            fail_at(verb_at, "unknown command '" + verb + "'");
        }
        if (!done()) fail("unexpected '" + std::string(text_.substr(pos_)) + "'");
        return c;
    }

private:
    [[noreturn]] void fail(const std::string& message) const { fail_at(pos_, message); }
    [[noreturn]] void fail_at(std::size_t at, const std::string& message) const { throw ParseError(at + 1, message); }

    bool at_end() const { return pos_ >= text_.size(); }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool done() {
        skip_ws();
        if (!at_end() && text_[pos_] == ';') {
            std::size_t p = pos_ + 1;
            while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) ++p;
            if (p == text_.size()) pos_ = p;
        }
        return at_end();
    }

    bool accept(char ch) {
        skip_ws();
        if (!at_end() && text_[pos_] == ch) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char ch) {
        if (!accept(ch)) fail(std::string("expected '") + ch + "'");
    }

    std::string bare_word() {
        skip_ws();
        const std::size_t start = pos_;
        while (!at_end() && is_name_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    bool peek_keyword(std::string_view kw) {
        const std::size_t saved = pos_;
        const bool match = iequals(bare_word(), kw);
        pos_ = saved;
        return match;
    }

    void keyword(std::string_view kw) {
        skip_ws();
        const std::size_t at = pos_;
        if (!iequals(bare_word(), kw)) fail_at(at, "expected " + std::string(kw));
    }

    std::string quoted() {
        std::string out;
        const std::size_t start = pos_;
        ++pos_;
        while (true) {
            if (at_end()) fail_at(start, "unterminated quoted name");
            if (text_[pos_] == '"') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
                    out += '"';
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                return out;
            }
            out += text_[pos_++];
        }
    }

    std::string name(const char* what) {
        skip_ws();
        if (!at_end() && text_[pos_] == '"') {
            std::string n = quoted();
            if (n.empty()) fail(std::string("empty ") + what);
            return n;
        }
        std::string n = bare_word();
        if (n.empty()) fail(std::string("expected ") + what);
        return n;
    }

    std::string path(const char* what) {
        skip_ws();
        if (!at_end() && text_[pos_] == '"') return quoted();
        const std::size_t start = pos_;
        while (!at_end() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail(std::string("expected ") + what);
        return std::string(text_.substr(start, pos_ - start));
    }

    MeasureRef measure() {
        skip_ws();
        const std::size_t at = pos_;
        const std::string function = bare_word();
        auto f = parse_aggregation(function);
        if (!f) fail_at(at, function.empty() ? "expected an aggregate such as SUM(...)" : "unknown aggregate '" + function + "'");
        expect('(');
        MeasureRef m{*f, name("measure name")};
        expect(')');
        return m;
    }

    Stamp stamp() {
        expect('(');
        skip_ws();
        const std::size_t at = pos_;
        Stamp s;
        if (!at_end() && text_[pos_] == '+') {
            s = Stamp::Keep;
            ++pos_;
        } else if (!at_end() && text_[pos_] == '-') {
            s = Stamp::Drop;
            ++pos_;
        } else if (text_.substr(pos_, 3) == "\xE2\x88\x92") {  // U+2212 minus sign
            s = Stamp::Drop;
            pos_ += 3;
        } else {
            fail_at(at, "malformed stamp: expected '+' or '-'");
        }
        skip_ws();
        if (at_end() || text_[pos_] != ')') fail_at(pos_, "malformed stamp: expected ')'");
        ++pos_;
        return s;
    }

    Predicate rest_predicate() {
        skip_ws();
        std::string_view rest = text_.substr(pos_);
        while (!rest.empty() && (std::isspace(static_cast<unsigned char>(rest.back())) || rest.back() == ';')) {
            rest.remove_suffix(1);
        }
        Predicate p = parse_predicate(rest, pos_);
        pos_ = text_.size();
        return p;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::string render_name(const std::string& n) {
    bool plain = !n.empty();
    for (char ch : n) plain = plain && is_name_char(ch);
    for (auto kw : kKeywords) plain = plain && !iequals(n, kw);
    if (plain) return n;
    std::string out = "\"";
    for (char ch : n) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string render_path(const std::string& p) {
    bool plain = !p.empty() && p.front() != '"';
    for (char ch : p) plain = plain && !std::isspace(static_cast<unsigned char>(ch));
    if (plain) return p;
    std::string out = "\"";
    for (char ch : p) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

Command parse_command(std::string_view line) {
    return CommandParser(line).parse();
}

std::string_view verb_name(Verb v) {
    switch (v) {
    case Verb::Nop: return "";
    case Verb::Load: return "LOAD";
    case Verb::Display: return "DISPLAY";
    case Verb::Drilldown: return "DRILLDOWN";
    case Verb::Rollup: return "ROLLUP";
    case Verb::Rotate: return "ROTATE";
    case Verb::Blend: return "BLEND";
    case Verb::Restrict: return "RESTRICT";
    case Verb::Show: return "SHOW";
    case Verb::Sql: return "SQL";
    case Verb::Undo: return "UNDO";
    case Verb::Save: return "SAVE";
    case Verb::Quit: return "QUIT";
    }
    return "";
}

bool is_table_operation(Verb v) {
    switch (v) {
    case Verb::Display:
    case Verb::Drilldown:
    case Verb::Rollup:
    case Verb::Rotate:
    case Verb::Blend:
    case Verb::Restrict:
        return true;
    default:
        return false;
    }
}

std::string render_command(const Command& c) {
    std::string out(verb_name(c.verb));
    switch (c.verb) {
    case Verb::Load:
        switch (c.load) {
        case LoadKind::Schema: out += " SCHEMA " + render_path(c.path); break;
        case LoadKind::Data: out += " DATA " + render_name(c.table) + " " + render_path(c.path); break;
        case LoadKind::Dataset: out += " DATASET " + render_path(c.path); break;
        }
        break;
    case Verb::Display:
        out += " " + render_name(c.fact);
        for (std::size_t i = 0; i < c.measures.size(); ++i) {
            out += (i ? ", " : " ") + std::string(to_string(c.measures[i].function)) + "(" +
                   render_name(c.measures[i].measure) + ")";
        }
        out += " LINES " + render_name(c.lines.dimension);
        if (!c.lines.hierarchy.empty()) out += " " + render_name(c.lines.hierarchy);
        out += " COLUMNS " + render_name(c.columns.dimension);
        if (!c.columns.hierarchy.empty()) out += " " + render_name(c.columns.hierarchy);
        break;
    case Verb::Drilldown:
    case Verb::Rollup:
        out += " " + render_name(c.dimension) + " " + render_name(c.param);
        break;
    case Verb::Rotate:
        out += " " + render_name(c.dimension) + " " + render_name(c.param);
        if (!c.hierarchy.empty()) out += " " + render_name(c.hierarchy);
        break;
    case Verb::Blend:
        out += " " + render_name(c.blend.dimension) + " " + render_name(c.blend.p_sup) + "(" +
               stamp_char(c.blend.s_sup) + ") " + render_name(c.blend.p_inf) + "(" + stamp_char(c.blend.s_inf) +
               ") WHERE " + to_string(c.blend.pred);
        break;
    case Verb::Restrict:
        out += " " + render_name(c.dimension) + " WHERE " + to_string(c.pred);
        break;
    case Verb::Save:
        out += " " + render_path(c.path);
        break;
    default:
        break;
    }
    return out;
}

MTable apply_operation(const Command& c, const MTable* current, const Constellation& constellation) {
    if (c.verb == Verb::Display) {
        return display(constellation, c.fact, c.measures, c.lines, c.columns);
    }
    if (!is_table_operation(c.verb)) throw OperatorError(std::string(verb_name(c.verb)) + " does not change the table");
    if (!current) throw OperatorError("no table yet; start with DISPLAY");
    switch (c.verb) {
    case Verb::Drilldown: return drilldown(*current, constellation, c.dimension, c.param);
    case Verb::Rollup: return rollup(*current, constellation, c.dimension, c.param);
    case Verb::Rotate: return rotate(*current, constellation, c.dimension, c.param, c.hierarchy);
    case Verb::Blend: return blend(*current, c.blend, constellation);
    case Verb::Restrict: return restrict_table(*current, constellation, c.dimension, c.pred);
    default: break;
    }
    throw OperatorError("unsupported operation");
}

}  // namespace blendcube
