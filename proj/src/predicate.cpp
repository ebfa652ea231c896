#include "blendcube/predicate.hpp"

#include <cctype>

#include "blendcube/errors.hpp"

namespace blendcube {

std::string_view to_string(CompareOp op) {
    switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
    }
    return "?";
}

Predicate Predicate::never() {
    Predicate p;
    p.kind = Kind::False;
    return p;
}

Predicate Predicate::compare(std::string attribute, CompareOp op, Value literal) {
    Predicate p;
    p.kind = Kind::Compare;
    p.attribute = std::move(attribute);
    p.op = op;
    p.literal = std::move(literal);
    return p;
}

Predicate Predicate::conj(Predicate a, Predicate b) {
    Predicate p;
    p.kind = Kind::And;
    p.children = {std::move(a), std::move(b)};
    return p;
}

Predicate Predicate::disj(Predicate a, Predicate b) {
    Predicate p;
    p.kind = Kind::Or;
    p.children = {std::move(a), std::move(b)};
    return p;
}

Predicate Predicate::negate(Predicate inner) {
    Predicate p;
    p.kind = Kind::Not;
    p.children = {std::move(inner)};
    return p;
}

namespace {

bool is_ident_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x80) return true;  // UTF-8 (Densité)
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

class PredicateParser {
public:
    PredicateParser(std::string_view text, std::size_t offset) : text_(text), offset_(offset) {}

    Predicate parse() {
        skip_ws();
        if (pos_ >= text_.size()) {
            fail("empty predicate");
        }
        Predicate p = parse_or();
        skip_ws();
        if (pos_ < text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& message) const { throw ParseError(offset_ + pos_ + 1, message); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    // Case-insensitive keyword not followed by an identifier character.
    bool accept_keyword(std::string_view kw) {
        skip_ws();
        if (text_.size() - pos_ < kw.size()) return false;
        if (!iequals(text_.substr(pos_, kw.size()), kw)) return false;
        if (pos_ + kw.size() < text_.size() && is_ident_char(text_[pos_ + kw.size()])) return false;
        pos_ += kw.size();
        return true;
    }

    Predicate parse_or() {
        Predicate left = parse_and();
        while (accept_keyword("OR")) {
            Predicate right = parse_and();
            if (left.kind == Predicate::Kind::Or) {
                left.children.push_back(std::move(right));
            } else {
                left = Predicate::disj(std::move(left), std::move(right));
            }
        }
        return left;
    }

    Predicate parse_and() {
        Predicate left = parse_not();
        while (accept_keyword("AND")) {
            Predicate right = parse_not();
            if (left.kind == Predicate::Kind::And) {
                left.children.push_back(std::move(right));
            } else {
                left = Predicate::conj(std::move(left), std::move(right));
            }
        }
        return left;
    }

    Predicate parse_not() {
        if (accept_keyword("NOT")) {
            return Predicate::negate(parse_not());
        }
        return parse_primary();
    }

    Predicate parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of predicate");
        if (text_[pos_] == '(') {
            ++pos_;
            Predicate inner = parse_or();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
            ++pos_;
            return inner;
        }
        if (accept_keyword("TRUE")) return Predicate::always();
        if (accept_keyword("FALSE")) return Predicate::never();
        std::string attribute = parse_identifier();
        CompareOp op = parse_operator();
        Value literal = parse_literal();
        return Predicate::compare(std::move(attribute), op, std::move(literal));
    }

    std::string parse_identifier() {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '"') {
            const std::size_t start = ++pos_;
            while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
            if (pos_ >= text_.size()) fail("unterminated quoted identifier");
            std::string name(text_.substr(start, pos_ - start));
            ++pos_;
            if (name.empty()) fail("empty identifier");
            return name;
        }
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        if (start == pos_) fail("expected attribute name");
        const auto first = static_cast<unsigned char>(text_[start]);
        if (std::isdigit(first) || text_[start] == '-') {
            pos_ = start;
            fail("expected attribute name");
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    CompareOp parse_operator() {
        skip_ws();
        auto rest = text_.substr(pos_);
        auto take = [&](std::string_view tok, CompareOp op) -> std::optional<CompareOp> {
            if (rest.substr(0, tok.size()) == tok) {
                pos_ += tok.size();
                return op;
            }
            return std::nullopt;
        };
        for (auto [tok, op] : {std::pair{std::string_view("<>"), CompareOp::Ne},
                               std::pair{std::string_view("!="), CompareOp::Ne},
                               std::pair{std::string_view("<="), CompareOp::Le},
                               std::pair{std::string_view(">="), CompareOp::Ge},
                               std::pair{std::string_view("="), CompareOp::Eq},
                               std::pair{std::string_view("<"), CompareOp::Lt},
                               std::pair{std::string_view(">"), CompareOp::Gt}}) {
            if (auto r = take(tok, op)) return *r;
        }
        fail("expected comparison operator");
    }

    Value parse_literal() {
        skip_ws();
        if (pos_ >= text_.size()) fail("expected literal");
        if (text_[pos_] == '\'') {
            std::string out;
            ++pos_;
            while (true) {
                if (pos_ >= text_.size()) fail("unterminated string literal");
                if (text_[pos_] == '\'') {
                    if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
                        out.push_back('\'');
                        pos_ += 2;
                        continue;
                    }
                    ++pos_;
                    break;
                }
                out.push_back(text_[pos_++]);
            }
            return Value(std::move(out));
        }
        const std::size_t start = pos_;
        if (text_[pos_] == '-' || text_[pos_] == '+') ++pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        const auto token = text_.substr(start, pos_ - start);
        try {
            return Value(parse_decimal(token));
        } catch (const TypeMismatchError&) {
            pos_ = start;
            fail("expected string or numeric literal");
        }
    }

    std::string_view text_;
    std::size_t offset_;
    std::size_t pos_ = 0;
};

bool needs_quotes(const std::string& name) {
    if (name.empty()) return true;
    const auto first = static_cast<unsigned char>(name.front());
    if (std::isdigit(first) || name.front() == '-') return true;
    for (char c : name) {
        if (!is_ident_char(c)) return true;
    }
    for (std::string_view kw : {"AND", "OR", "NOT", "TRUE", "FALSE"}) {
        if (iequals(name, kw)) return true;
    }
    return false;
}

std::string literal_text(const Value& v) {
    if (v.is_decimal()) return v.str();
    std::string out = "'";
    for (char c : v.text()) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
    }
    out.push_back('\'');
    return out;
}

void render(const Predicate& p, std::string& out) {
    using K = Predicate::Kind;
    auto child = [&](const Predicate& c) {
        const bool wrap = c.kind == K::And || c.kind == K::Or;
        if (wrap) out += '(';
        render(c, out);
        if (wrap) out += ')';
    };
    switch (p.kind) {
    case K::True: out += "TRUE"; break;
    case K::False: out += "FALSE"; break;
    case K::Compare:
        out += needs_quotes(p.attribute) ? "\"" + p.attribute + "\"" : p.attribute;
        out += ' ';
        out += to_string(p.op);
        out += ' ';
        out += literal_text(p.literal);
        break;
    case K::And:
    case K::Or:
        for (std::size_t i = 0; i < p.children.size(); ++i) {
            if (i) out += p.kind == K::And ? " AND " : " OR ";
            child(p.children[i]);
        }
        break;
    case K::Not:
        out += "NOT (";
        render(p.children.front(), out);
        out += ')';
        break;
    }
}

void collect(const Predicate& p, std::set<std::string>& out) {
    if (p.kind == Predicate::Kind::Compare) out.insert(p.attribute);
    for (const auto& c : p.children) collect(c, out);
}

}  // namespace

Predicate parse_predicate(std::string_view text, std::size_t column_offset) {
    return PredicateParser(text, column_offset).parse();
}

std::string to_string(const Predicate& pred) {
    std::string out;
    render(pred, out);
    return out;
}

std::set<std::string> referenced_attributes(const Predicate& pred) {
    std::set<std::string> out;
    collect(pred, out);
    return out;
}

bool compare_values(const Value& lhs, CompareOp op, const Value& rhs) {
    if (lhs.type() != rhs.type()) {
        throw TypeMismatchError("cannot compare " + std::string(to_string(lhs.type())) + " value '" + lhs.str() +
                                "' with " + std::string(to_string(rhs.type())) + " literal " + rhs.str());
    }
    const auto ord = lhs <=> rhs;
    switch (op) {
    case CompareOp::Eq: return ord == 0;
    case CompareOp::Ne: return ord != 0;
    case CompareOp::Lt: return ord < 0;
    case CompareOp::Gt: return ord > 0;
    case CompareOp::Le: return ord <= 0;
    case CompareOp::Ge: return ord >= 0;
    }
    return false;
}

void check_predicate(const Predicate& pred,
                     const std::function<std::optional<ValueType>(const std::string&)>& type_of) {
    if (pred.kind == Predicate::Kind::Compare) {
        const auto type = type_of(pred.attribute);
        if (!type) {
            throw UnknownNameError("unknown attribute '" + pred.attribute + "' in predicate");
        }
        if (*type != pred.literal.type()) {
            throw TypeMismatchError("attribute '" + pred.attribute + "' is " + std::string(to_string(*type)) +
                                    " but is compared with a " + std::string(to_string(pred.literal.type())) +
                                    " literal");
        }
    }
    for (const auto& c : pred.children) check_predicate(c, type_of);
}

}  // namespace blendcube
