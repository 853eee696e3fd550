#include "rulefuse/ruledsl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "rulefuse/error.hpp"
#include "rulefuse/explanation.hpp"
#include "rulefuse/text.hpp"

namespace rulefuse {

namespace {

const std::set<std::string>& quadrants() {
    static const std::set<std::string> q = {"financial", "structural", "interaction", "engagement"};
    return q;
}

enum class TokKind { ident, string, number, op, colon, end };

struct Token {
    TokKind kind = TokKind::end;
    std::string text;
    double number = 0.0;
    int line = 0;
    int column = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        skip_ws_and_comments();
        Token t;
        t.line = line_;
        t.column = col_;
        if (pos_ >= src_.size()) {
            t.kind = TokKind::end;
            return t;
        }
        const char c = src_[pos_];
        if (c == ':') {
            advance();
            t.kind = TokKind::colon;
            t.text = ":";
            return t;
        }
        if (c == '"') return lex_string(t);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_ident(t);
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            return lex_number(t);
        }
        if (c == '<' || c == '>' || c == '=' || c == '!') return lex_op(t);
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    Token lex_string(Token t) {
        advance();  // opening quote
        std::string out;
        while (pos_ < src_.size() && src_[pos_] != '"') {
            if (src_[pos_] == '\n') throw ParseError("unterminated string", t.line, t.column);
            out += src_[pos_];
            advance();
        }
        if (pos_ >= src_.size()) throw ParseError("unterminated string", t.line, t.column);
        advance();  // closing quote
        t.kind = TokKind::string;
        t.text = out;
        return t;
    }

    Token lex_ident(Token t) {
        std::string out;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            out += src_[pos_];
            advance();
        }
        t.kind = TokKind::ident;
        t.text = out;
        return t;
    }

    Token lex_number(Token t) {
        std::string out;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                src_[pos_] == '-' || src_[pos_] == '+' || src_[pos_] == 'e' || src_[pos_] == 'E')) {
            out += src_[pos_];
            advance();
        }
        auto v = parse_double(out);
        if (!v) throw ParseError("malformed number '" + out + "'", t.line, t.column);
        t.kind = TokKind::number;
        t.text = out;
        t.number = *v;
        return t;
    }

    Token lex_op(Token t) {
        std::string out(1, src_[pos_]);
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') {
            out += '=';
            advance();
        }
        static const std::set<std::string> ops = {"<", "<=", ">", ">=", "==", "!="};
        if (!ops.count(out)) throw ParseError("unknown operator '" + out + "'", t.line, t.column);
        t.kind = TokKind::op;
        t.text = out;
        return t;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lexer_(src) { advance(); }

    RiskRuleSet parse() {
        RiskRuleSet rs;
        if (cur_.kind == TokKind::end) throw ParseError("empty rule file: expected at least one rule");
        while (cur_.kind != TokKind::end) rs.rules.push_back(parse_rule());
        std::set<int> codes;
        std::set<std::string> names;
        for (const auto& r : rs.rules) {
            if (!codes.insert(r.code).second) {
                throw ParseError("duplicate rule code " + std::to_string(r.code), line_of_.at(r.name));
            }
            if (!names.insert(r.name).second) {
                throw ParseError("duplicate rule name \"" + r.name + "\"", line_of_.at(r.name));
            }
        }
        return rs;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    Token expect(TokKind kind, const std::string& what) {
        if (cur_.kind != kind) {
            throw ParseError("expected " + what + ", found '" + describe(cur_) + "'", cur_.line,
                             cur_.column);
        }
        Token t = cur_;
        advance();
        return t;
    }

    void expect_keyword(const std::string& kw) {
        if (cur_.kind != TokKind::ident || cur_.text != kw) {
            throw ParseError("expected keyword '" + kw + "', found '" + describe(cur_) + "'",
                             cur_.line, cur_.column);
        }
        advance();
    }

    static std::string describe(const Token& t) {
        return t.kind == TokKind::end ? "end of input" : t.text;
    }

    RiskRule parse_rule() {
        const int rule_line = cur_.line;
        expect_keyword("rule");
        RiskRule r;
        r.name = expect(TokKind::string, "rule name string").text;
        line_of_[r.name] = rule_line;
        expect_keyword("code");
        Token code = expect(TokKind::number, "rule code");
        if (code.number != std::floor(code.number) || code.number < kMinRiskCode ||
            code.number > kMaxRiskCode) {
            throw ParseError("rule code must be an integer in 4..11, got '" + code.text + "'",
                             code.line, code.column);
        }
        r.code = static_cast<int>(code.number);
        expect_keyword("quadrant");
        Token quad = expect(TokKind::ident, "quadrant name");
        if (!quadrants().count(quad.text)) {
            throw ParseError("unknown quadrant '" + quad.text +
                             "' (expected financial|structural|interaction|engagement)",
                             quad.line, quad.column);
        }
        r.quadrant = quad.text;
        expect(TokKind::colon, "':'");
        r.predicate.push_back(parse_condition());
        while (cur_.kind == TokKind::ident && cur_.text == "AND") {
            advance();
            r.predicate.push_back(parse_condition());
        }
        if (r.predicate.size() > 4) {
            throw ParseError("rule \"" + r.name + "\" has more than 4 conditions", rule_line);
        }
        return r;
    }

    AtomicPredicate parse_condition() {
        Token feature = expect(TokKind::ident, "feature name");
        Token op = expect(TokKind::op, "comparison operator");
        AtomicPredicate p;
        p.feature = feature.text;
        if (op.text == "==" || op.text == "!=") {
            Token lit = expect(TokKind::string, "quoted category after " + op.text);
            p.op = op.text == "==" ? Comparator::eq : Comparator::ne;
            p.category = lit.text;
            return p;
        }
        Token lit = expect(TokKind::number, "numeric literal after " + op.text);
        // strict < and >= move the boundary one ulp down, landing on the
        // (<=, >) convention without changing any comparison result
        if (op.text == "<=") {
            p.op = Comparator::le;
            p.threshold = lit.number;
        } else if (op.text == ">") {
            p.op = Comparator::gt;
            p.threshold = lit.number;
        } else if (op.text == "<") {
            p.op = Comparator::le;
            p.threshold = std::nextafter(lit.number, -std::numeric_limits<double>::infinity());
        } else {  // >=
            p.op = Comparator::gt;
            p.threshold = std::nextafter(lit.number, -std::numeric_limits<double>::infinity());
        }
        return p;
    }

    Lexer lexer_;
    Token cur_;
    std::map<std::string, int> line_of_;
};

}  // namespace

RiskRuleSet parse_rules(const std::string& source) { return Parser(source).parse(); }

RiskRuleSet load_rules(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open rules file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_rules(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string print_rules(const RiskRuleSet& rs) {
    std::string out;
    for (const auto& r : rs.rules) {
        out += "rule \"" + r.name + "\" code " + std::to_string(r.code) + " quadrant " + r.quadrant +
               ": " + conjunction_repr(r.predicate) + "\n";
    }
    return out;
}

std::vector<const RiskRule*> RiskRuleSet::by_code() const {
    std::vector<const RiskRule*> out;
    out.reserve(rules.size());
    for (const auto& r : rules) out.push_back(&r);
    std::sort(out.begin(), out.end(),
              [](const RiskRule* a, const RiskRule* b) { return a->code < b->code; });
    return out;
}

bool evaluate_rule(const RiskRule& rule, const Dataset& ds, std::size_t row) {
    return eval_conjunction(rule.predicate, ds, row);
}

void bind_rules(const RiskRuleSet& rs, const FeatureSchema& schema) {
    for (const auto& r : rs.rules) {
        for (const auto& p : r.predicate) {
            const int idx = schema.feature_index(p.feature);
            if (idx < 0) {
                throw SchemaError("rule \"" + r.name + "\": unknown feature " + p.feature);
            }
            const bool numeric = schema.is_numeric(static_cast<std::size_t>(idx));
            if (numeric != p.is_numeric_op()) {
                throw SchemaError("rule \"" + r.name + "\": comparator " +
                                  comparator_token(p.op) + " does not match kind of feature " +
                                  p.feature);
            }
        }
    }
}

}  // namespace rulefuse
