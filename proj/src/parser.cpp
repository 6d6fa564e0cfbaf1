#include "inctab/parser.hpp"

#include <cctype>
#include <memory>
#include <optional>
#include <unordered_map>

#include "inctab/error.hpp"

namespace inctab {

namespace {

enum class Tok { Atom, QuotedAtom, Var, Int, Punct, End, Eof };

struct Token {
    Tok kind = Tok::Eof;
    std::string text;
    std::int64_t value = 0;
    int line = 1;
    int column = 1;
    /// True when no whitespace separates this token from the previous one.
    bool adjacent = false;
};

const std::string kSymbolChars = "+-*/\\^<>=~:.?@#&$";

bool is_symbol_char(char c) { return kSymbolChars.find(c) != std::string::npos; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
public:
    Lexer(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& msg, int line, int col) const {
        raise(ErrorKind::Syntax, source_ + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
    }

    Token next() {
        bool ws = skip_layout();
        Token t;
        t.line = line_;
        t.column = col_;
        t.adjacent = !ws;
        if (pos_ >= text_.size()) {
            t.kind = Tok::Eof;
            return t;
        }
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
            t.kind = Tok::Int;
            t.text = std::string(text_.substr(start, pos_ - start));
            try {
                t.value = std::stoll(t.text);
            } catch (const std::out_of_range&) {
                fail("integer out of range", t.line, t.column);
            }
            return t;
        }
        if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() && is_alnum(text_[pos_])) advance();
            t.kind = Tok::Var;
            t.text = std::string(text_.substr(start, pos_ - start));
            return t;
        }
        if (std::islower(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && is_alnum(text_[pos_])) advance();
            t.kind = Tok::Atom;
            t.text = std::string(text_.substr(start, pos_ - start));
            return t;
        }
        if (c == '\'') return quoted(t);
        if (c == '(' || c == ')' || c == ',' || c == '|' || c == '[' || c == ']' || c == '{' || c == '}') {
            advance();
            t.kind = Tok::Punct;
            t.text = std::string(1, c);
            return t;
        }
        if (c == '!' || c == ';') {
            advance();
            t.kind = Tok::Atom;
            t.text = std::string(1, c);
            return t;
        }
        if (c == '.') {
            char n = pos_ + 1 < text_.size() ? text_[pos_ + 1] : ' ';
            if (std::isspace(static_cast<unsigned char>(n)) || n == '%') {
                advance();
                t.kind = Tok::End;
                t.text = ".";
                return t;
            }
        }
        if (is_symbol_char(c)) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && is_symbol_char(text_[pos_])) {
                // A '.' followed by layout ends the clause even inside a symbol run.
                if (text_[pos_] == '.' && pos_ > start) {
                    char n = pos_ + 1 < text_.size() ? text_[pos_ + 1] : ' ';
                    if (std::isspace(static_cast<unsigned char>(n)) || n == '%') break;
                }
                advance();
            }
            t.kind = Tok::Atom;
            t.text = std::string(text_.substr(start, pos_ - start));
            if (t.text[0] == '$') fail("atoms starting with '$' are reserved", t.line, t.column);
            return t;
        }
        fail(std::string("unexpected character '") + c + "'", t.line, t.column);
    }

    const std::string& source() const { return source_; }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    bool skip_layout() {
        bool any = false;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                any = true;
            } else if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
                any = true;
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
                int l = line_, cl = col_;
                advance();
                advance();
                while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/')) advance();
                if (pos_ + 1 >= text_.size()) fail("unterminated block comment", l, cl);
                advance();
                advance();
                any = true;
            } else {
                break;
            }
        }
        return any;
    }

    Token quoted(Token t) {
        advance();
        std::string s;
        while (true) {
            if (pos_ >= text_.size()) fail("unterminated quoted atom", t.line, t.column);
            char c = text_[pos_];
            if (c == '\'') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
                    s += '\'';
                    advance();
                    advance();
                    continue;
                }
                advance();
                break;
            }
            if (c == '\\' && pos_ + 1 < text_.size()) {
                advance();
                char e = text_[pos_];
                switch (e) {
                case 'n': s += '\n'; break;
                case 't': s += '\t'; break;
                default: s += e; break;
                }
                advance();
                continue;
            }
            s += c;
            advance();
        }
        if (!s.empty() && s[0] == '$') fail("atoms starting with '$' are reserved", t.line, t.column);
        t.kind = Tok::QuotedAtom;
        t.text = std::move(s);
        return t;
    }

    std::string_view text_;
    std::string source_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

enum class OpType { XFX, XFY, YFX, FY, FX };

struct OpDef {
    int priority;
    OpType type;
};

const std::unordered_map<std::string, OpDef>& infix_ops() {
    static const std::unordered_map<std::string, OpDef> ops = {
        {":-", {1200, OpType::XFX}}, {"-->", {1200, OpType::XFX}}, {";", {1100, OpType::XFY}},
        {"->", {1050, OpType::XFY}}, {"as", {1050, OpType::XFX}},  {",", {1000, OpType::XFY}},
        {"=", {700, OpType::XFX}},   {"\\=", {700, OpType::XFX}},  {"==", {700, OpType::XFX}},
        {"\\==", {700, OpType::XFX}}, {"is", {700, OpType::XFX}},  {"<", {700, OpType::XFX}},
        {">", {700, OpType::XFX}},   {"=<", {700, OpType::XFX}},   {">=", {700, OpType::XFX}},
        {"+", {500, OpType::YFX}},   {"-", {500, OpType::YFX}},    {"*", {400, OpType::YFX}},
        {"/", {400, OpType::YFX}},
    };
    return ops;
}

const std::unordered_map<std::string, OpDef>& prefix_ops() {
    static const std::unordered_map<std::string, OpDef> ops = {
        {":-", {1200, OpType::FX}},      {"?-", {1200, OpType::FX}}, {"table", {1150, OpType::FX}},
        {"dynamic", {1150, OpType::FX}}, {"\\+", {900, OpType::FY}}, {"-", {200, OpType::FY}},
    };
    return ops;
}

class TermReader {
public:
    TermReader(std::string_view text, std::string source) : lex_(text, std::move(source)) { tok_ = lex_.next(); }

    bool read(ReadTerm& out) {
        vars_.clear();
        names_.clear();
        next_var_ = 0;
        if (tok_.kind == Tok::Eof) return false;
        out.line = tok_.line;
        out.column = tok_.column;
        out.term = parse(1200);
        if (tok_.kind != Tok::End) fail_here("operator expected");
        tok_ = lex_.next();
        out.var_names = names_;
        return true;
    }

    /// Single term, '.' optional.
    ReadTerm read_single() {
        ReadTerm out;
        out.line = tok_.line;
        out.column = tok_.column;
        if (tok_.kind == Tok::Eof) fail_here("empty input");
        out.term = parse(1200);
        if (tok_.kind == Tok::End) tok_ = lex_.next();
        if (tok_.kind != Tok::Eof) fail_here("unexpected trailing input");
        out.var_names = names_;
        return out;
    }

private:
    [[noreturn]] void fail_here(const std::string& msg) {
        std::string what = tok_.kind == Tok::Eof ? "end of input" : "'" + tok_.text + "'";
        lex_.fail(msg + " near " + what, tok_.line, tok_.column);
    }

    void advance() { tok_ = lex_.next(); }

    bool is_punct(const char* p) const { return tok_.kind == Tok::Punct && tok_.text == p; }

    void expect_punct(const char* p) {
        if (!is_punct(p)) fail_here(std::string("expected '") + p + "'");
        advance();
    }

    Term make_var(const std::string& name) {
        if (name == "_") return Term::var(next_var_++);
        auto it = vars_.find(name);
        if (it != vars_.end()) return Term::var(it->second);
        VarId id = next_var_++;
        vars_.emplace(name, id);
        names_.emplace_back(name, id);
        return Term::var(id);
    }

    bool starts_term() const {
        switch (tok_.kind) {
        case Tok::Atom:
        case Tok::QuotedAtom:
        case Tok::Var:
        case Tok::Int: return true;
        case Tok::Punct: return tok_.text == "(" || tok_.text == "[" || tok_.text == "{";
        default: return false;
        }
    }

    std::vector<Term> arglist() {
        std::vector<Term> args;
        expect_punct("(");
        args.push_back(parse(999));
        while (is_punct(",")) {
            advance();
            args.push_back(parse(999));
        }
        expect_punct(")");
        return args;
    }

    // Returns the primary term and its priority.
    std::pair<Term, int> primary(int max_prec) {
        Token t = tok_;
        switch (t.kind) {
        case Tok::Int:
            advance();
            return {Term::integer(t.value), 0};
        case Tok::Var:
            advance();
            return {make_var(t.text), 0};
        case Tok::Punct:
            if (t.text == "(") {
                advance();
                Term inner = parse(1200);
                expect_punct(")");
                return {inner, 0};
            }
            if (t.text == "[") {
                advance();
                if (is_punct("]")) {
                    advance();
                    return {atom_or_call("[]"), 0};
                }
                fail_here("lists are not supported");
            }
            fail_here("unexpected punctuation");
        case Tok::QuotedAtom:
            advance();
            return {atom_or_call(t.text), 0};
        case Tok::Atom: {
            advance();
            if (is_punct("(") && tok_.adjacent) return {Term::compound(t.text, arglist()), 0};
            if (t.text == "-" && tok_.kind == Tok::Int && tok_.adjacent) {
                std::int64_t v = tok_.value;
                advance();
                return {Term::integer(-v), 0};
            }
            auto pit = prefix_ops().find(t.text);
            if (pit != prefix_ops().end() && starts_term() && !is_infix_here()) {
                const OpDef& op = pit->second;
                int prec = op.priority;
                if (prec > max_prec) prec = 999;
                int arg_max = op.type == OpType::FY ? prec : prec - 1;
                Term arg = parse(arg_max);
                return {Term::compound(t.text, {arg}), prec};
            }
            return {Term::atom(t.text), 0};
        }
        case Tok::End: fail_here("unexpected end of clause");
        case Tok::Eof: fail_here("unexpected end of input");
        }
        fail_here("unexpected token");
    }

    Term atom_or_call(const std::string& name) {
        if (is_punct("(") && tok_.adjacent) return Term::compound(name, arglist());
        return Term::atom(name);
    }

    // An atom token that is itself an infix operator (e.g. "- (" vs "a - b").
    bool is_infix_here() const {
        if (tok_.kind != Tok::Atom) return false;
        return infix_ops().count(tok_.text) > 0 && tok_.text != "-" && tok_.text != "+";
    }

    Term parse(int max_prec) {
        auto [left, left_prec] = primary(max_prec);
        while (true) {
            std::string name;
            if (tok_.kind == Tok::Atom) name = tok_.text;
            else if (tok_.kind == Tok::Punct && tok_.text == ",") name = ",";
            else if (tok_.kind == Tok::Punct && tok_.text == "|") name = ";";
            else break;
            auto it = infix_ops().find(name);
            if (it == infix_ops().end()) break;
            const OpDef& op = it->second;
            if (op.priority > max_prec) break;
            int left_max = op.type == OpType::YFX ? op.priority : op.priority - 1;
            int right_max = op.type == OpType::XFY ? op.priority : op.priority - 1;
            if (left_prec > left_max) break;
            advance();
            Term right = parse(right_max);
            left = Term::compound(name, {left, right});
            left_prec = op.priority;
        }
        return left;
    }

    Lexer lex_;
    Token tok_;
    std::unordered_map<std::string, VarId> vars_;
    std::vector<std::pair<std::string, VarId>> names_;
    VarId next_var_ = 0;
};

} // namespace

struct Parser::Impl {
    std::string text;
    std::unique_ptr<TermReader> reader;
};

Parser::Parser(std::string_view text, std::string source) : impl_(std::make_shared<Impl>()) {
    impl_->text = std::string(text);
    impl_->reader = std::make_unique<TermReader>(impl_->text, std::move(source));
}

bool Parser::next(ReadTerm& out) { return impl_->reader->read(out); }

ReadTerm parse_term(std::string_view text) {
    std::string owned(text);
    TermReader reader(owned, "<query>");
    return reader.read_single();
}

std::vector<ReadTerm> parse_all(std::string_view text, const std::string& source) {
    Parser p(text, source);
    std::vector<ReadTerm> out;
    ReadTerm rt;
    while (p.next(rt)) out.push_back(rt);
    return out;
}

namespace {

void flatten(const Term& t, const char* op, std::vector<Term>& out) {
    if (t.is_compound() && t.arity() == 2 && symbol_name(t.symbol()) == op) {
        flatten(t.arg(0), op, out);
        flatten(t.arg(1), op, out);
    } else {
        out.push_back(t);
    }
}

std::uint32_t depth_arg(const Term& attr) {
    const Term& k = attr.arg(0);
    if (!k.is_int() || k.int_value() < 0)
        raise(ErrorKind::Type, "non-negative integer expected in " + to_string(attr));
    return static_cast<std::uint32_t>(k.int_value());
}

} // namespace

std::vector<PredicateDecl> parse_declaration(const Term& d) {
    if (!d.is_compound() || d.arity() != 1)
        raise(ErrorKind::Syntax, "unsupported directive " + to_string(d));
    const std::string& kind = symbol_name(d.symbol());
    if (kind != "table" && kind != "dynamic") raise(ErrorKind::Syntax, "unsupported directive " + kind);
    bool table = kind == "table";

    Term spec = d.arg(0);
    std::vector<Term> attrs;
    if (spec.is_compound() && spec.arity() == 2 && symbol_name(spec.symbol()) == "as") {
        flatten(spec.arg(1), ",", attrs);
        spec = spec.arg(0);
    }
    std::vector<Term> preds;
    flatten(spec, ",", preds);

    PredicateDecl base;
    base.kind = table ? PredKind::Static : PredKind::Dynamic;
    base.tabling = table ? Tabling::NonIncremental : Tabling::None;
    for (const Term& a : attrs) {
        std::string name = a.is_callable() ? symbol_name(a.symbol()) : "";
        if (a.is_atom() && name == "incremental") {
            if (table) base.tabling = Tabling::Incremental;
            else base.incremental = true;
        } else if (a.is_atom() && (name == "opaque" || name == "variant")) {
            // accepted for compatibility; these are the defaults here
        } else if (a.is_compound() && a.arity() == 1 && name == "abstract") {
            if (table) raise(ErrorKind::Permission, "abstract/1 applies to dynamic predicates; use subgoal_abstract/1");
            base.idg_abstraction = depth_arg(a);
        } else if (a.is_compound() && a.arity() == 1 && name == "subgoal_abstract") {
            base.subgoal_abstraction = depth_arg(a);
        } else if (a.is_compound() && a.arity() == 1 && name == "answer_abstract") {
            base.answer_abstraction = depth_arg(a);
        } else {
            raise(ErrorKind::Permission, "unsupported " + kind + " attribute " + to_string(a));
        }
    }

    std::vector<PredicateDecl> out;
    for (const Term& p : preds) {
        if (!(p.is_compound() && p.arity() == 2 && symbol_name(p.symbol()) == "/" && p.arg(0).is_atom() &&
              p.arg(1).is_int() && p.arg(1).int_value() >= 0))
            raise(ErrorKind::Type, "predicate indicator expected, got " + to_string(p));
        PredicateDecl decl = base;
        decl.key = {p.arg(0).symbol(), static_cast<std::uint32_t>(p.arg(1).int_value())};
        out.push_back(decl);
    }
    return out;
}

} // namespace inctab
