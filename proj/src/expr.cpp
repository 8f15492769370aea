#include "varik/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>

namespace varik {

namespace ast {

std::unique_ptr<Node> clone(const Node& n) {
    auto out = std::make_unique<Node>();
    out->op = n.op;
    out->value = n.value;
    out->var = n.var;
    if (n.a) out->a = clone(*n.a);
    if (n.b) out->b = clone(*n.b);
    return out;
}

}  // namespace ast

namespace {

using ast::Node;
using ast::Op;

struct Token {
    enum Kind { Number, Ident, Sym, End } kind;
    std::string text;
    double number = 0.0;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) step();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::End;
            tok_.text.clear();
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            tok_.kind = Token::Ident;
            tok_.text.clear();
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_')) {
                tok_.text.push_back(src_[pos_]);
                step();
            }
            return;
        }
        static const std::string symbols = "+-*/^()";
        if (symbols.find(c) != std::string::npos) {
            tok_.kind = Token::Sym;
            tok_.text = std::string(1, c);
            step();
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

    void lex_number() {
        tok_.kind = Token::Number;
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) step();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            step();
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) step();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            int save_line = line_, save_col = col_;
            step();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) step();
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    step();
            } else {
                pos_ = save;
                line_ = save_line;
                col_ = save_col;
            }
        }
        tok_.text = src_.substr(start, pos_ - start);
        tok_.number = std::stod(tok_.text);
    }

    void step() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& vars, ScalarKind kind)
        : lex_(src), vars_(vars), kind_(kind) {}

    static constexpr int kMaxDepth = 256;

    std::unique_ptr<Node> run() {
        auto e = parse_sum();
        const Token& t = lex_.peek();
        if (t.kind != Token::End)
            throw ParseError("unexpected trailing input '" + t.text + "'", t.line, t.col);
        return e;
    }

private:
    std::unique_ptr<Node> parse_sum() {
        DepthGuard guard(*this);
        auto left = parse_term();
        while (is_sym("+") || is_sym("-")) {
            Token op = lex_.take();
            auto right = parse_term();
            auto n = std::make_unique<Node>();
            n->op = op.text == "+" ? Op::Add : Op::Sub;
            n->a = std::move(left);
            n->b = std::move(right);
            left = std::move(n);
        }
        return left;
    }

    std::unique_ptr<Node> parse_term() {
        auto left = parse_unary();
        while (is_sym("*") || is_sym("/")) {
            Token op = lex_.take();
            auto right = parse_unary();
            auto n = std::make_unique<Node>();
            n->op = op.text == "*" ? Op::Mul : Op::Div;
            n->a = std::move(left);
            n->b = std::move(right);
            left = std::move(n);
        }
        return left;
    }

    std::unique_ptr<Node> parse_unary() {
        DepthGuard guard(*this);
        if (is_sym("-")) {
            lex_.take();
            auto n = std::make_unique<Node>();
            n->op = Op::Neg;
            n->a = parse_unary();
            return n;
        }
        return parse_power();
    }

    std::unique_ptr<Node> parse_power() {
        auto base = parse_atom();
        if (is_sym("^")) {
            Token caret = lex_.take();
            double e = parse_const_exponent(caret);
            auto n = std::make_unique<Node>();
            n->op = Op::Pow;
            n->value = e;
            n->a = std::move(base);
            return n;
        }
        return base;
    }

    // Exponents are constants: an optionally signed number, or a parenthesised
    // arithmetic expression over numbers only.
    double parse_const_exponent(const Token& caret) {
        double sign = 1.0;
        while (is_sym("-") || is_sym("+")) {
            if (lex_.take().text == "-") sign = -sign;
        }
        const Token& t = lex_.peek();
        if (t.kind == Token::Number) return sign * lex_.take().number;
        if (is_sym("(")) {
            auto sub = [&] {
                lex_.take();
                auto e = parse_sum();
                expect(")");
                return e;
            }();
            auto folded = fold_constant(*sub);
            if (!folded)
                throw ParseError("exponent must be a numeric constant", caret.line, caret.col);
            return sign * *folded;
        }
        throw ParseError("exponent must be a numeric constant", t.line, t.col);
    }

    static std::optional<double> fold_constant(const Node& n) {
        switch (n.op) {
            case Op::Literal:
                return n.value;
            case Op::Neg: {
                auto a = fold_constant(*n.a);
                return a ? std::optional<double>(-*a) : std::nullopt;
            }
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div: {
                auto a = fold_constant(*n.a);
                auto b = fold_constant(*n.b);
                if (!a || !b) return std::nullopt;
                switch (n.op) {
                    case Op::Add: return *a + *b;
                    case Op::Sub: return *a - *b;
                    case Op::Mul: return *a * *b;
                    default: return *a / *b;
                }
            }
            case Op::Pow: {
                auto a = fold_constant(*n.a);
                return a ? std::optional<double>(std::pow(*a, n.value)) : std::nullopt;
            }
            default:
                return std::nullopt;
        }
    }

    std::unique_ptr<Node> parse_atom() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Number) {
            Token num = lex_.take();
            auto n = std::make_unique<Node>();
            n->op = Op::Literal;
            n->value = num.number;
            return n;
        }
        if (is_sym("(")) {
            lex_.take();
            auto e = parse_sum();
            expect(")");
            return e;
        }
        if (t.kind == Token::Ident) {
            Token id = lex_.take();
            static const std::map<std::string, Op> functions = {
                {"sqrt", Op::Sqrt}, {"sin", Op::Sin}, {"cos", Op::Cos},
                {"exp", Op::Exp},   {"log", Op::Log}, {"abs", Op::Abs}};
            auto fn = functions.find(id.text);
            if (fn != functions.end() && is_sym("(")) {
                lex_.take();
                auto arg = parse_sum();
                expect(")");
                auto n = std::make_unique<Node>();
                n->op = fn->second;
                n->a = std::move(arg);
                return n;
            }
            if (is_sym("("))
                throw ParseError("unknown function '" + id.text + "'", id.line, id.col);
            if (id.text == "i") {
                if (kind_ == ScalarKind::Complex) {
                    auto n = std::make_unique<Node>();
                    n->op = Op::Imaginary;
                    return n;
                }
                if (std::find(vars_.begin(), vars_.end(), "i") == vars_.end())
                    throw ParseError("imaginary unit literal is not allowed in Real mode", id.line,
                                     id.col);
            }
            auto it = std::find(vars_.begin(), vars_.end(), id.text);
            if (it == vars_.end())
                throw ParseError("unknown variable '" + id.text + "'", id.line, id.col);
            auto n = std::make_unique<Node>();
            n->op = Op::Var;
            n->var = static_cast<int>(it - vars_.begin());
            return n;
        }
        throw ParseError(t.kind == Token::End ? "unexpected end of input"
                                              : "unexpected token '" + t.text + "'",
                         t.line, t.col);
    }

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : parser(p) {
            if (++parser.depth_ > kMaxDepth) {
                const Token& t = parser.lex_.peek();
                throw ParseError("expression nesting exceeds depth " + std::to_string(kMaxDepth),
                                 t.line, t.col);
            }
        }
        ~DepthGuard() { --parser.depth_; }
        Parser& parser;
    };

    bool is_sym(const char* s) const {
        return lex_.peek().kind == Token::Sym && lex_.peek().text == s;
    }

    void expect(const char* s) {
        const Token& t = lex_.peek();
        if (!is_sym(s))
            throw ParseError(std::string("expected '") + s + "'", t.line, t.col);
        lex_.take();
    }

    Lexer lex_;
    const std::vector<std::string>& vars_;
    ScalarKind kind_;
    int depth_ = 0;
};

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_node(const Node& n, const std::vector<std::string>& vars, std::string& out) {
    switch (n.op) {
        case Op::Literal:
            out += format_number(n.value);
            break;
        case Op::Imaginary:
            out += "i";
            break;
        case Op::Var:
            out += vars[static_cast<std::size_t>(n.var)];
            break;
        case Op::Neg:
            out += "(-";
            print_node(*n.a, vars, out);
            out += ")";
            break;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: {
            const char* sym = n.op == Op::Add   ? " + "
                              : n.op == Op::Sub ? " - "
                              : n.op == Op::Mul ? "*"
                                                : "/";
            out += "(";
            print_node(*n.a, vars, out);
            out += sym;
            print_node(*n.b, vars, out);
            out += ")";
            break;
        }
        case Op::Pow:
            out += "(";
            print_node(*n.a, vars, out);
            out += "^";
            if (n.value < 0) {
                out += "(0 - " + format_number(-n.value) + ")";
            } else {
                out += format_number(n.value);
            }
            out += ")";
            break;
        case Op::Sqrt:
        case Op::Sin:
        case Op::Cos:
        case Op::Exp:
        case Op::Log:
        case Op::Abs: {
            const char* name = n.op == Op::Sqrt  ? "sqrt"
                               : n.op == Op::Sin ? "sin"
                               : n.op == Op::Cos ? "cos"
                               : n.op == Op::Exp ? "exp"
                               : n.op == Op::Log ? "log"
                                                 : "abs";
            out += name;
            out += "(";
            print_node(*n.a, vars, out);
            out += ")";
            break;
        }
    }
}

bool nodes_equal(const Node& x, const Node& y) {
    if (x.op != y.op || x.var != y.var) return false;
    if (x.op == Op::Literal || x.op == Op::Pow) {
        if (!(x.value == y.value)) return false;
    }
    if (bool(x.a) != bool(y.a) || bool(x.b) != bool(y.b)) return false;
    if (x.a && !nodes_equal(*x.a, *y.a)) return false;
    if (x.b && !nodes_equal(*x.b, *y.b)) return false;
    return true;
}

bool node_depends(const Node& n, int var) {
    if (n.op == Op::Var) return n.var == var;
    if (n.a && node_depends(*n.a, var)) return true;
    if (n.b && node_depends(*n.b, var)) return true;
    return false;
}

template <typename S>
Jet<S> eval_node(const Node& n, std::span<const Jet<S>> values,
                 const std::shared_ptr<const JetLayout>& layout) {
    switch (n.op) {
        case Op::Literal:
            return Jet<S>(layout, S(n.value));
        case Op::Imaginary:
            if constexpr (detail::is_complex<S>::value) {
                return Jet<S>(layout, S(0.0, 1.0));
            } else {
                throw EvalError("imaginary unit in a real-scalar evaluation");
            }
        case Op::Var:
            return values[static_cast<std::size_t>(n.var)];
        case Op::Add:
            return eval_node(*n.a, values, layout) + eval_node(*n.b, values, layout);
        case Op::Sub:
            return eval_node(*n.a, values, layout) - eval_node(*n.b, values, layout);
        case Op::Mul:
            return eval_node(*n.a, values, layout) * eval_node(*n.b, values, layout);
        case Op::Div:
            return eval_node(*n.a, values, layout) / eval_node(*n.b, values, layout);
        case Op::Neg:
            return -eval_node(*n.a, values, layout);
        case Op::Pow:
            return pow(eval_node(*n.a, values, layout), n.value);
        case Op::Sqrt:
            return sqrt(eval_node(*n.a, values, layout));
        case Op::Sin:
            return sin(eval_node(*n.a, values, layout));
        case Op::Cos:
            return cos(eval_node(*n.a, values, layout));
        case Op::Exp:
            return exp(eval_node(*n.a, values, layout));
        case Op::Log:
            return log(eval_node(*n.a, values, layout));
        case Op::Abs:
            return abs(eval_node(*n.a, values, layout));
    }
    throw EvalError("corrupt expression node");
}

std::unique_ptr<Node> substitute_node(const Node& n, const std::vector<std::string>& old_vars,
                                      const std::map<std::string, const Node*>& repl,
                                      const std::vector<std::string>& new_vars) {
    if (n.op == Op::Var) {
        const std::string& name = old_vars[static_cast<std::size_t>(n.var)];
        auto r = repl.find(name);
        if (r != repl.end()) return ast::clone(*r->second);
        auto it = std::find(new_vars.begin(), new_vars.end(), name);
        if (it == new_vars.end())
            throw EvalError("substitute: variable '" + name + "' missing from the new signature");
        auto out = std::make_unique<Node>();
        out->op = Op::Var;
        out->var = static_cast<int>(it - new_vars.begin());
        return out;
    }
    auto out = std::make_unique<Node>();
    out->op = n.op;
    out->value = n.value;
    out->var = n.var;
    if (n.a) out->a = substitute_node(*n.a, old_vars, repl, new_vars);
    if (n.b) out->b = substitute_node(*n.b, old_vars, repl, new_vars);
    return out;
}

}  // namespace

LagrangianExpr::LagrangianExpr(const LagrangianExpr& o)
    : root_(o.root_ ? ast::clone(*o.root_) : nullptr),
      var_names_(o.var_names_),
      kind_(o.kind_),
      source_(o.source_) {}

LagrangianExpr& LagrangianExpr::operator=(const LagrangianExpr& o) {
    if (this != &o) {
        root_ = o.root_ ? ast::clone(*o.root_) : nullptr;
        var_names_ = o.var_names_;
        kind_ = o.kind_;
        source_ = o.source_;
    }
    return *this;
}

LagrangianExpr LagrangianExpr::parse(const std::string& source, std::vector<std::string> var_names,
                                     ScalarKind kind) {
    if (source.empty()) throw ParseError("empty expression", 1, 1);
    LagrangianExpr e;
    Parser p(source, var_names, kind);
    e.root_ = p.run();
    e.var_names_ = std::move(var_names);
    e.kind_ = kind;
    e.source_ = source;
    return e;
}

template <typename S>
Jet<S> LagrangianExpr::evaluate(std::span<const Jet<S>> values) const {
    if (!root_) throw EvalError("evaluate on an empty expression");
    if (values.size() != var_names_.size())
        throw EvalError("evaluate: expected " + std::to_string(var_names_.size()) +
                        " values, got " + std::to_string(values.size()));
    auto layout = values.empty() ? JetLayout::get(1, 0) : values[0].layout_ptr();
    for (const auto& v : values)
        if (v.params() != layout->params() || v.order() != layout->order())
            throw EvalError("evaluate: all values must share one jet layout");
    return eval_node(*root_, values, layout);
}

template Jet<double> LagrangianExpr::evaluate<double>(std::span<const Jet<double>>) const;
template Jet<std::complex<double>> LagrangianExpr::evaluate<std::complex<double>>(
    std::span<const Jet<std::complex<double>>>) const;

double LagrangianExpr::evaluate_real(std::span<const double> values) const {
    std::vector<Jet<double>> jets;
    jets.reserve(values.size());
    auto layout = JetLayout::get(1, 0);
    for (double v : values) jets.emplace_back(layout, v);
    return evaluate(std::span<const Jet<double>>(jets)).value();
}

std::complex<double> LagrangianExpr::evaluate_complex(
    std::span<const std::complex<double>> values) const {
    std::vector<Jet<std::complex<double>>> jets;
    jets.reserve(values.size());
    auto layout = JetLayout::get(1, 0);
    for (auto v : values) jets.emplace_back(layout, v);
    return evaluate(std::span<const Jet<std::complex<double>>>(jets)).value();
}

LagrangianExpr LagrangianExpr::substitute(const std::map<std::string, std::string>& replacements,
                                          std::vector<std::string> new_var_names) const {
    if (!root_) throw EvalError("substitute on an empty expression");
    std::vector<LagrangianExpr> parsed;
    parsed.reserve(replacements.size());
    std::map<std::string, const ast::Node*> repl;
    for (const auto& [name, text] : replacements) {
        parsed.push_back(LagrangianExpr::parse(text, new_var_names, kind_));
        repl[name] = parsed.back().root_.get();
    }
    LagrangianExpr out;
    out.root_ = substitute_node(*root_, var_names_, repl, new_var_names);
    out.var_names_ = std::move(new_var_names);
    out.kind_ = kind_;
    out.source_ = print_from(*out.root_, out.var_names_);
    return out;
}

std::string LagrangianExpr::print() const {
    if (!root_) return "";
    return print_from(*root_, var_names_);
}

std::string LagrangianExpr::print_from(const ast::Node& n, const std::vector<std::string>& vars) {
    std::string out;
    print_node(n, vars, out);
    return out;
}

bool LagrangianExpr::structurally_equal(const LagrangianExpr& other) const {
    if (!root_ || !other.root_) return root_ == other.root_;
    return nodes_equal(*root_, *other.root_);
}

bool LagrangianExpr::depends_on(int var_index) const {
    return root_ && node_depends(*root_, var_index);
}

template <typename S>
Jet<S> expr_partial(const LagrangianExpr& e, std::span<const Jet<S>> inputs, int var_index) {
    std::vector<Jet<S>> extended;
    extended.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        S seed = (static_cast<int>(i) == var_index) ? S(1) : S(0);
        extended.push_back(extend(inputs[i], 1, 1, std::span<const S>(&seed, 1)));
    }
    return extract_partial(e.evaluate(std::span<const Jet<S>>(extended)));
}

template Jet<double> expr_partial<double>(const LagrangianExpr&, std::span<const Jet<double>>, int);
template Jet<std::complex<double>> expr_partial<std::complex<double>>(
    const LagrangianExpr&, std::span<const Jet<std::complex<double>>>, int);

template <typename S>
Jet<S> expr_partial2(const LagrangianExpr& e, std::span<const Jet<S>> inputs, int var_i,
                     int var_j) {
    std::vector<Jet<S>> extended;
    extended.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        S seeds[2] = {static_cast<int>(i) == var_i ? S(1) : S(0),
                      static_cast<int>(i) == var_j ? S(1) : S(0)};
        extended.push_back(extend(inputs[i], 2, 2, std::span<const S>(seeds, 2)));
    }
    return extract_partial(extract_partial(e.evaluate(std::span<const Jet<S>>(extended))));
}

template Jet<double> expr_partial2<double>(const LagrangianExpr&, std::span<const Jet<double>>, int,
                                           int);
template Jet<std::complex<double>> expr_partial2<std::complex<double>>(
    const LagrangianExpr&, std::span<const Jet<std::complex<double>>>, int, int);

template <typename S>
std::vector<S> expr_gradient(const LagrangianExpr& e, std::span<const S> point) {
    const int n = static_cast<int>(point.size());
    std::vector<S> grad(static_cast<std::size_t>(n), S(0));
    const int chunk = 12;
    for (int base = 0; base < n; base += chunk) {
        const int width = std::min(chunk, n - base);
        auto layout = JetLayout::get(width, 1);
        std::vector<Jet<S>> jets;
        jets.reserve(point.size());
        for (int i = 0; i < n; ++i) {
            Jet<S> j(layout, point[static_cast<std::size_t>(i)]);
            if (i >= base && i < base + width) j.coeff(1 + (i - base)) = S(1);
            jets.push_back(std::move(j));
        }
        Jet<S> r = e.evaluate(std::span<const Jet<S>>(jets));
        for (int i = 0; i < width; ++i) grad[static_cast<std::size_t>(base + i)] = r.coeff(1 + i);
    }
    return grad;
}

template std::vector<double> expr_gradient<double>(const LagrangianExpr&, std::span<const double>);
template std::vector<std::complex<double>> expr_gradient<std::complex<double>>(
    const LagrangianExpr&, std::span<const std::complex<double>>);

}  // namespace varik
