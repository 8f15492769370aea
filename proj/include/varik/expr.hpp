#pragma once

#include <complex>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "varik/jet.hpp"

namespace varik {

enum class ScalarKind { Real, Complex };

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line, int column)
        : std::runtime_error(message + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column)),
          line(line),
          column(column) {}
    int line;
    int column;
};

class EvalError : public std::runtime_error {
public:
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

/// Named coordinate chart layout: base coordinates followed by fiber blocks
/// (velocities y, accelerations z, multivector components yI, ...).
struct CoordSignature {
    std::vector<std::string> base_names;
    std::vector<std::pair<std::string, std::vector<std::string>>> fiber_blocks;

    std::vector<std::string> all_names() const {
        std::vector<std::string> names = base_names;
        for (const auto& [tag, block] : fiber_blocks) names.insert(names.end(), block.begin(), block.end());
        return names;
    }
};

namespace ast {

enum class Op {
    Literal,   // numeric constant (value)
    Imaginary, // the literal i
    Var,       // variable (index into var_names)
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,   // constant exponent stored in `value`
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
};

struct Node {
    Op op;
    double value = 0.0;  // Literal value or Pow exponent
    int var = -1;        // Var index
    std::unique_ptr<Node> a, b;
};

std::unique_ptr<Node> clone(const Node& n);

}  // namespace ast

/// A parsed scalar density over named chart coordinates, evaluable on plain
/// scalars or jets of either scalar kind.
class LagrangianExpr {
public:
    LagrangianExpr() = default;
    LagrangianExpr(const LagrangianExpr& o);
    LagrangianExpr& operator=(const LagrangianExpr& o);
    LagrangianExpr(LagrangianExpr&&) noexcept = default;
    LagrangianExpr& operator=(LagrangianExpr&&) noexcept = default;

    static LagrangianExpr parse(const std::string& source, std::vector<std::string> var_names,
                                ScalarKind kind = ScalarKind::Real);

    const std::vector<std::string>& var_names() const { return var_names_; }
    ScalarKind kind() const { return kind_; }
    const std::string& source() const { return source_; }

    /// Structural-recursion evaluation; all values share one scalar algebra.
    template <typename S>
    Jet<S> evaluate(std::span<const Jet<S>> values) const;

    double evaluate_real(std::span<const double> values) const;
    std::complex<double> evaluate_complex(std::span<const std::complex<double>> values) const;

    /// Rewrite each listed variable by a sub-expression over new coordinates;
    /// unlisted variables must appear in `new_var_names` and stay themselves.
    LagrangianExpr substitute(const std::map<std::string, std::string>& replacements,
                              std::vector<std::string> new_var_names) const;

    /// Parenthesised round-trippable rendering of the AST.
    std::string print() const;

    bool structurally_equal(const LagrangianExpr& other) const;

    bool depends_on(int var_index) const;

private:
    static std::string print_from(const ast::Node& n, const std::vector<std::string>& vars);

    std::unique_ptr<ast::Node> root_;
    std::vector<std::string> var_names_;
    ScalarKind kind_ = ScalarKind::Real;
    std::string source_;
};

// ---- jet-partial helpers ----------------------------------------------------

/// Exact t-jet of (d expr / d v_i) along the input path: inputs are jets in p
/// parameters of some order d; the result has the same layout.
template <typename S>
Jet<S> expr_partial(const LagrangianExpr& e, std::span<const Jet<S>> inputs, int var_index);

/// Exact t-jet of the mixed second partial d^2 expr / (d v_i d v_j).
template <typename S>
Jet<S> expr_partial2(const LagrangianExpr& e, std::span<const Jet<S>> inputs, int var_i, int var_j);

/// Gradient of expr in all variables at a plain point (one jet evaluation).
template <typename S>
std::vector<S> expr_gradient(const LagrangianExpr& e, std::span<const S> point);

}  // namespace varik
