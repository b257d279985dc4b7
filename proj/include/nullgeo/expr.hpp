#pragma once

// Scalar expressions over chart coordinates x0..x{dim-1}.
//
// Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := ("-")? atom ("^" integer)?
//   atom   := number | ident | func "(" expr ")" | "(" expr ")"
//   ident  := "x" digits
//   func   := "sin" | "cos" | "exp" | "log" | "sqrt"

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nullgeo {

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset)
    {
    }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Raised when an expression references a coordinate outside the declared chart.
class CoordinateRangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation left the function's domain (log of non-positive, division by zero, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class NodeKind { Number, Coord, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    NodeKind kind;
    double value = 0.0; // Number (always >= 0; negatives are Neg(Number))
    int index = 0;      // Coord index, or Pow exponent
    ExprPtr lhs;        // unary operand / left operand
    ExprPtr rhs;
};

/// Structural equality (same node kinds, literals and coordinate indices).
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

/// Fully parenthesized form that re-parses to a structurally identical tree.
std::string to_string(const ExprPtr& e);

/// An immutable scalar function on a chart of dimension `dim`.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(ExprPtr root, int dim);

    static ScalarField parse(std::string_view text, int dim);
    static ScalarField constant(double v, int dim);
    static ScalarField coordinate(int i, int dim);

    int dim() const noexcept { return dim_; }
    const ExprPtr& ast() const noexcept { return root_; }

    /// Throws DomainError instead of returning a non-finite value.
    double eval(std::span<const double> point) const;

    /// Symbolic derivative with respect to coordinate i.
    ScalarField exact_partial(int i) const;

    /// (f(p + h e_i) - f(p - h e_i)) / 2h
    double fd_partial(int i, std::span<const double> point, double h = 1e-5) const;

    /// Replace coordinate xi by args[i]; the result lives on the args' chart.
    ScalarField compose(std::span<const ScalarField> args) const;

    bool is_zero() const;
    std::string str() const { return to_string(root_); }

    friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator/(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator-(const ScalarField& a);

private:
    ExprPtr root_;
    int dim_ = 0;
};

ScalarField exp(const ScalarField& a);

/// Parse a list of expressions sharing one chart.
std::vector<ScalarField> parse_all(const std::vector<std::string>& texts, int dim);

} // namespace nullgeo
