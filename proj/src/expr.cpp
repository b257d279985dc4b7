#include "nullgeo/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace nullgeo {

namespace {

ExprPtr make(NodeKind k, ExprPtr a = nullptr, ExprPtr b = nullptr)
{
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

ExprPtr raw_number(double v)
{
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Number;
    n->value = v;
    return n;
}

ExprPtr coord(int i)
{
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Coord;
    n->index = i;
    return n;
}

// Literal value of a constant subtree (Number or Neg(Number)).
bool literal(const ExprPtr& e, double& v)
{
    if (e->kind == NodeKind::Number) {
        v = e->value;
        return true;
    }
    if (e->kind == NodeKind::Neg && e->lhs->kind == NodeKind::Number) {
        v = -e->lhs->value;
        return true;
    }
    return false;
}

// Constant-folding builders. Negative constants are stored as Neg(Number) so
// printing and re-parsing preserves structure.
ExprPtr number(double v)
{
    if (v < 0.0)
        return make(NodeKind::Neg, raw_number(-v));
    return raw_number(v == 0.0 ? 0.0 : v);
}

bool is_const(const ExprPtr& e, double c)
{
    double v;
    return literal(e, v) && v == c;
}

ExprPtr neg(ExprPtr a)
{
    double v;
    if (literal(a, v))
        return number(-v);
    if (a->kind == NodeKind::Neg)
        return a->lhs;
    return make(NodeKind::Neg, std::move(a));
}

ExprPtr add(ExprPtr a, ExprPtr b)
{
    double x, y;
    if (literal(a, x) && literal(b, y))
        return number(x + y);
    if (is_const(a, 0.0))
        return b;
    if (is_const(b, 0.0))
        return a;
    return make(NodeKind::Add, std::move(a), std::move(b));
}

ExprPtr sub(ExprPtr a, ExprPtr b)
{
    double x, y;
    if (literal(a, x) && literal(b, y))
        return number(x - y);
    if (is_const(b, 0.0))
        return a;
    if (is_const(a, 0.0))
        return neg(std::move(b));
    return make(NodeKind::Sub, std::move(a), std::move(b));
}

ExprPtr mul(ExprPtr a, ExprPtr b)
{
    double x, y;
    if (literal(a, x) && literal(b, y))
        return number(x * y);
    if (is_const(a, 0.0) || is_const(b, 0.0))
        return number(0.0);
    if (is_const(a, 1.0))
        return b;
    if (is_const(b, 1.0))
        return a;
    if (is_const(a, -1.0))
        return neg(std::move(b));
    if (is_const(b, -1.0))
        return neg(std::move(a));
    return make(NodeKind::Mul, std::move(a), std::move(b));
}

ExprPtr div(ExprPtr a, ExprPtr b)
{
    double x, y;
    if (literal(a, x) && literal(b, y) && y != 0.0)
        return number(x / y);
    if (is_const(a, 0.0))
        return number(0.0);
    if (is_const(b, 1.0))
        return a;
    return make(NodeKind::Div, std::move(a), std::move(b));
}

ExprPtr pow(ExprPtr a, int k)
{
    if (k == 0)
        return number(1.0);
    if (k == 1)
        return a;
    double x;
    if (literal(a, x))
        return number(std::pow(x, k));
    auto n = make(NodeKind::Pow, std::move(a));
    const_cast<ExprNode&>(*n).index = k;
    return n;
}

ExprPtr func(NodeKind k, ExprPtr a) { return make(k, std::move(a)); }

// ---------------------------------------------------------------- parser

class Parser {
public:
    Parser(std::string_view text, int dim) : s_(text), dim_(dim) {}

    ExprPtr parse()
    {
        auto e = expr();
        skip_ws();
        if (pos_ != s_.size())
            throw SyntaxError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
        return e;
    }

private:
    std::string_view s_;
    int dim_;
    std::size_t pos_ = 0;

    void skip_ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c))
            throw SyntaxError(std::string("expected '") + c + "'", pos_);
    }

    ExprPtr expr()
    {
        auto e = term();
        for (;;) {
            if (accept('+'))
                e = make(NodeKind::Add, e, term());
            else if (accept('-'))
                e = make(NodeKind::Sub, e, term());
            else
                return e;
        }
    }

    ExprPtr term()
    {
        auto e = factor();
        for (;;) {
            if (accept('*'))
                e = make(NodeKind::Mul, e, factor());
            else if (accept('/'))
                e = make(NodeKind::Div, e, factor());
            else
                return e;
        }
    }

    ExprPtr factor()
    {
        bool negate = accept('-');
        auto e = atom();
        if (accept('^')) {
            skip_ws();
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            if (start == pos_)
                throw SyntaxError("expected integer exponent", start);
            long k = std::strtol(std::string(s_.substr(start, pos_ - start)).c_str(), nullptr, 10);
            auto p = make(NodeKind::Pow, e);
            const_cast<ExprNode&>(*p).index = static_cast<int>(k);
            e = p;
        }
        return negate ? make(NodeKind::Neg, e) : e;
    }

    ExprPtr atom()
    {
        skip_ws();
        if (pos_ >= s_.size())
            throw SyntaxError("unexpected end of input", pos_);
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number_literal();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            std::string_view word = s_.substr(start, pos_ - start);
            if (word == "x") {
                std::size_t dstart = pos_;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                    ++pos_;
                if (dstart == pos_)
                    throw SyntaxError("expected coordinate index after 'x'", dstart);
                int idx = std::atoi(std::string(s_.substr(dstart, pos_ - dstart)).c_str());
                if (idx >= dim_)
                    throw CoordinateRangeError("coordinate x" + std::to_string(idx) +
                                               " out of range for chart dimension " +
                                               std::to_string(dim_));
                return coord(idx);
            }
            NodeKind k;
            if (word == "sin")
                k = NodeKind::Sin;
            else if (word == "cos")
                k = NodeKind::Cos;
            else if (word == "exp")
                k = NodeKind::Exp;
            else if (word == "log")
                k = NodeKind::Log;
            else if (word == "sqrt")
                k = NodeKind::Sqrt;
            else
                throw SyntaxError("unknown identifier '" + std::string(word) + "'", start);
            expect('(');
            auto arg = expr();
            expect(')');
            return make(k, arg);
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    ExprPtr number_literal()
    {
        std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
        };
        digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-'))
                ++pos_;
            std::size_t ds = pos_;
            digits();
            if (ds == pos_)
                pos_ = save; // not an exponent after all
        }
        std::string tok(s_.substr(start, pos_ - start));
        if (tok == ".")
            throw SyntaxError("malformed number", start);
        return raw_number(std::strtod(tok.c_str(), nullptr));
    }
};

// ---------------------------------------------------------------- printer

void print(const ExprPtr& e, std::string& out)
{
    auto bin = [&](const char* op) {
        out += '(';
        print(e->lhs, out);
        out += op;
        print(e->rhs, out);
        out += ')';
    };
    auto fn = [&](const char* name) {
        out += name;
        out += '(';
        print(e->lhs, out);
        out += ')';
    };
    switch (e->kind) {
    case NodeKind::Number: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", e->value);
        out += buf;
        break;
    }
    case NodeKind::Coord:
        out += 'x';
        out += std::to_string(e->index);
        break;
    case NodeKind::Neg:
        out += "(-";
        print(e->lhs, out);
        out += ')';
        break;
    case NodeKind::Add: bin(" + "); break;
    case NodeKind::Sub: bin(" - "); break;
    case NodeKind::Mul: bin(" * "); break;
    case NodeKind::Div: bin(" / "); break;
    case NodeKind::Pow:
        out += "((";
        print(e->lhs, out);
        out += ")^" + std::to_string(e->index) + ")";
        break;
    case NodeKind::Sin: fn("sin"); break;
    case NodeKind::Cos: fn("cos"); break;
    case NodeKind::Exp: fn("exp"); break;
    case NodeKind::Log: fn("log"); break;
    case NodeKind::Sqrt: fn("sqrt"); break;
    }
}

// ---------------------------------------------------------------- evaluation

double eval_node(const ExprNode& e, std::span<const double> p)
{
    switch (e.kind) {
    case NodeKind::Number: return e.value;
    case NodeKind::Coord: return p[static_cast<std::size_t>(e.index)];
    case NodeKind::Neg: return -eval_node(*e.lhs, p);
    case NodeKind::Add: return eval_node(*e.lhs, p) + eval_node(*e.rhs, p);
    case NodeKind::Sub: return eval_node(*e.lhs, p) - eval_node(*e.rhs, p);
    case NodeKind::Mul: return eval_node(*e.lhs, p) * eval_node(*e.rhs, p);
    case NodeKind::Div: {
        double d = eval_node(*e.rhs, p);
        if (d == 0.0)
            throw DomainError("division by zero");
        return eval_node(*e.lhs, p) / d;
    }
    case NodeKind::Pow: {
        double b = eval_node(*e.lhs, p);
        double r = 1.0;
        for (int k = 0; k < e.index; ++k)
            r *= b;
        return r;
    }
    case NodeKind::Sin: return std::sin(eval_node(*e.lhs, p));
    case NodeKind::Cos: return std::cos(eval_node(*e.lhs, p));
    case NodeKind::Exp: return std::exp(eval_node(*e.lhs, p));
    case NodeKind::Log: {
        double a = eval_node(*e.lhs, p);
        if (!(a > 0.0))
            throw DomainError("log of non-positive value");
        return std::log(a);
    }
    case NodeKind::Sqrt: {
        double a = eval_node(*e.lhs, p);
        if (a < 0.0)
            throw DomainError("sqrt of negative value");
        return std::sqrt(a);
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------- calculus

ExprPtr derive(const ExprPtr& e, int i)
{
    const auto& a = e->lhs;
    const auto& b = e->rhs;
    switch (e->kind) {
    case NodeKind::Number: return number(0.0);
    case NodeKind::Coord: return number(e->index == i ? 1.0 : 0.0);
    case NodeKind::Neg: return neg(derive(a, i));
    case NodeKind::Add: return add(derive(a, i), derive(b, i));
    case NodeKind::Sub: return sub(derive(a, i), derive(b, i));
    case NodeKind::Mul: return add(mul(derive(a, i), b), mul(a, derive(b, i)));
    case NodeKind::Div:
        return div(sub(mul(derive(a, i), b), mul(a, derive(b, i))), pow(b, 2));
    case NodeKind::Pow:
        return mul(mul(number(e->index), pow(a, e->index - 1)), derive(a, i));
    case NodeKind::Sin: return mul(func(NodeKind::Cos, a), derive(a, i));
    case NodeKind::Cos: return neg(mul(func(NodeKind::Sin, a), derive(a, i)));
    case NodeKind::Exp: return mul(e, derive(a, i));
    case NodeKind::Log: return div(derive(a, i), a);
    case NodeKind::Sqrt: return div(derive(a, i), mul(number(2.0), e));
    }
    return number(0.0);
}

ExprPtr substitute(const ExprPtr& e, std::span<const ScalarField> args)
{
    switch (e->kind) {
    case NodeKind::Number: return e;
    case NodeKind::Coord: return args[static_cast<std::size_t>(e->index)].ast();
    case NodeKind::Neg: return neg(substitute(e->lhs, args));
    case NodeKind::Add: return add(substitute(e->lhs, args), substitute(e->rhs, args));
    case NodeKind::Sub: return sub(substitute(e->lhs, args), substitute(e->rhs, args));
    case NodeKind::Mul: return mul(substitute(e->lhs, args), substitute(e->rhs, args));
    case NodeKind::Div: return div(substitute(e->lhs, args), substitute(e->rhs, args));
    case NodeKind::Pow: return pow(substitute(e->lhs, args), e->index);
    default: return func(e->kind, substitute(e->lhs, args));
    }
}

} // namespace

bool structurally_equal(const ExprPtr& a, const ExprPtr& b)
{
    if (a == b)
        return true;
    if (!a || !b || a->kind != b->kind)
        return false;
    switch (a->kind) {
    case NodeKind::Number: return a->value == b->value;
    case NodeKind::Coord: return a->index == b->index;
    case NodeKind::Pow:
        return a->index == b->index && structurally_equal(a->lhs, b->lhs);
    default:
        return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    }
}

std::string to_string(const ExprPtr& e)
{
    std::string out;
    print(e, out);
    return out;
}

ScalarField::ScalarField(ExprPtr root, int dim) : root_(std::move(root)), dim_(dim) {}

ScalarField ScalarField::parse(std::string_view text, int dim)
{
    return ScalarField(Parser(text, dim).parse(), dim);
}

ScalarField ScalarField::constant(double v, int dim) { return ScalarField(number(v), dim); }

ScalarField ScalarField::coordinate(int i, int dim)
{
    if (i < 0 || i >= dim)
        throw CoordinateRangeError("coordinate index out of range");
    return ScalarField(coord(i), dim);
}

double ScalarField::eval(std::span<const double> point) const
{
    double v = eval_node(*root_, point);
    if (!std::isfinite(v))
        throw DomainError("non-finite value for " + str());
    return v;
}

ScalarField ScalarField::exact_partial(int i) const
{
    if (i < 0 || i >= dim_)
        throw CoordinateRangeError("partial index out of range");
    return ScalarField(derive(root_, i), dim_);
}

double ScalarField::fd_partial(int i, std::span<const double> point, double h) const
{
    std::vector<double> q(point.begin(), point.end());
    q[static_cast<std::size_t>(i)] = point[static_cast<std::size_t>(i)] + h;
    double fp = eval(q);
    q[static_cast<std::size_t>(i)] = point[static_cast<std::size_t>(i)] - h;
    double fm = eval(q);
    return (fp - fm) / (2.0 * h);
}

ScalarField ScalarField::compose(std::span<const ScalarField> args) const
{
    if (static_cast<int>(args.size()) != dim_)
        throw std::invalid_argument("compose: argument count must equal chart dimension");
    int d = args.empty() ? 0 : args.front().dim();
    return ScalarField(substitute(root_, args), d);
}

bool ScalarField::is_zero() const { return is_const(root_, 0.0); }

ScalarField operator+(const ScalarField& a, const ScalarField& b)
{
    return ScalarField(add(a.root_, b.root_), a.dim_);
}
ScalarField operator-(const ScalarField& a, const ScalarField& b)
{
    return ScalarField(sub(a.root_, b.root_), a.dim_);
}
ScalarField operator*(const ScalarField& a, const ScalarField& b)
{
    return ScalarField(mul(a.root_, b.root_), a.dim_);
}
ScalarField operator/(const ScalarField& a, const ScalarField& b)
{
    return ScalarField(div(a.root_, b.root_), a.dim_);
}
ScalarField operator-(const ScalarField& a) { return ScalarField(neg(a.root_), a.dim_); }

ScalarField exp(const ScalarField& a) { return ScalarField(func(NodeKind::Exp, a.ast()), a.dim()); }

std::vector<ScalarField> parse_all(const std::vector<std::string>& texts, int dim)
{
    std::vector<ScalarField> out;
    out.reserve(texts.size());
    for (const auto& t : texts)
        out.push_back(ScalarField::parse(t, dim));
    return out;
}

} // namespace nullgeo
