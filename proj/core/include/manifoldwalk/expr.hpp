#pragma once

// Scalar expression parsing and exact differentiation.
//
// Grammar (whitespace-insensitive):
//   expression := term (('+' | '-') term)*
//   term       := unary (('*' | '/') unary | unary-juxtaposed)*
//   unary      := '-' unary | power
//   power      := primary ('^' exponent)?        exponent binds tighter than
//   exponent   := '-' exponent | primary ('^' exponent)?       unary minus
//   primary    := number | 'pi' | variable | func '(' expression ')'
//               | '(' expression ')'
// Juxtaposition multiplies: "2 x1 cos(x2)".  '^' is right-associative and its
// exponent must fold to a constant at parse time.  Variables are x, y, z or
// x1..xd; functions are sin, cos, exp, log, sqrt.

#include <memory>
#include <string>
#include <vector>

#include "manifoldwalk/linalg.hpp"

namespace mwalk {

struct AstNode {
    enum class Kind {
        Constant, Variable, Neg, Sin, Cos, Exp, Log, Sqrt,
        Add, Sub, Mul, Div, Pow,
    };
    Kind kind;
    double constant = 0.0;  // Constant payload
    int var = -1;           // Variable payload
    double exponent = 0.0;  // Pow payload (folded at parse time)
    std::shared_ptr<const AstNode> a;  // unary child / left operand / Pow base
    std::shared_ptr<const AstNode> b;  // right operand
};

// Immutable expression over a fixed number of variables; cheap to copy and
// safe to share across threads.
class Ast {
public:
    Ast() = default;
    Ast(std::shared_ptr<const AstNode> root, int arity)
        : root_(std::move(root)), arity_(arity) {}

    bool valid() const { return root_ != nullptr; }
    int arity() const { return arity_; }
    const std::shared_ptr<const AstNode>& root() const { return root_; }

private:
    std::shared_ptr<const AstNode> root_;
    int arity_ = 0;
};

// Throws SyntaxError (with byte offset), UnknownIdentifier, or ArityMismatch.
Ast parse_expression(const std::string& text, int arity);

// Value, gradient and Hessian at a point.  The Hessian is stored as a packed
// upper triangle and is symmetric by construction.
class Jet2 {
public:
    explicit Jet2(int dim) : grad(dim, 0.0), dim_(dim),
                             packed_(static_cast<size_t>(dim) * (dim + 1) / 2, 0.0) {}

    int dim() const { return dim_; }
    double hess(int i, int j) const { return packed_[index(i, j)]; }
    void set_hess(int i, int j, double h) { packed_[index(i, j)] = h; }
    Mat hess_matrix() const;

    double value = 0.0;
    Vec grad;

private:
    size_t index(int i, int j) const {
        if (i > j) { int t = i; i = j; j = t; }
        return static_cast<size_t>(i) * dim_ - static_cast<size_t>(i) * (i - 1) / 2 + (j - i);
    }
    int dim_;
    Vec packed_;
};

struct Jet1 {
    double value = 0.0;
    Vec grad;
};

// Plain evaluation; bit-identical to the value component of the jets.
double eval_value(const Ast& ast, const Vec& x);
Jet1 eval_jet1(const Ast& ast, const Vec& x);
// Exact first and second derivatives via hyper-dual passes over index pairs.
Jet2 eval_jet(const Ast& ast, const Vec& x);

// Canonical parenthesized form; parse(to_string(a)) is structurally equal
// to a.  Variables print as x1..xd.
std::string to_string(const Ast& ast);
bool structurally_equal(const Ast& lhs, const Ast& rhs);

// A vector of expressions sharing one variable list, e.g. the component
// functions of a parameterization or constraint.
class VectorExpr {
public:
    VectorExpr() = default;
    explicit VectorExpr(std::vector<Ast> components);

    int arity() const { return arity_; }
    int size() const { return static_cast<int>(components_.size()); }
    const std::vector<Ast>& components() const { return components_; }

    Vec value(const Vec& x) const;
    Mat jacobian(const Vec& x) const;               // size × arity
    std::vector<Mat> hessians(const Vec& x) const;  // size entries, arity × arity

private:
    std::vector<Ast> components_;
    int arity_ = 0;
};

}  // namespace mwalk
