#include "manifoldwalk/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>

#include "manifoldwalk/errors.hpp"
#include "scalar_ad.hpp"

namespace mwalk {
namespace {

using NodePtr = std::shared_ptr<const AstNode>;
using Kind = AstNode::Kind;

NodePtr make_const(double v) {
    auto n = std::make_shared<AstNode>();
    n->kind = Kind::Constant;
    n->constant = v;
    return n;
}

NodePtr make_var(int index) {
    auto n = std::make_shared<AstNode>();
    n->kind = Kind::Variable;
    n->var = index;
    return n;
}

NodePtr make_unary(Kind k, NodePtr a) {
    auto n = std::make_shared<AstNode>();
    n->kind = k;
    n->a = std::move(a);
    return n;
}

NodePtr make_binary(Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<AstNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_pow(NodePtr base, double exponent) {
    auto n = std::make_shared<AstNode>();
    n->kind = Kind::Pow;
    n->a = std::move(base);
    n->exponent = exponent;
    return n;
}

struct Token {
    enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Kind kind;
    double number = 0.0;
    std::string ident;
    size_t offset = 0;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            if (i < n && text[i] == '.') {
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            }
            // Exponent part only when a digit actually follows, so "2e" stays
            // a number and an identifier.
            if (i < n && (text[i] == 'e' || text[i] == 'E')) {
                size_t j = i + 1;
                if (j < n && (text[j] == '+' || text[j] == '-')) ++j;
                if (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
                    i = j;
                    while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                }
            }
            Token t;
            t.kind = Token::Kind::Number;
            t.number = std::strtod(text.substr(start, i - start).c_str(), nullptr);
            t.offset = start;
            out.push_back(std::move(t));
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                ++i;
            Token t;
            t.kind = Token::Kind::Ident;
            t.ident = text.substr(start, i - start);
            t.offset = start;
            out.push_back(std::move(t));
            continue;
        }
        Token t;
        t.offset = start;
        switch (c) {
            case '+': t.kind = Token::Kind::Plus; break;
            case '-': t.kind = Token::Kind::Minus; break;
            case '*': t.kind = Token::Kind::Star; break;
            case '/': t.kind = Token::Kind::Slash; break;
            case '^': t.kind = Token::Kind::Caret; break;
            case '(': t.kind = Token::Kind::LParen; break;
            case ')': t.kind = Token::Kind::RParen; break;
            default:
                throw SyntaxError("unexpected character '" + std::string(1, c) +
                                      "' at byte " + std::to_string(start),
                                  start);
        }
        ++i;
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Token::Kind::End;
    end.offset = n;
    out.push_back(std::move(end));
    return out;
}

std::optional<double> fold_constant(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Constant: return n->constant;
        case Kind::Variable: return std::nullopt;
        case Kind::Neg:
            if (auto a = fold_constant(n->a)) return -*a;
            return std::nullopt;
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Exp:
        case Kind::Log:
        case Kind::Sqrt: {
            auto a = fold_constant(n->a);
            if (!a) return std::nullopt;
            switch (n->kind) {
                case Kind::Sin: return std::sin(*a);
                case Kind::Cos: return std::cos(*a);
                case Kind::Exp: return std::exp(*a);
                case Kind::Log: return *a > 0.0 ? std::optional<double>(std::log(*a)) : std::nullopt;
                default: return *a >= 0.0 ? std::optional<double>(std::sqrt(*a)) : std::nullopt;
            }
        }
        case Kind::Pow: {
            auto a = fold_constant(n->a);
            if (!a) return std::nullopt;
            return detail::pow_const(*a, n->exponent);
        }
        default: {
            auto a = fold_constant(n->a);
            auto b = fold_constant(n->b);
            if (!a || !b) return std::nullopt;
            switch (n->kind) {
                case Kind::Add: return *a + *b;
                case Kind::Sub: return *a - *b;
                case Kind::Mul: return *a * *b;
                default: return *b != 0.0 ? std::optional<double>(*a / *b) : std::nullopt;
            }
        }
    }
}

class Parser {
public:
    Parser(std::vector<Token> tokens, int arity)
        : toks_(std::move(tokens)), arity_(arity) {}

    NodePtr run() {
        NodePtr n = expression();
        if (peek().kind != Token::Kind::End)
            throw SyntaxError("unexpected trailing input at byte " +
                                  std::to_string(peek().offset),
                              peek().offset);
        return n;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }

    bool starts_operand(Token::Kind k) const {
        return k == Token::Kind::Number || k == Token::Kind::Ident ||
               k == Token::Kind::LParen;
    }

    NodePtr expression() {
        NodePtr n = term();
        while (peek().kind == Token::Kind::Plus || peek().kind == Token::Kind::Minus) {
            Kind k = take().kind == Token::Kind::Plus ? Kind::Add : Kind::Sub;
            n = make_binary(k, n, term());
        }
        return n;
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (peek().kind == Token::Kind::Star || peek().kind == Token::Kind::Slash) {
                Kind k = take().kind == Token::Kind::Star ? Kind::Mul : Kind::Div;
                n = make_binary(k, n, unary());
            } else if (starts_operand(peek().kind)) {
                n = make_binary(Kind::Mul, n, unary());
            } else {
                return n;
            }
        }
    }

    NodePtr unary() {
        if (peek().kind == Token::Kind::Minus) {
            take();
            return make_unary(Kind::Neg, unary());
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (peek().kind == Token::Kind::Caret) {
            size_t off = take().offset;
            NodePtr e = exponent();
            auto c = fold_constant(e);
            if (!c)
                throw SyntaxError("exponent at byte " + std::to_string(off) +
                                      " must be a constant",
                                  off);
            return make_pow(base, *c);
        }
        return base;
    }

    // Right-associative and allowed a leading minus, per "^ binds tighter
    // than unary minus" applying to the base, not the exponent.
    NodePtr exponent() {
        if (peek().kind == Token::Kind::Minus) {
            take();
            return make_unary(Kind::Neg, exponent());
        }
        NodePtr base = primary();
        if (peek().kind == Token::Kind::Caret) {
            size_t off = take().offset;
            NodePtr e = exponent();
            auto c = fold_constant(e);
            if (!c)
                throw SyntaxError("exponent at byte " + std::to_string(off) +
                                      " must be a constant",
                                  off);
            return make_pow(base, *c);
        }
        return base;
    }

    NodePtr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Token::Kind::Number:
                return make_const(take().number);
            case Token::Kind::LParen: {
                take();
                NodePtr n = expression();
                if (peek().kind != Token::Kind::RParen)
                    throw SyntaxError("expected ')' at byte " + std::to_string(peek().offset),
                                      peek().offset);
                take();
                return n;
            }
            case Token::Kind::Ident:
                return identifier();
            default:
                throw SyntaxError("unexpected token at byte " + std::to_string(t.offset),
                                  t.offset);
        }
    }

    NodePtr identifier() {
        Token t = take();
        const std::string& name = t.ident;
        if (name == "pi") return make_const(3.141592653589793238462643383279502884);

        Kind func;
        bool is_func = true;
        if (name == "sin") func = Kind::Sin;
        else if (name == "cos") func = Kind::Cos;
        else if (name == "exp") func = Kind::Exp;
        else if (name == "log") func = Kind::Log;
        else if (name == "sqrt") func = Kind::Sqrt;
        else is_func = false;

        if (is_func) {
            if (peek().kind != Token::Kind::LParen)
                throw SyntaxError("function '" + name + "' at byte " +
                                      std::to_string(t.offset) +
                                      " requires a parenthesized argument",
                                  t.offset);
            take();
            NodePtr arg = expression();
            if (peek().kind != Token::Kind::RParen)
                throw SyntaxError("expected ')' at byte " + std::to_string(peek().offset),
                                  peek().offset);
            take();
            return make_unary(func, arg);
        }

        int index = variable_index(name);
        if (index < 0)
            throw UnknownIdentifier("unknown identifier '" + name + "' at byte " +
                                    std::to_string(t.offset));
        if (index >= arity_)
            throw ArityMismatch("variable '" + name + "' needs index " +
                                std::to_string(index + 1) + " but arity is " +
                                std::to_string(arity_));
        return make_var(index);
    }

    // x, y, z name the first three variables; x1..xd name them explicitly.
    static int variable_index(const std::string& name) {
        if (name == "x") return 0;
        if (name == "y") return 1;
        if (name == "z") return 2;
        if (name.size() >= 2 && name[0] == 'x') {
            long idx = 0;
            for (size_t i = 1; i < name.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) return -1;
                idx = idx * 10 + (name[i] - '0');
                if (idx > 1000000) return -1;
            }
            return idx >= 1 ? static_cast<int>(idx - 1) : -1;
        }
        return -1;
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
    int arity_;
};

std::string node_to_string(const AstNode* n);

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string node_to_string(const AstNode* n) {
    switch (n->kind) {
        case Kind::Constant: {
            if (n->constant < 0.0)
                return "(" + format_double(n->constant) + ")";
            return format_double(n->constant);
        }
        case Kind::Variable: return "x" + std::to_string(n->var + 1);
        case Kind::Neg: return "(-" + node_to_string(n->a.get()) + ")";
        case Kind::Sin: return "sin(" + node_to_string(n->a.get()) + ")";
        case Kind::Cos: return "cos(" + node_to_string(n->a.get()) + ")";
        case Kind::Exp: return "exp(" + node_to_string(n->a.get()) + ")";
        case Kind::Log: return "log(" + node_to_string(n->a.get()) + ")";
        case Kind::Sqrt: return "sqrt(" + node_to_string(n->a.get()) + ")";
        case Kind::Add:
            return "(" + node_to_string(n->a.get()) + " + " + node_to_string(n->b.get()) + ")";
        case Kind::Sub:
            return "(" + node_to_string(n->a.get()) + " - " + node_to_string(n->b.get()) + ")";
        case Kind::Mul:
            return "(" + node_to_string(n->a.get()) + " * " + node_to_string(n->b.get()) + ")";
        case Kind::Div:
            return "(" + node_to_string(n->a.get()) + " / " + node_to_string(n->b.get()) + ")";
        case Kind::Pow: {
            std::string e = format_double(n->exponent);
            if (n->exponent < 0.0) e = "(" + e + ")";
            return "(" + node_to_string(n->a.get()) + " ^ " + e + ")";
        }
    }
    return "";
}

[[noreturn]] void domain_fault(const char* what, const AstNode* n) {
    throw DomainError(std::string(what) + " in '" + node_to_string(n) + "'");
}

template <class S, class VarFn>
S eval_node(const AstNode* n, const VarFn& var) {
    using detail::value_of;
    using std::sin; using std::cos; using std::exp; using std::log; using std::sqrt;
    using detail::pow_const;
    switch (n->kind) {
        case Kind::Constant: return S{} + n->constant;
        case Kind::Variable: return var(n->var);
        case Kind::Neg: return -eval_node<S>(n->a.get(), var);
        case Kind::Sin: return sin(eval_node<S>(n->a.get(), var));
        case Kind::Cos: return cos(eval_node<S>(n->a.get(), var));
        case Kind::Exp: return exp(eval_node<S>(n->a.get(), var));
        case Kind::Log: {
            S a = eval_node<S>(n->a.get(), var);
            if (!(value_of(a) > 0.0)) domain_fault("log of non-positive value", n);
            return log(a);
        }
        case Kind::Sqrt: {
            S a = eval_node<S>(n->a.get(), var);
            if (value_of(a) < 0.0) domain_fault("sqrt of negative value", n);
            return sqrt(a);
        }
        case Kind::Add: return eval_node<S>(n->a.get(), var) + eval_node<S>(n->b.get(), var);
        case Kind::Sub: return eval_node<S>(n->a.get(), var) - eval_node<S>(n->b.get(), var);
        case Kind::Mul: return eval_node<S>(n->a.get(), var) * eval_node<S>(n->b.get(), var);
        case Kind::Div: {
            S b = eval_node<S>(n->b.get(), var);
            if (value_of(b) == 0.0) domain_fault("division by zero", n);
            return eval_node<S>(n->a.get(), var) / b;
        }
        case Kind::Pow: {
            S a = eval_node<S>(n->a.get(), var);
            double c = n->exponent;
            bool integral = std::rint(c) == c;
            if (!integral && value_of(a) < 0.0)
                domain_fault("fractional power of negative value", n);
            if (value_of(a) == 0.0 && c < 0.0)
                domain_fault("negative power of zero", n);
            return pow_const(a, c);
        }
    }
    domain_fault("invalid node", n);
}

// `S{} + double` must promote the constant; give the AD types that operator.
using detail::Dual;
using detail::HyperDual;

}  // namespace
}  // namespace mwalk

namespace mwalk::detail {
inline Dual operator+(Dual a, double c) { return {a.v + c, a.d}; }
inline HyperDual operator+(const HyperDual& a, double c) {
    return {a.v + c, a.d1, a.d2, a.d12};
}
}  // namespace mwalk::detail

namespace mwalk {

Ast parse_expression(const std::string& text, int arity) {
    if (arity < 0) throw DimensionError("parse_expression: negative arity");
    Parser p(tokenize(text), arity);
    return Ast(p.run(), arity);
}

Mat Jet2::hess_matrix() const {
    Mat h(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) h(i, j) = hess(i, j);
    return h;
}

double eval_value(const Ast& ast, const Vec& x) {
    if (!ast.valid()) throw Error("eval_value: empty expression");
    if (static_cast<int>(x.size()) != ast.arity())
        throw DimensionError("eval_value: point size differs from arity");
    return eval_node<double>(ast.root().get(), [&](int i) { return x[i]; });
}

Jet1 eval_jet1(const Ast& ast, const Vec& x) {
    if (!ast.valid()) throw Error("eval_jet1: empty expression");
    if (static_cast<int>(x.size()) != ast.arity())
        throw DimensionError("eval_jet1: point size differs from arity");
    const int d = ast.arity();
    Jet1 out;
    out.grad.assign(d, 0.0);
    if (d == 0) {
        out.value = eval_node<double>(ast.root().get(), [&](int) { return 0.0; });
        return out;
    }
    for (int k = 0; k < d; ++k) {
        Dual r = eval_node<Dual>(ast.root().get(), [&](int i) {
            return Dual{x[i], i == k ? 1.0 : 0.0};
        });
        out.grad[k] = r.d;
        if (k == 0) out.value = r.v;
    }
    return out;
}

Jet2 eval_jet(const Ast& ast, const Vec& x) {
    if (!ast.valid()) throw Error("eval_jet: empty expression");
    if (static_cast<int>(x.size()) != ast.arity())
        throw DimensionError("eval_jet: point size differs from arity");
    const int d = ast.arity();
    Jet2 out(d);
    if (d == 0) {
        out.value = eval_node<double>(ast.root().get(), [&](int) { return 0.0; });
        return out;
    }
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            HyperDual r = eval_node<HyperDual>(ast.root().get(), [&](int k) {
                return HyperDual{x[k], k == i ? 1.0 : 0.0, k == j ? 1.0 : 0.0, 0.0};
            });
            if (i == j) {
                out.grad[i] = r.d1;
                if (i == 0) out.value = r.v;
            }
            out.set_hess(i, j, r.d12);
        }
    }
    return out;
}

std::string to_string(const Ast& ast) {
    if (!ast.valid()) return "";
    return node_to_string(ast.root().get());
}

bool structurally_equal(const Ast& lhs, const Ast& rhs) {
    if (lhs.arity() != rhs.arity()) return false;
    struct Cmp {
        static bool eq(const AstNode* a, const AstNode* b) {
            if (a == b) return true;
            if (!a || !b || a->kind != b->kind) return false;
            switch (a->kind) {
                case Kind::Constant: return a->constant == b->constant;
                case Kind::Variable: return a->var == b->var;
                case Kind::Pow:
                    return a->exponent == b->exponent && eq(a->a.get(), b->a.get());
                case Kind::Neg:
                case Kind::Sin:
                case Kind::Cos:
                case Kind::Exp:
                case Kind::Log:
                case Kind::Sqrt:
                    return eq(a->a.get(), b->a.get());
                default:
                    return eq(a->a.get(), b->a.get()) && eq(a->b.get(), b->b.get());
            }
        }
    };
    return Cmp::eq(lhs.root().get(), rhs.root().get());
}

VectorExpr::VectorExpr(std::vector<Ast> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw DimensionError("VectorExpr: no components");
    arity_ = components_[0].arity();
    for (const Ast& a : components_)
        if (a.arity() != arity_)
            throw DimensionError("VectorExpr: mixed arities");
}

Vec VectorExpr::value(const Vec& x) const {
    Vec out(components_.size());
    for (size_t i = 0; i < components_.size(); ++i) out[i] = eval_value(components_[i], x);
    return out;
}

Mat VectorExpr::jacobian(const Vec& x) const {
    Mat out(size(), arity_);
    for (int i = 0; i < size(); ++i) {
        Jet1 j = eval_jet1(components_[i], x);
        for (int k = 0; k < arity_; ++k) out(i, k) = j.grad[k];
    }
    return out;
}

std::vector<Mat> VectorExpr::hessians(const Vec& x) const {
    std::vector<Mat> out;
    out.reserve(components_.size());
    for (const Ast& a : components_) out.push_back(eval_jet(a, x).hess_matrix());
    return out;
}

}  // namespace mwalk
