#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ccert {

// Scalar expression AST over a fixed list of coordinates.
// Nodes are immutable after construction and safe to share across threads.
class Expr {
public:
    enum class Kind { Constant, Variable, Unary, Binary, IntPow };
    enum class UnaryOp { Neg, Sin, Cos, Tan, Exp, Sqrt, Abs, Sign };
    enum class BinaryOp { Add, Sub, Mul, Div };

    struct Node {
        Kind kind;
        double value = 0.0;   // Constant
        int index = 0;        // Variable
        int exponent = 0;     // IntPow
        UnaryOp uop = UnaryOp::Neg;
        BinaryOp bop = BinaryOp::Add;
        std::shared_ptr<const Node> a, b;
    };

    Expr() : node_(zero_node()) {}

    // Simplifying constructors: constant folding and 0/1 elimination keep
    // iterated differentiation from blowing up.
    static Expr constant(double v);
    static Expr variable(int index);
    static Expr unary(UnaryOp op, const Expr& e);
    static Expr binary(BinaryOp op, const Expr& x, const Expr& y);
    static Expr int_pow(const Expr& base, int exponent);

    Kind kind() const { return node_->kind; }
    double constant_value() const;
    int variable_index() const;
    int pow_exponent() const { return node_->exponent; }
    UnaryOp unary_op() const { return node_->uop; }
    BinaryOp binary_op() const { return node_->bop; }
    Expr child_a() const { return Expr(node_->a); }
    Expr child_b() const { return Expr(node_->b); }

    bool is_constant() const { return kind() == Kind::Constant; }
    bool is_zero() const;
    bool is_one() const;

    // Largest variable index used, or -1 for a constant expression.
    int max_variable() const;

    double eval(std::span<const double> x) const;
    Expr diff(int var) const;
    std::string str() const;

    bool same_node(const Expr& other) const { return node_ == other.node_; }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static const std::shared_ptr<const Node>& zero_node();
    std::shared_ptr<const Node> node_;

    friend class ExprProgram;
};

Expr operator+(const Expr& x, const Expr& y);
Expr operator-(const Expr& x, const Expr& y);
Expr operator*(const Expr& x, const Expr& y);
Expr operator/(const Expr& x, const Expr& y);
Expr operator-(const Expr& x);

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t position)
        : std::runtime_error(msg), position(position) {}
    std::size_t position;
};

struct EvalError : std::runtime_error {
    EvalError(const std::string& msg, std::string subexpr)
        : std::runtime_error(msg + " in '" + subexpr + "'"), subexpr(std::move(subexpr)) {}
    std::string subexpr;
};

// Parse an infix expression; identifiers must come from `coords` (plus the
// built-in constant `pi` and function names). Precedence: ^ binds tighter
// than unary minus, then *,/ then +,-. `^` requires a constant integer
// exponent.
Expr parse_expr(std::string_view source, const std::vector<std::string>& coords);

// Flat postfix program for fast repeated evaluation inside integrators.
// Holds shared ownership of nothing mutable; safe to evaluate concurrently
// with distinct stack buffers.
class ExprProgram {
public:
    ExprProgram() = default;
    explicit ExprProgram(const Expr& e);

    double eval(std::span<const double> x, std::vector<double>& stack) const;
    std::size_t stack_size() const { return stack_need_; }

private:
    struct Op {
        int code;       // 0 const, 1 var, 2 unary, 3 binary, 4 intpow
        int arg;        // var index / uop / bop / exponent
        double value;
    };
    std::vector<Op> ops_;
    std::size_t stack_need_ = 1;
};

}  // namespace ccert
