#include "ccert/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace ccert {

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Expr::Kind::Constant;
    n->value = v;
    return n;
}

bool node_is_const(const NodePtr& n, double v) {
    return n->kind == Expr::Kind::Constant && n->value == v;
}

}  // namespace

const std::shared_ptr<const Expr::Node>& Expr::zero_node() {
    static const NodePtr zero = make_const(0.0);
    return zero;
}

Expr Expr::constant(double v) { return Expr(make_const(v)); }

Expr Expr::variable(int index) {
    if (index < 0) throw std::invalid_argument("variable index must be nonnegative");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->index = index;
    return Expr(std::move(n));
}

double Expr::constant_value() const {
    if (kind() != Kind::Constant) throw std::logic_error("not a constant");
    return node_->value;
}

int Expr::variable_index() const {
    if (kind() != Kind::Variable) throw std::logic_error("not a variable");
    return node_->index;
}

bool Expr::is_zero() const { return node_is_const(node_, 0.0); }
bool Expr::is_one() const { return node_is_const(node_, 1.0); }

Expr Expr::unary(UnaryOp op, const Expr& e) {
    if (e.is_constant()) {
        double v = e.constant_value();
        switch (op) {
            case UnaryOp::Neg: return constant(-v);
            case UnaryOp::Sin: return constant(std::sin(v));
            case UnaryOp::Cos: return constant(std::cos(v));
            case UnaryOp::Tan: return constant(std::tan(v));
            case UnaryOp::Exp: return constant(std::exp(v));
            case UnaryOp::Sqrt:
                if (v >= 0) return constant(std::sqrt(v));
                break;  // keep symbolic; eval reports the domain error
            case UnaryOp::Abs: return constant(std::fabs(v));
            case UnaryOp::Sign: return constant(v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0));
        }
    }
    if (op == UnaryOp::Neg && e.kind() == Kind::Unary && e.unary_op() == UnaryOp::Neg)
        return e.child_a();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Unary;
    n->uop = op;
    n->a = e.node_;
    return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, const Expr& x, const Expr& y) {
    if (x.is_constant() && y.is_constant()) {
        double a = x.constant_value(), b = y.constant_value();
        switch (op) {
            case BinaryOp::Add: return constant(a + b);
            case BinaryOp::Sub: return constant(a - b);
            case BinaryOp::Mul: return constant(a * b);
            case BinaryOp::Div:
                if (b != 0) return constant(a / b);
                break;
        }
    }
    switch (op) {
        case BinaryOp::Add:
            if (x.is_zero()) return y;
            if (y.is_zero()) return x;
            break;
        case BinaryOp::Sub:
            if (y.is_zero()) return x;
            if (x.is_zero()) return unary(UnaryOp::Neg, y);
            if (x.same_node(y)) return constant(0.0);
            break;
        case BinaryOp::Mul:
            if (x.is_zero() || y.is_zero()) return constant(0.0);
            if (x.is_one()) return y;
            if (y.is_one()) return x;
            if (x.is_constant() && x.constant_value() == -1.0) return unary(UnaryOp::Neg, y);
            if (y.is_constant() && y.constant_value() == -1.0) return unary(UnaryOp::Neg, x);
            break;
        case BinaryOp::Div:
            if (x.is_zero()) return constant(0.0);
            if (y.is_one()) return x;
            break;
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Binary;
    n->bop = op;
    n->a = x.node_;
    n->b = y.node_;
    return Expr(std::move(n));
}

Expr Expr::int_pow(const Expr& base, int exponent) {
    if (exponent == 0) return constant(1.0);
    if (exponent == 1) return base;
    if (base.is_constant()) return constant(std::pow(base.constant_value(), exponent));
    if (base.is_zero()) return constant(0.0);
    if (base.is_one()) return constant(1.0);
    auto n = std::make_shared<Node>();
    n->kind = Kind::IntPow;
    n->exponent = exponent;
    n->a = base.node_;
    return Expr(std::move(n));
}

Expr operator+(const Expr& x, const Expr& y) { return Expr::binary(Expr::BinaryOp::Add, x, y); }
Expr operator-(const Expr& x, const Expr& y) { return Expr::binary(Expr::BinaryOp::Sub, x, y); }
Expr operator*(const Expr& x, const Expr& y) { return Expr::binary(Expr::BinaryOp::Mul, x, y); }
Expr operator/(const Expr& x, const Expr& y) { return Expr::binary(Expr::BinaryOp::Div, x, y); }
Expr operator-(const Expr& x) { return Expr::unary(Expr::UnaryOp::Neg, x); }

int Expr::max_variable() const {
    switch (kind()) {
        case Kind::Constant: return -1;
        case Kind::Variable: return node_->index;
        case Kind::Unary:
        case Kind::IntPow: return child_a().max_variable();
        case Kind::Binary: return std::max(child_a().max_variable(), child_b().max_variable());
    }
    return -1;
}

double Expr::eval(std::span<const double> x) const {
    switch (kind()) {
        case Kind::Constant: return node_->value;
        case Kind::Variable: {
            int i = node_->index;
            if (i >= static_cast<int>(x.size()))
                throw EvalError("point has too few coordinates", str());
            return x[i];
        }
        case Kind::Unary: {
            double v = child_a().eval(x);
            switch (unary_op()) {
                case UnaryOp::Neg: return -v;
                case UnaryOp::Sin: return std::sin(v);
                case UnaryOp::Cos: return std::cos(v);
                case UnaryOp::Tan: return std::tan(v);
                case UnaryOp::Exp: return std::exp(v);
                case UnaryOp::Sqrt:
                    if (v < 0) throw EvalError("sqrt of negative value", str());
                    return std::sqrt(v);
                case UnaryOp::Abs: return std::fabs(v);
                case UnaryOp::Sign: return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
            }
            return 0;
        }
        case Kind::Binary: {
            double a = child_a().eval(x);
            double b = child_b().eval(x);
            switch (binary_op()) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div:
                    if (b == 0) throw EvalError("division by zero", str());
                    return a / b;
            }
            return 0;
        }
        case Kind::IntPow: {
            double a = child_a().eval(x);
            if (a == 0 && node_->exponent < 0) throw EvalError("zero raised to negative power", str());
            return std::pow(a, node_->exponent);
        }
    }
    return 0;
}

Expr Expr::diff(int var) const {
    switch (kind()) {
        case Kind::Constant: return constant(0.0);
        case Kind::Variable: return constant(node_->index == var ? 1.0 : 0.0);
        case Kind::Unary: {
            Expr u = child_a();
            Expr du = u.diff(var);
            if (du.is_zero()) return constant(0.0);
            switch (unary_op()) {
                case UnaryOp::Neg: return -du;
                case UnaryOp::Sin: return unary(UnaryOp::Cos, u) * du;
                case UnaryOp::Cos: return -(unary(UnaryOp::Sin, u) * du);
                case UnaryOp::Tan:
                    // 1 + tan^2
                    return (constant(1.0) + int_pow(unary(UnaryOp::Tan, u), 2)) * du;
                case UnaryOp::Exp: return unary(UnaryOp::Exp, u) * du;
                case UnaryOp::Sqrt:
                    return du / (constant(2.0) * unary(UnaryOp::Sqrt, u));
                case UnaryOp::Abs:
                    // sign(0) = 0 by convention
                    return unary(UnaryOp::Sign, u) * du;
                case UnaryOp::Sign: return constant(0.0);
            }
            return constant(0.0);
        }
        case Kind::Binary: {
            Expr a = child_a(), b = child_b();
            Expr da = a.diff(var), db = b.diff(var);
            switch (binary_op()) {
                case BinaryOp::Add: return da + db;
                case BinaryOp::Sub: return da - db;
                case BinaryOp::Mul: return da * b + a * db;
                case BinaryOp::Div: return (da * b - a * db) / int_pow(b, 2);
            }
            return constant(0.0);
        }
        case Kind::IntPow: {
            Expr a = child_a();
            Expr da = a.diff(var);
            int k = node_->exponent;
            return constant(static_cast<double>(k)) * int_pow(a, k - 1) * da;
        }
    }
    return constant(0.0);
}

namespace {

void format_double(double v, std::string& out) {
    if (v == static_cast<long long>(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        out += buf;
    } else {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out += buf;
    }
}

const char* unary_name(Expr::UnaryOp op) {
    switch (op) {
        case Expr::UnaryOp::Neg: return "-";
        case Expr::UnaryOp::Sin: return "sin";
        case Expr::UnaryOp::Cos: return "cos";
        case Expr::UnaryOp::Tan: return "tan";
        case Expr::UnaryOp::Exp: return "exp";
        case Expr::UnaryOp::Sqrt: return "sqrt";
        case Expr::UnaryOp::Abs: return "abs";
        case Expr::UnaryOp::Sign: return "sign";
    }
    return "?";
}

// Precedence levels for printing: 0 add, 1 mul, 2 unary-neg, 3 pow/atom.
int precedence(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Binary:
            return (e.binary_op() == Expr::BinaryOp::Add || e.binary_op() == Expr::BinaryOp::Sub) ? 0 : 1;
        case Expr::Kind::Unary:
            return e.unary_op() == Expr::UnaryOp::Neg ? 2 : 4;
        case Expr::Kind::IntPow: return 3;
        case Expr::Kind::Constant:
            return e.constant_value() < 0 ? 2 : 4;
        default: return 4;
    }
}

void print_expr(const Expr& e, std::string& out, int parent_prec) {
    int prec = precedence(e);
    bool parens = prec < parent_prec;
    if (parens) out += '(';
    switch (e.kind()) {
        case Expr::Kind::Constant: format_double(e.constant_value(), out); break;
        case Expr::Kind::Variable: {
            out += "x";
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%d", e.variable_index());
            out += buf;
            break;
        }
        case Expr::Kind::Unary:
            if (e.unary_op() == Expr::UnaryOp::Neg) {
                out += '-';
                print_expr(e.child_a(), out, 3);
            } else {
                out += unary_name(e.unary_op());
                out += '(';
                print_expr(e.child_a(), out, 0);
                out += ')';
            }
            break;
        case Expr::Kind::Binary: {
            const char* opstr = "+";
            int lp = prec, rp = prec + 1;
            switch (e.binary_op()) {
                case Expr::BinaryOp::Add: opstr = " + "; rp = prec; break;
                case Expr::BinaryOp::Sub: opstr = " - "; break;
                case Expr::BinaryOp::Mul: opstr = "*"; rp = prec; break;
                case Expr::BinaryOp::Div: opstr = "/"; break;
            }
            print_expr(e.child_a(), out, lp);
            out += opstr;
            print_expr(e.child_b(), out, rp);
            break;
        }
        case Expr::Kind::IntPow: {
            print_expr(e.child_a(), out, 4);
            out += '^';
            if (e.pow_exponent() < 0) {
                out += '(';
                format_double(e.pow_exponent(), out);
                out += ')';
            } else {
                format_double(e.pow_exponent(), out);
            }
            break;
        }
    }
    if (parens) out += ')';
}

}  // namespace

std::string Expr::str() const {
    std::string out;
    print_expr(*this, out, 0);
    return out;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | power
//   power   := atom ('^' exponent)?
//   atom    := number | ident | ident '(' expr ')' | '(' expr ')'
// Variables are resolved positionally against the declared coordinate names;
// `x<k>` names produced by the printer are always accepted so that
// parse -> print -> parse round-trips.

namespace {

struct Parser {
    std::string_view src;
    std::size_t pos = 0;
    const std::vector<std::string>& coords;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos); }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos != src.size()) fail("unexpected trailing input");
        return e;
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (eat('+')) e = e + parse_term();
            else if (eat('-')) e = e - parse_term();
            else return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            if (eat('*')) e = e * parse_factor();
            else if (eat('/')) e = e / parse_factor();
            else return e;
        }
    }

    Expr parse_factor() {
        if (eat('-')) return -parse_factor();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (eat('^')) {
            std::size_t at = pos;
            Expr exponent = parse_factor();  // allows e.g. x^-2 and x^(3)
            if (!exponent.is_constant()) {
                pos = at;
                fail("exponent must be a constant integer");
            }
            double v = exponent.constant_value();
            if (v != static_cast<long long>(v)) {
                pos = at;
                fail("exponent must be a constant integer");
            }
            return Expr::int_pow(base, static_cast<int>(v));
        }
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of input");
        char c = src[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        if (c == '(') {
            ++pos;
            Expr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr parse_number() {
        const char* begin = src.data() + pos;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("invalid number");
        pos += static_cast<std::size_t>(end - begin);
        return Expr::constant(v);
    }

    Expr parse_ident() {
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        std::string name(src.substr(start, pos - start));

        static const std::pair<const char*, Expr::UnaryOp> functions[] = {
            {"sin", Expr::UnaryOp::Sin}, {"cos", Expr::UnaryOp::Cos},
            {"tan", Expr::UnaryOp::Tan}, {"exp", Expr::UnaryOp::Exp},
            {"sqrt", Expr::UnaryOp::Sqrt}, {"abs", Expr::UnaryOp::Abs},
            {"sign", Expr::UnaryOp::Sign},
        };
        for (auto& [fname, op] : functions) {
            if (name == fname) {
                if (!eat('(')) {
                    pos = start;
                    fail("function '" + name + "' expects one argument");
                }
                Expr arg = parse_expr();
                if (eat(',')) {
                    pos = start;
                    fail("function '" + name + "' expects one argument");
                }
                if (!eat(')')) fail("expected ')'");
                return Expr::unary(op, arg);
            }
        }
        if (name == "pi") return Expr::constant(3.14159265358979323846);

        // printer-generated positional aliases x0, x1, ... take precedence
        if (name.size() >= 2 && name[0] == 'x' &&
            std::isdigit(static_cast<unsigned char>(name[1]))) {
            bool all_digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) all_digits = false;
            if (all_digits) {
                int idx = std::atoi(name.c_str() + 1);
                if (idx >= 0 && idx < static_cast<int>(coords.size()))
                    return Expr::variable(idx);
            }
        }
        for (std::size_t i = 0; i < coords.size(); ++i)
            if (coords[i] == name) return Expr::variable(static_cast<int>(i));
        pos = start;
        fail("unknown identifier '" + name + "'");
    }
};

}  // namespace

Expr parse_expr(std::string_view source, const std::vector<std::string>& coords) {
    if (source.empty()) throw ParseError("empty expression", 0);
    Parser p{source, 0, coords};
    return p.parse();
}

// ---------------------------------------------------------------------------
// Flat postfix program

ExprProgram::ExprProgram(const Expr& e) {
    // iterative postorder
    struct Frame { const Expr::Node* n; int stage; };
    std::vector<Frame> stack{{e.node_.get(), 0}};
    while (!stack.empty()) {
        auto [n, stage] = stack.back();
        stack.pop_back();
        switch (n->kind) {
            case Expr::Kind::Constant: ops_.push_back({0, 0, n->value}); break;
            case Expr::Kind::Variable: ops_.push_back({1, n->index, 0}); break;
            case Expr::Kind::Unary:
                if (stage == 0) {
                    stack.push_back({n, 1});
                    stack.push_back({n->a.get(), 0});
                } else {
                    ops_.push_back({2, static_cast<int>(n->uop), 0});
                }
                break;
            case Expr::Kind::IntPow:
                if (stage == 0) {
                    stack.push_back({n, 1});
                    stack.push_back({n->a.get(), 0});
                } else {
                    ops_.push_back({4, n->exponent, 0});
                }
                break;
            case Expr::Kind::Binary:
                if (stage == 0) {
                    stack.push_back({n, 1});
                    stack.push_back({n->b.get(), 0});
                    stack.push_back({n->a.get(), 0});
                } else {
                    ops_.push_back({3, static_cast<int>(n->bop), 0});
                }
                break;
        }
    }
    std::size_t depth = 0, maxdepth = 0;
    for (const Op& op : ops_) {
        if (op.code == 0 || op.code == 1) ++depth;
        else if (op.code == 3) --depth;
        maxdepth = std::max(maxdepth, depth);
    }
    stack_need_ = std::max<std::size_t>(2, maxdepth + 1);
}

double ExprProgram::eval(std::span<const double> x, std::vector<double>& stack) const {
    if (stack.size() < stack_need_) stack.resize(stack_need_);
    std::size_t top = 0;
    for (const Op& op : ops_) {
        switch (op.code) {
            case 0: stack[top++] = op.value; break;
            case 1: stack[top++] = x[op.arg]; break;
            case 2: {
                double& v = stack[top - 1];
                switch (static_cast<Expr::UnaryOp>(op.arg)) {
                    case Expr::UnaryOp::Neg: v = -v; break;
                    case Expr::UnaryOp::Sin: v = std::sin(v); break;
                    case Expr::UnaryOp::Cos: v = std::cos(v); break;
                    case Expr::UnaryOp::Tan: v = std::tan(v); break;
                    case Expr::UnaryOp::Exp: v = std::exp(v); break;
                    case Expr::UnaryOp::Sqrt: v = std::sqrt(v); break;
                    case Expr::UnaryOp::Abs: v = std::fabs(v); break;
                    case Expr::UnaryOp::Sign: v = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); break;
                }
                break;
            }
            case 3: {
                double b = stack[--top];
                double& a = stack[top - 1];
                switch (static_cast<Expr::BinaryOp>(op.arg)) {
                    case Expr::BinaryOp::Add: a += b; break;
                    case Expr::BinaryOp::Sub: a -= b; break;
                    case Expr::BinaryOp::Mul: a *= b; break;
                    case Expr::BinaryOp::Div: a /= b; break;
                }
                break;
            }
            case 4: stack[top - 1] = std::pow(stack[top - 1], op.arg); break;
        }
    }
    return stack[top - 1];
}

}  // namespace ccert
