#include "leafflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace leafflow {

struct Expression::Node {
    enum class Kind { Constant, VarX, VarY, Unary, Binary, Call } kind;
    double value = 0.0;
    char op = 0;                      // + - * / ^ for Binary, - for Unary
    double (*fn)(double) = nullptr;   // for Call
    std::unique_ptr<Node> a, b;

    double eval(double x, double y) const {
        switch (kind) {
            case Kind::Constant: return value;
            case Kind::VarX: return x;
            case Kind::VarY: return y;
            case Kind::Unary: return -a->eval(x, y);
            case Kind::Call: return fn(a->eval(x, y));
            case Kind::Binary: {
                const double l = a->eval(x, y);
                const double r = b->eval(x, y);
                switch (op) {
                    case '+': return l + r;
                    case '-': return l - r;
                    case '*': return l * r;
                    case '/': return l / r;
                    case '^': return std::pow(l, r);
                }
            }
        }
        return 0.0;
    }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::unique_ptr<Node>;

struct Parser {
    const std::string& s;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("expression error at position " + std::to_string(pos) +
                                    " in \"" + s + "\": " + msg);
    }

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr make(Node::Kind k) {
        auto n = std::make_unique<Node>();
        n->kind = k;
        return n;
    }

    NodePtr parse_expr() {
        NodePtr left = parse_term();
        for (;;) {
            skip_ws();
            if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
                const char op = s[pos++];
                NodePtr right = parse_term();
                auto n = make(Node::Kind::Binary);
                n->op = op;
                n->a = std::move(left);
                n->b = std::move(right);
                left = std::move(n);
            } else {
                return left;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr left = parse_factor();
        for (;;) {
            skip_ws();
            if (pos < s.size() && (s[pos] == '*' || s[pos] == '/')) {
                const char op = s[pos++];
                NodePtr right = parse_factor();
                auto n = make(Node::Kind::Binary);
                n->op = op;
                n->a = std::move(left);
                n->b = std::move(right);
                left = std::move(n);
            } else {
                return left;
            }
        }
    }

    NodePtr parse_factor() {
        NodePtr base = parse_unary();
        skip_ws();
        if (pos < s.size() && s[pos] == '^') {
            ++pos;
            NodePtr exp = parse_factor();  // right associative
            auto n = make(Node::Kind::Binary);
            n->op = '^';
            n->a = std::move(base);
            n->b = std::move(exp);
            return n;
        }
        return base;
    }

    NodePtr parse_unary() {
        skip_ws();
        if (eat('-')) {
            auto n = make(Node::Kind::Unary);
            n->a = parse_unary();
            return n;
        }
        if (eat('+')) return parse_unary();
        return parse_primary();
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of expression");
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(s.c_str() + pos, &end);
            if (end == s.c_str() + pos) fail("malformed number");
            pos = end - s.c_str();
            auto n = make(Node::Kind::Constant);
            n->value = v;
            return n;
        }
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (!eat(')')) fail("missing ')'");
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            const std::string name = s.substr(start, pos - start);
            if (name == "x") return make(Node::Kind::VarX);
            if (name == "y") return make(Node::Kind::VarY);
            if (name == "pi") {
                auto n = make(Node::Kind::Constant);
                n->value = M_PI;
                return n;
            }
            if (name == "e") {
                auto n = make(Node::Kind::Constant);
                n->value = M_E;
                return n;
            }
            double (*fn)(double) = nullptr;
            if (name == "sin") fn = std::sin;
            else if (name == "cos") fn = std::cos;
            else if (name == "tan") fn = std::tan;
            else if (name == "exp") fn = std::exp;
            else if (name == "log") fn = std::log;
            else if (name == "sqrt") fn = std::sqrt;
            else if (name == "sinh") fn = std::sinh;
            else if (name == "cosh") fn = std::cosh;
            else if (name == "tanh") fn = std::tanh;
            else if (name == "abs") fn = std::fabs;
            if (!fn) fail("unknown identifier '" + name + "'");
            if (!eat('(')) fail("function '" + name + "' needs '('");
            NodePtr arg = parse_expr();
            if (!eat(')')) fail("missing ')' after argument of '" + name + "'");
            auto n = make(Node::Kind::Call);
            n->fn = fn;
            n->a = std::move(arg);
            return n;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text) {
    Parser p{text};
    root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing characters");
}

Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;
Expression::~Expression() = default;

double Expression::eval(double x, double y) const { return root_->eval(x, y); }

ScalarField Expression::evaluate_on(const GridPtr& grid) const {
    ScalarField f = ScalarField::from_function(
        grid, [this](double x, double y) { return eval(x, y); });
    // from_function/ScalarField already reject non-finite values
    return f;
}

}  // namespace leafflow
