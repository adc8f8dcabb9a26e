#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "nehari/errors.hpp"
#include "nehari/grid.hpp"

namespace nehari {

/// Parsed arithmetic expression in the variables x, y, z (coordinates) and t,
/// with + - * / ^, abs, sin, cos, exp, ln, arctan, the constant pi,
/// numeric literals and parentheses. Offsets in error messages are 0-based.
class Expression {
public:
    static Expression parse(const std::string& src) {
        Parser p(src);
        Expression e;
        e.src_ = src;
        e.root_ = p.parse_expr();
        p.expect_end();
        e.nodes_ = std::move(p.nodes);
        return e;
    }

    double eval(const Point& x, double t) const {
        const double v = eval_node(root_, x, t);
        if (!std::isfinite(v))
            throw Error(ErrorKind::numeric,
                        "expression '" + src_ + "': non-finite value at t=" + std::to_string(t));
        return v;
    }

    const std::string& source() const { return src_; }

private:
    enum class Op { num, var_x, var_y, var_z, var_t, add, sub, mul, div, pow, neg, abs, sin, cos, exp, ln, arctan };

    struct Node {
        Op op;
        double value = 0.0;
        int lhs = -1;
        int rhs = -1;
    };

    struct Parser {
        const std::string& s;
        std::size_t pos = 0;
        std::vector<Node> nodes;

        explicit Parser(const std::string& src) : s(src) {}

        [[noreturn]] void fail(const std::string& what, std::size_t at) const {
            throw ConfigError("syntax error at offset " + std::to_string(at) + ": " + what);
        }

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }

        bool peek(char c) {
            skip_ws();
            return pos < s.size() && s[pos] == c;
        }

        bool accept(char c) {
            if (peek(c)) {
                ++pos;
                return true;
            }
            return false;
        }

        int add_node(Node n) {
            nodes.push_back(n);
            return static_cast<int>(nodes.size()) - 1;
        }

        int parse_expr() {
            int lhs = parse_term();
            for (;;) {
                if (accept('+')) lhs = add_node({Op::add, 0.0, lhs, parse_term()});
                else if (accept('-')) lhs = add_node({Op::sub, 0.0, lhs, parse_term()});
                else return lhs;
            }
        }

        int parse_term() {
            int lhs = parse_unary();
            for (;;) {
                if (accept('*')) lhs = add_node({Op::mul, 0.0, lhs, parse_unary()});
                else if (accept('/')) lhs = add_node({Op::div, 0.0, lhs, parse_unary()});
                else return lhs;
            }
        }

        int parse_unary() {
            if (accept('-')) return add_node({Op::neg, 0.0, parse_unary(), -1});
            return parse_power();
        }

        int parse_power() {
            int base = parse_atom();
            if (accept('^')) return add_node({Op::pow, 0.0, base, parse_unary()});
            return base;
        }

        int parse_atom() {
            skip_ws();
            if (pos >= s.size()) fail("unexpected end of input", pos);
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
            if (c == '(') {
                ++pos;
                const int e = parse_expr();
                skip_ws();
                if (!accept(')')) fail("expected ')'", pos);
                return e;
            }
            fail(std::string("unexpected character '") + c + "'", pos);
        }

        int parse_number() {
            const std::size_t start = pos;
            std::size_t consumed = 0;
            double v = 0.0;
            try {
                v = std::stod(s.substr(start), &consumed);
            } catch (const std::exception&) {
                fail("malformed number", start);
            }
            pos = start + consumed;
            return add_node({Op::num, v, -1, -1});
        }

        int parse_ident() {
            const std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            const std::string name = s.substr(start, pos - start);
            if (name == "x") return add_node({Op::var_x, 0.0, -1, -1});
            if (name == "y") return add_node({Op::var_y, 0.0, -1, -1});
            if (name == "z") return add_node({Op::var_z, 0.0, -1, -1});
            if (name == "t") return add_node({Op::var_t, 0.0, -1, -1});
            if (name == "pi") return add_node({Op::num, M_PI, -1, -1});

            Op fn;
            if (name == "abs") fn = Op::abs;
            else if (name == "sin") fn = Op::sin;
            else if (name == "cos") fn = Op::cos;
            else if (name == "exp") fn = Op::exp;
            else if (name == "ln") fn = Op::ln;
            else if (name == "arctan") fn = Op::arctan;
            else fail("unknown identifier '" + name + "'", start);

            skip_ws();
            if (!accept('(')) fail("expected '(' after function name", pos);
            const int arg = parse_expr();
            skip_ws();
            if (!accept(')')) fail("expected ')'", pos);
            return add_node({fn, 0.0, arg, -1});
        }

        void expect_end() {
            skip_ws();
            if (pos != s.size()) fail("trailing input", pos);
        }
    };

    double eval_node(int id, const Point& x, double t) const {
        const Node& n = nodes_[id];
        switch (n.op) {
            case Op::num: return n.value;
            case Op::var_x: return x[0];
            case Op::var_y: return x[1];
            case Op::var_z: return x[2];
            case Op::var_t: return t;
            case Op::add: return eval_node(n.lhs, x, t) + eval_node(n.rhs, x, t);
            case Op::sub: return eval_node(n.lhs, x, t) - eval_node(n.rhs, x, t);
            case Op::mul: return eval_node(n.lhs, x, t) * eval_node(n.rhs, x, t);
            case Op::div: return eval_node(n.lhs, x, t) / eval_node(n.rhs, x, t);
            case Op::pow: return std::pow(eval_node(n.lhs, x, t), eval_node(n.rhs, x, t));
            case Op::neg: return -eval_node(n.lhs, x, t);
            case Op::abs: return std::fabs(eval_node(n.lhs, x, t));
            case Op::sin: return std::sin(eval_node(n.lhs, x, t));
            case Op::cos: return std::cos(eval_node(n.lhs, x, t));
            case Op::exp: return std::exp(eval_node(n.lhs, x, t));
            case Op::ln: return std::log(eval_node(n.lhs, x, t));
            case Op::arctan: return std::atan(eval_node(n.lhs, x, t));
        }
        return 0.0;
    }

    std::string src_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace nehari
