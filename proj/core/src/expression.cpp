#include "rmkl/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

#include "rmkl/errors.hpp"

namespace rmkl {

Expression Expression::parse(const std::string& text) {
    // local recursive-descent parser; member scope grants Node access
    struct P {
        const std::string& s;
        std::size_t pos = 0;
        std::vector<Node> nodes;

        [[noreturn]] void fail(const std::string& what) const {
            throw ConfigError("regulator expression: " + what + " at position " +
                              std::to_string(pos));
        }
        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        char peek() {
            skip_ws();
            return pos < s.size() ? s[pos] : '\0';
        }
        bool eat(char c) {
            if (peek() == c) {
                ++pos;
                return true;
            }
            return false;
        }
        int add(Node n) {
            nodes.push_back(n);
            return static_cast<int>(nodes.size() - 1);
        }

        int expr() {
            int lhs = term();
            while (true) {
                if (eat('+'))
                    lhs = add({Node::Kind::Add, 0.0, 0, 0, lhs, term()});
                else if (eat('-'))
                    lhs = add({Node::Kind::Sub, 0.0, 0, 0, lhs, term()});
                else
                    return lhs;
            }
        }
        int term() {
            int lhs = unary();
            while (eat('*'))
                lhs = add({Node::Kind::Mul, 0.0, 0, 0, lhs, unary()});
            return lhs;
        }
        int unary() {
            if (eat('-'))
                return add({Node::Kind::Neg, 0.0, 0, 0, unary(), -1});
            return power();
        }
        int power() {
            int base = atom();
            if (eat('^')) {
                skip_ws();
                if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
                    fail("expected nonnegative integer exponent");
                int e = 0;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                    e = e * 10 + (s[pos] - '0');
                    if (e > 64) fail("exponent too large");
                    ++pos;
                }
                return add({Node::Kind::Pow, 0.0, 0, e, base, -1});
            }
            return base;
        }
        int atom() {
            const char c = peek();
            if (c == '(') {
                ++pos;
                int inner = expr();
                if (!eat(')')) fail("expected ')'");
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                const double v = std::strtod(begin, &end);
                if (end == begin) fail("malformed number");
                pos += static_cast<std::size_t>(end - begin);
                return add({Node::Kind::Constant, v, 0, 0, -1, -1});
            }
            if (c == 'x') {
                ++pos;
                if (pos < s.size() && (s[pos] == '1' || s[pos] == '2')) {
                    const int axis = s[pos] - '1';
                    ++pos;
                    return add({Node::Kind::Coord, 0.0, axis, 0, -1, -1});
                }
                fail("expected coordinate x1 or x2");
            }
            if (c == 'p') {
                ++pos;
                return add({Node::Kind::BuiltinP, 0.0, 0, 0, -1, -1});
            }
            fail("unexpected character");
        }
    };

    P parser{text, 0, {}};
    Expression out;
    out.root_ = parser.expr();
    parser.skip_ws();
    if (parser.pos != text.size())
        parser.fail("trailing input");
    out.nodes_ = std::move(parser.nodes);
    return out;
}

double Expression::eval_node(int id, const Point& x, int dim) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    switch (n.kind) {
        case Node::Kind::Constant: return n.value;
        case Node::Kind::Coord:
            if (n.axis >= dim)
                throw ConfigError("regulator expression: coordinate x" +
                                  std::to_string(n.axis + 1) + " beyond grid dimension");
            return x[static_cast<std::size_t>(n.axis)];
        case Node::Kind::BuiltinP: {
            double p = 1.0;
            for (int a = 0; a < dim; ++a) {
                const double q = 1.0 + x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
                p *= q * q;
            }
            return p;
        }
        case Node::Kind::Add: return eval_node(n.lhs, x, dim) + eval_node(n.rhs, x, dim);
        case Node::Kind::Sub: return eval_node(n.lhs, x, dim) - eval_node(n.rhs, x, dim);
        case Node::Kind::Mul: return eval_node(n.lhs, x, dim) * eval_node(n.rhs, x, dim);
        case Node::Kind::Neg: return -eval_node(n.lhs, x, dim);
        case Node::Kind::Pow: {
            double base = eval_node(n.lhs, x, dim);
            double acc = 1.0;
            for (int k = 0; k < n.exponent; ++k) acc *= base;
            return acc;
        }
    }
    return 0.0;
}

double Expression::eval(const Point& x, int dim) const { return eval_node(root_, x, dim); }

GridFunction Expression::sample(const GridPtr& grid) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid->node_count()));
    for (std::size_t i = 0; i < grid->node_count(); ++i)
        v[static_cast<Eigen::Index>(i)] = eval(grid->node(i), grid->dim());
    return {grid, v};
}

} // namespace rmkl
