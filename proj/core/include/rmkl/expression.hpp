#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rmkl/grid.hpp"
#include "rmkl/measure.hpp"

namespace rmkl {

/// Closed arithmetic grammar for regulator functions over node coordinates:
///
///   expr   := term (('+' | '-') term)*
///   term   := unary ('*' unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' nonnegative-integer)?
///   atom   := number | 'x1' | 'x2' | 'p' | '(' expr ')'
///
/// 'p' is the builtin weight polynomial prod_j (1 + x_j^2)^2.
/// Parse errors raise ConfigError with the offending position.
class Expression {
public:
    static Expression parse(const std::string& text);

    double eval(const Point& x, int dim) const;
    GridFunction sample(const GridPtr& grid) const;

private:
    struct Node {
        enum class Kind { Constant, Coord, BuiltinP, Add, Sub, Mul, Neg, Pow } kind;
        double value = 0.0; // Constant
        int axis = 0;       // Coord
        int exponent = 0;   // Pow
        int lhs = -1, rhs = -1;
    };
    std::vector<Node> nodes_;
    int root_ = -1;

    double eval_node(int id, const Point& x, int dim) const;
};

} // namespace rmkl
