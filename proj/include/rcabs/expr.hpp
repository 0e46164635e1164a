#pragma once

#include "rcabs/interval.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rcabs {

// Arithmetic expression over state variables x1..xn and inputs u1..up.
//
// Grammar (whitespace is ignored):
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | factor
//   factor := atom ['^' ['-'] integer]
//   atom   := number | var | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp | tanh | abs | neg
//   var    := 'x' index | 'u' index        (1-based)
//
// Nodes live in a flat arena in topological order (children before parents,
// root last), so an Expr is a cheap immutable value that can be shared
// across threads.
class Expr {
public:
    enum class Op : std::uint8_t {
        Const, StateVar, InputVar,
        Neg, Sin, Cos, Exp, Tanh, Abs,
        Add, Sub, Mul, Div, Pow,
    };

    struct Node {
        Op op;
        double value = 0.0;  // Const
        int index = 0;       // variable index (0-based) or Pow exponent
        int lhs = -1;
        int rhs = -1;
    };

    static Expr parse(std::string_view text, int state_dim, int input_dim);
    static Expr constant(double v);

    double eval(std::span<const double> x, std::span<const double> u) const;
    Interval eval(const Box& x, const Box& u) const;

    /// Prefix rendering, e.g. "(+ (* 0.9 x1) u1)".
    std::string to_sexpr() const;

    bool depends_on_input() const noexcept;
    bool depends_on_state() const noexcept;
    int state_dim() const noexcept { return state_dim_; }
    int input_dim() const noexcept { return input_dim_; }
    std::span<const Node> nodes() const noexcept { return nodes_; }

private:
    std::vector<Node> nodes_;
    int state_dim_ = 0;
    int input_dim_ = 0;

    friend class ExprParser;
};

} // namespace rcabs
