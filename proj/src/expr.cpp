#include "rcabs/expr.hpp"

#include "rcabs/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace rcabs {

class ExprParser {
public:
    ExprParser(std::string_view text, int n, int p) : text_(text), n_(n), p_(p) {}

    Expr run() {
        expr_.state_dim_ = n_;
        expr_.input_dim_ = p_;
        parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return std::move(expr_);
    }

private:
    using Op = Expr::Op;

    std::string_view text_;
    int n_;
    int p_;
    std::size_t pos_ = 0;
    Expr expr_;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("expression syntax error at position " + std::to_string(pos_) + ": " + msg,
                         pos_);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    int push(Expr::Node node) {
        expr_.nodes_.push_back(node);
        return static_cast<int>(expr_.nodes_.size()) - 1;
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = push({Op::Add, 0.0, 0, lhs, parse_term()});
            } else if (accept('-')) {
                lhs = push({Op::Sub, 0.0, 0, lhs, parse_term()});
            } else {
                return lhs;
            }
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = push({Op::Mul, 0.0, 0, lhs, parse_unary()});
            } else if (accept('/')) {
                lhs = push({Op::Div, 0.0, 0, lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    int parse_unary() {
        if (accept('-')) return push({Op::Neg, 0.0, 0, parse_unary(), -1});
        return parse_factor();
    }

    int parse_factor() {
        const int base = parse_atom();
        if (!accept('^')) return base;
        skip_ws();
        const bool negative = accept('-');
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("expected integer exponent");
        int e = 0;
        const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, e);
        if (res.ec != std::errc{} || e > 64) fail("exponent out of range");
        return push({Op::Pow, 0.0, negative ? -e : e, base, -1});
    }

    int parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        fail(std::string("unexpected '") + c + "'");
    }

    int parse_number() {
        const std::size_t start = pos_;
        double v = 0.0;
        const auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
        if (res.ec != std::errc{}) fail("malformed number");
        pos_ = static_cast<std::size_t>(res.ptr - text_.data());
        if (!std::isfinite(v)) {
            pos_ = start;
            fail("number out of range");
        }
        return push({Op::Const, v, 0, -1, -1});
    }

    int parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::size_t letters_end = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string_view word = text_.substr(start, letters_end - start);
        const std::string_view digits = text_.substr(letters_end, pos_ - letters_end);

        if (!digits.empty()) {
            if (word != "x" && word != "u") {
                pos_ = start;
                fail("unknown identifier '" + std::string(text_.substr(start, pos_ - start)) + "'");
            }
            int idx = 0;
            std::from_chars(digits.data(), digits.data() + digits.size(), idx);
            const int limit = word == "x" ? n_ : p_;
            if (idx < 1 || idx > limit) {
                const std::size_t at = start;
                throw ParseError("undeclared variable " + std::string(word) + std::string(digits) +
                                     " at position " + std::to_string(at),
                                 at);
            }
            return push({word == "x" ? Op::StateVar : Op::InputVar, 0.0, idx - 1, -1, -1});
        }

        Op op;
        if (word == "sin") op = Op::Sin;
        else if (word == "cos") op = Op::Cos;
        else if (word == "exp") op = Op::Exp;
        else if (word == "tanh") op = Op::Tanh;
        else if (word == "abs") op = Op::Abs;
        else if (word == "neg") op = Op::Neg;
        else {
            pos_ = start;
            fail("unknown identifier '" + std::string(word) + "'");
        }
        expect('(');
        const int arg = parse_expr();
        expect(')');
        return push({op, 0.0, 0, arg, -1});
    }
};

Expr Expr::parse(std::string_view text, int state_dim, int input_dim) {
    return ExprParser(text, state_dim, input_dim).run();
}

Expr Expr::constant(double v) {
    Expr e;
    e.nodes_.push_back({Op::Const, v, 0, -1, -1});
    return e;
}

double Expr::eval(std::span<const double> x, std::span<const double> u) const {
    std::vector<double> v(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& nd = nodes_[i];
        const double a = nd.lhs >= 0 ? v[nd.lhs] : 0.0;
        const double b = nd.rhs >= 0 ? v[nd.rhs] : 0.0;
        switch (nd.op) {
        case Op::Const: v[i] = nd.value; break;
        case Op::StateVar: v[i] = x[nd.index]; break;
        case Op::InputVar: v[i] = u[nd.index]; break;
        case Op::Neg: v[i] = -a; break;
        case Op::Sin: v[i] = std::sin(a); break;
        case Op::Cos: v[i] = std::cos(a); break;
        case Op::Exp: v[i] = std::exp(a); break;
        case Op::Tanh: v[i] = std::tanh(a); break;
        case Op::Abs: v[i] = std::abs(a); break;
        case Op::Add: v[i] = a + b; break;
        case Op::Sub: v[i] = a - b; break;
        case Op::Mul: v[i] = a * b; break;
        case Op::Div:
            if (b == 0.0) throw NumericError("division by zero");
            v[i] = a / b;
            break;
        case Op::Pow:
            if (nd.index < 0 && a == 0.0) throw NumericError("division by zero");
            v[i] = std::pow(a, nd.index);
            break;
        }
    }
    const double r = v.back();
    if (!std::isfinite(r)) throw NumericError("non-finite expression value");
    return r;
}

Interval Expr::eval(const Box& x, const Box& u) const {
    std::vector<Interval> v(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& nd = nodes_[i];
        const Interval a = nd.lhs >= 0 ? v[nd.lhs] : Interval{};
        const Interval b = nd.rhs >= 0 ? v[nd.rhs] : Interval{};
        switch (nd.op) {
        case Op::Const: v[i] = Interval::point(nd.value); break;
        case Op::StateVar: v[i] = x[nd.index]; break;
        case Op::InputVar: v[i] = u[nd.index]; break;
        case Op::Neg: v[i] = -a; break;
        case Op::Sin: v[i] = sin(a); break;
        case Op::Cos: v[i] = cos(a); break;
        case Op::Exp: v[i] = exp(a); break;
        case Op::Tanh: v[i] = tanh(a); break;
        case Op::Abs: v[i] = abs(a); break;
        case Op::Add: v[i] = a + b; break;
        case Op::Sub: v[i] = a - b; break;
        case Op::Mul: v[i] = a * b; break;
        case Op::Div: v[i] = a / b; break;
        case Op::Pow: v[i] = pow(a, nd.index); break;
        }
    }
    const Interval r = v.back();
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) {
        throw NumericError("non-finite interval expression value");
    }
    return r;
}

namespace {

void render(const std::vector<Expr::Node>& nodes, int i, std::ostringstream& os) {
    using Op = Expr::Op;
    const auto& nd = nodes[static_cast<std::size_t>(i)];
    const auto unary = [&](const char* name) {
        os << '(' << name << ' ';
        render(nodes, nd.lhs, os);
        os << ')';
    };
    const auto binary = [&](const char* name) {
        os << '(' << name << ' ';
        render(nodes, nd.lhs, os);
        os << ' ';
        render(nodes, nd.rhs, os);
        os << ')';
    };
    switch (nd.op) {
    case Op::Const: os << nd.value; break;
    case Op::StateVar: os << 'x' << nd.index + 1; break;
    case Op::InputVar: os << 'u' << nd.index + 1; break;
    case Op::Neg: unary("neg"); break;
    case Op::Sin: unary("sin"); break;
    case Op::Cos: unary("cos"); break;
    case Op::Exp: unary("exp"); break;
    case Op::Tanh: unary("tanh"); break;
    case Op::Abs: unary("abs"); break;
    case Op::Add: binary("+"); break;
    case Op::Sub: binary("-"); break;
    case Op::Mul: binary("*"); break;
    case Op::Div: binary("/"); break;
    case Op::Pow:
        os << "(pow ";
        render(nodes, nd.lhs, os);
        os << ' ' << nd.index << ')';
        break;
    }
}

} // namespace

std::string Expr::to_sexpr() const {
    std::ostringstream os;
    render(nodes_, static_cast<int>(nodes_.size()) - 1, os);
    return os.str();
}

bool Expr::depends_on_input() const noexcept {
    for (const auto& nd : nodes_) {
        if (nd.op == Op::InputVar) return true;
    }
    return false;
}

bool Expr::depends_on_state() const noexcept {
    for (const auto& nd : nodes_) {
        if (nd.op == Op::StateVar) return true;
    }
    return false;
}

} // namespace rcabs
