#pragma once

// Arithmetic expression engine for data functions supplied as text.  An
// expression is parsed once against a declared variable set and evaluated
// many times against a Scope.  The grammar is deliberately small:
//
//   expr    := term (('+' | '-') term)*
//   term    := factor (('*' | '/') factor)*
//   factor  := ('-' | '+') factor | power
//   power   := primary ('^' factor)?          (right associative)
//   primary := number | variable | function '(' expr {',' expr} ')'
//            | '(' expr ')'
//
// Variables: x1..x3 (coordinates), z (solution value), nu1..nu3 (inward unit
// normal, boundary contexts only).  Functions: abs, exp, sin, cos (unary)
// and max (binary).  Numbers are ordinary decimal literals with an optional
// exponent.  '-x^2' parses as '-(x^2)' and '2^3^2' as '2^(3^2)'.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hessquot::expr {

/// Parse or evaluation failure; `position` is the zero-based character
/// offset into the expression source where the problem was detected.
class ExpressionError : public std::runtime_error {
  public:
    ExpressionError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at character " + std::to_string(position + 1) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

  private:
    std::size_t position_;
};

/// Values a single evaluation sees.  Unused slots may stay zero.
struct Scope {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    double z = 0.0;
    Eigen::Vector3d nu = Eigen::Vector3d::Zero();
};

/// Which variables an expression may reference.  Coordinates above the grid
/// dimension are rejected so a 2D config cannot silently read x3 = 0.
struct VariableSet {
    int dim = 3;
    bool allow_z = false;
    bool allow_nu = false;

    static VariableSet field(int dim) { return {dim, false, false}; }
    static VariableSet interior(int dim) { return {dim, true, false}; }
    static VariableSet boundary(int dim) { return {dim, true, true}; }
    static VariableSet direction(int dim) { return {dim, false, true}; }
};

namespace detail {

enum class Op {
    Constant,
    VarX1,
    VarX2,
    VarX3,
    VarZ,
    VarNu1,
    VarNu2,
    VarNu3,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Abs,
    Exp,
    Sin,
    Cos,
    Max,
};

struct Node {
    Op op = Op::Constant;
    double value = 0.0;
    std::vector<Node> kids;

    double eval(const Scope& s) const {
        switch (op) {
            case Op::Constant: return value;
            case Op::VarX1: return s.x[0];
            case Op::VarX2: return s.x[1];
            case Op::VarX3: return s.x[2];
            case Op::VarZ: return s.z;
            case Op::VarNu1: return s.nu[0];
            case Op::VarNu2: return s.nu[1];
            case Op::VarNu3: return s.nu[2];
            case Op::Neg: return -kids[0].eval(s);
            case Op::Add: return kids[0].eval(s) + kids[1].eval(s);
            case Op::Sub: return kids[0].eval(s) - kids[1].eval(s);
            case Op::Mul: return kids[0].eval(s) * kids[1].eval(s);
            case Op::Div: return kids[0].eval(s) / kids[1].eval(s);
            case Op::Pow: return std::pow(kids[0].eval(s), kids[1].eval(s));
            case Op::Abs: return std::abs(kids[0].eval(s));
            case Op::Exp: return std::exp(kids[0].eval(s));
            case Op::Sin: return std::sin(kids[0].eval(s));
            case Op::Cos: return std::cos(kids[0].eval(s));
            case Op::Max: return std::max(kids[0].eval(s), kids[1].eval(s));
        }
        return 0.0;  // unreachable
    }
};

class Parser {
  public:
    Parser(const std::string& text, const VariableSet& vars) : text_(text), vars_(vars) {}

    Node run() {
        skip_space();
        if (pos_ >= text_.size()) throw ExpressionError("empty expression", 0);
        Node n = parse_expr();
        skip_space();
        if (pos_ < text_.size())
            throw ExpressionError("unexpected trailing input '" + std::string(1, text_[pos_]) + "'",
                                  pos_);
        return n;
    }

  private:
    const std::string& text_;
    VariableSet vars_;
    std::size_t pos_ = 0;

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Node parse_expr() {
        Node n = parse_term();
        for (;;) {
            if (eat('+')) {
                Node rhs = parse_term();
                Node out{Op::Add, 0.0, {}};
                out.kids.push_back(std::move(n));
                out.kids.push_back(std::move(rhs));
                n = std::move(out);
            } else if (eat('-')) {
                Node rhs = parse_term();
                Node out{Op::Sub, 0.0, {}};
                out.kids.push_back(std::move(n));
                out.kids.push_back(std::move(rhs));
                n = std::move(out);
            } else {
                return n;
            }
        }
    }

    Node parse_term() {
        Node n = parse_factor();
        for (;;) {
            if (eat('*')) {
                Node rhs = parse_factor();
                Node out{Op::Mul, 0.0, {}};
                out.kids.push_back(std::move(n));
                out.kids.push_back(std::move(rhs));
                n = std::move(out);
            } else if (eat('/')) {
                Node rhs = parse_factor();
                Node out{Op::Div, 0.0, {}};
                out.kids.push_back(std::move(n));
                out.kids.push_back(std::move(rhs));
                n = std::move(out);
            } else {
                return n;
            }
        }
    }

    Node parse_factor() {
        if (eat('-')) {
            Node out{Op::Neg, 0.0, {}};
            out.kids.push_back(parse_factor());
            return out;
        }
        if (eat('+')) return parse_factor();
        Node base = parse_primary();
        if (eat('^')) {
            Node out{Op::Pow, 0.0, {}};
            out.kids.push_back(std::move(base));
            out.kids.push_back(parse_factor());
            return out;
        }
        return base;
    }

    Node parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) throw ExpressionError("expected a value", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Node n = parse_expr();
            if (!eat(')')) throw ExpressionError("missing ')'", pos_);
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        throw ExpressionError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    Node parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t probe = pos_ + 1;
            if (probe < text_.size() && (text_[probe] == '+' || text_[probe] == '-')) ++probe;
            if (probe < text_.size() && std::isdigit(static_cast<unsigned char>(text_[probe]))) {
                pos_ = probe;
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        const std::string slice = text_.substr(start, pos_ - start);
        try {
            std::size_t used = 0;
            const double v = std::stod(slice, &used);
            if (used != slice.size())
                throw ExpressionError("malformed number '" + slice + "'", start);
            return Node{Op::Constant, v, {}};
        } catch (const std::logic_error&) {
            throw ExpressionError("malformed number '" + slice + "'", start);
        }
    }

    Node parse_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);

        if (peek() == '(') return parse_call(name, start);

        if (name == "z") {
            if (!vars_.allow_z)
                throw ExpressionError("variable 'z' is not available in this context", start);
            return Node{Op::VarZ, 0.0, {}};
        }
        const auto coordinate = [&](const std::string& stem, Op first,
                                    bool allowed) -> Node {
            const int axis = name[stem.size()] - '1';
            if (!allowed)
                throw ExpressionError("variable '" + name + "' is not available in this context",
                                      start);
            if (axis < 0 || axis >= vars_.dim)
                throw ExpressionError("variable '" + name + "' exceeds the problem dimension",
                                      start);
            return Node{static_cast<Op>(static_cast<int>(first) + axis), 0.0, {}};
        };
        if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '3')
            return coordinate("x", Op::VarX1, true);
        if (name.size() == 3 && name.compare(0, 2, "nu") == 0 && name[2] >= '1' && name[2] <= '3')
            return coordinate("nu", Op::VarNu1, vars_.allow_nu);
        throw ExpressionError("unknown name '" + name + "'", start);
    }

    Node parse_call(const std::string& name, std::size_t start) {
        struct Fn {
            const char* name;
            Op op;
            int arity;
        };
        static constexpr Fn table[] = {{"abs", Op::Abs, 1},
                                       {"exp", Op::Exp, 1},
                                       {"sin", Op::Sin, 1},
                                       {"cos", Op::Cos, 1},
                                       {"max", Op::Max, 2}};
        const Fn* fn = nullptr;
        for (const Fn& f : table)
            if (name == f.name) fn = &f;
        if (!fn) throw ExpressionError("unknown function '" + name + "'", start);
        eat('(');
        Node out{fn->op, 0.0, {}};
        out.kids.push_back(parse_expr());
        while (eat(',')) out.kids.push_back(parse_expr());
        if (!eat(')')) throw ExpressionError("missing ')' after arguments of '" + name + "'", pos_);
        if (static_cast<int>(out.kids.size()) != fn->arity)
            throw ExpressionError("function '" + name + "' takes " + std::to_string(fn->arity) +
                                      " argument(s), got " + std::to_string(out.kids.size()),
                                  start);
        return out;
    }
};

}  // namespace detail

/// A parsed expression bound to its variable set.  Copyable; evaluation is
/// const and thread-compatible.
class Expression {
  public:
    static Expression parse(const std::string& text, const VariableSet& vars) {
        Expression e;
        e.source_ = text;
        e.root_ = std::make_shared<detail::Node>(detail::Parser(text, vars).run());
        return e;
    }

    double operator()(const Scope& s) const { return root_->eval(s); }
    const std::string& source() const { return source_; }

  private:
    std::string source_;
    std::shared_ptr<const detail::Node> root_;
};

}  // namespace hessquot::expr
