#ifndef LEAFFLOW_EXPR_HPP
#define LEAFFLOW_EXPR_HPP

#include <memory>
#include <string>

#include "leafflow/leafgrid.hpp"

namespace leafflow {

/// Closed-form expression in x (and y on the torus): arithmetic with
/// + - * / ^, parentheses, sin cos tan exp log sqrt sinh cosh tanh abs,
/// constants pi and e.  Parse errors carry the character position.
class Expression {
public:
    explicit Expression(const std::string& text);
    Expression(Expression&&) noexcept;
    Expression& operator=(Expression&&) noexcept;
    ~Expression();

    double eval(double x, double y = 0.0) const;
    ScalarField evaluate_on(const GridPtr& grid) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::unique_ptr<Node> root_;
};

}  // namespace leafflow

#endif
