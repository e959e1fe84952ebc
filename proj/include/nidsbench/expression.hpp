#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nidsbench {

/// Small arithmetic language used for derived-feature formulas.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | primary
///   primary := number | name | '[' column name ']' | func '(' expr (',' expr)* ')' | '(' expr ')'
///   func    := min | max
///
/// Bare names (`duration`, `tot_bytes`) and bracketed names (`[Flow Byts/s]`)
/// are both variables. Division by zero yields 0, which is the convention
/// NetFlow exporters use for rates over zero-length flows.
class Expression {
 public:
  static Expression parse(std::string_view text);

  /// Distinct variable names in first-appearance order.
  const std::vector<std::string>& variables() const { return variables_; }

  /// `values[i]` is the value of `variables()[i]`.
  double evaluate(std::span<const double> values) const;

  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::shared_ptr<const Node> root_;
};

}  // namespace nidsbench
