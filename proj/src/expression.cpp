#include "nidsbench/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "nidsbench/common.hpp"

namespace nidsbench {

struct Expression::Node {
  enum class Op { Constant, Variable, Add, Sub, Mul, Div, Neg, Min, Max };
  Op op = Op::Constant;
  double constant = 0.0;
  std::size_t variable = 0;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

class Parser {
 public:
  Parser(std::string_view text, std::vector<std::string>& vars) : text_(text), vars_(vars) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error("formula '" + std::string(text_) + "': " + what + " at offset " +
                std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Node::Op op, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    return n;
  }

  NodePtr variable(std::string name) {
    auto it = std::find(vars_.begin(), vars_.end(), name);
    std::size_t idx = static_cast<std::size_t>(it - vars_.begin());
    if (it == vars_.end()) vars_.push_back(std::move(name));
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Variable;
    n->variable = idx;
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Node::Op::Add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make(Node::Op::Sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Node::Op::Mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make(Node::Op::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Op::Neg, {unary()});
    return primary();
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (c == '[') {
      std::size_t close = text_.find(']', pos_);
      if (close == std::string_view::npos) fail("unterminated '['");
      std::string name(text_.substr(pos_ + 1, close - pos_ - 1));
      if (name.empty()) fail("empty column name");
      pos_ = close + 1;
      return variable(std::move(name));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      std::string buf(text_.substr(pos_));
      double v = std::strtod(buf.c_str(), &end);
      if (end == buf.c_str()) fail("bad number");
      pos_ += static_cast<std::size_t>(end - buf.c_str());
      auto n = std::make_shared<Node>();
      n->op = Node::Op::Constant;
      n->constant = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string name(text_.substr(start, pos_ - start));
      if (accept('(')) {
        Node::Op op;
        if (name == "min") {
          op = Node::Op::Min;
        } else if (name == "max") {
          op = Node::Op::Max;
        } else {
          fail("unknown function '" + name + "'");
        }
        std::vector<NodePtr> args{expr()};
        while (accept(',')) args.push_back(expr());
        if (!accept(')')) fail("expected ')'");
        return make(op, std::move(args));
      }
      return variable(std::move(name));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<std::string>& vars_;
};

double eval(const Node& n, std::span<const double> values) {
  switch (n.op) {
    case Node::Op::Constant:
      return n.constant;
    case Node::Op::Variable:
      return values[n.variable];
    case Node::Op::Add:
      return eval(*n.args[0], values) + eval(*n.args[1], values);
    case Node::Op::Sub:
      return eval(*n.args[0], values) - eval(*n.args[1], values);
    case Node::Op::Mul:
      return eval(*n.args[0], values) * eval(*n.args[1], values);
    case Node::Op::Div: {
      double den = eval(*n.args[1], values);
      return den == 0.0 ? 0.0 : eval(*n.args[0], values) / den;
    }
    case Node::Op::Neg:
      return -eval(*n.args[0], values);
    case Node::Op::Min:
    case Node::Op::Max: {
      double acc = eval(*n.args[0], values);
      for (std::size_t i = 1; i < n.args.size(); ++i) {
        double v = eval(*n.args[i], values);
        acc = n.op == Node::Op::Min ? std::min(acc, v) : std::max(acc, v);
      }
      return acc;
    }
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  Parser parser(e.text_, e.variables_);
  e.root_ = parser.parse();
  return e;
}

double Expression::evaluate(std::span<const double> values) const {
  if (values.size() != variables_.size()) {
    throw Error("formula '" + text_ + "': expected " + std::to_string(variables_.size()) +
                " values, got " + std::to_string(values.size()));
  }
  return eval(*root_, values);
}

}  // namespace nidsbench
