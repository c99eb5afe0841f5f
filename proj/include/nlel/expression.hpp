#pragma once

#include <memory>
#include <string>

namespace nlel {

// Load expressions: numbers, x1, x2, pi, + - * / ^, unary minus, sin cos exp.
// Parsed once, evaluated per node.
class Expression {
 public:
  struct Node;
  explicit Expression(const std::string& src);  // throws std::invalid_argument with the offset
  double operator()(const double* x) const;
  int max_coord() const { return max_coord_; }  // 0 if no coordinate is used
  const std::string& source() const { return src_; }

 private:
  std::string src_;
  std::shared_ptr<const Node> root_;
  int max_coord_ = 0;
};

}  // namespace nlel
