#pragma once

#include <string>
#include <vector>

#include "conjscope/expr.hpp"
#include "conjscope/linalg.hpp"

namespace conjscope {

/// First and second directional derivatives of a vector field at a point.
struct DirectionalJet {
  Vec value;
  Vec d_a;   // DF·a
  Vec d_b;   // DF·b
  Vec d_ab;  // D²F[a, b]
};

/// A vector field on R^n given by one expression per component.
class VectorField {
 public:
  VectorField() = default;
  VectorField(const std::vector<Expr>& components, std::vector<std::string> coords,
              const ParamMap& params = {});

  int dim() const { return static_cast<int>(coords_.size()); }
  const std::vector<std::string>& coords() const { return coords_; }
  const std::vector<ExprProgram>& components() const { return programs_; }
  bool is_constant() const { return constant_; }

  Vec value(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  DirectionalJet jet(const Vec& x, const Vec& a, const Vec& b) const;

 private:
  std::vector<std::string> coords_;
  std::vector<ExprProgram> programs_;
  bool constant_ = false;
};

/// Lie bracket [A, B](x) = DB(x)·A(x) - DA(x)·B(x), derivatives by AD.
Vec bracket(const VectorField& a, const VectorField& b, const Vec& x);

}  // namespace conjscope
