#include "conjscope/vector_field.hpp"

#include <span>
#include <stdexcept>

#include "conjscope/errors.hpp"

namespace conjscope {

VectorField::VectorField(const std::vector<Expr>& components, std::vector<std::string> coords,
                         const ParamMap& params)
    : coords_(std::move(coords)) {
  if (components.size() != coords_.size()) {
    throw PreconditionViolation("vector field needs one component per coordinate");
  }
  programs_.reserve(components.size());
  constant_ = true;
  for (const auto& c : components) {
    programs_.emplace_back(c, coords_, params);
    for (const auto& v : c.variables()) {
      for (const auto& name : coords_) {
        if (name == v) constant_ = false;
      }
    }
  }
}

Vec VectorField::value(const Vec& x) const {
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = programs_[static_cast<std::size_t>(i)].eval(xs);
  return out;
}

Mat VectorField::jacobian(const Vec& x) const {
  const int n = dim();
  Mat J = Mat::Zero(n, n);
  if (constant_) return J;
  std::vector<HyperDual> seeds(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) seeds[static_cast<std::size_t>(k)] = HyperDual(x[k]);
  for (int k = 0; k < n; ++k) {
    seeds[static_cast<std::size_t>(k)].e1 = 1.0;
    for (int i = 0; i < n; ++i) {
      J(i, k) = programs_[static_cast<std::size_t>(i)].eval(std::span<const HyperDual>(seeds)).e1;
    }
    seeds[static_cast<std::size_t>(k)].e1 = 0.0;
  }
  return J;
}

DirectionalJet VectorField::jet(const Vec& x, const Vec& a, const Vec& b) const {
  const int n = dim();
  DirectionalJet out{Vec(n), Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
  std::vector<HyperDual> seeds(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) seeds[static_cast<std::size_t>(k)] = HyperDual(x[k], a[k], b[k], 0.0);
  for (int i = 0; i < n; ++i) {
    const HyperDual r = programs_[static_cast<std::size_t>(i)].eval(std::span<const HyperDual>(seeds));
    out.value[i] = r.re;
    out.d_a[i] = r.e1;
    out.d_b[i] = r.e2;
    out.d_ab[i] = r.e12;
  }
  return out;
}

Vec bracket(const VectorField& a, const VectorField& b, const Vec& x) {
  const Vec av = a.value(x);
  const Vec bv = b.value(x);
  // DB·A and DA·B as directional derivatives.
  const Vec db_a = b.jet(x, av, Vec::Zero(x.size())).d_a;
  const Vec da_b = a.jet(x, bv, Vec::Zero(x.size())).d_a;
  return db_a - da_b;
}

}  // namespace conjscope
