#pragma once

// Vector fields on the slit tangent bundle that can be evaluated at jet
// points of any depth: the spray S, the Liouville field C, the horizontal
// frame h_i, vertical coordinate fields, and Lie brackets of any of these.
// Evaluating a bracket promotes the input point by one jet level, reads the
// operands' values and Jacobians off the promoted result, and combines them
// in the original depth.

#include <memory>
#include <string>
#include <vector>

#include "sprayholo/expr.hpp"
#include "sprayholo/jet.hpp"

namespace sprayholo {

struct SprayModel {
  int n = 0;
  std::vector<ExprPtr> G; // n coefficient expressions over (x, y)
  std::map<std::string, double> params;
  // admissible open box, length 2n (x then y); empty means unconstrained
  std::vector<double> box_lo, box_hi;
};

inline EvalContext<Jet> jet_context(const SprayModel& m,
                                    std::span<const Jet> z) {
  EvalContext<Jet> ctx;
  ctx.n = m.n;
  ctx.coords = z;
  ctx.params = &m.params;
  return ctx;
}

// provenance of a generated field: a frame leaf, the Liouville leaf, or a
// bracket of two words
struct BracketWord {
  enum class Kind { Frame, Liouville, Spray, Vertical, Bracket };
  Kind kind = Kind::Frame;
  int index = 0; // 1-based, Frame and Vertical only
  std::shared_ptr<const BracketWord> left, right;

  static BracketWord frame(int i) {
    BracketWord w;
    w.kind = Kind::Frame;
    w.index = i;
    return w;
  }
  static BracketWord liouville() {
    BracketWord w;
    w.kind = Kind::Liouville;
    return w;
  }
  static BracketWord spray() {
    BracketWord w;
    w.kind = Kind::Spray;
    return w;
  }
  static BracketWord vertical(int i) {
    BracketWord w;
    w.kind = Kind::Vertical;
    w.index = i;
    return w;
  }
  static BracketWord bracket(BracketWord a, BracketWord b) {
    BracketWord w;
    w.kind = Kind::Bracket;
    w.left = std::make_shared<BracketWord>(std::move(a));
    w.right = std::make_shared<BracketWord>(std::move(b));
    return w;
  }

  int height() const {
    if (kind != Kind::Bracket) return 0;
    return 1 + std::max(left->height(), right->height());
  }

  std::string str() const {
    switch (kind) {
      case Kind::Frame: return "h" + std::to_string(index);
      case Kind::Liouville: return "C";
      case Kind::Spray: return "S";
      case Kind::Vertical: return "dy" + std::to_string(index);
      case Kind::Bracket: return "[" + left->str() + "," + right->str() + "]";
    }
    return "?";
  }
};

class EvaluableField {
 public:
  virtual ~EvaluableField() = default;
  // components in the (d/dx^i, d/dy^i) frame, evaluated at jet coordinates
  virtual std::vector<Jet> eval(std::span<const Jet> z) const = 0;
  // jet levels the evaluation consumes beyond those of the input point
  virtual int required_depth() const = 0;
  virtual const BracketWord& word() const = 0;

  std::vector<double> eval_at(std::span<const double> z) const {
    std::vector<Jet> zj = seed_point(z, 0);
    std::vector<Jet> v = eval(zj);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
    return out;
  }
};

using FieldPtr = std::shared_ptr<const EvaluableField>;

// h_i = d/dx^i - N^j_i d/dy^j with N^j_i = dG^j/dy^i, read off a one-level
// promotion of the evaluation point
class HorizontalField final : public EvaluableField {
 public:
  HorizontalField(std::shared_ptr<const SprayModel> m, int i)
      : model_(std::move(m)), i_(i), word_(BracketWord::frame(i)) {
    if (i_ < 1 || i_ > model_->n)
      throw std::invalid_argument("frame index out of range (1-based)");
  }

  std::vector<Jet> eval(std::span<const Jet> z) const override {
    const SprayModel& m = *model_;
    std::vector<Jet> zp = promote_point(z);
    EvalContext<Jet> ctx = jet_context(m, zp);
    Jet zero = z[0] * 0.0;
    std::vector<Jet> out(z.size(), zero);
    out[static_cast<std::size_t>(i_ - 1)] = zero + 1.0;
    for (int j = 0; j < m.n; ++j) {
      Jet Gj = evaluate(m.G[static_cast<std::size_t>(j)], ctx);
      // dG^j/dy^i is the derivative block of direction n + i - 1
      out[static_cast<std::size_t>(m.n + j)] =
          -Gj.dir_block(m.n + i_ - 1);
    }
    return out;
  }
  int required_depth() const override { return 1; }
  const BracketWord& word() const override { return word_; }

 private:
  std::shared_ptr<const SprayModel> model_;
  int i_;
  BracketWord word_;
};

// S = (y, -2G)
class SprayField final : public EvaluableField {
 public:
  explicit SprayField(std::shared_ptr<const SprayModel> m)
      : model_(std::move(m)), word_(BracketWord::spray()) {}

  std::vector<Jet> eval(std::span<const Jet> z) const override {
    const SprayModel& m = *model_;
    EvalContext<Jet> ctx = jet_context(m, z);
    std::vector<Jet> out;
    out.reserve(z.size());
    for (int i = 0; i < m.n; ++i) out.push_back(z[static_cast<std::size_t>(m.n + i)]);
    for (int i = 0; i < m.n; ++i)
      out.push_back(evaluate(m.G[static_cast<std::size_t>(i)], ctx) * -2.0);
    return out;
  }
  int required_depth() const override { return 0; }
  const BracketWord& word() const override { return word_; }

 private:
  std::shared_ptr<const SprayModel> model_;
  BracketWord word_;
};

// C = (0, y)
class LiouvilleField final : public EvaluableField {
 public:
  explicit LiouvilleField(int n) : n_(n), word_(BracketWord::liouville()) {}

  std::vector<Jet> eval(std::span<const Jet> z) const override {
    Jet zero = z[0] * 0.0;
    std::vector<Jet> out(z.size(), zero);
    for (int i = 0; i < n_; ++i)
      out[static_cast<std::size_t>(n_ + i)] = z[static_cast<std::size_t>(n_ + i)];
    return out;
  }
  int required_depth() const override { return 0; }
  const BracketWord& word() const override { return word_; }

 private:
  int n_;
  BracketWord word_;
};

// d/dy^i, used by diagnostics and tests
class VerticalCoordField final : public EvaluableField {
 public:
  VerticalCoordField(int n, int i)
      : n_(n), i_(i), word_(BracketWord::vertical(i)) {
    if (i_ < 1 || i_ > n_)
      throw std::invalid_argument("vertical index out of range (1-based)");
  }

  std::vector<Jet> eval(std::span<const Jet> z) const override {
    Jet zero = z[0] * 0.0;
    std::vector<Jet> out(z.size(), zero);
    out[static_cast<std::size_t>(n_ + i_ - 1)] = zero + 1.0;
    return out;
  }
  int required_depth() const override { return 0; }
  const BracketWord& word() const override { return word_; }

 private:
  int n_, i_;
  BracketWord word_;
};

// [X,Y](p) = JacY(p) X(p) - JacX(p) Y(p)
class BracketField final : public EvaluableField {
 public:
  BracketField(FieldPtr x, FieldPtr y)
      : x_(std::move(x)), y_(std::move(y)),
        word_(BracketWord::bracket(x_->word(), y_->word())) {}

  std::vector<Jet> eval(std::span<const Jet> z) const override {
    std::vector<Jet> zp = promote_point(z);
    std::vector<Jet> Xp = x_->eval(zp);
    std::vector<Jet> Yp = y_->eval(zp);
    std::size_t dim = z.size();
    std::vector<Jet> X0(dim), Y0(dim);
    for (std::size_t a = 0; a < dim; ++a) {
      X0[a] = Xp[a].value_block();
      Y0[a] = Yp[a].value_block();
    }
    std::vector<Jet> out;
    out.reserve(dim);
    for (std::size_t a = 0; a < dim; ++a) {
      Jet acc = z[0] * 0.0;
      for (std::size_t b = 0; b < dim; ++b) {
        acc = acc + Yp[a].dir_block(static_cast<int>(b)) * X0[b];
        acc = acc - Xp[a].dir_block(static_cast<int>(b)) * Y0[b];
      }
      out.push_back(acc);
    }
    return out;
  }
  int required_depth() const override {
    return 1 + std::max(x_->required_depth(), y_->required_depth());
  }
  const BracketWord& word() const override { return word_; }

 private:
  FieldPtr x_, y_;
  BracketWord word_;
};

inline FieldPtr make_bracket(FieldPtr x, FieldPtr y) {
  return std::make_shared<BracketField>(std::move(x), std::move(y));
}

// entry (a,b) = dX^a/dz^b over the 2n chart coordinates
inline std::vector<std::vector<double>> field_jacobian(
    const EvaluableField& X, std::span<const double> z) {
  std::vector<Jet> zj = promote_point(seed_point(z, 0));
  std::vector<Jet> v = X.eval(zj);
  std::size_t dim = z.size();
  std::vector<std::vector<double>> jac(dim, std::vector<double>(dim, 0.0));
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b)
      jac[a][b] = v[a].dir_block(static_cast<int>(b)).value();
  return jac;
}

} // namespace sprayholo
