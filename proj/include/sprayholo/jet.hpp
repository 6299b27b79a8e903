#pragma once

// Nested forward-mode AD. A Jet of depth k over m directions stores the
// coefficients of a k-fold nested first-order expansion as a flat array of
// size (m+1)^k. Index digits (base m+1, outermost level first) select, at
// each nesting level, either the value slot (digit 0) or the derivative
// slot of one direction (digit d = direction d-1). The coefficient at a set
// of single-direction digits is the corresponding raw mixed partial.
//
// Depth 0 is a plain double in disguise: every operation bottoms out in the
// identical scalar formula, so values agree exactly with double arithmetic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sprayholo {

struct JetError : std::runtime_error {
  explicit JetError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace jetdetail {

// scratch space with stack discipline;). spans stay valid because capacity
// is ensured up front, before any block is handed out
class Arena {
 public:
  std::span<double> alloc(std::size_t count) {
    if (top_ + count > buf_.size())
      throw JetError("jet scratch arena overflow");
    std::span<double> s(buf_.data() + top_, count);
    top_ += count;
    return s;
  }
  std::size_t mark() const { return top_; }
  void release(std::size_t m) { top_ = m; }
  void require(std::size_t count) {
    if (top_ != 0)
      throw JetError("jet scratch arena busy");
    if (buf_.size() < count) buf_.resize(count);
  }

 private:
  std::vector<double> buf_;
  std::size_t top_ = 0;
};

inline Arena& arena() {
  thread_local Arena a;
  return a;
}

using Sp = std::span<double>;
using Cs = std::span<const double>;

inline void k_add(Sp out, Cs u, Cs w) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] + w[i];
}
inline void k_sub(Sp out, Cs u, Cs w) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] - w[i];
}
inline void k_neg(Sp out, Cs u) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -u[i];
}
inline void k_scale(Sp out, Cs u, double c) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] * c;
}

// (u0 + sum ui ei)(w0 + sum wi ei) = u0 w0 + sum (u0 wi + ui w0) ei
inline void k_mul(Sp out, Cs u, Cs w, int k, int m, Arena& A) {
  if (k == 0) {
    out[0] = u[0] * w[0];
    return;
  }
  std::size_t s = out.size() / static_cast<std::size_t>(m + 1);
  k_mul(out.subspan(0, s), u.subspan(0, s), w.subspan(0, s), k - 1, m, A);
  auto mk = A.mark();
  Sp tmp = A.alloc(s);
  for (int d = 1; d <= m; ++d) {
    std::size_t off = static_cast<std::size_t>(d) * s;
    k_mul(out.subspan(off, s), u.subspan(0, s), w.subspan(off, s), k - 1, m, A);
    k_mul(tmp, u.subspan(off, s), w.subspan(0, s), k - 1, m, A);
    k_add(out.subspan(off, s), out.subspan(off, s), tmp);
  }
  A.release(mk);
}

// quotient rule: q0 = u0/w0, qi = (ui - q0 wi)/w0
inline void k_div(Sp out, Cs u, Cs w, int k, int m, Arena& A) {
  if (k == 0) {
    out[0] = u[0] / w[0];
    return;
  }
  std::size_t s = out.size() / static_cast<std::size_t>(m + 1);
  k_div(out.subspan(0, s), u.subspan(0, s), w.subspan(0, s), k - 1, m, A);
  auto mk = A.mark();
  Sp tmp = A.alloc(s);
  for (int d = 1; d <= m; ++d) {
    std::size_t off = static_cast<std::size_t>(d) * s;
    k_mul(tmp, out.subspan(0, s), w.subspan(off, s), k - 1, m, A);
    k_sub(tmp, u.subspan(off, s), tmp);
    k_div(out.subspan(off, s), tmp, w.subspan(0, s), k - 1, m, A);
  }
  A.release(mk);
}

inline void k_sqrt(Sp out, Cs u, int k, int m, Arena& A) {
  if (k == 0) {
    out[0] = std::sqrt(u[0]);
    return;
  }
  std::size_t s = out.size() / static_cast<std::size_t>(m + 1);
  k_sqrt(out.subspan(0, s), u.subspan(0, s), k - 1, m, A);
  auto mk = A.mark();
  Sp denom = A.alloc(s);
  k_scale(denom, out.subspan(0, s), 2.0);
  for (int d = 1; d <= m; ++d) {
    std::size_t off = static_cast<std::size_t>(d) * s;
    k_div(out.subspan(off, s), u.subspan(off, s), denom, k - 1, m, A);
  }
  A.release(mk);
}

inline void k_exp(Sp out, Cs u, int k, int m, Arena& A) {
  if (k == 0) {
    out[0] = std::exp(u[0]);
    return;
  }
  std::size_t s = out.size() / static_cast<std::size_t>(m + 1);
  k_exp(out.subspan(0, s), u.subspan(0, s), k - 1, m, A);
  for (int d = 1; d <= m; ++d) {
    std::size_t off = static_cast<std::size_t>(d) * s;
    k_mul(out.subspan(off, s), out.subspan(0, s), u.subspan(off, s), k - 1, m, A);
  }
}

inline void k_log(Sp out, Cs u, int k, int m, Arena& A) {
  if (k == 0) {
    out[0] = std::log(u[0]);
    return;
  }
  std::size_t s = out.size() / static_cast<std::size_t>(m + 1);
  k_log(out.subspan(0, s), u.subspan(0, s), k - 1, m, A);
  for (int d = 1; d <= m; ++d) {
    std::size_t off = static_cast<std::size_t>(d) * s;
    k_div(out.subspan(off, s), u.subspan(off, s), u.subspan(0, s), k - 1, m, A);
  }
}

inline void k_sincos(Sp outs, Sp outc, Cs u, int k, int m, Arena& A) {
  if (k == 0) {
    outs[0] = std::sin(u[0]);
    outc[0] = std::cos(u[0]);
    return;
  }
  std::size_t s = outs.size() / static_cast<std::size_t>(m + 1);
  k_sincos(outs.subspan(0, s), outc.subspan(0, s), u.subspan(0, s), k - 1, m, A);
  auto mk = A.mark();
  Sp tmp = A.alloc(s);
  for (int d = 1; d <= m; ++d) {
    std::size_t off = static_cast<std::size_t>(d) * s;
    k_mul(outs.subspan(off, s), outc.subspan(0, s), u.subspan(off, s), k - 1, m, A);
    k_mul(tmp, outs.subspan(0, s), u.subspan(off, s), k - 1, m, A);
    k_neg(outc.subspan(off, s), tmp);
  }
  A.release(mk);
}

inline std::size_t pow_size(int m, int k) {
  std::size_t s = 1;
  for (int i = 0; i < k; ++i) s *= static_cast<std::size_t>(m + 1);
  return s;
}

} // namespace jetdetail

class Jet {
 public:
  Jet() = default;

  static Jet constant(double v, int depth, int ndirs) {
    Jet j(depth, ndirs);
    j.c_[0] = v;
    return j;
  }

  // seeds direction `dir` (0-based, < ndirs) with unit derivative at every
  // nesting level, so all mixed partials in that direction accumulate
  static Jet variable(double v, int dir, int depth, int ndirs) {
    Jet j(depth, ndirs);
    j.c_[0] = v;
    std::size_t place = 1;
    for (int level = depth; level >= 1; --level) {
      j.c_[static_cast<std::size_t>(dir + 1) * place] = 1.0;
      place *= static_cast<std::size_t>(ndirs + 1);
    }
    return j;
  }

  int depth() const { return depth_; }
  int ndirs() const { return ndirs_; }
  double value() const { return c_[0]; }
  std::span<const double> coeffs() const { return c_; }

  // mixed partial for a multi-index of directions (0-based), order <= depth.
  // The index is sorted first, which makes mixed-partial symmetry exact.
  double partial(std::span<const int> dirs) const {
    if (static_cast<int>(dirs.size()) > depth_)
      throw JetError("partial order exceeds jet depth");
    std::vector<int> d(dirs.begin(), dirs.end());
    std::sort(d.begin(), d.end());
    std::size_t idx = 0;
    std::size_t place = jetdetail::pow_size(ndirs_, depth_ - 1);
    for (int v : d) {
      if (v < 0 || v >= ndirs_) throw JetError("direction out of range");
      idx += static_cast<std::size_t>(v + 1) * place;
      place /= static_cast<std::size_t>(ndirs_ + 1);
    }
    return c_[idx];
  }
  double partial(std::initializer_list<int> dirs) const {
    return partial(std::span<const int>(dirs.begin(), dirs.size()));
  }

  // adds one outer differentiation level; the new direction blocks are the
  // seeds passed in (dz/d(new direction d) = seed[d], each a constant)
  Jet promoted(std::span<const double> seeds) const {
    if (static_cast<int>(seeds.size()) != ndirs_)
      throw JetError("seed count must equal direction count");
    Jet out(depth_ + 1, ndirs_);
    std::copy(c_.begin(), c_.end(), out.c_.begin());
    for (int d = 1; d <= ndirs_; ++d)
      out.c_[static_cast<std::size_t>(d) * c_.size()] = seeds[d - 1];
    return out;
  }

  // inverse of promoted: block 0 is the value, block d+1 the d-th derivative
  Jet block(int digit) const {
    if (depth_ == 0) throw JetError("depth-0 jet has no blocks");
    Jet out(depth_ - 1, ndirs_);
    std::size_t s = out.c_.size();
    std::copy_n(c_.begin() + static_cast<std::size_t>(digit) * s, s,
                out.c_.begin());
    return out;
  }
  Jet value_block() const { return block(0); }
  Jet dir_block(int dir) const { return block(dir + 1); }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet out = a.blank_like(b);
    jetdetail::k_add(out.c_, a.c_, b.c_);
    return out;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet out = a.blank_like(b);
    jetdetail::k_sub(out.c_, a.c_, b.c_);
    return out;
  }
  friend Jet operator-(const Jet& a) {
    Jet out(a.depth_, a.ndirs_);
    jetdetail::k_neg(out.c_, a.c_);
    return out;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet out = a.blank_like(b);
    auto& A = jetdetail::arena();
    A.require(2 * out.c_.size() + 8);
    jetdetail::k_mul(out.c_, a.c_, b.c_, a.depth_, a.ndirs_, A);
    return out;
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet out = a.blank_like(b);
    auto& A = jetdetail::arena();
    A.require(2 * out.c_.size() + 8);
    jetdetail::k_div(out.c_, a.c_, b.c_, a.depth_, a.ndirs_, A);
    return out;
  }

  friend Jet operator*(const Jet& a, double c) {
    Jet out(a.depth_, a.ndirs_);
    jetdetail::k_scale(out.c_, a.c_, c);
    return out;
  }
  friend Jet operator*(double c, const Jet& a) { return a * c; }
  friend Jet operator+(const Jet& a, double c) {
    Jet out = a;
    out.c_[0] += c;
    return out;
  }
  friend Jet operator+(double c, const Jet& a) { return a + c; }
  friend Jet operator-(const Jet& a, double c) { return a + (-c); }
  friend Jet operator-(double c, const Jet& a) { return (-a) + c; }
  friend Jet operator/(const Jet& a, double c) { return a * (1.0 / c); }

  friend Jet sh_sqrt(const Jet& a) {
    Jet out(a.depth_, a.ndirs_);
    auto& A = jetdetail::arena();
    A.require(2 * out.c_.size() + 8);
    jetdetail::k_sqrt(out.c_, a.c_, a.depth_, a.ndirs_, A);
    return out;
  }
  friend Jet sh_exp(const Jet& a) {
    Jet out(a.depth_, a.ndirs_);
    auto& A = jetdetail::arena();
    A.require(2 * out.c_.size() + 8);
    jetdetail::k_exp(out.c_, a.c_, a.depth_, a.ndirs_, A);
    return out;
  }
  friend Jet sh_log(const Jet& a) {
    Jet out(a.depth_, a.ndirs_);
    auto& A = jetdetail::arena();
    A.require(2 * out.c_.size() + 8);
    jetdetail::k_log(out.c_, a.c_, a.depth_, a.ndirs_, A);
    return out;
  }
  friend Jet sh_sin(const Jet& a) {
    Jet s(a.depth_, a.ndirs_), c(a.depth_, a.ndirs_);
    auto& A = jetdetail::arena();
    A.require(2 * s.c_.size() + 8);
    jetdetail::k_sincos(s.c_, c.c_, a.c_, a.depth_, a.ndirs_, A);
    return s;
  }
  friend Jet sh_cos(const Jet& a) {
    Jet s(a.depth_, a.ndirs_), c(a.depth_, a.ndirs_);
    auto& A = jetdetail::arena();
    A.require(2 * s.c_.size() + 8);
    jetdetail::k_sincos(s.c_, c.c_, a.c_, a.depth_, a.ndirs_, A);
    return c;
  }
  friend Jet sh_abs(const Jet& a) {
    if (a.c_[0] < 0) return -a;
    return a;
  }
  friend double scalar_part(const Jet& a) { return a.c_[0]; }
  friend bool differentiating(const Jet& a) { return a.depth_ > 0; }

 private:
  Jet(int depth, int ndirs)
      : depth_(depth), ndirs_(ndirs),
        c_(jetdetail::pow_size(ndirs, depth), 0.0) {}

  Jet blank_like(const Jet& b) const {
    if (depth_ != b.depth_ || ndirs_ != b.ndirs_)
      throw JetError("jet shape mismatch");
    return Jet(depth_, ndirs_);
  }

  int depth_ = 0;
  int ndirs_ = 0;
  std::vector<double> c_;
};

// the 2n chart coordinates of a point as depth-k jets, each seeded in its
// own direction
inline std::vector<Jet> seed_point(std::span<const double> z, int depth) {
  std::vector<Jet> out;
  out.reserve(z.size());
  int m = static_cast<int>(z.size());
  for (int a = 0; a < m; ++a)
    out.push_back(Jet::variable(z[a], a, depth, m));
  return out;
}

// adds one outer level to every coordinate of a jet point, seeding the new
// level with dz_a/d(direction v) = delta_{a,v}; evaluating a map at the
// result yields its value and Jacobian in one pass
inline std::vector<Jet> promote_point(std::span<const Jet> z) {
  std::vector<Jet> out;
  out.reserve(z.size());
  std::vector<double> seeds(z.size(), 0.0);
  for (std::size_t a = 0; a < z.size(); ++a) {
    seeds[a] = 1.0;
    out.push_back(z[a].promoted(seeds));
    seeds[a] = 0.0;
  }
  return out;
}

} // namespace sprayholo
