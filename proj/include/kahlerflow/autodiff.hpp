#pragma once
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace kahlerflow::ad {

// Wengert list with stored local partials. Complex network code is lowered
// to real pairs before recording, so the only primitives are real scalar
// ops; each node keeps up to two parents and the partial w.r.t. each,
// computed during the forward pass. The reverse sweep is then op-agnostic.
class Tape {
 public:
  struct Node {
    int a;
    int b;
    double da;
    double db;
  };

  void clear() {
    nodes_.clear();
    val_.clear();
  }

  void reserve(std::size_t n) {
    nodes_.reserve(n);
    val_.reserve(n);
  }

  int leaf(double v) {
    nodes_.push_back({-1, -1, 0.0, 0.0});
    val_.push_back(v);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int push(double v, int a, double da) {
    nodes_.push_back({a, -1, da, 0.0});
    val_.push_back(v);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int push(double v, int a, double da, int b, double db) {
    nodes_.push_back({a, b, da, db});
    val_.push_back(v);
    return static_cast<int>(nodes_.size()) - 1;
  }

  double value(int i) const { return val_[i]; }
  std::size_t size() const { return nodes_.size(); }

  // Adjoints of every node w.r.t. node `out`; valid until the next clear().
  const std::vector<double>& backward(int out) {
    adj_.assign(nodes_.size(), 0.0);
    adj_[out] = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      const double g = adj_[i];
      if (g == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.a >= 0) adj_[n.a] += g * n.da;
      if (n.b >= 0) adj_[n.b] += g * n.db;
    }
    return adj_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<double> val_;
  std::vector<double> adj_;
};

struct Var {
  Tape* t = nullptr;
  int i = -1;
  double v = 0.0;

  Var() = default;
  Var(Tape& tape, double value) : t(&tape), i(tape.leaf(value)), v(value) {}
  Var(Tape* tape, int idx, double value) : t(tape), i(idx), v(value) {}
};

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.v; }

inline Var make_like(const Var& proto, double v, int a, double da) {
  return {proto.t, proto.t->push(v, a, da), v};
}
inline Var make_like(const Var& proto, double v, int a, double da, int b, double db) {
  return {proto.t, proto.t->push(v, a, da, b, db), v};
}

inline Var operator+(const Var& x, const Var& y) { return make_like(x, x.v + y.v, x.i, 1.0, y.i, 1.0); }
inline Var operator+(const Var& x, double c) { return make_like(x, x.v + c, x.i, 1.0); }
inline Var operator+(double c, const Var& x) { return x + c; }

inline Var operator-(const Var& x, const Var& y) { return make_like(x, x.v - y.v, x.i, 1.0, y.i, -1.0); }
inline Var operator-(const Var& x, double c) { return make_like(x, x.v - c, x.i, 1.0); }
inline Var operator-(double c, const Var& x) { return make_like(x, c - x.v, x.i, -1.0); }
inline Var operator-(const Var& x) { return make_like(x, -x.v, x.i, -1.0); }

inline Var operator*(const Var& x, const Var& y) { return make_like(x, x.v * y.v, x.i, y.v, y.i, x.v); }
inline Var operator*(const Var& x, double c) { return make_like(x, x.v * c, x.i, c); }
inline Var operator*(double c, const Var& x) { return x * c; }

inline Var operator/(const Var& x, const Var& y) {
  const double inv = 1.0 / y.v;
  return make_like(x, x.v * inv, x.i, inv, y.i, -x.v * inv * inv);
}
inline Var operator/(const Var& x, double c) { return x * (1.0 / c); }
inline Var operator/(double c, const Var& y) {
  const double inv = 1.0 / y.v;
  return make_like(y, c * inv, y.i, -c * inv * inv);
}

inline Var& operator+=(Var& x, const Var& y) { return x = x + y; }
inline Var& operator-=(Var& x, const Var& y) { return x = x - y; }
inline Var& operator*=(Var& x, const Var& y) { return x = x * y; }

inline Var exp(const Var& x) {
  const double e = std::exp(x.v);
  return make_like(x, e, x.i, e);
}
inline Var log(const Var& x) { return make_like(x, std::log(x.v), x.i, 1.0 / x.v); }
inline Var sqrt(const Var& x) {
  const double s = std::sqrt(x.v);
  return make_like(x, s, x.i, 0.5 / s);
}
inline Var erf(const Var& x) {
  const double d = 2.0 / std::sqrt(M_PI) * std::exp(-x.v * x.v);
  return make_like(x, std::erf(x.v), x.i, d);
}
inline Var sin(const Var& x) { return make_like(x, std::sin(x.v), x.i, std::cos(x.v)); }
inline Var cos(const Var& x) { return make_like(x, std::cos(x.v), x.i, -std::sin(x.v)); }
inline Var tanh(const Var& x) {
  const double t = std::tanh(x.v);
  return make_like(x, t, x.i, 1.0 - t * t);
}

// Values outside [lo, hi] are replaced by constants; gradient stops there,
// matching the usual clamp semantics.
inline double clamp(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }
inline Var clamp(const Var& x, double lo, double hi) {
  if (x.v < lo) return make_like(x, lo, x.i, 0.0);
  if (x.v > hi) return make_like(x, hi, x.i, 0.0);
  return x;
}

}  // namespace kahlerflow::ad
