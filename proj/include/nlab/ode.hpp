#pragma once

#include "nlab/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace nlab {

/// Adaptive Dormand-Prince 5(4) integrator with FSAL.
template <typename Scalar, int Dim>
class Dopri5 {
 public:
  using State = Eigen::Matrix<Scalar, Dim, 1>;

  struct Options {
    Scalar abs_tol = Scalar(1e-12);
    Scalar rel_tol = Scalar(1e-10);
    Scalar h_max = Scalar(0.1);
    Scalar h_init = Scalar(1e-4);
    long max_steps = 10'000'000;
  };

  struct Result {
    Scalar x{};
    State y;
    long accepted = 0;
    long rejected = 0;
    bool stopped = false;  // the step observer asked to stop
  };

  explicit Dopri5(Options opts) : opts_(opts) {}

  /// Integrate y' = f(x, y) from x0 to x1. After every accepted step
  /// on_step(x, y, f(x, y)) is called; returning false stops early.
  template <typename Rhs, typename OnStep>
  Result integrate(Rhs&& f, Scalar x0, State y0, Scalar x1, OnStep&& on_step) const {
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    using std::sqrt;

    Result res;
    Scalar x = x0;
    State y = y0;
    State k1 = f(x, y);
    Scalar h = min(opts_.h_init, opts_.h_max);
    while (x < x1) {
      if (res.accepted + res.rejected > opts_.max_steps)
        throw ConvergenceError("ODE integrator exceeded its step budget");
      bool last = false;
      if (x + h >= x1) {
        h = x1 - x;
        last = true;
      }
      const State k2 = f(x + h * c2, y + h * (a21 * k1));
      const State k3 = f(x + h * c3, y + h * (a31 * k1 + a32 * k2));
      const State k4 = f(x + h * c4, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const State k5 = f(x + h * c5, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const State k6 =
          f(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const State y_new =
          y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const State k7 = f(x + h, y_new);
      const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      Scalar norm = 0;
      for (int i = 0; i < y.size(); ++i) {
        const Scalar sc = opts_.abs_tol + opts_.rel_tol * max(abs(y(i)), abs(y_new(i)));
        norm += (err(i) / sc) * (err(i) / sc);
      }
      norm = sqrt(norm / Scalar(y.size()));

      if (norm <= Scalar(1)) {
        x = last ? x1 : x + h;
        y = y_new;
        k1 = k7;
        ++res.accepted;
        if (!on_step(x, y, k1)) {
          res.stopped = true;
          break;
        }
      } else {
        ++res.rejected;
      }
      const Scalar fac = norm == Scalar(0) ? Scalar(5)
                                           : min(Scalar(5), max(Scalar(0.2),
                                                 Scalar(0.9) * pow(norm, Scalar(-0.2))));
      h = min(h * fac, opts_.h_max);
      if (h < Scalar(1e-14) * max(Scalar(1), abs(x)))
        throw ConvergenceError("ODE step size underflow at x=" + std::to_string(double(x)));
    }
    res.x = x;
    res.y = y;
    return res;
  }

 private:
  Options opts_;

  static constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5,
                          c5 = Scalar(8) / 9;
  static constexpr Scalar a21 = Scalar(1) / 5;
  static constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  static constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
  static constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187,
                          a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
  static constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                          a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                          a65 = Scalar(-5103) / 18656;
  static constexpr Scalar b1 = Scalar(35) / 384, b3 = Scalar(500) / 1113,
                          b4 = Scalar(125) / 192, b5 = Scalar(-2187) / 6784,
                          b6 = Scalar(11) / 84;
  static constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695,
                          e4 = Scalar(71) / 1920, e5 = Scalar(-17253) / 339200,
                          e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
};

}  // namespace nlab
