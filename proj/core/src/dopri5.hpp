#pragma once

// Dormand-Prince 5(4) stepper with the 4th-order continuous extension of
// Hairer, Norsett & Wanner (DOPRI5). Internal to biharm_core.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

#include "biharm/errors.hpp"

namespace biharm::detail {

template <class Real, std::size_t N, class Rhs>
class Dopri5 {
 public:
  using Vec = std::array<Real, N>;

  Dopri5(Rhs f, Real rel_tol, Real abs_tol) : f_(std::move(f)), rtol_(rel_tol), atol_(abs_tol) {}

  void reset(Real r, const Vec& y) {
    r_ = r;
    y_ = y;
    k1_ = f_(r_, y_);
    ++evaluations_;
  }

  Real r() const noexcept { return r_; }
  const Vec& y() const noexcept { return y_; }
  Real r_previous() const noexcept { return r_prev_; }
  Real last_step() const noexcept { return h_last_; }
  long evaluations() const noexcept { return evaluations_; }
  long rejected() const noexcept { return rejected_; }
  const Vec& rate() const noexcept { return k1_; }

  // Advances by one accepted step, starting from trial size h and never
  // stepping past r_limit. Returns the suggested next step size.
  Real step(Real h, Real r_limit) {
    bool rejected_once = false;
    while (true) {
      bool clamped = false;
      if (r_ + h >= r_limit) {
        h = r_limit - r_;
        clamped = true;
      }
      if (h <= 16 * std::numeric_limits<Real>::epsilon() * std::abs(r_)) {
        throw StepUnderflow("dopri5: step size " + std::to_string(static_cast<double>(h)) +
                            " underflows at r = " + std::to_string(static_cast<double>(r_)));
      }
      const Real err = attempt(h, false);
      if (err <= 1) {
        commit(h, clamped ? r_limit : r_ + h);
        Real fac = kSafety * std::pow(std::max(err, Real(1e-10)), Real(-0.2));
        fac = std::min(rejected_once ? Real(1) : kFacMax, std::max(kFacMin, fac));
        return h * fac;
      }
      ++rejected_;
      rejected_once = true;
      h *= std::max(kFacMin, kSafety * std::pow(err, Real(-0.2)));
    }
  }

  // One step to r_next with no error control, for replaying a step sequence.
  void step_to(Real r_next) {
    const Real h = r_next - r_;
    if (!(h > 0)) {
      throw StepUnderflow("dopri5: replayed step is not forward at r = " + std::to_string(static_cast<double>(r_)));
    }
    attempt(h, true);
    commit(h, r_next);
  }

  // Dense output on the last accepted step, r in [r_previous(), r()].
  Vec dense(Real r) const {
    const Real theta = (r - r_prev_) / h_last_;
    const Real theta1 = 1 - theta;
    Vec out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = rc1_[i] + theta * (rc2_[i] + theta1 * (rc3_[i] + theta * (rc4_[i] + theta1 * rc5_[i])));
    }
    return out;
  }

  // d/dr of the dense output polynomial.
  Vec dense_derivative(Real r) const {
    const Real theta = (r - r_prev_) / h_last_;
    const Real theta1 = 1 - theta;
    Vec out;
    for (std::size_t i = 0; i < N; ++i) {
      const Real b = rc3_[i] + theta * (rc4_[i] + theta1 * rc5_[i]);
      const Real db = rc4_[i] + (1 - 2 * theta) * rc5_[i];
      const Real a = rc2_[i] + theta1 * b;
      const Real da = -b + theta1 * db;
      out[i] = (a + theta * da) / h_last_;
    }
    return out;
  }

  const Rhs& rhs() const noexcept { return f_; }

 private:
  static constexpr Real kSafety = Real(0.9);
  static constexpr Real kFacMin = Real(0.2);
  static constexpr Real kFacMax = Real(10);

  void commit(Real h, Real r_next) {
    r_prev_ = r_;
    y_prev_ = y_;
    h_last_ = h;
    r_ = r_next;
    y_ = y_new_;
    k1_ = k7_;
  }

  Real attempt(Real h, bool force) {
    static constexpr Real a21 = Real(1) / 5;
    static constexpr Real a31 = Real(3) / 40, a32 = Real(9) / 40;
    static constexpr Real a41 = Real(44) / 45, a42 = Real(-56) / 15, a43 = Real(32) / 9;
    static constexpr Real a51 = Real(19372) / 6561, a52 = Real(-25360) / 2187, a53 = Real(64448) / 6561,
                          a54 = Real(-212) / 729;
    static constexpr Real a61 = Real(9017) / 3168, a62 = Real(-355) / 33, a63 = Real(46732) / 5247,
                          a64 = Real(49) / 176, a65 = Real(-5103) / 18656;
    static constexpr Real a71 = Real(35) / 384, a73 = Real(500) / 1113, a74 = Real(125) / 192,
                          a75 = Real(-2187) / 6784, a76 = Real(11) / 84;
    static constexpr Real c2 = Real(1) / 5, c3 = Real(3) / 10, c4 = Real(4) / 5, c5 = Real(8) / 9;
    static constexpr Real e1 = Real(71) / 57600, e3 = Real(-71) / 16695, e4 = Real(71) / 1920,
                          e5 = Real(-17253) / 339200, e6 = Real(22) / 525, e7 = Real(-1) / 40;
    static constexpr Real d1 = Real(-12715105075.0L) / Real(11282082432.0L),
                          d3 = Real(87487479700.0L) / Real(32700410799.0L),
                          d4 = Real(-10690763975.0L) / Real(1880347072.0L),
                          d5 = Real(701980252875.0L) / Real(199316789632.0L),
                          d6 = Real(-1453857185.0L) / Real(822651844.0L),
                          d7 = Real(69997945.0L) / Real(29380423.0L);

    Vec tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k1_[i];
    const Vec k2 = f_(r_ + c2 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
    const Vec k3 = f_(r_ + c3 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
    const Vec k4 = f_(r_ + c4 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const Vec k5 = f_(r_ + c5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const Vec k6 = f_(r_ + h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      y_new_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7_ = f_(r_ + h, y_new_);
    evaluations_ += 6;

    Real sum = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const Real err_i = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7_[i]);
      const Real scale = atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
      sum += (err_i / scale) * (err_i / scale);
    }
    const Real err = std::sqrt(sum / N);
    if (err <= 1 || force) {
      for (std::size_t i = 0; i < N; ++i) {
        rc1_[i] = y_[i];
        rc2_[i] = y_new_[i] - y_[i];
        rc3_[i] = h * k1_[i] - rc2_[i];
        rc4_[i] = rc2_[i] - h * k7_[i] - rc3_[i];
        rc5_[i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7_[i]);
      }
    }
    return std::isfinite(err) ? err : Real(1e10);
  }

  Rhs f_;
  Real rtol_;
  Real atol_;
  Real r_ = 0;
  Real r_prev_ = 0;
  Real h_last_ = 0;
  Vec y_{};
  Vec y_prev_{};
  Vec y_new_{};
  Vec k1_{};
  Vec k7_{};
  Vec rc1_{}, rc2_{}, rc3_{}, rc4_{}, rc5_{};
  long evaluations_ = 0;
  long rejected_ = 0;
};

}  // namespace biharm::detail
