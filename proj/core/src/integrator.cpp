#include "qcn/integrator.hpp"

#include "qcn/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qcn {

namespace {

// Dormand & Prince (1980) tableau; dense-output weights from Hairer's DOPRI5.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

Dopri5::Dopri5(Rhs rhs, OdeOptions options) : rhs_(std::move(rhs)), opt_(options) {}

double Dopri5::error_norm(const DenseMat& err, const DenseMat& y0, const DenseMat& y1) const {
  double acc = 0.0;
  const Eigen::Index n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale =
        opt_.atol + opt_.rtol * std::max(std::abs(y0.data()[i]), std::abs(y1.data()[i]));
    const double r = std::abs(err.data()[i]) / scale;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double Dopri5::initial_step(double t0, const DenseMat& y0, const DenseMat& f0, double span) {
  if (opt_.initial_step > 0.0) return std::min(opt_.initial_step, span);
  auto scaled_norm = [&](const DenseMat& v) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double s = opt_.atol + opt_.rtol * std::abs(y0.data()[i]);
      acc += std::norm(v.data()[i]) / (s * s);
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  const double dnf = scaled_norm(f0);
  const double dny = scaled_norm(y0);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  h = std::min({h, opt_.max_step, span});

  DenseMat y1 = y0 + h * f0;
  DenseMat f1(y0.rows(), y0.cols());
  rhs_(t0 + h, y1, f1);
  ++stats_.rhs_calls;
  const double der2 = scaled_norm(f1 - f0) / h;
  const double der = std::max(der2, dnf);
  const double h1 = der <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der, 0.2);
  return std::min({100.0 * h, h1, opt_.max_step, span});
}

DenseMat Dopri5::integrate(DenseMat y, const std::vector<double>& grid, const Sampler& sample,
                           const StepHook& on_step) {
  if (grid.empty()) return y;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      fail(ErrorCategory::invalid_argument, "Dopri5: output grid must be strictly increasing");
    }
  }
  double t = grid.front();
  const double t_end = grid.back();
  if (sample) sample(t, y);
  if (grid.size() == 1) return y;

  const auto rows = y.rows();
  const auto cols = y.cols();
  DenseMat k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols), k5(rows, cols),
      k6(rows, cols), k7(rows, cols), ytmp(rows, cols), ynew(rows, cols), err(rows, cols);

  rhs_(t, y, k1);
  ++stats_.rhs_calls;
  double h = initial_step(t, y, k1, t_end - t);
  std::size_t next = 1;
  bool last_rejected = false;

  while (next < grid.size()) {
    if (stats_.accepted + stats_.rejected >= opt_.max_steps) {
      fail(ErrorCategory::solver, "Dopri5: step budget exhausted");
    }
    const double hmin = opt_.min_step * std::max(1.0, std::abs(t));
    if (h < hmin) {
      std::ostringstream os;
      os << "Dopri5: step size underflow at t = " << t;
      fail(ErrorCategory::solver, os.str());
    }
    h = std::min(h, opt_.max_step);
    const bool final_step = t + h >= t_end - 1e-14 * std::max(1.0, std::abs(t_end));
    const double t_new = final_step ? t_end : t + h;
    if (final_step) h = t_end - t;

    ytmp = y + h * a21 * k1;
    rhs_(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs_(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs_(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs_(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs_(t + h, ytmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs_(t + h, ynew, k7);
    stats_.rhs_calls += 6;

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, ynew);

    if (!std::isfinite(en)) {
      ++stats_.rejected;
      h *= 0.1;
      last_rejected = true;
      continue;
    }

    if (en <= 1.0) {
      // Continuous extension over [t, t_new] for every grid point it covers.
      if (sample && next < grid.size() && grid[next] <= t_new) {
        const DenseMat r2 = ynew - y;
        const DenseMat r3 = h * k1 - r2;
        const DenseMat r4 = r2 - h * k7 - r3;
        const DenseMat r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next < grid.size() && grid[next] <= t_new) {
          if (grid[next] == t_new) break;  // sampled below from the projected state
          const double theta = (grid[next] - t) / h;
          const double th1 = 1.0 - theta;
          ytmp = y + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)));
          sample(grid[next], ytmp);
          ++next;
        }
      }
      y.swap(ynew);
      t = t_new;
      ++stats_.accepted;
      // FSAL: the last stage is the first stage of the next step.
      k1.swap(k7);
      if (on_step) on_step(t, y, k1);
      if (next < grid.size() && grid[next] == t) {
        if (sample) sample(t, y);
        ++next;
      }

      double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h *= fac;
      last_rejected = false;
    } else {
      ++stats_.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      last_rejected = true;
    }
  }
  return y;
}

}  // namespace qcn
