#include "gpkmd/ode.hpp"

#include <algorithm>
#include <cmath>

#include "gpkmd/error.hpp"

namespace gpkmd {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

// Step control (PI with Lund stabilization).
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kFacMinInv = 1.0 / 0.2;  // at most 5x growth
constexpr double kFacMaxInv = 1.0 / 10.0; // at most 10x shrink

}  // namespace

DormandPrince45::DormandPrince45(OdeRhs rhs, double t0, Eigen::VectorXd y0, OdeOptions options)
    : rhs_(std::move(rhs)), opt_(options), t_(t0), t_old_(t0), y_(std::move(y0)) {
  const auto n = y_.size();
  for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &y_stage_, &y_new_}) v->resize(n);
  if (!y_.allFinite()) throw IntegrationError("initial state is not finite", t0);
  eval(t_, y_, k1_);
  h_ = opt_.initial_step > 0.0 ? opt_.initial_step : initial_step();
}

void DormandPrince45::eval(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
  rhs_(t, y, dydt);
  ++stats_.evaluations;
}

double DormandPrince45::initial_step() {
  const Eigen::ArrayXd sk = opt_.atol + opt_.rtol * y_.array().abs();
  const double dnf = (k1_.array() / sk).square().sum();
  const double dny = (y_.array() / sk).square().sum();
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, opt_.max_step);

  y_stage_ = y_ + h * k1_;
  eval(t_ + h, y_stage_, k2_);
  const double der2 = std::sqrt(((k2_ - k1_).array() / sk).square().sum()) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, opt_.max_step});
}

void DormandPrince45::step(double t_limit) {
  const auto n = static_cast<double>(y_.size());
  while (true) {
    if (stats_.accepted + stats_.rejected >= opt_.max_steps) {
      throw IntegrationError("maximum number of steps exceeded", t_);
    }
    double h = std::min(h_, opt_.max_step);
    if (t_ + h > t_limit) h = t_limit - t_;
    if (h < 1e-14 * std::max(1.0, std::abs(t_))) {
      throw IntegrationError("step size underflow", t_);
    }

    y_stage_ = y_ + h * a21 * k1_;
    eval(t_ + c2 * h, y_stage_, k2_);
    y_stage_ = y_ + h * (a31 * k1_ + a32 * k2_);
    eval(t_ + c3 * h, y_stage_, k3_);
    y_stage_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    eval(t_ + c4 * h, y_stage_, k4_);
    y_stage_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    eval(t_ + c5 * h, y_stage_, k5_);
    y_stage_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    eval(t_ + h, y_stage_, k6_);
    y_new_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    eval(t_ + h, y_new_, k7_);

    const Eigen::ArrayXd err_vec =
        h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_).array();
    const Eigen::ArrayXd sk = opt_.atol + opt_.rtol * y_.array().abs().max(y_new_.array().abs());
    const double err = std::sqrt((err_vec / sk).square().sum() / n);

    if (!std::isfinite(err) || !y_new_.allFinite()) {
      // Retry with a much smaller step; a genuinely divergent state ends in underflow.
      h_ = 0.1 * h;
      ++stats_.rejected;
      reject_last_ = true;
      continue;
    }

    const double fac11 = std::pow(err, kExpo);
    double fac = fac11 / std::pow(err_old_, kBeta);
    fac = std::max(kFacMaxInv, std::min(kFacMinInv, fac / kSafety));
    double h_new = h / fac;

    if (err <= 1.0) {
      err_old_ = std::max(err, 1e-4);
      ++stats_.accepted;

      cont_[0] = y_;
      cont_[1] = y_new_ - y_;
      cont_[2] = h * k1_ - cont_[1];
      cont_[3] = cont_[1] - h * k7_ - cont_[2];
      cont_[4] = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);

      t_old_ = t_;
      t_ += h;
      if (t_limit - t_ < 1e-14 * std::max(1.0, std::abs(t_limit))) t_ = t_limit;
      y_.swap(y_new_);
      k1_.swap(k7_);
      if (reject_last_) h_new = std::min(h_new, h);
      reject_last_ = false;
      h_ = h_new;
      last_h_ = h;
      return;
    }
    h_ = h / std::min(kFacMinInv, fac11 / kSafety);
    reject_last_ = true;
    ++stats_.rejected;
  }
}

Eigen::VectorXd DormandPrince45::interpolate(double t) const {
  const double theta = (t - t_old_) / last_h_;
  const double theta1 = 1.0 - theta;
  return cont_[0] +
         theta * (cont_[1] + theta1 * (cont_[2] + theta * (cont_[3] + theta1 * cont_[4])));
}

Eigen::MatrixXd integrate_dense(const OdeRhs& rhs, double t0, const Eigen::VectorXd& y0,
                                std::span<const double> times, const OdeOptions& options,
                                OdeStats* stats) {
  Eigen::MatrixXd out(y0.size(), static_cast<Eigen::Index>(times.size()));
  if (times.empty()) return out;
  if (times.front() < t0 || !std::is_sorted(times.begin(), times.end())) {
    throw DomainError("sample times must be ascending and not before t0");
  }
  DormandPrince45 solver(rhs, t0, y0, options);
  std::size_t next = 0;
  while (next < times.size() && times[next] == t0) out.col(static_cast<Eigen::Index>(next++)) = y0;
  const double t_end = times.back();
  while (next < times.size()) {
    solver.step(t_end);
    while (next < times.size() && times[next] <= solver.t()) {
      out.col(static_cast<Eigen::Index>(next)) =
          times[next] == solver.t() ? solver.y() : solver.interpolate(times[next]);
      ++next;
    }
  }
  if (stats) *stats = solver.stats();
  return out;
}

}  // namespace gpkmd
