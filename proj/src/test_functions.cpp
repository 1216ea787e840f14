#include "hydrolab/test_functions.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace hydrolab {

namespace {

constexpr int kQuadratureIntervals = 20000;

double bump_profile(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

double bump_slope(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double s = 1.0 - u * u;
  return bump_profile(u) * (-2.0 * u / (s * s));
}

double bump_curvature(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double s = 1.0 - u * u;
  return bump_profile(u) * (6.0 * u * u * u * u - 2.0) / (s * s * s * s);
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

double TestFunction::operator()(double x) const {
  if (kind == Kind::Sine) return amplitude * std::sin(mode * std::numbers::pi * x);
  return amplitude * bump_profile((x - center) / half_width);
}

double TestFunction::derivative(double x) const {
  if (kind == Kind::Sine) return amplitude * mode * std::numbers::pi * std::cos(mode * std::numbers::pi * x);
  return amplitude * bump_slope((x - center) / half_width) / half_width;
}

double TestFunction::second_derivative(double x) const {
  if (kind == Kind::Sine) {
    const double k = mode * std::numbers::pi;
    return -amplitude * k * k * std::sin(k * x);
  }
  return amplitude * bump_curvature((x - center) / half_width) / (half_width * half_width);
}

double TestFunction::support_lo() const { return kind == Kind::Sine ? 0.0 : center - half_width; }
double TestFunction::support_hi() const { return kind == Kind::Sine ? 1.0 : center + half_width; }

Eigen::VectorXd TestFunction::sample(const Eigen::VectorXd& x) const {
  Eigen::VectorXd v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) v(i) = (*this)(x(i));
  return v;
}

Eigen::VectorXd TestFunction::sample_second_derivative(const Eigen::VectorXd& x) const {
  Eigen::VectorXd v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) v(i) = second_derivative(x(i));
  return v;
}

TestFunction bump(std::string id, double center, double half_width, double amplitude) {
  if (!(half_width > 0.0)) throw std::invalid_argument("bump: half width must be positive");
  TestFunction f;
  f.id = std::move(id);
  f.kind = TestFunction::Kind::Bump;
  f.center = center;
  f.half_width = half_width;
  f.amplitude = amplitude;
  return f;
}

TestFunction sine_mode(std::string id, int k, double amplitude) {
  if (k < 1) throw std::invalid_argument("sine_mode: mode must be >= 1");
  TestFunction f;
  f.id = std::move(id);
  f.kind = TestFunction::Kind::Sine;
  f.mode = k;
  f.amplitude = amplitude;
  return f;
}

TestFunction rescale(const TestFunction& f, double x0, double eps) {
  if (f.kind != TestFunction::Kind::Bump) throw std::invalid_argument("rescale: only bumps can be rescaled");
  if (!(eps > 0.0)) throw std::invalid_argument("rescale: eps must be positive");
  TestFunction r = f;
  r.id = f.id + "@" + fixed(x0) + "/" + fixed(eps);
  r.center = x0 + eps * f.center;
  r.half_width = eps * f.half_width;
  r.amplitude = f.amplitude / std::sqrt(eps);
  return r;
}

const std::vector<TestFunction>& test_function_catalogue() {
  static const std::vector<TestFunction> catalogue = [] {
    std::vector<TestFunction> c;
    for (int k = 2; k <= 8; ++k) {
      const double x = 0.1 * k;
      c.push_back(bump("bump-" + fixed(x) + "-0.20", x, 0.2));
    }
    for (int k = 0; k < 8; ++k) {
      const double x = 0.15 + 0.1 * k;
      c.push_back(bump("bump-" + fixed(x) + "-0.10", x, 0.1));
    }
    c.push_back(bump("bump-0.50-0.40", 0.5, 0.4));
    for (int k = 1; k <= 4; ++k) c.push_back(sine_mode("sine-" + std::to_string(k), k));
    return c;
  }();
  return catalogue;
}

const TestFunction& catalogue_function(const std::string& id) {
  for (const auto& f : test_function_catalogue()) {
    if (f.id == id) return f;
  }
  throw std::invalid_argument("unknown test function id '" + id + "'");
}

bool disjoint_supports(const TestFunction& f, const TestFunction& g) {
  return f.support_hi() <= g.support_lo() || g.support_hi() <= f.support_lo();
}

double integrate_unit_interval(const std::function<double(double)>& u) {
  const double h = 1.0 / kQuadratureIntervals;
  double s = 0.5 * (u(0.0) + u(1.0));
  for (int i = 1; i < kQuadratureIntervals; ++i) s += u(i * h);
  return s * h;
}

double integrate_product(const TestFunction& f, const TestFunction& g, const std::function<double(double)>& weight) {
  return integrate_unit_interval([&](double x) { return (weight ? weight(x) : 1.0) * f(x) * g(x); });
}

double integrate_gradient_product(const TestFunction& f, const TestFunction& g,
                                  const std::function<double(double)>& weight) {
  return integrate_unit_interval(
      [&](double x) { return (weight ? weight(x) : 1.0) * f.derivative(x) * g.derivative(x); });
}

double green_form(const TestFunction& f, const TestFunction& g) {
  // u(x) = (1-x) int_0^x y g(y) dy + x int_x^1 (1-y) g(y) dy, then int f u.
  const int n = kQuadratureIntervals;
  const double h = 1.0 / n;
  std::vector<double> left(n + 1, 0.0), right(n + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double a = (i - 1) * h, b = i * h;
    left[i] = left[i - 1] + 0.5 * h * (a * g(a) + b * g(b));
  }
  for (int i = n - 1; i >= 0; --i) {
    const double a = i * h, b = (i + 1) * h;
    right[i] = right[i + 1] + 0.5 * h * ((1.0 - a) * g(a) + (1.0 - b) * g(b));
  }
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    const double u = (1.0 - x) * left[i] + x * right[i];
    s += (i == 0 || i == n ? 0.5 : 1.0) * f(x) * u;
  }
  return s * h;
}

}  // namespace hydrolab
