#include "srrw/lyapunov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "srrw/rng.hpp"

namespace srrw {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void check_dims(std::span<const double> x, std::span<const double> y, std::size_t d) {
  if (x.size() != y.size() || (d != 0 && x.size() != d)) {
    throw std::invalid_argument("point has the wrong dimension for this inequality");
  }
}

// log|x + y| - log|x| given |x| and w = (2 x.y + |y|^2) / |x|^2.
double log_ratio(double w, double nx, double ns) {
  return w > -0.5 ? 0.5 * std::log1p(w) : std::log(ns) - std::log(nx);
}

// f(x + y) - f(x) for f = sqrt(log|.|) on |.| >= 1 and 0 inside.
double sqrt_log_increment(std::span<const double> x, std::span<const double> y) {
  const double nx = norm(x);
  std::array<double, 32> s{};
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] + y[i];
  const double ns = norm(std::span<const double>(s.data(), x.size()));
  const double fx = nx >= 1.0 ? std::sqrt(std::log(nx)) : 0.0;
  if (ns < 1.0) return -fx;
  if (nx < 1.0) return std::sqrt(std::log(ns));
  const double l = std::log(nx);
  const double w = (2.0 * dot(x, y) + dot(y, y)) / (nx * nx);
  const double u = log_ratio(w, nx, ns);
  const double den = std::sqrt(std::max(l + u, 0.0)) + std::sqrt(l);
  return den > 0.0 ? u / den : 0.0;
}

// h(x + y) - h(x) for h = |.|^(-delta/4) on |.| >= 1 and 1 inside.
double inverse_power_increment(std::span<const double> x, std::span<const double> y,
                               double delta) {
  const double nx = norm(x);
  std::array<double, 32> s{};
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] + y[i];
  const double ns = norm(std::span<const double>(s.data(), x.size()));
  const double hx = nx >= 1.0 ? std::pow(nx, -delta / 4.0) : 1.0;
  if (ns < 1.0) return 1.0 - hx;
  if (nx < 1.0) return std::pow(ns, -delta / 4.0) - 1.0;
  const double w = (2.0 * dot(x, y) + dot(y, y)) / (nx * nx);
  // (1 + w)^(-delta/8) - 1
  return hx * std::expm1(-delta / 4.0 * log_ratio(w, nx, ns));
}

}  // namespace

double LyapunovFn::operator()(std::span<const double> x) const {
  const double r = norm(x);
  switch (kind) {
    case LyapunovKind::sqrt_abs:
      return std::sqrt(r);
    case LyapunovKind::sqrt_log:
      return r >= 1.0 ? std::sqrt(std::log(r)) : 0.0;
    case LyapunovKind::inverse_power:
      return r >= 1.0 ? std::pow(r, -delta / 4.0) : 1.0;
  }
  return 0.0;
}

bool in_truncation_set(std::span<const double> x, std::span<const double> y, double eps) {
  return norm(y) <= std::pow(norm(x), 1.0 - eps);
}

std::string inequality_name(Inequality id) {
  switch (id) {
    case Inequality::sqrt_abs:
      return "sqrt-abs";
    case Inequality::sqrt_log_global:
      return "sqrt-log-global";
    case Inequality::sqrt_log_local:
      return "sqrt-log-local";
    case Inequality::inverse_power_local:
      return "inverse-power-local";
  }
  return "?";
}

Inequality parse_inequality(std::string_view name) {
  for (auto id : {Inequality::sqrt_abs, Inequality::sqrt_log_global, Inequality::sqrt_log_local,
                  Inequality::inverse_power_local}) {
    if (inequality_name(id) == name) return id;
  }
  throw std::invalid_argument("unknown inequality '" + std::string(name) + "'");
}

bool Sides::holds() const noexcept {
  return slack() <= 1e-12 * (std::abs(lhs) + std::abs(rhs));
}

Sides evaluate(Inequality id, const InequalityParams& p, std::span<const double> x,
               std::span<const double> y) {
  Sides s;
  switch (id) {
    case Inequality::sqrt_abs: {
      check_dims(x, y, 1);
      if (x[0] == 0.0) throw std::invalid_argument("x must be nonzero");
      const double t = y[0] / x[0];
      const double root = std::sqrt(std::abs(x[0]));
      // sqrt|1+t| - 1 = (|1+t| - 1) / (sqrt|1+t| + 1), and |1+t| - 1 = t when 1+t >= 0.
      const double a = 1.0 + t;
      const double num = a >= 0.0 ? t : -a - 1.0;
      s.lhs = root * num / (std::sqrt(std::abs(a)) + 1.0);
      const double ind = std::abs(y[0]) > p.epsilon * std::abs(x[0]) ? 1.0 : 0.0;
      s.rhs = root * (t / 2.0 - t * t / 10.0 + p.C * t * t * ind);
      return s;
    }
    case Inequality::sqrt_log_global: {
      check_dims(x, y, 2);
      s.lhs = sqrt_log_increment(x, y);
      s.rhs = 1.0 + norm(y) / norm(x);
      return s;
    }
    case Inequality::sqrt_log_local: {
      check_dims(x, y, 2);
      s.lhs = sqrt_log_increment(x, y);
      const double nx = norm(x);
      const double nx2 = nx * nx;
      const double l = std::log(nx);
      const double pxy = dot(x, y) / nx2;  // x.y / |x|^2
      const double q = dot(y, y) / nx2;    // |y|^2 / |x|^2
      const double tail = p.C * q / std::pow(nx, p.epsilon);
      const double first = pxy + q / 2.0 - pxy * pxy + tail;
      s.rhs = first / (2.0 * std::sqrt(l)) - pxy * pxy / (8.0 * l * std::sqrt(l)) +
              tail / (l * std::sqrt(l));
      return s;
    }
    case Inequality::inverse_power_local: {
      check_dims(x, y, 0);
      s.lhs = inverse_power_increment(x, y, p.delta);
      const double nx = norm(x);
      const double xy = dot(x, y);
      const double q = dot(y, y);
      const double bracket =
          xy + q / 2.0 - (1.0 + p.delta / 8.0) * (xy / nx) * (xy / nx) - p.C * q / std::pow(nx, p.epsilon);
      const double power = p.half_delta_prefactor ? 2.0 + p.delta / 2.0 : 2.0 + p.delta / 4.0;
      s.rhs = -p.delta / 4.0 * std::pow(nx, -power) * bracket;
      return s;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

constexpr std::uint64_t kChunks = 64;

double log_uniform(RngStream& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

void unit_vector(RngStream& rng, std::span<double> out) {
  double r = 0.0;
  do {
    for (double& v : out) v = rng.normal();
    r = norm(out);
  } while (r == 0.0);
  for (double& v : out) v /= r;
}

// Unit direction for y relative to the unit vector e: isotropic, near
// (anti)parallel, or near orthogonal, with a log-uniform tilt.
void direction(RngStream& rng, std::span<const double> e, int mode, std::span<double> out) {
  const std::size_t d = e.size();
  if (mode == 0 || d == 1) {
    unit_vector(rng, out);
    if (d == 1 && mode != 0) out[0] = mode == 2 ? -e[0] : e[0];
    return;
  }
  std::array<double, 32> g{};
  std::span<double> v(g.data(), d);
  unit_vector(rng, v);
  // Component of v orthogonal to e.
  const double c = dot(v, e);
  for (std::size_t i = 0; i < d; ++i) v[i] -= c * e[i];
  const double vr = norm(v);
  if (vr > 0.0) {
    for (double& z : v) z /= vr;
  }
  const double tilt = rng.uniform() < 0.2 ? 0.0 : log_uniform(rng, 1e-9, 0.1);
  double a = 0.0, b = 0.0;  // out = a e + b v
  switch (mode) {
    case 1: a = 1.0; b = tilt; break;
    case 2: a = -1.0; b = tilt; break;
    default: a = rng.uniform() < 0.5 ? tilt : -tilt; b = 1.0; break;
  }
  for (std::size_t i = 0; i < d; ++i) out[i] = a * e[i] + b * v[i];
  const double r = norm(out);
  for (double& z : out) z /= r;
}

struct Sample {
  std::array<double, 32> x{};
  std::array<double, 32> y{};
  std::size_t d = 1;
  std::span<const double> xs() const { return {x.data(), d}; }
  std::span<const double> ys() const { return {y.data(), d}; }
};

void draw_sqrt_abs(RngStream& rng, const InequalityParams& p, std::uint64_t k, Sample& s) {
  s.d = 1;
  const double mag = log_uniform(rng, 1e-3, 1e6);
  s.x[0] = rng.uniform() < 0.5 ? -mag : mag;
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  double t = 0.0;
  switch (k % 6) {
    case 0: t = sign * log_uniform(rng, 1e-9, 1e4); break;
    case 1: t = sign * p.epsilon * (0.99 + 0.02 * rng.uniform()); break;
    case 2: t = -2.5 + 3.0 * rng.uniform(); break;
    case 3: t = sign * p.epsilon * (0.5 + rng.uniform()); break;
    case 4: t = -1.0 + sign * log_uniform(rng, 1e-12, 1e-2); break;
    default: t = k % 12 == 5 ? 0.0 : sign * log_uniform(rng, 1e-3, 1.0); break;
  }
  s.y[0] = t * s.x[0];
}

void draw_sqrt_log_global(RngStream& rng, std::uint64_t k, Sample& s) {
  s.d = 2;
  const double nx = k % 4 == 3 ? 0.99 + 0.02 * rng.uniform() : log_uniform(rng, 1e-3, 1e6);
  std::span<double> x(s.x.data(), 2), y(s.y.data(), 2);
  unit_vector(rng, x);
  std::array<double, 2> e{x[0], x[1]};
  for (double& v : x) v *= nx;
  const int mode = static_cast<int>((k / 4) % 4);
  direction(rng, e, mode, y);
  double ny = 0.0;
  switch (k % 4) {
    case 0: ny = nx * log_uniform(rng, 1e-9, 1e4); break;
    case 1: ny = nx * (0.9 + 0.2 * rng.uniform()); break;  // x + y near 0 when antiparallel
    case 2: ny = log_uniform(rng, 1e-3, 1e6); break;
    default: ny = nx * log_uniform(rng, 1e-3, 1e1); break;
  }
  for (double& v : y) v *= ny;
}

void draw_local(RngStream& rng, const InequalityParams& p, std::uint64_t k, std::size_t d,
                Sample& s) {
  s.d = d;
  const double nx = k % 3 == 2 ? p.r * (1.0 + 0.01 * rng.uniform()) : log_uniform(rng, p.r, p.r * 1e6);
  std::span<double> x(s.x.data(), d), y(s.y.data(), d);
  unit_vector(rng, x);
  std::array<double, 32> e{};
  std::copy(x.begin(), x.end(), e.begin());
  for (double& v : x) v *= nx;
  const double bound = std::pow(nx, 1.0 - p.epsilon);
  const int mode = static_cast<int>((k / 3) % 4);
  direction(rng, std::span<const double>(e.data(), d), mode, y);
  double ny = 0.0;
  switch ((k / 12) % 3) {
    case 0: ny = bound * log_uniform(rng, 1e-9, 1.0); break;
    case 1: ny = bound * (0.99 + 0.01 * rng.uniform()); break;
    default: ny = bound * rng.uniform(); break;
  }
  if (k % 97 == 0) ny = 0.0;
  for (double& v : y) v *= ny;
  while (!in_truncation_set(x, y, p.epsilon)) {
    for (double& v : y) v *= 1.0 - 1e-12;
  }
}

void draw(Inequality id, const InequalityParams& p, RngStream& rng, std::uint64_t k, Sample& s) {
  switch (id) {
    case Inequality::sqrt_abs:
      draw_sqrt_abs(rng, p, k, s);
      break;
    case Inequality::sqrt_log_global:
      draw_sqrt_log_global(rng, k, s);
      break;
    case Inequality::sqrt_log_local:
      draw_local(rng, p, k, 2, s);
      break;
    case Inequality::inverse_power_local: {
      const std::size_t d = p.d > 0 ? static_cast<std::size_t>(p.d) : (k % 2 == 0 ? 3 : 4);
      draw_local(rng, p, k, d, s);
      break;
    }
  }
}

void validate_params(Inequality id, const InequalityParams& p) {
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(p.C >= 0.0)) throw std::invalid_argument("C must be nonnegative");
  if (id == Inequality::sqrt_log_local || id == Inequality::inverse_power_local) {
    if (!(p.r >= 1.0)) throw std::invalid_argument("r must be at least 1");
  }
  if (id == Inequality::sqrt_log_local && !(p.r > 1.0)) {
    throw std::invalid_argument("the local f bound needs r > 1 (log r > 0)");
  }
  if (id == Inequality::inverse_power_local) {
    if (!(p.delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (p.d != 0 && (p.d < 3 || p.d > 32)) throw std::invalid_argument("d must lie in [3, 32]");
  }
}

}  // namespace

CertificationResult certify(Inequality id, const InequalityParams& p, std::uint64_t n,
                            std::uint64_t seed) {
  validate_params(id, p);
  std::vector<CertificationResult> parts(kChunks);
  auto run_chunk = [&](std::uint64_t c) {
    CertificationResult& r = parts[c];
    r.max_violation = -std::numeric_limits<double>::infinity();
    RngStream rng(split_seed(seed, hash_name(inequality_name(id)), c));
    Sample s;
    for (std::uint64_t k = c; k < n; k += kChunks) {
      draw(id, p, rng, k / kChunks, s);
      const Sides sides = evaluate(id, p, s.xs(), s.ys());
      if (!sides.holds()) ++r.violations;
      if (sides.slack() > r.max_violation || r.worst_x.empty()) {
        r.max_violation = sides.slack();
        r.worst_x.assign(s.xs().begin(), s.xs().end());
        r.worst_y.assign(s.ys().begin(), s.ys().end());
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16));
  if (threads == 1) {
    for (std::uint64_t c = 0; c < kChunks; ++c) run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::uint64_t c = t; c < kChunks; c += threads) run_chunk(c);
      });
    }
  }

  CertificationResult out;
  out.id = id;
  out.params = p;
  out.samples = n;
  out.seed = seed;
  out.max_violation = -std::numeric_limits<double>::infinity();
  for (const auto& r : parts) {  // fixed chunk order keeps ties deterministic
    out.violations += r.violations;
    if (!r.worst_x.empty() && (out.worst_x.empty() || r.max_violation > out.max_violation)) {
      out.max_violation = r.max_violation;
      out.worst_x = r.worst_x;
      out.worst_y = r.worst_y;
    }
  }
  out.pass = n > 0 && out.violations == 0;
  return out;
}

double taylor_radius() {
  auto g = [](double t) {
    const double a = std::sqrt(1.0 + t);
    return t / (a + 1.0) - t / 2.0 + t * t / 10.0;  // sqrt(1+t) - 1 - t/2 + t^2/10
  };
  // First sign change on a fine scan of (0, 1); the negative side never binds
  // first, which the scan also checks.
  constexpr int kSteps = 100000;
  double lo = 0.0, hi = 1.0;
  for (int k = 1; k <= kSteps; ++k) {
    const double t = static_cast<double>(k) / kSteps;
    if (g(t) > 0.0 || g(-t) > 0.0) {
      hi = t;
      lo = static_cast<double>(k - 1) / kSteps;
      break;
    }
  }
  if (g(hi) <= 0.0 && g(-hi) <= 0.0) return hi;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0 || g(-mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

InequalityParams default_params(Inequality id) {
  InequalityParams p;
  switch (id) {
    case Inequality::sqrt_abs:
      p.epsilon = taylor_radius();
      p.C = std::pow(p.epsilon, -1.5);
      break;
    case Inequality::sqrt_log_global:
      p.C = 0.0;
      break;
    case Inequality::sqrt_log_local:
      p.epsilon = 1.0 / 16.0;
      break;
    case Inequality::inverse_power_local:
      p.epsilon = 1.0 / 8.0;
      p.delta = 1.0;
      break;
  }
  return p;
}

SearchGrid default_grid(Inequality id) {
  const std::vector<double> c_grid{0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  switch (id) {
    case Inequality::sqrt_abs:
      return {{1.0}, {1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 16.0, 32.0}};
    case Inequality::sqrt_log_global:
      return {{1.0}, {0.0}};
    case Inequality::sqrt_log_local:
    case Inequality::inverse_power_local: {
      std::vector<double> r;
      for (double e : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) r.push_back(std::exp(e));
      return {r, c_grid};
    }
  }
  return {};
}

ConstantSearch find_constants(Inequality id, const InequalityParams& base, const SearchGrid& grid,
                              std::uint64_t n, std::uint64_t seed) {
  if (grid.r.empty() || grid.C.empty()) throw std::invalid_argument("empty search grid");
  auto rs = grid.r;
  auto cs = grid.C;
  std::sort(rs.begin(), rs.end());
  std::sort(cs.begin(), cs.end());
  ConstantSearch out;
  for (double r : rs) {
    for (double c : cs) {
      InequalityParams p = base;
      p.r = r;
      p.C = c;
      auto res = certify(id, p, n, seed);
      out.attempts.push_back(res);
      if (res.pass) {
        out.found = true;
        out.params = p;
        out.result = std::move(res);
        return out;
      }
    }
  }
  return out;
}

namespace {

nlohmann::ordered_json certification_json(const CertificationResult& r) {
  nlohmann::ordered_json j;
  j["inequality"] = inequality_name(r.id);
  j["epsilon"] = r.params.epsilon;
  j["r"] = r.params.r;
  j["C"] = r.params.C;
  if (r.id == Inequality::inverse_power_local) {
    j["delta"] = r.params.delta;
    j["d"] = r.params.d;
    j["half_delta_prefactor"] = r.params.half_delta_prefactor;
  }
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["max_violation"] = r.max_violation;
  j["violations"] = r.violations;
  j["worst_x"] = r.worst_x;
  j["worst_y"] = r.worst_y;
  j["pass"] = r.pass;
  return j;
}

}  // namespace

std::string CertificationResult::to_json() const { return certification_json(*this).dump(2); }

std::string ConstantSearch::to_json() const {
  nlohmann::ordered_json j;
  j["found"] = found;
  if (found) j["witness"] = certification_json(result);
  j["attempts"] = nlohmann::ordered_json::array();
  for (const auto& a : attempts) j["attempts"].push_back(certification_json(a));
  return j.dump(2);
}

}  // namespace srrw
