#include "srrw/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "json.hpp"
#include "srrw/numeric.hpp"

namespace srrw {

namespace {

// Calls f(n) for n = 1..N; `emit(n)` is true at the requested times (every n
// when times is empty).
class TimeCursor {
 public:
  explicit TimeCursor(std::span<const std::uint64_t> times) : times_(times) {}
  bool hit(std::uint64_t n) {
    if (times_.empty()) return true;
    if (next_ < times_.size() && times_[next_] == n) {
      ++next_;
      return true;
    }
    return false;
  }

 private:
  std::span<const std::uint64_t> times_;
  std::size_t next_ = 0;
};

void check_times(std::span<const std::uint64_t> times, std::uint64_t n) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 1 || times[k] > n || (k > 0 && times[k] <= times[k - 1])) {
      throw std::invalid_argument("times must increase strictly within [1, trajectory length]");
    }
  }
}

double norm_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

DeltaSeries delta_n(const FunctionalSpec& h, const Trajectory& traj,
                    std::span<const std::uint64_t> times) {
  const std::uint64_t n_max = traj.length();
  check_times(times, n_max);
  DeltaSeries out;
  out.moment_warning = h.moment_warning;
  const double ref = h.moment_warning ? 0.0 : h.reference;
  CompensatedSum sum;
  TimeCursor cursor(times);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    sum.add(h(traj.step(n)) - ref);
    if (cursor.hit(n)) {
      out.times.push_back(n);
      out.values.push_back(sum.value() / static_cast<double>(n));
    }
  }
  return out;
}

std::vector<double> delta_second_moment_frobenius(const Trajectory& traj,
                                                  const Eigen::MatrixXd& second_moment,
                                                  std::span<const std::uint64_t> times) {
  const int d = traj.d;
  if (second_moment.rows() != d || second_moment.cols() != d) {
    throw std::invalid_argument("second-moment matrix has the wrong shape");
  }
  const std::uint64_t n_max = traj.length();
  check_times(times, n_max);
  std::vector<CompensatedSum> sums(static_cast<std::size_t>(d) * d);
  std::vector<double> out;
  TimeCursor cursor(times);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const auto x = traj.step(n);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) sums[i * d + j].add(x[i] * x[j] - second_moment(i, j));
    }
    if (cursor.hit(n)) {
      double f = 0.0;
      for (const auto& s : sums) {
        const double v = s.value() / static_cast<double>(n);
        f += v * v;
      }
      out.push_back(std::sqrt(f));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

BetaGamma beta_gamma(std::uint64_t n_max, double alpha) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  BetaGamma bg;
  bg.alpha = alpha;
  bg.beta.reserve(n_max);
  bg.gamma.reserve(n_max);
  bg.scaled.reserve(n_max);
  CompensatedSum log_beta;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const double nd = static_cast<double>(n);
    const double g = (1.0 - alpha) / (nd + 1.0);
    const double lb = log_beta.value();
    bg.beta.push_back(std::exp(lb));
    bg.gamma.push_back(g);
    bg.scaled.push_back(std::exp(lb + (1.0 - alpha) * std::log(nd)));
    log_beta.add(std::log1p(-g));
  }
  return bg;
}

double beta_closed_form(std::uint64_t n, double alpha) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  // Gamma(n + alpha) / Gamma(n + 1) without forming either factor.
  const double ratio =
      boost::math::tgamma_delta_ratio(static_cast<double>(n) + alpha, 1.0 - alpha);
  return ratio / boost::math::tgamma(1.0 + alpha);
}

double beta_scaling_limit(double alpha) { return 1.0 / boost::math::tgamma(1.0 + alpha); }

IdentityResidual delta_identity_residual(const FunctionalSpec& h, const Trajectory& traj,
                                         double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  if (h.moment_warning || !std::isfinite(h.reference)) {
    throw std::invalid_argument("the identity needs a finite reference value E h(X_1)");
  }
  const std::uint64_t n_max = traj.length();
  if (n_max < 1) throw std::invalid_argument("empty trajectory");
  const double ref = h.reference;

  IdentityResidual res;
  res.steps = n_max;
  CompensatedSum centered;  // sum_{i<=n} (h(X_i) - E h)
  CompensatedSum log_beta;  // log beta_n
  CompensatedSum series;    // Delta_1 + sum_{j<n} gamma_j / beta_{j+1} eps_{j+1}
  CompensatedSum magnitude;

  centered.add(h(traj.step(1)) - ref);
  double delta = centered.value();
  series.add(delta);
  magnitude.add(std::abs(delta));

  for (std::uint64_t n = 1; n < n_max; ++n) {
    const double nd = static_cast<double>(n);
    const double g = (1.0 - alpha) / (nd + 1.0);
    const double hc = h(traj.step(n + 1)) - ref;
    const double eps = (hc - alpha * delta) / (1.0 - alpha);

    centered.add(hc);
    const double next = centered.value() / (nd + 1.0);

    const double predicted = (1.0 - g) * delta + g * eps;
    const double scale = std::abs(delta) + std::abs(next) + std::abs(hc) / (nd + 1.0);
    const double err = std::abs(next - predicted);
    res.recursion = std::max(res.recursion, scale > 0.0 ? err / scale : err);

    log_beta.add(std::log1p(-g));  // now log beta_{n+1}
    const double beta_next = std::exp(log_beta.value());
    const double term = g / beta_next * eps;
    series.add(term);
    magnitude.add(std::abs(term));
    const double closed = beta_next * series.value();
    const double cscale = beta_next * magnitude.value();
    const double cerr = std::abs(closed - next);
    res.closed_form = std::max(res.closed_form, cscale > 0.0 ? cerr / cscale : cerr);

    delta = next;
  }
  return res;
}

// ---------------------------------------------------------------------------

RateTrace mz_rate_trace(const CheckpointSeries& series, std::size_t functional, double nu,
                        double moment_order) {
  if (functional >= series.functional_names.size()) {
    throw std::out_of_range("no such recorded functional");
  }
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  RateTrace t;
  t.warning = !(nu < 1.0 - 1.0 / moment_order);
  for (const auto& rec : series.records) {
    t.times.push_back(rec.n);
    t.values.push_back(std::pow(static_cast<double>(rec.n), nu) * std::abs(rec.deltas[functional]));
  }
  return t;
}

RateTrace mz_rate_trace_position(const CheckpointSeries& series, std::span<const double> mean,
                                 double nu, double moment_order) {
  if (mean.size() != static_cast<std::size_t>(series.d)) {
    throw std::invalid_argument("mean has the wrong dimension");
  }
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  RateTrace t;
  t.warning = !(nu < 1.0 - 1.0 / moment_order);
  for (const auto& rec : series.records) {
    const double nd = static_cast<double>(rec.n);
    double s = 0.0;
    for (int i = 0; i < series.d; ++i) {
      const double v = rec.position[i] / nd - mean[i];
      s += v * v;
    }
    t.times.push_back(rec.n);
    t.values.push_back(std::pow(nd, nu) * std::sqrt(s));
  }
  return t;
}

ExponentEstimate escape_exponent(std::span<const std::uint64_t> times,
                                 std::span<const double> norms) {
  if (times.size() != norms.size()) throw std::invalid_argument("times and norms differ in size");
  if (times.size() < 4) throw std::invalid_argument("need at least 4 checkpoints");
  if (static_cast<double>(times.back()) < 100.0 * static_cast<double>(times.front())) {
    throw std::invalid_argument("checkpoints must span at least 2 decades");
  }
  ExponentEstimate e;
  const double n_final = static_cast<double>(times.back());
  e.final_ratio = norms.back() > 0.0 ? std::log(norms.back()) / std::log(n_final) : 0.0;

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (static_cast<double>(times[k]) * 10.0 < n_final || !(norms[k] > 0.0)) continue;
    const double x = std::log(static_cast<double>(times[k]));
    const double y = std::log(norms[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++e.points;
  }
  if (e.points >= 2) {
    const double m = static_cast<double>(e.points);
    const double den = m * sxx - sx * sx;
    if (den > 0.0) {
      e.slope = (m * sxy - sx * sy) / den;
      e.valid = true;
    }
  }
  return e;
}

ExponentEstimate escape_exponent(const CheckpointSeries& series) {
  std::vector<std::uint64_t> t;
  std::vector<double> r;
  for (const auto& rec : series.records) {
    t.push_back(rec.n);
    r.push_back(rec.norm);
  }
  return escape_exponent(t, r);
}

double lil_normalizer(std::uint64_t n, double alpha, double variance) {
  if (n < 16) throw std::invalid_argument("the LIL normalizer needs n >= 16");
  if (!(alpha >= 0.0 && alpha <= 0.5)) {
    throw std::invalid_argument("LIL normalization is only asserted for alpha <= 1/2");
  }
  const double nd = static_cast<double>(n);
  const double ln = std::log(nd);
  if (alpha < 0.5) return std::sqrt(2.0 * nd * std::log(ln) * variance / (1.0 - 2.0 * alpha));
  return std::sqrt(2.0 * nd * ln * std::log(std::log(ln)) * variance);
}

LilTrace lil_ratio(const Trajectory& traj, double alpha, double variance, double mean,
                   std::span<const std::uint64_t> times, int component) {
  if (!(alpha >= 0.0 && alpha <= 0.5)) {
    throw std::invalid_argument("LIL normalization is only asserted for alpha <= 1/2");
  }
  if (component < 0 || component >= traj.d) throw std::out_of_range("component out of range");
  const std::uint64_t n_max = traj.length();
  check_times(times, n_max);
  LilTrace out;
  CompensatedSum s;
  double running = -std::numeric_limits<double>::infinity();
  TimeCursor cursor(times);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    s.add(traj.step(n)[component] - mean);
    const bool emit = cursor.hit(n);
    if (n < 16) continue;
    const double norm = lil_normalizer(n, alpha, variance);
    const double ratio = norm > 0.0 ? s.value() / norm : 0.0;
    running = std::max(running, ratio);
    if (emit) {
      out.times.push_back(n);
      out.ratio.push_back(ratio);
      out.running_max.push_back(running);
    }
  }
  return out;
}

double tail_oscillation(std::span<const double> positions, int d, std::size_t last) {
  const std::size_t count = positions.size() / static_cast<std::size_t>(d);
  const std::size_t first = count > last ? count - last : 0;
  std::vector<std::vector<double>> dirs;
  for (std::size_t k = first; k < count; ++k) {
    std::vector<double> u(positions.begin() + k * d, positions.begin() + (k + 1) * d);
    const double r = norm_of(u);
    for (double& v : u) v = r > 0.0 ? v / r : 0.0;
    dirs.push_back(std::move(u));
  }
  double osc = 0.0;
  for (std::size_t a = 0; a < dirs.size(); ++a) {
    for (std::size_t b = a + 1; b < dirs.size(); ++b) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const double v = dirs[a][i] - dirs[b][i];
        s += v * v;
      }
      osc = std::max(osc, std::sqrt(s));
    }
  }
  return std::min(osc, 2.0);
}

AngularSeries angular_series(const CheckpointSeries& series) {
  AngularSeries a;
  std::vector<double> positions;
  for (const auto& rec : series.records) {
    a.times.push_back(rec.n);
    for (int i = 0; i < series.d; ++i) {
      a.directions.push_back(rec.norm > 0.0 ? rec.position[i] / rec.norm : 0.0);
    }
    positions.insert(positions.end(), rec.position.begin(), rec.position.end());
  }
  a.tail_oscillation = tail_oscillation(positions, series.d);
  return a;
}

RecurrenceStats recurrence_stats(const Trajectory& traj, double r,
                                 std::span<const std::uint64_t> times) {
  if (!(r > 0.0)) throw std::invalid_argument("return radius must be positive");
  const std::uint64_t n_max = traj.length();
  if (n_max < 1) throw std::invalid_argument("empty trajectory");
  check_times(times, n_max);

  RecurrenceStats st;
  st.lattice = std::all_of(traj.steps.begin(), traj.steps.end(),
                           [](double v) { return std::isfinite(v) && v == std::round(v); });
  ReturnCounter counter(r);
  std::vector<double> s(traj.d, 0.0);
  st.liminf_proxy = std::numeric_limits<double>::infinity();
  const std::uint64_t half = n_max / 2;
  const std::vector<std::uint64_t> final_only{n_max};
  TimeCursor cursor(times.empty() ? std::span<const std::uint64_t>(final_only) : times);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const auto x = traj.step(n);
    double r2 = 0.0;
    for (int i = 0; i < traj.d; ++i) {
      s[i] += x[i];
      r2 += s[i] * s[i];
    }
    counter.observe(r2);
    if (n > half) st.liminf_proxy = std::min(st.liminf_proxy, std::sqrt(r2));
    if (st.lattice && r2 <= r * r) {
      std::vector<long long> site(traj.d);
      for (int i = 0; i < traj.d; ++i) site[i] = std::llround(s[i]);
      ++st.site_visits[site];
    }
    if (cursor.hit(n)) {
      st.times.push_back(n);
      st.returns.push_back(counter.count());
    }
  }
  return st;
}

double default_return_radius(const StepDistribution& dist) {
  if (dist.integer_support()) return 1.0;
  if (!dist.has_finite_moment(2.0)) {
    throw std::domain_error("no default return radius without a second moment; pass one");
  }
  return 2.0 * std::sqrt(dist.mean_square_norm());
}

std::vector<ExitTime> exit_times(const StepDistribution& dist, double alpha,
                                 std::span<const double> radii, std::uint64_t seed,
                                 std::uint64_t safety) {
  std::vector<ExitTime> out(radii.size());
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] >= 0.0) || !std::isfinite(radii[k])) {
      throw std::invalid_argument("exit radii must be finite and nonnegative");
    }
    out[k].radius = radii[k];
    if (radii[k] == 0.0) {
      out[k].exited = true;  // ||S_0|| = 0 >= 0
    } else {
      order.push_back(k);
    }
  }
  if (order.empty()) return out;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return radii[a] < radii[b]; });

  WalkState st(dist, alpha, WalkMode::automatic, seed);
  if (!st.counts_mode()) safety = std::min(safety, kMaxFullHorizon);
  std::size_t pending = 0;
  for (;;) {
    const double r2 = st.norm_squared();
    while (pending < order.size() && r2 >= radii[order[pending]] * radii[order[pending]]) {
      out[order[pending]].time = st.time();
      out[order[pending]].exited = true;
      ++pending;
    }
    if (pending == order.size() || st.time() >= safety) break;
    st.step();
  }
  for (; pending < order.size(); ++pending) out[order[pending]].time = st.time();
  return out;
}

double xn_value(std::uint64_t n, double norm_squared, double kappa) {
  if (n < 2) throw std::invalid_argument("x_n needs n >= 2");
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0, 1)");
  const double nd = static_cast<double>(n);
  return std::log(norm_squared + std::pow(nd, kappa)) / std::log(nd);
}

std::vector<double> xn_trace(const CheckpointSeries& series, double kappa) {
  std::vector<double> out;
  for (const auto& rec : series.records) {
    out.push_back(xn_value(rec.n, rec.norm * rec.norm, kappa));
  }
  return out;
}

// ---------------------------------------------------------------------------

void DiagnosticsReport::validate() const {
  for (const auto& [name, values] : series) {
    if (values.size() != times.size()) {
      throw std::domain_error("series '" + name + "' does not match the checkpoint times");
    }
    for (double v : values) {
      if (std::isnan(v)) throw std::domain_error("series '" + name + "' contains NaN");
    }
  }
  for (const auto& [name, v] : summary) {
    if (std::isnan(v)) throw std::domain_error("summary '" + name + "' is NaN");
  }
}

std::string DiagnosticsReport::to_json() const {
  validate();
  nlohmann::ordered_json j;
  j["replica"] = replica;
  j["times"] = times;
  j["series"] = nlohmann::ordered_json::object();
  for (const auto& [name, values] : series) j["series"][name] = values;
  j["summary"] = nlohmann::ordered_json::object();
  for (const auto& [name, v] : summary) j["summary"][name] = v;
  j["warnings"] = warnings;
  return j.dump(2);
}

std::string DiagnosticsReport::to_csv() const {
  validate();
  std::ostringstream out;
  out.precision(17);
  out << "replica,n,metric,value\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (const auto& [name, values] : series) {
      out << replica << ',' << times[k] << ',' << name << ',' << values[k] << '\n';
    }
  }
  return out.str();
}

DiagnosticsReport make_report(const CheckpointSeries& series, std::uint64_t replica,
                              double kappa) {
  DiagnosticsReport rep;
  rep.replica = replica;
  for (const auto& rec : series.records) rep.times.push_back(rec.n);
  auto& norm = rep.series["norm"];
  auto& returns = rep.series["returns"];
  for (const auto& rec : series.records) {
    norm.push_back(rec.norm);
    returns.push_back(static_cast<double>(rec.returns));
  }
  for (std::size_t f = 0; f < series.functional_names.size(); ++f) {
    auto& v = rep.series["delta:" + series.functional_names[f]];
    for (const auto& rec : series.records) v.push_back(rec.deltas[f]);
  }
  if (!series.records.empty() && series.records.front().n >= 2) {
    rep.series["xn"] = xn_trace(series, kappa);
  }
  if (!series.records.empty()) {
    const auto& last = series.records.back();
    rep.summary["final_norm"] = last.norm;
    rep.summary["max_norm"] = last.max_norm;
    rep.summary["returns"] = static_cast<double>(last.returns);
    rep.summary["angular_oscillation"] = angular_series(series).tail_oscillation;
  }
  if (series.records.size() >= 4 &&
      series.records.back().n >= 100 * series.records.front().n) {
    const auto e = escape_exponent(series);
    rep.summary["exponent_final_ratio"] = e.final_ratio;
    if (e.valid) {
      rep.summary["exponent_slope"] = e.slope;
    } else {
      rep.warnings.push_back("escape exponent undefined: fewer than 2 nonzero late checkpoints");
    }
  }
  if (series.overflow) rep.warnings.push_back("position overflowed; series truncated");
  rep.validate();
  return rep;
}

}  // namespace srrw
