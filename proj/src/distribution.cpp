#include "srrw/distribution.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace srrw {

namespace {

std::string fmt_num(double x) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string fmt_vec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt_num(v[i]);
  }
  return s + ")";
}

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("dimension must be in [1, " + std::to_string(kMaxDim) +
                                "], got " + std::to_string(d));
  }
}

}  // namespace

StepDistribution StepDistribution::from_atoms(DistKind kind, std::vector<Atom> atoms,
                                              std::string descriptor) {
  if (atoms.empty()) throw std::invalid_argument("discrete law needs at least one atom");
  const std::size_t d = atoms.front().point.size();
  check_dim(static_cast<int>(d));

  double total = 0.0;
  bool nonzero = false;
  bool integer = true;
  for (const auto& a : atoms) {
    if (a.point.size() != d) throw std::invalid_argument("atoms have mixed dimensions");
    if (!(a.prob >= 0.0)) throw std::invalid_argument("atom probabilities must be nonnegative");
    for (double c : a.point) {
      if (!std::isfinite(c)) throw std::invalid_argument("atom coordinates must be finite");
      if (c != std::floor(c)) integer = false;
      if (c != 0.0 && a.prob > 0.0) nonzero = true;
    }
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("atom probabilities sum to " + fmt_num(total) + ", not 1");
  }
  if (!nonzero) throw std::invalid_argument("the point mass at the origin is not a valid step law");

  auto impl = std::make_shared<Impl>();
  impl->kind = kind;
  impl->d = static_cast<int>(d);
  impl->mean = Eigen::VectorXd::Zero(impl->d);
  impl->integer_support = integer;
  impl->uniform_atoms = std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) {
    return a.prob == atoms.front().prob;
  });
  double acc = 0.0;
  for (const auto& a : atoms) {
    for (int i = 0; i < impl->d; ++i) impl->mean[i] += a.prob * a.point[i];
    acc += a.prob;
    impl->cumulative.push_back(acc);
  }
  impl->cumulative.back() = 1.0;
  impl->atoms = std::move(atoms);
  impl->descriptor = std::move(descriptor);
  return StepDistribution(std::move(impl));
}

StepDistribution StepDistribution::discrete(std::vector<Atom> atoms) {
  std::string desc = "discrete[";
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) desc += ",";
    desc += fmt_vec(atoms[i].point) + ":" + fmt_num(atoms[i].prob);
  }
  desc += "]";
  return from_atoms(DistKind::discrete, std::move(atoms), std::move(desc));
}

StepDistribution StepDistribution::rademacher() {
  return from_atoms(DistKind::rademacher, {{{1.0}, 0.5}, {{-1.0}, 0.5}}, "rademacher");
}

StepDistribution StepDistribution::directions(std::vector<std::vector<double>> dirs) {
  if (dirs.empty()) throw std::invalid_argument("direction set is empty");
  std::string desc = "directions[";
  std::vector<Atom> atoms;
  const double p = 1.0 / static_cast<double>(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (i) desc += ",";
    desc += fmt_vec(dirs[i]);
    atoms.push_back({std::move(dirs[i]), p});
  }
  desc += "]";
  return from_atoms(DistKind::directions, std::move(atoms), std::move(desc));
}

StepDistribution StepDistribution::gaussian(int d) {
  check_dim(d);
  auto impl = std::make_shared<Impl>();
  impl->kind = DistKind::gaussian;
  impl->d = d;
  impl->mean = Eigen::VectorXd::Zero(d);
  impl->descriptor = "gaussian(d=" + std::to_string(d) + ")";
  return StepDistribution(std::move(impl));
}

StepDistribution StepDistribution::pareto(double tail_index, double scale) {
  if (!(tail_index > 1.0) || !std::isfinite(tail_index)) {
    throw std::invalid_argument("pareto tail index must be finite and > 1");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("pareto scale must be finite and positive");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = DistKind::pareto;
  impl->d = 1;
  impl->mean = Eigen::VectorXd::Zero(1);
  impl->moment_order = tail_index;
  impl->tail_index = tail_index;
  impl->scale = scale;
  impl->descriptor = "pareto(a=" + fmt_num(tail_index) + ", scale=" + fmt_num(scale) + ")";
  return StepDistribution(std::move(impl));
}

StepDistribution StepDistribution::linear_image(const Eigen::MatrixXd& map) const {
  if (map.cols() != dim()) {
    throw std::invalid_argument("linear map has " + std::to_string(map.cols()) +
                                " columns, expected " + std::to_string(dim()));
  }
  check_dim(static_cast<int>(map.rows()));

  std::string mdesc = "[";
  for (Eigen::Index r = 0; r < map.rows(); ++r) {
    if (r) mdesc += ",";
    mdesc += "[";
    for (Eigen::Index c = 0; c < map.cols(); ++c) {
      if (c) mdesc += ",";
      mdesc += fmt_num(map(r, c));
    }
    mdesc += "]";
  }
  mdesc += "]";
  std::string desc = "linear(" + descriptor() + ", " + mdesc + ")";

  if (is_discrete()) {
    std::vector<Atom> atoms;
    atoms.reserve(support().size());
    for (const auto& a : support()) {
      Eigen::VectorXd y = map * Eigen::Map<const Eigen::VectorXd>(a.point.data(), dim());
      atoms.push_back({std::vector<double>(y.data(), y.data() + y.size()), a.prob});
    }
    return from_atoms(DistKind::discrete, std::move(atoms), std::move(desc));
  }

  auto impl = std::make_shared<Impl>();
  impl->kind = DistKind::linear_image;
  impl->d = static_cast<int>(map.rows());
  impl->mean = map * mean();
  impl->moment_order = moment_order();
  impl->base = std::make_shared<const StepDistribution>(*this);
  impl->map = map;
  impl->descriptor = std::move(desc);
  return StepDistribution(std::move(impl));
}

Eigen::MatrixXd StepDistribution::second_moment() const {
  const auto& im = *impl_;
  switch (im.kind) {
    case DistKind::gaussian:
      return Eigen::MatrixXd::Identity(im.d, im.d);
    case DistKind::pareto: {
      if (!(im.tail_index > 2.0)) {
        throw std::domain_error("pareto(a=" + fmt_num(im.tail_index) +
                                ") has infinite second moment");
      }
      Eigen::MatrixXd m(1, 1);
      m(0, 0) = im.tail_index * im.scale * im.scale / (im.tail_index - 2.0);
      return m;
    }
    case DistKind::linear_image:
      return im.map * im.base->second_moment() * im.map.transpose();
    default: {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(im.d, im.d);
      for (const auto& a : im.atoms) {
        Eigen::Map<const Eigen::VectorXd> v(a.point.data(), im.d);
        m.noalias() += a.prob * v * v.transpose();
      }
      return m;
    }
  }
}

void StepDistribution::sample(RngStream& rng, std::span<double> out) const {
  const auto& im = *impl_;
  switch (im.kind) {
    case DistKind::rademacher:
      out[0] = rng.uniform() < 0.5 ? 1.0 : -1.0;
      return;
    case DistKind::gaussian:
      for (int i = 0; i < im.d; ++i) out[i] = rng.normal();
      return;
    case DistKind::pareto: {
      const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
      out[0] = sign * im.scale * std::pow(rng.uniform_pos(), -1.0 / im.tail_index);
      return;
    }
    case DistKind::linear_image: {
      std::array<double, kMaxDim> tmp{};
      const int bd = im.base->dim();
      im.base->sample(rng, std::span<double>(tmp.data(), bd));
      for (int r = 0; r < im.d; ++r) {
        double s = 0.0;
        for (int c = 0; c < bd; ++c) s += im.map(r, c) * tmp[c];
        out[r] = s;
      }
      return;
    }
    case DistKind::discrete:
    case DistKind::directions: {
      std::size_t k;
      if (im.uniform_atoms) {
        k = rng.index(im.atoms.size());
      } else {
        const double u = rng.uniform();
        k = static_cast<std::size_t>(
            std::upper_bound(im.cumulative.begin(), im.cumulative.end(), u) -
            im.cumulative.begin());
        k = std::min(k, im.atoms.size() - 1);
      }
      std::copy(im.atoms[k].point.begin(), im.atoms[k].point.end(), out.begin());
      return;
    }
  }
}

std::string StepDistribution::descriptor() const { return impl_->descriptor; }

SelfTestResult self_test(const StepDistribution& dist, std::uint64_t seed,
                         std::size_t draws, double z_limit) {
  SelfTestResult res;
  res.draws = draws;
  if (!dist.has_finite_moment(2.0)) return res;
  res.applicable = true;
  const int d = dist.dim();
  const Eigen::MatrixXd second = dist.second_moment();
  RngStream rng(seed);
  std::vector<double> x(d);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < draws; ++i) {
    dist.sample(rng, x);
    for (int j = 0; j < d; ++j) sum[j] += x[j];
  }
  for (int j = 0; j < d; ++j) {
    const double var = second(j, j) - dist.mean()[j] * dist.mean()[j];
    const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(draws));
    const double err = std::abs(sum[j] / static_cast<double>(draws) - dist.mean()[j]);
    const double z = se > 0.0 ? err / se : (err > 1e-12 ? StepDistribution::kInf : 0.0);
    res.max_z = std::max(res.max_z, z);
  }
  res.passed = res.max_z <= z_limit;
  return res;
}

}  // namespace srrw
