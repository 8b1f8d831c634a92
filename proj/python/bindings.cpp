#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srrw/distribution.hpp"
#include "srrw/forest.hpp"
#include "srrw/harness.hpp"
#include "srrw/lyapunov.hpp"
#include "srrw/statistics.hpp"
#include "srrw/walk.hpp"

namespace py = pybind11;
using namespace srrw;

namespace {

WalkMode parse_mode(const std::string& m) {
  if (m == "full") return WalkMode::full;
  if (m == "counts") return WalkMode::counts;
  if (m == "auto") return WalkMode::automatic;
  throw std::invalid_argument("mode must be full, counts or auto");
}

py::dict simulate(double alpha, const std::string& dist, std::uint64_t n, std::uint64_t seed,
                  std::vector<std::uint64_t> checkpoints, const std::string& mode,
                  std::optional<double> return_radius, int d) {
  WalkConfig c;
  c.dist = parse_distribution(dist, d);
  c.params = {alpha, c.dist.dim()};
  c.horizon = n;
  c.seed = seed;
  c.mode = parse_mode(mode);
  c.return_radius = return_radius;
  c.checkpoints.explicit_times = std::move(checkpoints);
  CheckpointSeries s;
  {
    py::gil_scoped_release release;
    s = run_walk(c);
  }
  const auto k = s.records.size();
  py::array_t<std::uint64_t> times(k);
  py::array_t<double> norms(k);
  py::array_t<double> positions({k, static_cast<std::size_t>(s.d)});
  py::array_t<std::uint64_t> returns(k);
  auto t = times.mutable_unchecked<1>();
  auto r = norms.mutable_unchecked<1>();
  auto p = positions.mutable_unchecked<2>();
  auto ret = returns.mutable_unchecked<1>();
  for (std::size_t j = 0; j < k; ++j) {
    t(j) = s.records[j].n;
    r(j) = s.records[j].norm;
    ret(j) = s.records[j].returns;
    for (int i = 0; i < s.d; ++i) p(j, i) = s.records[j].position[i];
  }
  py::dict out;
  out["times"] = times;
  out["norms"] = norms;
  out["positions"] = positions;
  out["returns"] = returns;
  out["overflow"] = s.overflow;
  return out;
}

py::dict pmf_to_dict(const Pmf& pmf) {
  py::dict out;
  for (const auto& [atom, p] : pmf) out[py::tuple(py::cast(atom))] = p;
  return out;
}

py::dict certification(const CertificationResult& r) {
  py::dict out;
  out["inequality"] = inequality_name(r.id);
  out["pass"] = r.pass;
  out["samples"] = r.samples;
  out["violations"] = r.violations;
  out["max_violation"] = r.max_violation;
  out["epsilon"] = r.params.epsilon;
  out["r"] = r.params.r;
  out["C"] = r.params.C;
  out["delta"] = r.params.delta;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Step-reinforced random walk simulation and diagnostics";

  m.def(
      "canonical_distribution",
      [](const std::string& text, int d) { return parse_distribution(text, d).descriptor(); },
      py::arg("text"), py::arg("d") = 1);

  m.def("simulate", &simulate, py::arg("alpha"), py::arg("dist") = "rademacher",
        py::arg("n") = 1000, py::arg("seed") = 0,
        py::arg("checkpoints") = std::vector<std::uint64_t>{}, py::arg("mode") = "auto",
        py::arg("return_radius") = std::nullopt, py::arg("d") = 1,
        "Run one walk; returns arrays sampled at the checkpoints.");

  m.def(
      "exact_pmf",
      [](const std::string& dist, double alpha, int n) {
        return pmf_to_dict(exact_small_n_pmf(parse_distribution(dist), alpha, n));
      },
      py::arg("dist"), py::arg("alpha"), py::arg("n"));
  m.def(
      "forest_pmf",
      [](const std::string& dist, double alpha, int n) {
        return pmf_to_dict(forest_pmf(parse_distribution(dist), alpha, n));
      },
      py::arg("dist"), py::arg("alpha"), py::arg("n"));

  m.def(
      "forest_clusters",
      [](std::uint64_t n, double alpha, std::uint64_t seed) {
        RngStream rng(seed);
        const auto f = grow_forest(n, alpha, rng);
        py::dict out;
        for (auto r : f.roots()) out[py::int_(r)] = f.cluster_size(r);
        return out;
      },
      py::arg("n"), py::arg("alpha"), py::arg("seed") = 0,
      "Grow the genealogical forest on n vertices; maps each root to its cluster size.");

  m.def(
      "beta_scaled",
      [](std::uint64_t n, double alpha) { return beta_gamma(n, alpha).scaled; }, py::arg("n"),
      py::arg("alpha"));
  m.def("beta_closed_form", &beta_closed_form, py::arg("n"), py::arg("alpha"));
  m.def("beta_scaling_limit", &beta_scaling_limit, py::arg("alpha"));
  m.def("second_moment_oracle", &second_moment_oracle, py::arg("alpha"),
        py::arg("mean_square"), py::arg("n"));

  m.def(
      "escape_exponent",
      [](std::vector<std::uint64_t> times, std::vector<double> norms) {
        const auto e = escape_exponent(times, norms);
        return py::make_tuple(e.slope, e.valid);
      },
      py::arg("times"), py::arg("norms"));

  m.def("taylor_radius", &taylor_radius);
  m.def(
      "certify",
      [](const std::string& name, std::uint64_t samples, std::uint64_t seed) {
        const auto id = parse_inequality(name);
        CertificationResult r;
        {
          py::gil_scoped_release release;
          r = certify(id, default_params(id), samples, seed);
        }
        return certification(r);
      },
      py::arg("inequality"), py::arg("samples") = 100000, py::arg("seed") = 0,
      "Certify an inequality at its default constants.");
  m.def(
      "find_constants",
      [](const std::string& name, std::uint64_t samples, std::uint64_t seed) {
        const auto id = parse_inequality(name);
        ConstantSearch s;
        {
          py::gil_scoped_release release;
          s = find_constants(id, default_params(id), default_grid(id), samples, seed);
        }
        py::dict out = s.found ? certification(s.result) : py::dict();
        out["found"] = s.found;
        return out;
      },
      py::arg("inequality"), py::arg("samples") = 100000, py::arg("seed") = 0);
}
