#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "coda/coda.hpp"
#include "coda/config.hpp"
#include "coda/data.hpp"
#include "coda/error.hpp"
#include "coda/metrics.hpp"
#include "coda/objective.hpp"
#include "coda/rng.hpp"
#include "coda/runner.hpp"
#include "coda/scorer.hpp"

namespace py = pybind11;
using namespace coda;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  auto buf = a.unchecked<1>();
  std::vector<double> out(buf.shape(0));
  for (py::ssize_t i = 0; i < buf.shape(0); ++i) out[i] = buf(i);
  return out;
}

Dataset make_dataset(const Array& X, const py::array_t<int, py::array::c_style | py::array::forcecast>& y) {
  if (X.ndim() != 2 || y.ndim() != 1 || X.shape(0) != y.shape(0)) {
    throw Error("expected X of shape (n, d) and y of shape (n,)");
  }
  auto xs = X.unchecked<2>();
  auto ys = y.unchecked<1>();
  std::vector<Sample> samples(xs.shape(0));
  for (py::ssize_t i = 0; i < xs.shape(0); ++i) {
    samples[i].features.resize(xs.shape(1));
    for (py::ssize_t j = 0; j < xs.shape(1); ++j) samples[i].features[j] = xs(i, j);
    samples[i].label = ys(i);
  }
  return Dataset(std::move(samples), static_cast<std::size_t>(xs.shape(1)));
}

Sample make_sample(const Array& x, int label) { return Sample{to_vector(x), label}; }

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

PrimalPoint make_point(const Array& w, double a, double b) { return PrimalPoint(to_vector(w), a, b); }

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["tag"] = s.tag;
  d["config_hash"] = s.config_hash;
  d["final_auc"] = s.final_auc;
  d["total_rounds"] = s.total_rounds;
  d["total_iterations"] = s.total_iterations;
  d["scalars_moved"] = s.scalars_moved;
  d["iterations_to_target"] = s.iterations_to_target;
  d["rounds_to_target"] = s.rounds_to_target;
  d["p"] = s.p;
  d["G_h"] = s.G_h;
  d["L_v"] = s.L_v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed stochastic AUC maximization with periodic averaging";

  // Translators run newest first, so the subclass goes last.
  py::register_exception<Error>(m, "CodaError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("X"), py::arg("y"))
      .def_property_readonly("size", &Dataset::size)
      .def_property_readonly("dim", &Dataset::dim)
      .def_property_readonly("num_positive", &Dataset::num_positive)
      .def_property_readonly("num_negative", &Dataset::num_negative)
      .def_property_readonly("positive_ratio", &Dataset::positive_ratio)
      .def("__len__", &Dataset::size)
      .def_property_readonly("X",
                             [](const Dataset& ds) {
                               py::array_t<double> out({ds.size(), ds.dim()});
                               auto o = out.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < ds.size(); ++i) {
                                 for (std::size_t j = 0; j < ds.dim(); ++j) o(i, j) = ds[i].features[j];
                               }
                               return out;
                             })
      .def_property_readonly("y", [](const Dataset& ds) {
        py::array_t<int> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(ds.size())});
        int* dst = out.mutable_data();
        for (std::size_t i = 0; i < ds.size(); ++i) dst[i] = ds[i].label;
        return out;
      });

  m.def("load_dataset", [](const std::filesystem::path& path, std::optional<std::size_t> dim_hint) {
    return load_dataset(path, dim_hint);
  }, py::arg("path"), py::arg("dim_hint") = py::none());
  m.def("derive_seed", [](std::uint64_t seed, std::uint64_t stage, std::uint64_t worker, const std::string& kind) {
    const std::map<std::string, StreamKind> kinds{{"solver", StreamKind::solver}, {"restart", StreamKind::restart},
                                                  {"shard", StreamKind::shard}, {"synth", StreamKind::synth}};
    const auto it = kinds.find(kind);
    if (it == kinds.end()) throw Error("unknown stream kind '" + kind + "'");
    return derive_seed(seed, stage, worker, it->second);
  }, py::arg("seed"), py::arg("stage"), py::arg("worker"), py::arg("kind"));
  m.def("synth_gaussians", &synth_gaussians, py::arg("n"), py::arg("d"), py::arg("p"), py::arg("separation"),
        py::arg("seed"));
  m.def("rebalance", &rebalance, py::arg("ds"), py::arg("target_p"), py::arg("seed"));
  m.def("shard", [](const Dataset& ds, std::size_t k, std::uint64_t seed) {
    return shard(ds, k, seed).worker_shards;
  }, py::arg("ds"), py::arg("k"), py::arg("seed"));

  py::enum_<ScorerKind>(m, "ScorerKind")
      .value("linear_sigmoid", ScorerKind::linear_sigmoid)
      .value("mlp_sigmoid", ScorerKind::mlp_sigmoid);
  py::class_<ScorerSpec>(m, "ScorerSpec")
      .def(py::init([](ScorerKind kind, std::size_t dim, std::size_t hidden) {
             ScorerSpec s{kind, dim, hidden};
             s.validate();
             return s;
           }),
           py::arg("kind"), py::arg("dim"), py::arg("hidden") = 0)
      .def_readonly("kind", &ScorerSpec::kind)
      .def_readonly("dim", &ScorerSpec::dim)
      .def_readonly("hidden", &ScorerSpec::hidden)
      .def_property_readonly("param_count", &ScorerSpec::param_count);

  m.def("score", [](const ScorerSpec& spec, const Array& params, const Array& x) {
    const auto p = to_vector(params);
    const auto xv = to_vector(x);
    if (p.size() != spec.param_count() || xv.size() != spec.dim) throw Error("score: size mismatch");
    return score(spec, p, xv);
  }, py::arg("spec"), py::arg("params"), py::arg("x"));
  m.def("initial_params", &initial_params, py::arg("spec"), py::arg("seed"));

  m.def("eval_F", [](const ScorerSpec& spec, const Array& w, double a, double b, double alpha, const Array& x,
                     int y, double p) { return eval_F(spec, make_point(w, a, b), alpha, make_sample(x, y), p); },
        py::arg("spec"), py::arg("w"), py::arg("a"), py::arg("b"), py::arg("alpha"), py::arg("x"), py::arg("y"),
        py::arg("p"));
  m.def("grad_F", [](const ScorerSpec& spec, const Array& w, double a, double b, double alpha, const Array& x, int y,
                     double p) {
    const auto v = make_point(w, a, b);
    std::vector<double> g(v.size());
    const double ga = grad_F(spec, v, alpha, make_sample(x, y), p, g);
    return py::make_tuple(to_array(g), ga);
  }, py::arg("spec"), py::arg("w"), py::arg("a"), py::arg("b"), py::arg("alpha"), py::arg("x"), py::arg("y"),
        py::arg("p"));
  m.def("dual_argmax", [](const ScorerSpec& spec, const Array& w, const Dataset& ds) {
    return dual_argmax(spec, make_point(w, 0.0, 0.0), ds);
  }, py::arg("spec"), py::arg("w"), py::arg("ds"));
  m.def("eval_phi", [](const ScorerSpec& spec, const Array& w, double a, double b, const Dataset& ds) {
    return eval_phi(spec, make_point(w, a, b), ds);
  }, py::arg("spec"), py::arg("w"), py::arg("a"), py::arg("b"), py::arg("ds"));

  m.def("auc", [](const Array& scores, const py::array_t<int, py::array::c_style | py::array::forcecast>& labels) {
    const auto s = to_vector(scores);
    auto l = labels.unchecked<1>();
    std::vector<int> lv(l.shape(0));
    for (py::ssize_t i = 0; i < l.shape(0); ++i) lv[i] = l(i);
    return auc(s, lv);
  }, py::arg("scores"), py::arg("labels"));

  py::class_<StageSchedule>(m, "StageSchedule")
      .def_readonly("s", &StageSchedule::s)
      .def_readonly("eta", &StageSchedule::eta)
      .def_readonly("T", &StageSchedule::T)
      .def_readonly("I", &StageSchedule::I)
      .def_readonly("m", &StageSchedule::m)
      .def("__repr__", [](const StageSchedule& s) {
        std::ostringstream os;
        os << "StageSchedule(s=" << s.s << ", eta=" << s.eta << ", T=" << s.T << ", I=" << s.I << ", m=" << s.m
           << ")";
        return os.str();
      });
  m.def("build_schedule", [](std::size_t K, std::size_t S, double eta0, double L_v, double mu, double G_h, double p,
                             const std::string& mode, std::size_t T0, std::size_t comm_interval, double eta_cap) {
    CodaConfig c;
    c.K = K;
    c.S = S;
    c.eta0 = eta0;
    c.L_v = L_v;
    c.mu = mu;
    c.G_h = G_h;
    c.p = p;
    c.mode = parse_schedule_mode(mode);
    c.T0 = T0;
    c.comm_interval = comm_interval;
    c.eta_cap = eta_cap;
    c.validate();
    std::vector<StageSchedule> out;
    for (std::size_t s = 1; s <= S; ++s) out.push_back(build_schedule(c, s));
    return out;
  }, py::arg("K"), py::arg("S"), py::arg("eta0"), py::arg("L_v"), py::arg("mu"), py::arg("G_h"), py::arg("p"),
        py::arg("mode") = "theorem", py::arg("T0") = 2000, py::arg("comm_interval") = 0, py::arg("eta_cap") = 0.0);

  m.def("parse_config", [](const std::string& text, const ConfigOverrides& overrides) {
    return serialize_config(parse_config(text, overrides));
  }, py::arg("text"), py::arg("overrides") = ConfigOverrides{}, "Validate a config and return its canonical form");
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); }, py::arg("text"));
  m.def("run_experiment", [](const std::string& text, const ConfigOverrides& overrides) {
    const auto cfg = parse_config(text, overrides);
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = run_experiment(cfg);
    }
    return summary_dict(s);
  }, py::arg("text"), py::arg("overrides") = ConfigOverrides{}, "Run one experiment; metrics go to the config's output");
}
