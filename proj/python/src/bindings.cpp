#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fastphase/experiments.hpp"
#include "fastphase/fft.hpp"
#include "fastphase/tensor_io.hpp"

namespace py = pybind11;
using namespace fastphase;

namespace {

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;
using RArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Shape shape_of(const py::array& a) {
  if (a.ndim() == 0) throw DimensionError("expected an array with at least one axis");
  std::vector<std::size_t> dims(a.shape(), a.shape() + a.ndim());
  return Shape(dims);
}

ComplexGrid to_grid(const CArray& a) {
  const Shape s = shape_of(a);
  return ComplexGrid(s, std::vector<Complex>(a.data(), a.data() + a.size()));
}

RealGrid to_grid(const RArray& a) {
  const Shape s = shape_of(a);
  return RealGrid(s, std::vector<double>(a.data(), a.data() + a.size()));
}

template <typename T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> out(g.shape().dims());
  std::copy(g.begin(), g.end(), out.mutable_data());
  return out;
}

Shape to_shape(const std::vector<std::size_t>& dims) { return Shape(dims); }

CostVariant parse_cost(const std::string& s) {
  if (s == "normalized") return CostVariant::kNormalized;
  if (s == "reg") return CostVariant::kRegularized;
  if (s == "ls") return CostVariant::kLeastSquares;
  throw ParameterError("unknown cost '" + s + "' (expected normalized, reg or ls)");
}

WindingMethod parse_method(const std::string& s) {
  if (s == "mirrored") return WindingMethod::kMirroredBox;
  if (s == "box") return WindingMethod::kBoxConvolution;
  throw ParameterError("unknown winding method '" + s + "' (expected mirrored or box)");
}

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["converged"] = r.converged;
  d["stop_reason"] = r.stop_reason;
  d["iterations"] = r.iterations;
  d["cg_iterations"] = r.cg_iters_total;
  d["cost_trace"] = r.cost_trace;
  d["grad_norm_trace"] = r.grad_norm_trace;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fast phase retrieval core";

  auto base = py::register_exception<Error>(m, "FastPhaseError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("dft_oversampled", [](const CArray& x, const std::vector<std::size_t>& shape) {
    return to_array(dft_oversampled(to_grid(x), to_shape(shape)));
  }, py::arg("x"), py::arg("m"), "Unitary DFT of x zero-padded to shape m.");

  m.def("measure", [](const CArray& x, std::optional<std::vector<std::size_t>> shape) {
    const ComplexGrid g = to_grid(x);
    return to_array(measure(g, shape ? to_shape(*shape) : g.shape().scaled(2)));
  }, py::arg("x"), py::arg("m") = py::none(), "Squared DFT magnitudes on m (default 2n).");

  m.def("generate_schwarz_object", [](const std::vector<std::size_t>& shape, const MultiIndex& w, double rho,
                                      std::uint64_t seed) {
    return to_array(generate_schwarz_object({to_shape(shape), w, rho, seed}));
  }, py::arg("shape"), py::arg("w"), py::arg("rho") = 2.0, py::arg("seed") = 0);

  m.def("winding", [](const RArray& y, const std::vector<std::size_t>& support, const std::string& method) {
    const WindingResult r = winding_from_measurement(to_grid(y), to_shape(support), parse_method(method));
    py::dict d;
    d["w"] = r.w;
    d["tie"] = r.tie;
    d["tied"] = r.tied;
    return d;
  }, py::arg("y"), py::arg("support"), py::arg("method") = "mirrored");

  m.def("schwarz_init", [](const RArray& y, const MultiIndex& w, const std::vector<std::size_t>& support,
                           std::size_t factor) {
    return to_array(schwarz_init(to_grid(y), w, to_shape(support), SchwarzConfig{factor}));
  }, py::arg("y"), py::arg("w"), py::arg("support"), py::arg("factor") = 1);

  m.def("retrieve", [](const RArray& y, const std::vector<std::size_t>& support, const std::string& cost,
                       std::optional<MultiIndex> w, double lambda, int max_iter, int restarts) {
    FastPhaseOptions opts;
    opts.cost = parse_cost(cost);
    opts.w = std::move(w);
    opts.lambda = lambda;
    opts.trust_region.max_outer = max_iter;
    opts.restarts = restarts;
    FastPhaseResult r;
    {
      py::gil_scoped_release release;
      r = fast_phase_retrieve(to_grid(y), to_shape(support), opts);
    }
    py::dict d = report_dict(r.report);
    d["x"] = to_array(r.x);
    d["x0"] = to_array(r.x0);
    d["w"] = r.w;
    d["attempts"] = r.attempts;
    return d;
  }, py::arg("y"), py::arg("support"), py::arg("cost") = "normalized", py::arg("w") = py::none(),
     py::arg("lam") = 1.0, py::arg("max_iter") = 500, py::arg("restarts") = 4,
     "Winding estimate, Schwarz start and trust-region refinement.");

  m.def("masked_measurements", [](const CArray& x, double margin) {
    const MaskedMeasurement mm = masked_measurements(to_grid(x), margin);
    return py::make_tuple(to_array(mm.abs_x), to_array(mm.y2), to_array(mm.mask.values));
  }, py::arg("x"), py::arg("margin") = 2.0, "Returns (|x|, y2, mask).");

  m.def("masked_retrieve", [](const RArray& abs_x, const RArray& y2, double margin) {
    return to_array(masked_fast_phase(to_grid(abs_x), to_grid(y2), margin).x);
  }, py::arg("abs_x"), py::arg("y2"), py::arg("margin") = 2.0);

  m.def("aligned_relative_error", [](const CArray& c, const CArray& t) {
    return aligned_relative_error(to_grid(c), to_grid(t));
  }, py::arg("candidate"), py::arg("truth"));
  m.def("rmse_db", [](const CArray& c, const CArray& t) { return rmse_db(to_grid(c), to_grid(t)); },
        py::arg("candidate"), py::arg("truth"));

  m.def("read_tensor", [](const std::string& path) -> py::object {
    auto t = read_tensor(path);
    if (auto* r = std::get_if<RealGrid>(&t)) return to_array(*r);
    return to_array(std::get<ComplexGrid>(t));
  }, py::arg("path"));
  m.def("write_tensor", [](const std::string& path, const py::array& a) {
    if (a.dtype().kind() == 'c') write_tensor(path, to_grid(CArray::ensure(a)));
    else write_tensor(path, to_grid(RArray::ensure(a)));
  }, py::arg("path"), py::arg("array"), "Writes real arrays as real64 and complex arrays as complex128.");
}
