// Python view of the estimation library: quantizers, error metric, config
// handling, the experiment harness and artifact I/O.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chanest/channel_sim.hpp"
#include "chanest/config.hpp"
#include "chanest/error.hpp"
#include "chanest/experiment.hpp"
#include "chanest/quantizer.hpp"

namespace py = pybind11;
using namespace chanest;

namespace {

py::dict record_to_dict(const TrialRecord& r) {
  py::dict d;
  d["trial"] = r.trial;
  d["bits"] = r.bits;
  d["snr_db"] = r.snr_db;
  d["method"] = r.method;
  d["nmse_db"] = r.nmse_db;
  d["iterations"] = r.iterations;
  d["runtime_ms"] = r.runtime_ms;
  d["tau_w_hat"] = r.tau_w_hat ? py::cast(*r.tau_w_hat) : py::none();
  d["kappa_hat"] = r.kappa_hat ? py::cast(*r.kappa_hat) : py::none();
  d["converged"] = r.converged;
  d["seed"] = r.seed;
  return d;
}

py::list summary_to_list(const std::vector<SummaryRow>& rows) {
  py::list out;
  for (const auto& s : rows) {
    py::dict d;
    d["bits"] = s.bits;
    d["snr_db"] = s.snr_db;
    d["method"] = s.method;
    d["nmse_db"] = s.nmse_db;
    d["trials"] = s.trials;
    d["errors"] = s.errors;
    out.append(d);
  }
  return out;
}

ExperimentConfig config_with(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = load_config(path);
  for (const auto& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_chanest, m) {
  m.doc() = "Quantized sparse MIMO channel estimation";

  static py::exception<Error> error_type(m, "ChanestError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  py::class_<QuantizerSpec>(m, "QuantizerSpec")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("interior_thresholds"), py::arg("symbols"))
      .def_property_readonly("bits", &QuantizerSpec::bits)
      .def_property_readonly("bins", &QuantizerSpec::bins)
      .def_property_readonly("thresholds", &QuantizerSpec::thresholds)
      .def_property_readonly("symbols", &QuantizerSpec::symbols)
      .def("bin_of", &QuantizerSpec::bin_of, py::arg("value"))
      .def("interior_thresholds", &QuantizerSpec::interior_thresholds);

  m.def("default_quantizer", &default_quantizer, py::arg("bits"), py::arg("input_rms"));
  m.def("optimal_uniform_step", &optimal_uniform_step, py::arg("bits"));

  m.def(
      "quantize",
      [](const ComplexVector& v, const QuantizerSpec& spec) {
        const auto q = quantize(v, spec);
        return py::make_tuple(q.re_idx, q.im_idx);
      },
      py::arg("values"), py::arg("spec"), "Per-component 1-based bin indices (real, imaginary).");
  m.def(
      "dequantize",
      [](const std::vector<int>& re, const std::vector<int>& im, const QuantizerSpec& spec) {
        QuantizedVector q;
        q.re_idx = re;
        q.im_idx = im;
        q.spec = spec;
        return dequantize(q);
      },
      py::arg("re_idx"), py::arg("im_idx"), py::arg("spec"));

  m.def("nmse_db", &nmse_db, py::arg("x_hat"), py::arg("x_true"));

  m.def(
      "config_text",
      [](const std::string& path, const std::vector<std::string>& overrides) {
        return to_config_text(config_with(path, overrides));
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
      "Fully expanded config after applying key=value overrides.");

  m.def(
      "run_experiment",
      [](const std::string& path, const std::vector<std::string>& overrides, bool write_csv) {
        const ExperimentConfig cfg = config_with(path, overrides);
        std::vector<TrialRecord> records;
        {
          py::gil_scoped_release release;
          records = run_experiment(cfg, write_csv);
        }
        py::list out;
        for (const auto& r : records) out.append(record_to_dict(r));
        return out;
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{}, py::arg("write_csv") = true);

  m.def(
      "read_records",
      [](const std::string& path) {
        py::list out;
        for (const auto& r : read_records(path)) out.append(record_to_dict(r));
        return out;
      },
      py::arg("path"));

  m.def(
      "summarize",
      [](const std::string& results_csv, const std::string& summary_path) {
        const auto rows = summarize(read_records(results_csv));
        if (!summary_path.empty()) write_summary(summary_path, rows);
        return summary_to_list(rows);
      },
      py::arg("results_csv"), py::arg("summary_path") = std::string{},
      "Per-cell mean NMSE; also writes the summary CSV when a path is given.");

  m.def(
      "replay",
      [](const std::string& path, std::size_t row, const std::vector<std::string>& overrides) {
        const ExperimentConfig cfg = config_with(path, overrides);
        ReplayResult res = replay_row(cfg, row);
        py::dict d = record_to_dict(res.outcome.record);
        d["x_hat"] = res.outcome.x_hat;
        d["x_true"] = res.x_true;
        d["dims"] = res.dims;
        return d;
      },
      py::arg("path"), py::arg("row"), py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "read_tensor",
      [](const std::string& path) {
        std::array<std::uint32_t, 4> dims{};
        ComplexVector data = read_tensor_artifact(path, dims);
        return py::make_tuple(data, dims);
      },
      py::arg("path"), "Flat complex data (first dimension fastest) and the four dimensions.");
  m.def("write_tensor", &write_tensor_artifact, py::arg("path"), py::arg("dims"), py::arg("data"));
}
