#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <limits>

#include "eegmatch/cli.hpp"
#include "eegmatch/dataset.hpp"
#include "eegmatch/encoders.hpp"
#include "eegmatch/error.hpp"
#include "eegmatch/features.hpp"
#include "eegmatch/filters.hpp"
#include "eegmatch/mmts.hpp"
#include "eegmatch/series.hpp"
#include "eegmatch/training.hpp"

namespace py = pybind11;
using namespace eegmatch;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

TimeSeries to_series(const Array& a, double rate) {
  if (a.ndim() != 2) throw Error(ErrorKind::ShapeMismatch, "expected a [channels, samples] array");
  const auto c = static_cast<std::size_t>(a.shape(0));
  return TimeSeries(c, rate, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const TimeSeries& ts) {
  Array out({ts.channels(), ts.samples()});
  std::copy(ts.data().begin(), ts.data().end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

ad::Tensor to_tensor(const Array& a) {
  ad::Shape shape(a.shape(), a.shape() + a.ndim());
  return ad::Tensor(std::move(shape), to_vector(a));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "EEG / speech match-mismatch core";

  static py::exception<Error> error(m, "EegmatchError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("pearson", [](const Array& x, const Array& y) { return pearson_correlation(to_vector(x), to_vector(y)); },
        py::arg("x"), py::arg("y"));

  m.def("read_mmts", [](const std::filesystem::path& p) {
    const auto ts = read_mmts(p);
    return py::make_tuple(to_array(ts), ts.sample_rate_hz());
  });
  m.def("write_mmts", [](const std::filesystem::path& p, const Array& data, double rate) { write_mmts(p, to_series(data, rate)); },
        py::arg("path"), py::arg("data"), py::arg("sample_rate_hz"));

  m.def("resample", [](const Array& data, double rate, double target) { return to_array(resample(to_series(data, rate), target)); },
        py::arg("data"), py::arg("sample_rate_hz"), py::arg("target_hz"));

  m.def("band_gain",
        [](double low, double high, double f, double fs, int order) {
          return std::abs(design_band({low, high, order}, fs).response(f, fs));
        },
        py::arg("low_hz"), py::arg("high_hz"), py::arg("freq_hz"), py::arg("fs_hz"), py::arg("order") = 4);
  m.def("bandpass",
        [](const Array& data, double fs, double low, double high, int order) {
          return to_array(filtfilt(design_band({low, high, order}, fs), to_series(data, fs)));
        },
        py::arg("data"), py::arg("fs_hz"), py::arg("low_hz"), py::arg("high_hz"), py::arg("order") = 4);
  m.def("multiband",
        [](const Array& data, double fs) {
          const auto bands = standard_eeg_bands();
          return to_array(multiband_eeg(to_series(data, fs), bands));
        },
        py::arg("data"), py::arg("fs_hz"));

  m.def("pca_fit",
        [](const Eigen::MatrixXd& rows, std::size_t k) {
          const auto model = pca_fit(rows, k);
          return py::dict(py::arg("mean") = model.mean, py::arg("components") = model.components,
                          py::arg("explained_variance") = model.explained_variance);
        },
        py::arg("rows"), py::arg("k"));

  m.def("infonce_loss",
        [](const Array& eeg, const Array& candidates, std::size_t matched) {
          ad::Tape tape(false);
          return infonce_loss(tape, to_tensor(eeg), to_tensor(candidates), matched).item();
        },
        py::arg("eeg_latent"), py::arg("candidates"), py::arg("matched"));
  m.def("infonce_lower_bound", &infonce_lower_bound, py::arg("d_latent"), py::arg("n_negatives"));

  m.def("eeg_encoder_parameter_count",
        [](std::size_t in_channels, std::size_t d_hidden, std::size_t d_latent, std::size_t n_blocks) {
          EegEncoderConfig cfg;
          cfg.in_channels = in_channels;
          cfg.d_hidden = d_hidden;
          cfg.d_latent = d_latent;
          cfg.n_blocks = n_blocks;
          return eeg_encoder_parameter_count(cfg);
        },
        py::arg("in_channels") = 64, py::arg("d_hidden") = 256, py::arg("d_latent") = 64, py::arg("n_blocks") = 5);

  m.def("read_words", [](const std::filesystem::path& p) {
    py::list out;
    for (const auto& w : read_words(p)) {
      out.append(py::dict(py::arg("text") = w.text, py::arg("onset_s") = w.onset_s, py::arg("offset_s") = w.offset_s,
                          py::arg("embedding") = w.embedding));
    }
    return out;
  });

  m.def("generate_synthetic",
        [](const std::filesystem::path& out, std::uint64_t seed, std::size_t n_subjects, std::size_t n_stimuli,
           double duration_s, std::size_t eeg_channels, std::size_t feature_channels, double noise_sigma) {
          SynthSpec spec;
          spec.seed = seed;
          spec.n_subjects = n_subjects;
          spec.n_stimuli = n_stimuli;
          spec.duration_s = duration_s;
          spec.eeg_channels = eeg_channels;
          spec.feature_channels = feature_channels;
          spec.noise_sigma = noise_sigma;
          return generate_synthetic(spec, out).recordings.size();
        },
        py::arg("out"), py::arg("seed") = 0, py::arg("n_subjects") = 6, py::arg("n_stimuli") = 4,
        py::arg("duration_s") = 600.0, py::arg("eeg_channels") = 64, py::arg("feature_channels") = 8,
        py::arg("noise_sigma") = 0.1);

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "eegmatch");
    py::gil_scoped_release release;
    return run_cli(args);
  });
}
