#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "randquant/check.hpp"
#include "randquant/closed_form.hpp"
#include "randquant/dithered.hpp"
#include "randquant/montecarlo.hpp"
#include "randquant/rng.hpp"
#include "randquant/threshold_set.hpp"
#include "randquant/version.hpp"

namespace py = pybind11;
namespace cf = randquant::closed_form;
namespace mc = randquant::montecarlo;
namespace dq = randquant::dithered;
namespace ck = randquant::check;

namespace {

void bind_core(py::module_& m) {
  py::class_<randquant::Cell>(m, "Cell")
      .def_readonly("index", &randquant::Cell::index)
      .def_readonly("left", &randquant::Cell::left)
      .def_readonly("right", &randquant::Cell::right)
      .def("length", &randquant::Cell::length);

  py::class_<randquant::ThresholdSet>(m, "ThresholdSet",
                                      "K-cell partition of [0,1) with half-open cells")
      .def(py::init<>())
      .def(py::init<std::vector<double>>(), py::arg("interior"))
      .def_property_readonly("levels", &randquant::ThresholdSet::levels)
      .def_property_readonly("interior", &randquant::ThresholdSet::interior)
      .def("encode", &randquant::ThresholdSet::encode, py::arg("x"))
      .def("decode", &randquant::ThresholdSet::decode, py::arg("index"))
      .def("cell", &randquant::ThresholdSet::cell, py::arg("index"))
      .def("spacings", &randquant::ThresholdSet::spacings)
      .def("conditional_mse", &randquant::ThresholdSet::conditional_mse)
      .def("conditional_entropy", &randquant::ThresholdSet::conditional_entropy)
      .def("__len__", &randquant::ThresholdSet::levels)
      .def("__repr__", [](const randquant::ThresholdSet& t) {
        return "ThresholdSet(levels=" + std::to_string(t.levels()) + ")";
      });

  py::class_<randquant::TrialRng>(m, "TrialRng", "Counter-based per-trial random stream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream"))
      .def("next_u64", &randquant::TrialRng::next_u64)
      .def("next_unit", &randquant::TrialRng::next_unit);

  m.def("derive_seed", &randquant::derive_seed, py::arg("seed"), py::arg("salt"));
}

void bind_closed_form(py::module_& m) {
  m.attr("EULER_GAMMA") = cf::kEulerGamma;
  m.def("harmonic", &cf::harmonic, py::arg("n"));
  m.def("distortion_random", &cf::distortion_random, py::arg("levels"));
  m.def("rate_random", &cf::rate_random, py::arg("levels"));
  m.def("penalty_fixed_rate", &cf::penalty_fixed_rate, py::arg("levels"));
  m.def("penalty_entropy_constrained", &cf::penalty_entropy_constrained, py::arg("levels"));
  m.def("asymptotic_penalty", &cf::asymptotic_penalty);
  m.def("high_rate_coefficient", &cf::high_rate_coefficient);
  m.def("rate_loss_bound", &cf::rate_loss_bound);
  m.def("spacing_pdf", &cf::spacing_pdf, py::arg("levels"), py::arg("length"));
  m.def("dithered_distortion", &cf::dithered_distortion, py::arg("delta"), py::arg("levels"));
  m.def("dithered_rate", &cf::dithered_rate, py::arg("delta"), py::arg("levels"),
        py::arg("source_entropy_bits") = 0.0);

  py::class_<cf::TwoStepConfig>(m, "TwoStepConfig")
      .def(py::init<double, double>(), py::arg("delta0"), py::arg("delta1"))
      .def_static("from_theta", &cf::TwoStepConfig::from_theta, py::arg("theta"),
                  py::arg("delta"))
      .def_readonly("delta0", &cf::TwoStepConfig::delta0)
      .def_readonly("delta1", &cf::TwoStepConfig::delta1);
  m.def("two_step_distortion", &cf::two_step_distortion, py::arg("config"));
  m.def("two_step_rate", &cf::two_step_rate, py::arg("config"));
  m.def("q_theta", &cf::q_theta, py::arg("theta"));
  m.def("frame_distortion", &cf::frame_distortion, py::arg("theta"), py::arg("delta"));
  m.def("frame_rate", &cf::frame_rate, py::arg("theta"), py::arg("delta"));
}

void bind_montecarlo(py::module_& m) {
  py::enum_<mc::SamplingMode>(m, "SamplingMode")
      .value("rao_blackwell", mc::SamplingMode::rao_blackwell)
      .value("raw_sampling", mc::SamplingMode::raw_sampling);

  py::class_<mc::TrialConfig>(m, "TrialConfig")
      .def(py::init([](std::uint64_t levels, std::uint64_t trials, std::uint64_t seed,
                       mc::SamplingMode mode, std::uint64_t raw_samples_per_trial,
                       unsigned threads) {
             mc::TrialConfig config;
             config.levels = levels;
             config.trials = trials;
             config.seed = seed;
             config.mode = mode;
             config.raw_samples_per_trial = raw_samples_per_trial;
             config.threads = threads;
             config.validate();
             return config;
           }),
           py::arg("levels") = 2, py::arg("trials") = 100'000, py::arg("seed") = 1,
           py::arg("mode") = mc::SamplingMode::rao_blackwell,
           py::arg("raw_samples_per_trial") = 1, py::arg("threads") = 1)
      .def_readwrite("levels", &mc::TrialConfig::levels)
      .def_readwrite("trials", &mc::TrialConfig::trials)
      .def_readwrite("seed", &mc::TrialConfig::seed)
      .def_readwrite("mode", &mc::TrialConfig::mode)
      .def_readwrite("raw_samples_per_trial", &mc::TrialConfig::raw_samples_per_trial)
      .def_readwrite("threads", &mc::TrialConfig::threads);

  py::class_<mc::EstimateReport>(m, "EstimateReport")
      .def_readonly("mean", &mc::EstimateReport::mean)
      .def_readonly("std_error", &mc::EstimateReport::std_error)
      .def_readonly("trials", &mc::EstimateReport::trials)
      .def_readonly("seed", &mc::EstimateReport::seed)
      .def_readonly("target", &mc::EstimateReport::target)
      .def_readonly("z_score", &mc::EstimateReport::z_score)
      .def("within", &mc::EstimateReport::within, py::arg("n_sigma"))
      .def("__repr__", [](const mc::EstimateReport& r) {
        return "EstimateReport(mean=" + std::to_string(r.mean) +
               ", std_error=" + std::to_string(r.std_error) + ")";
      });

  m.def(
      "sample_thresholds",
      [](std::uint64_t levels, std::uint64_t seed, std::uint64_t stream) {
        randquant::TrialRng rng(seed, stream);
        return mc::sample_thresholds(levels, rng);
      },
      py::arg("levels"), py::arg("seed"), py::arg("stream") = 0);
  m.def("estimate_distortion", &mc::estimate_distortion, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("estimate_rate", &mc::estimate_rate, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("estimate_spacing_moment", &mc::estimate_spacing_moment, py::arg("config"),
        py::arg("moment"), py::call_guard<py::gil_scoped_release>());

  py::class_<mc::HistogramBin>(m, "HistogramBin")
      .def_readonly("lower", &mc::HistogramBin::lower)
      .def_readonly("upper", &mc::HistogramBin::upper)
      .def_readonly("observed", &mc::HistogramBin::observed)
      .def_readonly("expected", &mc::HistogramBin::expected);

  py::class_<mc::HistogramTestReport>(m, "HistogramTestReport")
      .def_readonly("statistic", &mc::HistogramTestReport::statistic)
      .def_readonly("dof", &mc::HistogramTestReport::dof)
      .def_readonly("critical_value", &mc::HistogramTestReport::critical_value)
      .def_readonly("p_value", &mc::HistogramTestReport::p_value)
      .def_readonly("passed", &mc::HistogramTestReport::passed)
      .def_readonly("requested_bins", &mc::HistogramTestReport::requested_bins)
      .def_readonly("merged_bins", &mc::HistogramTestReport::merged_bins)
      .def_readonly("samples", &mc::HistogramTestReport::samples)
      .def_readonly("bins", &mc::HistogramTestReport::bins);

  m.def(
      "spacing_histogram_test",
      [](const mc::TrialConfig& config, unsigned bins, std::optional<std::uint64_t> pdf_levels) {
        if (pdf_levels) return mc::spacing_histogram_test(config, bins, *pdf_levels);
        return mc::spacing_histogram_test(config, bins);
      },
      py::arg("config"), py::arg("bins") = 20, py::arg("pdf_levels") = std::nullopt,
      py::call_guard<py::gil_scoped_release>());

  py::class_<mc::TwoStepReport>(m, "TwoStepReport")
      .def_readonly("distortion", &mc::TwoStepReport::distortion)
      .def_readonly("rate", &mc::TwoStepReport::rate)
      .def_readonly("step_size_warning", &mc::TwoStepReport::step_size_warning);

  m.def("two_step_oracle", &mc::two_step_oracle, py::arg("delta0"), py::arg("delta1"),
        py::arg("trials"), py::arg("seed"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
}

void bind_dithered(py::module_& m) {
  py::class_<dq::JointIndex>(m, "JointIndex")
      .def(py::init([](std::vector<std::int64_t> channel) {
             dq::JointIndex joint;
             joint.channel = std::move(channel);
             return joint;
           }),
           py::arg("channel"))
      .def_readonly("channel", &dq::JointIndex::channel);

  py::class_<dq::DitheredBank>(m, "DitheredBank")
      .def(py::init<double, std::vector<double>>(), py::arg("delta"), py::arg("offsets"))
      .def_static(
          "with_random_offsets",
          [](double delta, std::size_t channels, std::uint64_t seed, std::uint64_t stream) {
            randquant::TrialRng rng(seed, stream);
            return dq::DitheredBank::with_random_offsets(delta, channels, rng);
          },
          py::arg("delta"), py::arg("channels"), py::arg("seed"), py::arg("stream") = 0)
      .def_static("evenly_spaced", &dq::DitheredBank::evenly_spaced, py::arg("delta"),
                  py::arg("channels"))
      .def_property_readonly("delta", &dq::DitheredBank::delta)
      .def_property_readonly("channels", &dq::DitheredBank::channels)
      .def_property_readonly("offsets", &dq::DitheredBank::offsets)
      .def("encode_joint", &dq::DitheredBank::encode_joint, py::arg("x"))
      .def("merge_partition", &dq::DitheredBank::merge_partition)
      .def("reconstruct", &dq::DitheredBank::reconstruct, py::arg("joint"))
      .def("exact_metrics", &dq::DitheredBank::exact_metrics);

  py::class_<dq::BankAverageReport>(m, "BankAverageReport")
      .def_readonly("distortion", &dq::BankAverageReport::distortion)
      .def_readonly("rate", &dq::BankAverageReport::rate)
      .def_readonly("empirical_penalty", &dq::BankAverageReport::empirical_penalty)
      .def_readonly("predicted_penalty", &dq::BankAverageReport::predicted_penalty);

  m.def("average_random_offsets", &dq::average_random_offsets, py::arg("channels"),
        py::arg("delta"), py::arg("offset_trials"), py::arg("seed"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());

  py::class_<dq::SweepRow>(m, "SweepRow")
      .def_readonly("channels", &dq::SweepRow::channels)
      .def_readonly("mean_distortion", &dq::SweepRow::mean_distortion)
      .def_readonly("mean_rate", &dq::SweepRow::mean_rate)
      .def_readonly("empirical_penalty", &dq::SweepRow::empirical_penalty)
      .def_readonly("predicted_penalty", &dq::SweepRow::predicted_penalty);

  m.def("sweep_penalty", &dq::sweep_penalty, py::arg("max_channels"), py::arg("delta"),
        py::arg("offset_trials"), py::arg("seed"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
}

void bind_check(py::module_& m) {
  py::class_<ck::CheckResult>(m, "CheckResult")
      .def_readonly("id", &ck::CheckResult::id)
      .def_readonly("passed", &ck::CheckResult::passed)
      .def_readonly("detail", &ck::CheckResult::detail)
      .def("__repr__", [](const ck::CheckResult& r) {
        return "CheckResult(" + r.id + ", " + (r.passed ? "passed" : "FAILED") + ")";
      });

  m.def("check_harmonic_bounds", &ck::check_harmonic_bounds, py::arg("n_max"),
        py::arg("gamma_override") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_checks",
      [](std::uint64_t seed, std::uint64_t harmonic_scan_max, std::uint64_t mc_trials,
         std::uint64_t offset_trials, unsigned threads) {
        ck::CheckOptions options;
        options.seed = seed;
        options.harmonic_scan_max = harmonic_scan_max;
        options.mc_trials = mc_trials;
        options.offset_trials = offset_trials;
        options.threads = threads;
        return ck::run_all(options);
      },
      py::arg("seed") = 1, py::arg("harmonic_scan_max") = 100'000,
      py::arg("mc_trials") = 50'000, py::arg("offset_trials") = 5'000, py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>());
}

}  // namespace

PYBIND11_MODULE(_randquant, m) {
  m.doc() = "Distortion-rate analysis of randomly designed scalar quantizers";
  m.attr("__version__") = randquant::kVersion;
  bind_core(m);
  bind_closed_form(m);
  bind_montecarlo(m);
  bind_dithered(m);
  bind_check(m);
}
