#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hgn/checkpoint.hpp"
#include "hgn/config_io.hpp"
#include "hgn/eval.hpp"
#include "hgn/gradcheck.hpp"
#include "hgn/visualize.hpp"

namespace py = pybind11;
using namespace hgn;

namespace {

hm::HeatmapStack stack_from_array(const py::array_t<double>& arr, double scale) {
  py::buffer_info info = arr.request();
  if (info.ndim != 3) throw py::value_error("expected a (C, H, W) array");
  hm::HeatmapStack s(static_cast<int>(info.shape[0]), static_cast<int>(info.shape[1]),
                     static_cast<int>(info.shape[2]), scale);
  auto view = arr.unchecked<3>();
  std::size_t i = 0;
  for (py::ssize_t c = 0; c < info.shape[0]; ++c) {
    for (py::ssize_t y = 0; y < info.shape[1]; ++y) {
      for (py::ssize_t x = 0; x < info.shape[2]; ++x) s.data[i++] = view(c, y, x);
    }
  }
  return s;
}

py::array_t<double> array_from_stack(const hm::HeatmapStack& s) {
  py::array_t<double> out({s.channels, s.height, s.width});
  std::memcpy(out.mutable_data(), s.data.data(), s.data.size() * sizeof(double));
  return out;
}

py::array_t<double> array_from_landmarks(const geom::LandmarkSet& lm) {
  py::array_t<double> out({geom::kLandmarkCount, 2});
  auto view = out.mutable_unchecked<2>();
  for (int i = 0; i < geom::kLandmarkCount; ++i) {
    view(i, 0) = lm.points[i].x;
    view(i, 1) = lm.points[i].y;
  }
  return out;
}

geom::LandmarkSet landmarks_from_array(const py::array_t<double>& arr) {
  py::buffer_info info = arr.request();
  if (info.ndim != 2 || info.shape[0] != geom::kLandmarkCount || info.shape[1] != 2) {
    throw py::value_error("expected a (10, 2) landmark array");
  }
  auto view = arr.unchecked<2>();
  geom::LandmarkSet lm;
  for (int i = 0; i < geom::kLandmarkCount; ++i) lm.points[i] = {view(i, 0), view(i, 1)};
  return lm;
}

py::array_t<double> array_from_image(const Image& img) {
  py::array_t<double> out({img.height, img.width});
  std::memcpy(out.mutable_data(), img.pixels.data(), img.pixels.size() * sizeof(double));
  return out;
}

cfg::FullConfig config_from_json_text(const std::string& text) {
  return cfg::parse_config(nlohmann::json::parse(text));
}

py::dict sample_dict(const synth::Sample& s) {
  py::dict d;
  d["image"] = array_from_image(s.image);
  d["landmarks"] = array_from_landmarks(s.landmarks);
  d["radius"] = s.radius;
  d["gaze"] = py::make_tuple(s.gaze.theta, s.gaze.phi);
  d["domain"] = s.domain == synth::Domain::synthetic ? "synthetic" : "real_like";
  d["occluded"] = static_cast<bool>(s.degradation.occluded);
  d["blurred"] = static_cast<bool>(s.degradation.blurred);
  d["gaze_sigma"] = static_cast<double>(s.degradation.gaze_sigma);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "geometry-guided gaze estimation core";

  py::register_exception<Error>(m, "HgnError", PyExc_RuntimeError);

  // -- geometry ----------------------------------------------------------
  m.def("angles_to_vector", [](double theta, double phi) {
    geom::GazeVector v = geom::angles_to_vector({theta, phi});
    return py::make_tuple(v.x, v.y, v.z);
  });
  m.def("vector_to_angles", [](double x, double y, double z) {
    geom::GazeAngles g = geom::vector_to_angles({x, y, z});
    return py::make_tuple(g.theta, g.phi);
  });
  m.def(
      "project_landmarks",
      [](double center_x, double center_y, double radius, double psi, double theta,
         double phi) {
        return array_from_landmarks(
            geom::project_landmarks({center_x, center_y, radius, psi}, {theta, phi}));
      },
      py::arg("center_x"), py::arg("center_y"), py::arg("radius"), py::arg("psi"),
      py::arg("theta"), py::arg("phi"));
  m.def("reconstruct_gaze", [](double iris_x, double iris_y, double center_x, double center_y,
                               double radius) {
    geom::ReconResult r = geom::reconstruct_gaze({iris_x, iris_y}, {center_x, center_y}, radius);
    py::dict d;
    d["theta"] = r.angles.theta;
    d["phi"] = r.angles.phi;
    d["theta_clamped"] = r.theta_clamped;
    d["phi_clamped"] = r.phi_clamped;
    return d;
  });
  m.def("recon_jacobian", [](double iris_x, double iris_y, double center_x, double center_y,
                             double radius) {
    geom::ReconJacobian j = geom::recon_jacobian({iris_x, iris_y}, {center_x, center_y}, radius);
    py::array_t<double> out({2, 5});
    auto view = out.mutable_unchecked<2>();
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 5; ++c) view(r, c) = j[r][c];
    }
    return out;
  });
  m.def("normalization_rotation", [](double x, double y, double z) {
    geom::Mat3 rot = geom::normalization_rotation(x, y, z);
    py::array_t<double> out({3, 3});
    auto view = out.mutable_unchecked<2>();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) view(r, c) = rot[r][c];
    }
    return out;
  });
  m.def("angular_error_deg", [](double ta, double pa, double tb, double pb) {
    return geom::angular_error_deg({ta, pa}, {tb, pb});
  });

  // -- heatmap -----------------------------------------------------------
  m.def("spatial_softmax", [](const py::array_t<double>& logits) {
    return array_from_stack(hm::spatial_softmax(stack_from_array(logits, 1.0)));
  });
  m.def(
      "soft_argmax",
      [](const py::array_t<double>& normalized, double scale) {
        hm::HeatmapStack s = stack_from_array(normalized, scale);
        std::vector<geom::Point> pts = hm::soft_argmax(s);
        py::array_t<double> out({static_cast<int>(pts.size()), 2});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < pts.size(); ++i) {
          view(static_cast<py::ssize_t>(i), 0) = pts[i].x;
          view(static_cast<py::ssize_t>(i), 1) = pts[i].y;
        }
        return out;
      },
      py::arg("normalized"), py::arg("scale") = 1.0);
  m.def(
      "render_target",
      [](const py::array_t<double>& landmarks, int height, int width, double scale,
         double sigma) {
        hm::RenderResult r =
            hm::render_target(landmarks_from_array(landmarks), height, width, scale, sigma);
        return py::make_tuple(array_from_stack(r.stack), r.degenerate_mask);
      },
      py::arg("landmarks"), py::arg("height"), py::arg("width"), py::arg("scale") = 2.0,
      py::arg("sigma") = 2.0);
  m.def("heatmap_loss", [](const py::array_t<double>& pred, const py::array_t<double>& target) {
    hm::HeatmapLossResult r =
        hm::heatmap_loss(stack_from_array(pred, 1.0), stack_from_array(target, 1.0));
    return py::make_tuple(r.value, array_from_stack(r.grad_pred_normalized));
  });

  // -- losses ------------------------------------------------------------
  m.def("radius_loss", [](double pred, double gt) {
    loss::ValueGrad r = loss::radius_loss(pred, gt);
    return py::make_tuple(r.value, r.grad);
  });
  m.def("gaze_loss", [](double gt_theta, double gt_phi, double theta, double phi) {
    loss::GazeLossResult r = loss::gaze_loss({gt_theta, gt_phi}, {theta, phi});
    return py::make_tuple(r.value, py::make_tuple(r.residuals[0], r.residuals[1]));
  });
  m.def("uncertainty_gaze_loss", [](double r0, double r1, double a0, double a1) {
    loss::UncertaintyLossResult r = loss::uncertainty_gaze_loss({r0, r1}, {a0, a1});
    py::dict d;
    d["value"] = r.value;
    d["grad_alpha"] = py::make_tuple(r.grad_alpha[0], r.grad_alpha[1]);
    d["grad_residual"] = py::make_tuple(r.grad_residual[0], r.grad_residual[1]);
    return d;
  });
  m.def("gaussian_nll_reference", &loss::gaussian_nll_reference);

  // -- datasets ----------------------------------------------------------
  m.def("generate_dataset", [](const std::string& config_json, const std::string& out_path) {
    cfg::FullConfig full = config_from_json_text(config_json);
    synth::Dataset ds = synth::generate_dataset(full.synth, cfg::canonical_echo(full));
    synth::write_dataset(ds, out_path);
    return ds.samples.size();
  });
  m.def("dataset_info", [](const std::string& path) {
    synth::Dataset ds = synth::read_dataset(path);
    std::size_t reallike = 0;
    for (const auto& s : ds.samples) {
      if (s.domain == synth::Domain::real_like) ++reallike;
    }
    py::dict d;
    d["count"] = ds.samples.size();
    d["reallike"] = reallike;
    d["config"] = ds.config_echo;
    return d;
  });
  m.def("load_sample", [](const std::string& path, std::size_t index) {
    synth::Dataset ds = synth::read_dataset(path);
    if (index >= ds.samples.size()) throw py::index_error("sample index out of range");
    return sample_dict(ds.samples[index]);
  });

  // -- training / evaluation ---------------------------------------------
  m.def(
      "train",
      [](const std::string& config_json, const std::string& dataset_path,
         const std::string& checkpoint_out, const std::string& real_dataset_path,
         const std::string& metrics_path) {
        cfg::FullConfig full = config_from_json_text(config_json);
        synth::Dataset synthetic = synth::read_dataset(dataset_path);
        synth::Dataset reallike;
        train::TrainInputs inputs;
        inputs.synthetic = &synthetic;
        if (!real_dataset_path.empty()) {
          reallike = synth::read_dataset(real_dataset_path);
          inputs.reallike = &reallike;
        }
        train::TrainResult result =
            train::train(full.network, full.train, full.weights, inputs);
        net::save_checkpoint(checkpoint_out, cfg::canonical_echo(full), result.params);
        if (!metrics_path.empty()) train::append_metrics(metrics_path, result.log);
        return result.log.empty() ? 0.0 : result.log.back().val_angular_deg;
      },
      py::arg("config_json"), py::arg("dataset_path"), py::arg("checkpoint_out"),
      py::arg("real_dataset_path") = "", py::arg("metrics_path") = "");
  m.def("evaluate", [](const std::string& checkpoint_path, const std::string& dataset_path) {
    net::Checkpoint ck = net::load_checkpoint(checkpoint_path);
    cfg::FullConfig full = config_from_json_text(ck.config_echo);
    synth::Dataset ds = synth::read_dataset(dataset_path);
    eval::EvalReport report =
        eval::evaluate(full.network, ck.params, ds, full.train.mode, full.train.hist_eq);
    py::dict d;
    d["mean_deg"] = report.mean_deg;
    d["median_deg"] = report.median_deg;
    d["count"] = report.count;
    d["mode"] = report.mode;
    return d;
  });
  m.def("predict", [](const std::string& checkpoint_path, const std::string& dataset_path,
                      std::size_t index) {
    net::Checkpoint ck = net::load_checkpoint(checkpoint_path);
    cfg::FullConfig full = config_from_json_text(ck.config_echo);
    synth::Dataset ds = synth::read_dataset(dataset_path);
    if (index >= ds.samples.size()) throw py::index_error("sample index out of range");
    eval::Prediction p = eval::predict(full.network, ck.params, ds.samples[index],
                                       full.train.mode, full.train.hist_eq);
    py::dict d;
    d["landmarks"] = array_from_landmarks(p.landmarks);
    d["radius"] = p.radius;
    d["gaze"] = py::make_tuple(p.gaze.theta, p.gaze.phi);
    d["alpha"] = py::make_tuple(p.alpha[0], p.alpha[1]);
    return d;
  });
  m.def("quality_scores", [](const std::string& checkpoint_path, const std::string& dataset_path) {
    net::Checkpoint ck = net::load_checkpoint(checkpoint_path);
    cfg::FullConfig full = config_from_json_text(ck.config_echo);
    synth::Dataset ds = synth::read_dataset(dataset_path);
    eval::QualityReport q =
        eval::quality_report(full.network, ck.params, ds, {0.0, 1.0}, full.train.hist_eq);
    py::array_t<double> out(static_cast<py::ssize_t>(q.quality.size()));
    std::memcpy(out.mutable_data(), q.quality.data(), q.quality.size() * sizeof(double));
    return out;
  });
  m.def(
      "grad_check",
      [](const std::string& config_json, std::size_t samples, std::uint64_t seed,
         double tolerance) {
        cfg::FullConfig full = config_from_json_text(config_json);
        full.synth.image_h = full.network.input_h;
        full.synth.image_w = full.network.input_w;
        synth::Sample sample = synth::generate_sample(full.synth, 0);
        net::ParamSet params = net::init_params(full.network, seed);
        net::Tensor image = net::image_to_tensor(sample.image);
        loss::LossWeights weights = full.weights;
        double sigma = full.train.sigma_hm;
        net::LossBuilder builder = [&sample, sigma, weights](
                                       net::Graph& g, const net::NetworkConfig& ncfg,
                                       const net::ParamSet& p, const net::Tensor& img) {
          train::SampleTermVars terms = train::build_sample_terms(
              g, ncfg, p, img, sample, train::Mode::hgn_um, sigma, {true, true, true});
          return g.weighted_sum({{terms.heatmap, weights.beta1},
                                 {terms.radius, weights.beta2},
                                 {terms.gaze, weights.beta3}});
        };
        net::GradCheckOptions options;
        options.tolerance = tolerance;
        options.max_sampled = samples;
        Rng rng(seed);
        net::GradCheckReport report =
            net::grad_check(full.network, params, image, builder, options, rng);
        py::dict d;
        d["max_deviation"] = report.max_deviation;
        d["checked"] = report.checked;
        d["passed"] = report.passed();
        return d;
      },
      py::arg("config_json") = "{}", py::arg("samples") = 200, py::arg("seed") = 0,
      py::arg("tolerance") = 1e-3);

  m.def("default_config", [] { return cfg::to_json(cfg::FullConfig{}).dump(); });
}
