#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "veinforge/cluster.hpp"
#include "veinforge/features.hpp"
#include "veinforge/kform.hpp"
#include "veinforge/pipeline.hpp"
#include "veinforge/similarity.hpp"
#include "veinforge/special.hpp"
#include "veinforge/validation.hpp"

namespace py = pybind11;
using namespace veinforge;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array (height, width)");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const GrayImage& img) {
  Array out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

std::vector<GrayImage> to_images(const std::vector<Array>& arrays) {
  std::vector<GrayImage> out;
  out.reserve(arrays.size());
  for (const auto& a : arrays) out.push_back(to_image(a));
  return out;
}

}  // namespace

PYBIND11_MODULE(_veinforge, m) {
  m.doc() = "Synthetic palm-vein generation and dataset validation";

  py::register_exception<GeneratorExhausted>(m, "GeneratorExhausted", PyExc_RuntimeError);
  py::register_exception<CorruptDataset>(m, "CorruptDataset", PyExc_RuntimeError);
  py::register_exception<NonLeptokurticError>(m, "NonLeptokurticError", PyExc_ValueError);
  py::register_exception<DivergentDistance>(m, "DivergentDistance", PyExc_ValueError);
  py::register_exception<ImageIoError>(m, "ImageIoError", PyExc_OSError);

  m.def("generate_image",
        [](const std::string& generator, std::uint64_t seed, int size) {
          return to_array(generate_candidate(parse_generator(generator), seed, size).image);
        },
        py::arg("generator") = "physarum", py::arg("seed") = 0, py::arg("size") = 128,
        "One generated vein image as a (size, size) float array in [0, 1].");

  m.def("generate_database",
        [](int subjects, const std::string& generator, std::uint64_t seed, const std::filesystem::path& out,
           int size, int threads) {
          GenerateOptions opts;
          opts.image_size = size;
          opts.threads = threads;
          opts.log = [](std::string_view) {};
          GenerateReport rep;
          {
            py::gil_scoped_release release;
            rep = generate_database(subjects, parse_generator(generator), seed, out, opts);
          }
          return py::dict(py::arg("admitted") = rep.admitted, py::arg("rejected") = rep.rejected,
                          py::arg("subjects") = rep.manifest.subjects.size());
        },
        py::arg("subjects"), py::arg("generator") = "physarum", py::arg("seed") = 0, py::arg("out"),
        py::arg("size") = 128, py::arg("threads") = 0);

  m.def("similarity_score", [](const Array& a, const Array& b) { return similarity_score(to_image(a), to_image(b)); });

  py::class_<KFormParams>(m, "KFormParams")
      .def(py::init<double, double>(), py::arg("p"), py::arg("c"))
      .def_readwrite("p", &KFormParams::p)
      .def_readwrite("c", &KFormParams::c)
      .def("__repr__", [](const KFormParams& k) {
        return "KFormParams(p=" + std::to_string(k.p) + ", c=" + std::to_string(k.c) + ")";
      });

  m.def("fit_kform", [](const Array& img) { return fit_kform(to_image(img)); },
        "Log-Gabor response of the image followed by the K-form moment fit.");
  m.def("estimate_kform", [](const std::vector<double>& data) { return estimate_kform(std::span<const double>(data)); });
  m.def("kform_pdf", &kform_pdf, py::arg("x"), py::arg("params"));
  m.def("kform_distance",
        [](const KFormParams& a, const KFormParams& b, const std::string& kind) {
          return kform_distance(a, b, parse_kform_distance(kind));
        },
        py::arg("f1"), py::arg("f2"), py::arg("kind") = "l2");
  m.def("sample_kform", &sample_kform, py::arg("params"), py::arg("n"), py::arg("seed") = 0);
  m.def("bessel_k", &bessel_k, py::arg("nu"), py::arg("x"));

  m.def("extract_features", [](const Array& img) { return extract_features(to_image(img)); });
  m.def("fid",
        [](const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth) {
          return fid(FeatureStats::from_samples(real), FeatureStats::from_samples(synth));
        },
        "FID between two sets of feature rows.");
  m.def("nn_loo_accuracy",
        [](const std::vector<Array>& a, const std::vector<Array>& b, int threads) {
          const auto ia = to_images(a), ib = to_images(b);
          py::gil_scoped_release release;
          return nn_loo_accuracy(ia, ib, resolve_threads(threads));
        },
        py::arg("set_a"), py::arg("set_b"), py::arg("threads") = 0);

  m.def("cluster",
        [](const Eigen::MatrixXd& distances) {
          const Dendrogram t = hcluster(distances);
          py::list merges;
          for (const auto& mg : t.merges) merges.append(py::make_tuple(mg.left, mg.right, mg.height, mg.size));
          return merges;
        },
        "Average-linkage merges as (left, right, height, size) tuples.");
}
