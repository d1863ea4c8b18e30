#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nbp/bench.hpp"
#include "nbp/config.hpp"
#include "nbp/labels.hpp"
#include "nbp/learner/train.hpp"

namespace py = pybind11;
using namespace nbp;

namespace {

py::array_t<float> grid_to_array(const Grid2D<float>& g) {
    py::array_t<float> arr({g.height(), g.width()});
    auto r = arr.mutable_unchecked<2>();
    for (int z = 0; z < g.height(); ++z)
        for (int x = 0; x < g.width(); ++x) r(z, x) = g.at(x, z);
    return arr;
}

py::array_t<uint8_t> grid_to_array_u8(const Grid2D<uint8_t>& g) {
    py::array_t<uint8_t> arr({g.height(), g.width()});
    auto r = arr.mutable_unchecked<2>();
    for (int z = 0; z < g.height(); ++z)
        for (int x = 0; x < g.width(); ++x) r(z, x) = g.at(x, z);
    return arr;
}

py::array_t<double> value_map_to_array(const ValueMap& m) {
    py::array_t<double> arr({m.window.grid_h, m.window.grid_w, kNumYaw});
    auto r = arr.mutable_unchecked<3>();
    for (int z = 0; z < m.window.grid_h; ++z)
        for (int x = 0; x < m.window.grid_w; ++x)
            for (int yaw = 0; yaw < kNumYaw; ++yaw) r(z, x, yaw) = m.at(x, z, yaw);
    return arr;
}

}  // namespace

PYBIND11_MODULE(_nbp, m) {
    m.doc() = "active 3D mapping laboratory core";

    py::class_<Vec3>(m, "Vec3")
        .def(py::init<>())
        .def(py::init([](double x, double y, double z) { return Vec3{x, y, z}; }))
        .def_readwrite("x", &Vec3::x)
        .def_readwrite("y", &Vec3::y)
        .def_readwrite("z", &Vec3::z)
        .def("__repr__", [](const Vec3& v) {
            return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " +
                   std::to_string(v.z) + ")";
        });

    py::class_<CellIndex>(m, "CellIndex")
        .def(py::init([](int x, int z) { return CellIndex{x, z}; }))
        .def_readwrite("x", &CellIndex::x)
        .def_readwrite("z", &CellIndex::z);

    py::class_<Pose>(m, "Pose")
        .def(py::init([](int x, int z, int yaw) { return Pose{{x, z}, yaw}; }), py::arg("x"),
             py::arg("z"), py::arg("yaw") = 0)
        .def_property_readonly("x", [](const Pose& p) { return p.cell.x; })
        .def_property_readonly("z", [](const Pose& p) { return p.cell.z; })
        .def_readwrite("yaw_index", &Pose::yaw_index);

    py::class_<DifficultyParams>(m, "DifficultyParams")
        .def(py::init<>())
        .def_readwrite("seed", &DifficultyParams::seed)
        .def_readwrite("window_fraction", &DifficultyParams::window_fraction)
        .def_readwrite("branching_factor", &DifficultyParams::branching_factor);

    py::class_<Scene>(m, "Scene")
        .def_property_readonly("width", &Scene::width)
        .def_property_readonly("height", &Scene::height)
        .def_readonly("cell_size", &Scene::cell_size)
        .def("is_nav", &Scene::is_nav)
        .def("is_wall", &Scene::is_wall)
        .def("nav_cells", &Scene::nav_cells)
        .def("navgrid", [](const Scene& s) { return grid_to_array_u8(s.navgrid); });

    m.def("difficulty_preset", &difficulty_preset, py::arg("name"));
    m.def("generate_scene", &generate_scene, py::arg("params"));
    m.def(
        "generate_scene_named",
        [](const std::string& difficulty, uint64_t seed) {
            DifficultyParams p = difficulty_preset(difficulty);
            p.seed = seed;
            return generate_scene(p);
        },
        py::arg("difficulty"), py::arg("seed"));
    m.def("save_scene", &save_scene);
    m.def("load_scene", &load_scene);
    m.def("gt_surface_points", &gt_surface_points);
    m.def("nav_complexity", &nav_complexity, py::arg("scene"), py::arg("sample_fraction"),
          py::arg("seed"));

    py::class_<CameraModel>(m, "CameraModel")
        .def(py::init<>())
        .def_readwrite("width", &CameraModel::width)
        .def_readwrite("height", &CameraModel::height)
        .def_readwrite("hfov_deg", &CameraModel::hfov_deg);

    py::class_<DepthImage>(m, "DepthImage")
        .def_property_readonly("array", [](const DepthImage& d) {
            py::array_t<float> arr({d.height, d.width});
            auto r = arr.mutable_unchecked<2>();
            for (int v = 0; v < d.height; ++v)
                for (int u = 0; u < d.width; ++u) r(v, u) = d.at(u, v);
            return arr;
        });

    m.def("render_depth", &render_depth, py::arg("scene"), py::arg("pose"),
          py::arg("camera") = CameraModel{});
    m.def("backproject", &backproject, py::arg("depth"), py::arg("pose"),
          py::arg("camera") = CameraModel{}, py::arg("cell_size") = 0.5,
          py::arg("agent_height") = 1.65);

    py::class_<SurfelCloud>(m, "SurfelCloud")
        .def(py::init<double>(), py::arg("voxel_size") = 0.5)
        .def("insert", &SurfelCloud::insert)
        .def("size", &SurfelCloud::size)
        .def("to_points", &SurfelCloud::to_points);

    py::class_<CoverageConfig>(m, "CoverageConfig")
        .def(py::init<>())
        .def_readwrite("epsilon", &CoverageConfig::epsilon)
        .def_readwrite("comp_threshold", &CoverageConfig::comp_threshold);

    m.def("coverage", &coverage, py::arg("gt"), py::arg("cloud"),
          py::arg("cfg") = CoverageConfig{});
    m.def("auc", &auc, py::arg("series"), py::arg("horizon"));

    py::class_<WindowSpec>(m, "WindowSpec").def(py::init<>());

    py::class_<Prediction>(m, "Prediction")
        .def_property_readonly(
            "value_map", [](const Prediction& p) { return value_map_to_array(p.value_map); })
        .def_property_readonly("obstacle_probs", [](const Prediction& p) {
            return grid_to_array(p.obstacle_map.probs);
        });

    py::class_<NbpNet>(m, "NbpNet")
        .def(py::init([](uint64_t seed) { return NbpNet(NetConfig{}, seed); }), py::arg("seed") = 1)
        .def_static("load", &NbpNet::load)
        .def("save", &NbpNet::save)
        .def_readwrite("gain_scale", &NbpNet::gain_scale)
        .def("predict_from_state",
             [](NbpNet& net, const Scene& scene, const SurfelCloud& cloud,
                const std::vector<Pose>& history, const Pose& pose) {
                 const auto emb =
                     build_embedding(cloud, history, pose, WindowSpec{}, scene.cell_size);
                 return net.predict(emb);
             });

    py::class_<EpisodeLog>(m, "EpisodeLog")
        .def_readonly("planner", &EpisodeLog::planner)
        .def_readonly("scene_id", &EpisodeLog::scene_id)
        .def_readonly("final_coverage", &EpisodeLog::final_coverage)
        .def_readonly("auc", &EpisodeLog::auc_value)
        .def_readonly("comp_pct", &EpisodeLog::comp_pct)
        .def_readonly("comp_cm", &EpisodeLog::comp_cm)
        .def_readonly("aborted", &EpisodeLog::aborted)
        .def_property_readonly("coverage_series", [](const EpisodeLog& e) {
            std::vector<double> series;
            for (const StepRecord& s : e.steps) series.push_back(s.coverage);
            return series;
        });

    m.def(
        "run_episode",
        [](const Scene& scene, const std::string& planner, int x, int z, int yaw, int budget,
           uint64_t seed, const std::string& checkpoint, int oracle_stride) {
            PlannerSpec spec;
            spec.kind = planner_from_name(planner);
            NbpNet net;
            if (!checkpoint.empty()) {
                net = NbpNet::load(checkpoint);
                spec.net = &net;
            }
            spec.oracle_stride = oracle_stride;
            const auto gt = gt_surface_points(scene);
            return run_episode(scene, gt, spec, Pose{{x, z}, yaw}, budget, seed);
        },
        py::arg("scene"), py::arg("planner"), py::arg("x"), py::arg("z"), py::arg("yaw"),
        py::arg("budget"), py::arg("seed") = 1, py::arg("checkpoint") = std::string{},
        py::arg("oracle_stride") = 4);

    m.attr("NUM_YAW") = kNumYaw;
}
