#include "screwplan/dq.hpp"
#include "screwplan/error.hpp"
#include "screwplan/kinematics.hpp"
#include "screwplan/sim.hpp"
#include "screwplan/tsia.hpp"

#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace screwplan;

namespace {

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["status"] = s.status;
  d["exit_code"] = s.exit_code;
  d["message"] = s.message;
  d["final_goal_error"] = s.final_goal_error;
  d["path_length"] = s.path_length;
  d["min_clearance"] = s.min_clearance ? py::cast(*s.min_clearance) : py::none();
  d["planner_iterations"] = s.planner_iterations;
  d["controller_steps"] = s.controller_steps;
  d["avoidance_events"] = s.avoidance_events;
  d["config_hash"] = s.config_hash;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dual-quaternion pose planning from demonstrations";
  m.attr("__version__") = SCREWPLAN_VERSION;

  // Carries the error category as `code`.
  static py::handle error_type = py::exception<Error>(m, "ScrewplanError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string code(to_string(e.code()));
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(code + ": " + e.what());
      exc.attr("code") = code;
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<UnitDualQuaternion>(m, "Pose")
      .def(py::init<>())
      .def(py::init([](const Vec8& v) { return UnitDualQuaternion::from_vec(v); }), py::arg("coefficients"))
      .def_static("from_translation", &UnitDualQuaternion::from_translation)
      .def_static("from_axis_angle", &UnitDualQuaternion::from_axis_angle, py::arg("axis"), py::arg("angle"))
      .def_static("from_rotation_translation",
                  [](const Eigen::Vector4d& r, const Vec3& p) {
                    return UnitDualQuaternion::from_rotation_translation(Quaternion(r[0], r[1], r[2], r[3]), p);
                  },
                  py::arg("rotation"), py::arg("translation"), "Rotation as (w, x, y, z).")
      .def_property_readonly("vec", &UnitDualQuaternion::vec)
      .def_property_readonly("translation", &UnitDualQuaternion::translation)
      .def_property_readonly("rotation", [](const UnitDualQuaternion& x) { return x.rotation().coeffs(); })
      .def("conj", &UnitDualQuaternion::conj)
      .def("transform_point", &UnitDualQuaternion::transform_point)
      .def(py::self * py::self)
      .def("__repr__", [](const UnitDualQuaternion& x) {
        std::ostringstream os;
        os << "Pose(" << x << ")";
        return os.str();
      });

  m.def("log", [](const UnitDualQuaternion& x) { return log(x).vec(); }, "Logarithm as 8 coefficients.");
  m.def("exp", [](const Vec8& y) { return exp(DualQuaternion::from_vec(y)); });
  m.def("pow", [](const UnitDualQuaternion& x, double t) { return screwplan::pow(x, t); }, py::arg("x"), py::arg("t"));
  m.def("sclerp", &screwplan::sclerp, py::arg("x1"), py::arg("x2"), py::arg("t"));
  m.def("screw_parameters", [](const UnitDualQuaternion& x) {
    const ScrewParameters s = screw_parameters(x);
    return py::dict(py::arg("axis") = s.axis, py::arg("moment") = s.moment, py::arg("angle") = s.angle,
                    py::arg("translation") = s.translation);
  });

  py::class_<SerialManipulator>(m, "Robot")
      .def_property_readonly("name", &SerialManipulator::name)
      .def_property_readonly("dof", &SerialManipulator::dof)
      .def_property_readonly("lower_limits", &SerialManipulator::lower_limits)
      .def_property_readonly("upper_limits", &SerialManipulator::upper_limits)
      .def("mid_range", &SerialManipulator::mid_range)
      .def("forward_kinematics", [](const SerialManipulator& r, const JointConfig& q) { return forward_kinematics(r, q); })
      .def("pose_jacobian", [](const SerialManipulator& r, const JointConfig& q) { return pose_jacobian(r, q); })
      .def("to_yaml", [](const SerialManipulator& r) { return to_yaml(r); });
  m.def("load_robot", &load_robot, py::arg("path_or_name"));
  m.def("bundled_robot_names", &bundled_robot_names);

  m.def("record_demo", [](const SerialManipulator& r, const std::vector<JointConfig>& joints) {
    return record_demo(r, joints).poses;
  });
  m.def(
      "plan",
      [](const std::vector<UnitDualQuaternion>& demo, const UnitDualQuaternion& start, const UnitDualQuaternion& goal,
         double tau, double guiding_fraction, double tolerance) {
        PlannerParams p;
        p.tau_step = tau;
        p.guiding_fraction = guiding_fraction;
        p.goal_tolerance = tolerance;
        return plan({demo, PathKind::Demonstrated}, start, goal, p).poses;
      },
      py::arg("demo"), py::arg("start"), py::arg("goal"), py::arg("tau") = 0.01, py::arg("guiding_fraction") = 0.2,
      py::arg("tolerance") = 1e-3, "Open-loop final path from start to goal imitating the demonstration.");
  m.def(
      "run",
      [](const std::filesystem::path& config, bool write) {
        const ExperimentConfig cfg = load_config(config);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
          if (write) write_outputs(r, cfg.output);
        }
        return summary_dict(r.summary);
      },
      py::arg("config"), py::arg("write_outputs") = false, "Runs an experiment file and returns its summary.");
}
