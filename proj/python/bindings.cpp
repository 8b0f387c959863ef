#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>
#include <vector>

#include "apfnet/apf.hpp"
#include "apfnet/checkpoint.hpp"
#include "apfnet/commands.hpp"
#include "apfnet/errors.hpp"
#include "apfnet/evaluation.hpp"
#include "apfnet/generator.hpp"
#include "apfnet/network.hpp"
#include "apfnet/planner.hpp"
#include "apfnet/scenario.hpp"
#include "apfnet/scenario_io.hpp"
#include "apfnet/training.hpp"

namespace py = pybind11;
using namespace apfnet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Vec2 to_vec(const std::pair<double, double>& p) { return {p.first, p.second}; }

std::vector<Vec2> to_vecs(const std::vector<std::pair<double, double>>& ps) {
  std::vector<Vec2> out;
  for (const auto& p : ps) out.push_back(to_vec(p));
  return out;
}

ApfParams apf_params(double xi, double eta, double d0, double u_cap) {
  ApfParams p{xi, eta, d0, u_cap};
  p.validate();
  return p;
}

Array map_to_array(const Map2d& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data(), m.data() + m.size(), out.mutable_data());
  return out;
}

Array maps_to_array(const std::vector<Map2d>& maps) {
  const std::size_t rows = maps.empty() ? kGridRows : maps.front().rows();
  const std::size_t cols = maps.empty() ? kGridCols : maps.front().cols();
  Array out({maps.size(), rows, cols});
  double* dst = out.mutable_data();
  for (const auto& m : maps) dst = std::copy(m.data(), m.data() + m.size(), dst);
  return out;
}

std::vector<Map2d> array_to_maps(const Array& a) {
  if (a.ndim() != 3) throw InputError("expected an array of shape (T, 36, 9)");
  const auto t = static_cast<std::size_t>(a.shape(0));
  const auto rows = static_cast<std::size_t>(a.shape(1));
  const auto cols = static_cast<std::size_t>(a.shape(2));
  std::vector<Map2d> out;
  const double* src = a.data();
  for (std::size_t k = 0; k < t; ++k) {
    Map2d m(rows, cols);
    std::copy(src, src + m.size(), m.data());
    src += m.size();
    out.push_back(std::move(m));
  }
  return out;
}

GeneratorConfig generator_config(const std::string& difficulty) {
  GeneratorConfig g;
  g.difficulty = parse_difficulty(difficulty);
  return g;
}

// A trained (or freshly initialised) network plus the horizon it was fit on.
struct Model {
  std::shared_ptr<const ModelParameters> params;
  int horizon = 1;

  FieldSource source() const { return FieldSource::learned(params, GridSpec{}, horizon); }
};

Array trajectory_array(const Trajectory& traj) {
  Array out({traj.points.size(), std::size_t{5}});
  double* d = out.mutable_data();
  for (const auto& p : traj.points) {
    *d++ = p.t;
    *d++ = p.position.x;
    *d++ = p.position.y;
    *d++ = p.velocity.x;
    *d++ = p.velocity.y;
  }
  return out;
}

Trajectory plan(const std::string& scenario_json, const Model* model) {
  const Scenario s = parse_scenario(scenario_json);
  const FieldSource src = model ? model->source() : FieldSource::analytic(ApfParams{});
  return plan_trajectory(src, s, PlannerConfig{});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "APF field learning and planning";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("attractive_potential",
        [](std::pair<double, double> x, std::pair<double, double> goal, double xi) {
          return attractive_potential(to_vec(x), to_vec(goal), xi);
        },
        py::arg("x"), py::arg("goal"), py::arg("xi") = 0.05);
  m.def("repulsive_potential",
        [](std::pair<double, double> x, const std::vector<std::pair<double, double>>& obstacles,
           double eta, double d0) {
          const auto obs = to_vecs(obstacles);
          return repulsive_potential(to_vec(x), obs, eta, d0);
        },
        py::arg("x"), py::arg("obstacles"), py::arg("eta") = 2.0, py::arg("d0") = 8.0);
  m.def("total_potential",
        [](std::pair<double, double> x, std::pair<double, double> goal,
           const std::vector<std::pair<double, double>>& obstacles, double xi, double eta,
           double d0, double u_cap) {
          const auto obs = to_vecs(obstacles);
          return total_potential(to_vec(x), to_vec(goal), obs, apf_params(xi, eta, d0, u_cap));
        },
        py::arg("x"), py::arg("goal"), py::arg("obstacles"), py::arg("xi") = 0.05,
        py::arg("eta") = 2.0, py::arg("d0") = 8.0, py::arg("u_cap") = 10.0);

  m.def("generate_suite",
        [](std::size_t count, std::uint64_t seed, const std::string& difficulty) {
          return dump_suite(generate_suite(count, seed, generator_config(difficulty)));
        },
        py::arg("count"), py::arg("seed") = 42, py::arg("difficulty") = "mixed",
        "Suite of generated scenarios as a JSON array.");
  m.def("split_suite",
        [](const std::string& suite_json) {
          std::vector<std::string> out;
          for (const auto& s : parse_suite(suite_json)) out.push_back(dump_scenario(s));
          return out;
        },
        py::arg("suite_json"), "One JSON document per scenario.");

  m.def("rasterize",
        [](const std::string& scenario_json) {
          std::vector<Map2d> maps;
          for (auto& g : rasterize_sequence(parse_scenario(scenario_json), GridSpec{})) {
            maps.push_back(std::move(g.values));
          }
          return maps_to_array(maps);
        },
        py::arg("scenario_json"), "Binary occupancy maps, shape (T, 36, 9).");
  m.def("ideal_field",
        [](const std::string& scenario_json) {
          std::vector<Map2d> maps;
          for (auto& f : build_ideal_sequence(parse_scenario(scenario_json), GridSpec{}, ApfParams{})) {
            maps.push_back(std::move(f.grid.values));
          }
          return maps_to_array(maps);
        },
        py::arg("scenario_json"), "Normalised potential maps, shape (T, 36, 9).");

  py::class_<Model>(m, "Model")
      .def_static("initialized",
                  [](std::uint64_t seed, int hidden) {
                    return Model{std::make_shared<const ModelParameters>(
                                     ModelParameters::initialized(seed, hidden)),
                                 1};
                  },
                  py::arg("seed"), py::arg("lstm_hidden") = kDefaultLstmHidden)
      .def_static("load",
                  [](const std::filesystem::path& path) {
                    Checkpoint c = load_checkpoint(path);
                    return Model{std::make_shared<const ModelParameters>(std::move(c.params)),
                                 static_cast<int>(c.horizon)};
                  },
                  py::arg("path"))
      .def("save",
           [](const Model& self, const std::filesystem::path& path) {
             save_checkpoint(path, Checkpoint{*self.params, static_cast<std::uint32_t>(self.horizon)});
           },
           py::arg("path"))
      .def_property_readonly("lstm_hidden", [](const Model& self) { return self.params->lstmHidden(); })
      .def_readonly("horizon", &Model::horizon)
      .def("predict",
           [](const Model& self, const Array& inputs) {
             return maps_to_array(model_predict(array_to_maps(inputs), *self.params));
           },
           py::arg("inputs"), "Field maps for a (T, 36, 9) input sequence.");

  m.def("train",
        [](const std::string& suite_json, int epochs, std::uint64_t seed, int hidden,
           double learning_rate, const std::function<void(int, double, double)>& on_epoch) {
          const auto suite = parse_suite(suite_json);
          TrainConfig cfg;
          cfg.epochs = epochs;
          cfg.seed = seed;
          cfg.lstm_hidden = hidden;
          cfg.optimizer.learning_rate = learning_rate;
          const auto data = make_dataset(suite, GridSpec{}, ApfParams{});
          EpochCallback cb;
          if (on_epoch) {
            cb = [&](const LossRecord& r) {
              py::gil_scoped_acquire acquire;
              on_epoch(r.epoch, r.train_loss, r.test_loss);
            };
          }
          FitResult fr;
          {
            py::gil_scoped_release release;
            fr = fit(cfg, data, cb);
          }
          std::vector<std::tuple<int, double, double>> history;
          for (const auto& r : fr.records) history.emplace_back(r.epoch, r.train_loss, r.test_loss);
          Model model{std::make_shared<const ModelParameters>(std::move(fr.params)),
                      suite.front().horizon_steps};
          return py::make_tuple(model, history);
        },
        py::arg("suite_json"), py::arg("epochs") = 20, py::arg("seed") = 42,
        py::arg("lstm_hidden") = kDefaultLstmHidden, py::arg("learning_rate") = 1e-3,
        py::arg("on_epoch") = nullptr,
        "Fits a model; returns (model, [(epoch, train_loss, test_loss), ...]).");

  m.def("plan",
        [](const std::string& scenario_json, const Model* model) {
          const Trajectory traj = plan(scenario_json, model);
          return py::make_tuple(to_string(traj.outcome), trajectory_array(traj));
        },
        py::arg("scenario_json"), py::arg("model") = nullptr,
        "Plans with the analytic field, or the model's field when given. Returns "
        "(outcome, array of t, x, y, vx, vy rows).");

  m.def("metrics",
        [](const std::string& scenario_json, const Model* model) {
          const Scenario s = parse_scenario(scenario_json);
          const Trajectory traj = plan(scenario_json, model);
          py::dict d;
          d["outcome"] = to_string(traj.outcome);
          d["completed"] = task_completed(traj);
          d["ttc_min"] = compute_ttc(traj, s);
          d["jerk_mean"] = traj.points.size() >= 4 ? compute_jerk(traj) : 0.0;
          d["headway_mean"] = compute_headway(traj, s);
          d["min_clearance"] = min_clearance(traj, s);
          d["plan_time_s"] = traj.planTime();
          return d;
        },
        py::arg("scenario_json"), py::arg("model") = nullptr);

  m.def("run_command",
        [](const std::string& name, const py::dict& flags) {
          CommandFlags f;
          for (const auto& [k, v] : flags) {
            const std::string key = py::str(k);
            if (key == "config") f.config = v.cast<std::filesystem::path>();
            else if (key == "seed") f.seed = v.cast<std::uint64_t>();
            else if (key == "out") f.out = v.cast<std::filesystem::path>();
            else if (key == "suite") f.suite = v.cast<std::filesystem::path>();
            else if (key == "checkpoint") f.checkpoint = v.cast<std::filesystem::path>();
            else if (key == "source") f.source = v.cast<std::string>();
            else if (key == "epochs") f.epochs = v.cast<int>();
            else if (key == "count") f.count = v.cast<int>();
            else if (key == "t") f.t = v.cast<int>();
            else if (key == "index") f.index = v.cast<int>();
            else if (key == "difficulty") f.difficulty = v.cast<std::string>();
            else throw InputError("unknown flag: " + key);
          }
          py::gil_scoped_release release;
          return run_command(name, f);
        },
        py::arg("name"), py::arg("flags") = py::dict(),
        "Runs a CLI subcommand in-process and returns its exit code.");
}
