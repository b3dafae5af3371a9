#include "instobj/config_io.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include "instobj/errors.hpp"
#include "json.hpp"

namespace instobj {

namespace {

using nlohmann::json;

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

Vec3 to_vec(const json& j) {
  const auto v = j.get<std::array<double, 3>>();
  return {v[0], v[1], v[2]};
}

Mat3 to_mat(const json& j) {
  const auto rows = j.get<std::array<std::array<double, 3>, 3>>();
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

json coords(const std::vector<GridCoord>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back(json::array({c.x, c.y}));
  return a;
}

std::vector<GridCoord> to_coords(const json& j) {
  std::vector<GridCoord> out;
  for (const auto& p : j) {
    const auto xy = p.get<std::array<int, 2>>();
    out.push_back({xy[0], xy[1]});
  }
  return out;
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.contains(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json object_json(const ObjectConfig& o) {
  json faces = json::array();
  for (const auto& f : o.faces) {
    json mags = json::array(), sens = json::array();
    for (const auto& m : f.magnets) {
      mags.push_back({{"rest_position", vec(m.rest_position)},
                      {"moment_magnitude", m.moment_magnitude},
                      {"moment_direction", vec(m.moment_direction)}});
    }
    for (const auto& s : f.sensors) {
      sens.push_back({{"position", vec(s.position)}, {"orientation", mat(s.orientation)}});
    }
    faces.push_back({{"face_index", f.face_index},
                     {"rotation", mat(f.frame.rotation)},
                     {"translation", vec(f.frame.translation)},
                     {"magnets", mags},
                     {"sensors", sens}});
  }
  return {{"core_edge", o.core_edge},
          {"shell_outer_edge", o.shell_outer_edge},
          {"pixel_grid", o.pixel_grid},
          {"faces", faces}};
}

void read_object(const json& j, ObjectConfig& o) {
  only_keys(j, {"core_edge", "shell_outer_edge", "pixel_grid", "faces"}, "object");
  read(j, "core_edge", o.core_edge);
  read(j, "shell_outer_edge", o.shell_outer_edge);
  read(j, "pixel_grid", o.pixel_grid);
  if (!j.contains("faces")) return;
  o.faces.clear();
  for (const auto& jf : j.at("faces")) {
    only_keys(jf, {"face_index", "rotation", "translation", "magnets", "sensors"}, "face");
    FaceConfig f;
    f.face_index = jf.at("face_index").get<int>();
    f.frame.rotation = to_mat(jf.at("rotation"));
    f.frame.translation = to_vec(jf.at("translation"));
    for (const auto& jm : jf.at("magnets")) {
      f.magnets.push_back({to_vec(jm.at("rest_position")), jm.at("moment_magnitude").get<double>(),
                           to_vec(jm.at("moment_direction"))});
    }
    for (const auto& js : jf.at("sensors")) {
      f.sensors.push_back({to_vec(js.at("position")), to_mat(js.at("orientation"))});
    }
    o.faces.push_back(std::move(f));
  }
}

const char* optimizer_name(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

}  // namespace

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  const auto& d = cfg.deformation;
  const auto& g = cfg.generation;
  const auto& t = cfg.model.train;
  json j;
  j["object"] = object_json(cfg.object);
  j["deformation"] = {{"kernel_sigma", d.kernel_sigma}, {"k1", d.k1},       {"k3", d.k3},
                      {"max_depth", d.max_depth},       {"grid", d.grid}, {"stiffness_map", d.stiffness_map}};
  j["sweep"] = {{"samples_per_case", g.protocol.samples_per_case},
                {"min_depth", g.protocol.depths.min_depth},
                {"max_depth", g.protocol.depths.max_depth},
                {"cycles", g.protocol.cycles}};
  j["coverage"] = {{"dual_anchors", coords(g.coverage.dual_anchors)},
                   {"triple_anchors", coords(g.coverage.triple_anchors)},
                   {"non_contact_cases", g.coverage.non_contact_cases}};
  j["sensor"] = {{"noise_sd_ut", g.sensor.noise_sd_ut},
                 {"ambient_field_ut",
                  g.sensor.ambient_field_ut ? vec(*g.sensor.ambient_field_ut) : json(nullptr)},
                 {"adc_full_scale_ut",
                  g.sensor.adc_full_scale_ut ? json(*g.sensor.adc_full_scale_ut) : json(nullptr)},
                 {"adc_bits", g.sensor.adc_bits}};
  j["labels"] = {{"quantize_force", g.quantize_force}, {"force_quantum", g.force_quantum}};
  j["model"] = {{"preset", cfg.model.name},
                {"layer_sizes", cfg.model.sizes},
                {"train",
                 {{"learning_rate", t.learning_rate},
                  {"batch_size", t.batch_size},
                  {"max_epochs", t.max_epochs},
                  {"optimizer", optimizer_name(t.optimizer)},
                  {"beta1", t.beta1},
                  {"beta2", t.beta2},
                  {"eps", t.eps}}}};
  j["split"] = {{"train", cfg.split.train},
                {"validation", cfg.split.validation},
                {"test", cfg.split.test}};
  j["scale"] = cfg.scale;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  return j.dump(2) + "\n";
}

PipelineConfig pipeline_config_from_json(std::string_view text, PipelineConfig cfg) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  try {
    only_keys(j, {"object", "deformation", "sweep", "coverage", "sensor", "labels", "model",
                  "split", "scale", "seed", "jobs"},
              "config");
    if (j.contains("object")) read_object(j.at("object"), cfg.object);
    if (j.contains("deformation")) {
      const auto& d = j.at("deformation");
      only_keys(d, {"kernel_sigma", "k1", "k3", "max_depth", "grid", "stiffness_map"},
                "deformation");
      read(d, "kernel_sigma", cfg.deformation.kernel_sigma);
      read(d, "k1", cfg.deformation.k1);
      read(d, "k3", cfg.deformation.k3);
      read(d, "max_depth", cfg.deformation.max_depth);
      read(d, "grid", cfg.deformation.grid);
      read(d, "stiffness_map", cfg.deformation.stiffness_map);
    }
    auto& g = cfg.generation;
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      only_keys(s, {"samples_per_case", "min_depth", "max_depth", "cycles"}, "sweep");
      read(s, "samples_per_case", g.protocol.samples_per_case);
      read(s, "min_depth", g.protocol.depths.min_depth);
      read(s, "max_depth", g.protocol.depths.max_depth);
      read(s, "cycles", g.protocol.cycles);
    }
    if (j.contains("coverage")) {
      const auto& c = j.at("coverage");
      only_keys(c, {"dual_anchors", "triple_anchors", "non_contact_cases"}, "coverage");
      if (c.contains("dual_anchors")) g.coverage.dual_anchors = to_coords(c.at("dual_anchors"));
      if (c.contains("triple_anchors")) {
        g.coverage.triple_anchors = to_coords(c.at("triple_anchors"));
      }
      read(c, "non_contact_cases", g.coverage.non_contact_cases);
    }
    if (j.contains("sensor")) {
      const auto& s = j.at("sensor");
      only_keys(s, {"noise_sd_ut", "ambient_field_ut", "adc_full_scale_ut", "adc_bits"}, "sensor");
      read(s, "noise_sd_ut", g.sensor.noise_sd_ut);
      if (s.contains("ambient_field_ut")) {
        const auto& a = s.at("ambient_field_ut");
        g.sensor.ambient_field_ut = a.is_null() ? std::nullopt : std::optional(to_vec(a));
      }
      if (s.contains("adc_full_scale_ut")) {
        const auto& a = s.at("adc_full_scale_ut");
        g.sensor.adc_full_scale_ut = a.is_null() ? std::nullopt : std::optional(a.get<double>());
      }
      read(s, "adc_bits", g.sensor.adc_bits);
    }
    if (j.contains("labels")) {
      const auto& l = j.at("labels");
      only_keys(l, {"quantize_force", "force_quantum"}, "labels");
      read(l, "quantize_force", g.quantize_force);
      read(l, "force_quantum", g.force_quantum);
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      only_keys(m, {"preset", "layer_sizes", "train"}, "model");
      if (m.contains("preset")) {
        const auto name = m.at("preset").get<std::string>();
        if (name == "paper") {
          cfg.model = paper_preset();
        } else if (name == "small") {
          cfg.model = small_preset();
        } else {
          throw ConfigError("unknown model preset '" + name + "'");
        }
      }
      read(m, "layer_sizes", cfg.model.sizes);
      if (m.contains("train")) {
        const auto& t = m.at("train");
        only_keys(t, {"learning_rate", "batch_size", "max_epochs", "optimizer", "beta1", "beta2",
                      "eps"},
                  "model.train");
        auto& tc = cfg.model.train;
        read(t, "learning_rate", tc.learning_rate);
        read(t, "batch_size", tc.batch_size);
        read(t, "max_epochs", tc.max_epochs);
        if (t.contains("optimizer")) {
          const auto o = t.at("optimizer").get<std::string>();
          if (o == "adam") {
            tc.optimizer = Optimizer::Adam;
          } else if (o == "sgd") {
            tc.optimizer = Optimizer::Sgd;
          } else {
            throw ConfigError("unknown optimizer '" + o + "'");
          }
        }
        read(t, "beta1", tc.beta1);
        read(t, "beta2", tc.beta2);
        read(t, "eps", tc.eps);
      }
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      only_keys(s, {"train", "validation", "test"}, "split");
      read(s, "train", cfg.split.train);
      read(s, "validation", cfg.split.validation);
      read(s, "test", cfg.split.test);
    }
    read(j, "scale", cfg.scale);
    read(j, "seed", cfg.seed);
    read(j, "jobs", cfg.jobs);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }

  if (const auto v = validate(cfg.object); !v.empty()) {
    throw ConfigError("object geometry: " + v.front());
  }
  check(cfg.deformation, cfg.object);
  if (!(cfg.scale > 0.0 && cfg.scale <= 1.0)) throw ConfigError("scale must lie in (0, 1]");
  if (!(cfg.model.train.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (cfg.model.train.batch_size < 1) throw ConfigError("batch size must be positive");
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return pipeline_config_from_json(text, std::move(base));
}

}  // namespace instobj
