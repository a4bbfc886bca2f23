#include "mctrack/config.hpp"

#include "mctrack/baseversion_io.hpp"
#include "mctrack/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <map>

namespace mctrack::config {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

using FieldSetters = std::map<std::string, std::function<void(const json&, const std::string&)>>;

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": non-finite value");
  return v;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
  return j.get<bool>();
}

void apply_fields(const json& obj, const std::string& path, const FieldSetters& setters) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!key.empty() && key.front() == '_') continue;
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(path + ": unknown key '" + key + "'");
    it->second(value, path + "." + key);
  }
}

FieldSetters lifecycle_fields(tracker::CategoryLifecycle& c) {
  return {
      {"confirm_hits", [&c](const json& j, const std::string& p) { c.confirm_hits = integer(j, p); }},
      {"max_misses", [&c](const json& j, const std::string& p) { c.max_misses = integer(j, p); }},
      {"score_threshold",
       [&c](const json& j, const std::string& p) { c.score_threshold = number(j, p); }},
      {"spawn_threshold",
       [&c](const json& j, const std::string& p) { c.spawn_threshold = number(j, p); }},
      {"nms_iou_threshold",
       [&c](const json& j, const std::string& p) { c.nms_iou_threshold = number(j, p); }},
  };
}

FieldSetters noise_fields(filters::FilterNoise& n) {
  FieldSetters out;
  const auto add = [&out](const char* key, double& dst) {
    out[key] = [&dst](const json& j, const std::string& p) { dst = number(j, p); };
  };
  add("position_process", n.position_process);
  add("position_meas_var", n.position_meas_var);
  add("velocity_meas_var", n.velocity_meas_var);
  add("position_init_var", n.position_init_var);
  add("velocity_init_var", n.velocity_init_var);
  add("velocity_unobserved_init_var", n.velocity_unobserved_init_var);
  add("acceleration_init_var", n.acceleration_init_var);
  add("size_process", n.size_process);
  add("size_meas_var", n.size_meas_var);
  add("size_init_var", n.size_init_var);
  add("size_rate_init_var", n.size_rate_init_var);
  add("heading_process", n.heading_process);
  add("heading_meas_var", n.heading_meas_var);
  add("heading_velocity_meas_var", n.heading_velocity_meas_var);
  add("heading_init_var", n.heading_init_var);
  add("heading_rate_init_var", n.heading_rate_init_var);
  return out;
}

// Reads {"default": ..., "per_category": {...}} into a CategoryTable.
template <class T>
void read_table(const json& obj, const std::string& path, CategoryTable<T>& table,
                const std::function<void(const json&, const std::string&, T&)>& read_one) {
  if (const auto it = obj.find("default"); it != obj.end()) {
    read_one(*it, path + ".default", table.fallback);
  }
  if (const auto it = obj.find("per_category"); it != obj.end()) {
    if (!it->is_object()) throw ConfigError(path + ".per_category: expected an object");
    table.overrides.clear();
    for (const auto& [cat, value] : it->items()) {
      if (!cat.empty() && cat.front() == '_') continue;
      T entry = table.fallback;
      read_one(value, path + ".per_category." + cat, entry);
      table.set(cat, entry);
    }
  }
}

template <class T, class F>
ordered_json write_table(const CategoryTable<T>& table, F write_one) {
  ordered_json out;
  out["default"] = write_one(table.fallback);
  ordered_json per = ordered_json::object();
  for (const auto& [cat, v] : table.overrides) per[cat] = write_one(v);
  out["per_category"] = per;
  return out;
}

ordered_json lifecycle_json(const tracker::CategoryLifecycle& c) {
  ordered_json j;
  j["confirm_hits"] = c.confirm_hits;
  j["max_misses"] = c.max_misses;
  j["score_threshold"] = c.score_threshold;
  j["spawn_threshold"] = c.spawn_threshold;
  j["nms_iou_threshold"] = c.nms_iou_threshold;
  return j;
}

ordered_json noise_json(const filters::FilterNoise& n) {
  ordered_json j;
  j["position_process"] = n.position_process;
  j["position_meas_var"] = n.position_meas_var;
  j["velocity_meas_var"] = n.velocity_meas_var;
  j["position_init_var"] = n.position_init_var;
  j["velocity_init_var"] = n.velocity_init_var;
  j["velocity_unobserved_init_var"] = n.velocity_unobserved_init_var;
  j["acceleration_init_var"] = n.acceleration_init_var;
  j["size_process"] = n.size_process;
  j["size_meas_var"] = n.size_meas_var;
  j["size_init_var"] = n.size_init_var;
  j["size_rate_init_var"] = n.size_rate_init_var;
  j["heading_process"] = n.heading_process;
  j["heading_meas_var"] = n.heading_meas_var;
  j["heading_velocity_meas_var"] = n.heading_velocity_meas_var;
  j["heading_init_var"] = n.heading_init_var;
  j["heading_rate_init_var"] = n.heading_rate_init_var;
  return j;
}

void read_section_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!key.empty() && key.front() == '_') continue;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(path + ": unknown key '" + key + "'");
  }
}

}  // namespace

tracker::TrackerConfig parse_tracker_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  read_section_keys(doc, "config", {"lifecycle", "association", "noise", "runtime"});
  tracker::TrackerConfig cfg;

  if (const auto it = doc.find("lifecycle"); it != doc.end()) {
    read_section_keys(*it, "lifecycle", {"default", "per_category"});
    read_table<tracker::CategoryLifecycle>(
        *it, "lifecycle", cfg.lifecycle.table,
        [](const json& j, const std::string& p, tracker::CategoryLifecycle& c) {
          apply_fields(j, p, lifecycle_fields(c));
        });
  }

  if (const auto it = doc.find("association"); it != doc.end()) {
    auto& a = cfg.association;
    const auto threshold = [](CategoryTable<double>& table) {
      return [&table](const json& j, const std::string& p) {
        read_section_keys(j, p, {"default", "per_category"});
        read_table<double>(j, p, table, [](const json& v, const std::string& vp, double& dst) {
          dst = number(v, vp);
        });
      };
    };
    apply_fields(
        *it, "association",
        {
            {"alpha", [&a](const json& j, const std::string& p) { a.alpha = number(j, p); }},
            {"omega1",
             [&a](const json& j, const std::string& p) { a.weights.omega1 = number(j, p); }},
            {"omega2",
             [&a](const json& j, const std::string& p) { a.weights.omega2 = number(j, p); }},
            {"cost_kind",
             [&a](const json& j, const std::string& p) {
               if (!j.is_string()) throw ConfigError(p + ": expected a string");
               try {
                 a.cost_kind = association::cost_kind_from_string(j.get<std::string>());
               } catch (const std::invalid_argument& e) {
                 throw ConfigError(p + ": " + e.what());
               }
             }},
            {"threshold_bev", threshold(a.threshold_bev)},
            {"threshold_rv", threshold(a.threshold_rv)},
        });
  }

  if (const auto it = doc.find("noise"); it != doc.end()) {
    read_section_keys(*it, "noise", {"v_min", "default", "per_category"});
    if (const auto v = it->find("v_min"); v != it->end()) cfg.noise.v_min = number(*v, "noise.v_min");
    read_table<filters::FilterNoise>(
        *it, "noise", cfg.noise.noise,
        [](const json& j, const std::string& p, filters::FilterNoise& n) {
          apply_fields(j, p, noise_fields(n));
        });
  }

  if (const auto it = doc.find("runtime"); it != doc.end()) {
    apply_fields(*it, "runtime",
                 {
                     {"rv_enabled",
                      [&cfg](const json& j, const std::string& p) { cfg.rv_enabled = boolean(j, p); }},
                     {"emit_coasted",
                      [&cfg](const json& j, const std::string& p) {
                        cfg.emit_coasted = boolean(j, p);
                      }},
                 });
  }

  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

tracker::TrackerConfig load_tracker_config(const std::filesystem::path& path) {
  return parse_tracker_config_text(io::read_file(path));
}

std::string tracker_config_to_json(const tracker::TrackerConfig& cfg) {
  ordered_json doc;
  doc["lifecycle"] = write_table(cfg.lifecycle.table, lifecycle_json);

  ordered_json a;
  a["alpha"] = cfg.association.alpha;
  a["omega1"] = cfg.association.weights.omega1;
  a["omega2"] = cfg.association.weights.omega2;
  a["cost_kind"] = association::to_string(cfg.association.cost_kind);
  const auto scalar = [](double v) { return ordered_json(v); };
  a["threshold_bev"] = write_table(cfg.association.threshold_bev, scalar);
  a["threshold_rv"] = write_table(cfg.association.threshold_rv, scalar);
  doc["association"] = a;

  ordered_json n = write_table(cfg.noise.noise, noise_json);
  ordered_json noise;
  noise["v_min"] = cfg.noise.v_min;
  noise["default"] = n["default"];
  noise["per_category"] = n["per_category"];
  doc["noise"] = noise;

  ordered_json r;
  r["rv_enabled"] = cfg.rv_enabled;
  r["emit_coasted"] = cfg.emit_coasted;
  doc["runtime"] = r;
  return doc.dump(2) + "\n";
}

}  // namespace mctrack::config
