#include <cmath>
#include <utility>

#include <json.hpp>

#include "junction/params.hpp"

namespace junction {

namespace {

using PedField = double PedestrianParams::*;
using VehField = double VehicleParams::*;

const std::vector<std::pair<const char*, PedField>>& ped_fields() {
  static const std::vector<std::pair<const char*, PedField>> f{
      {"v0", &PedestrianParams::v0},         {"tau", &PedestrianParams::tau},
      {"A", &PedestrianParams::A},           {"B", &PedestrianParams::B},
      {"radius", &PedestrianParams::radius}, {"A_wall", &PedestrianParams::A_wall},
      {"B_wall", &PedestrianParams::B_wall}};
  return f;
}

const std::vector<std::pair<const char*, VehField>>& veh_fields() {
  static const std::vector<std::pair<const char*, VehField>> f{
      {"v0", &VehicleParams::v0},
      {"tau", &VehicleParams::tau},
      {"A_v", &VehicleParams::A_v},
      {"B_v", &VehicleParams::B_v},
      {"A_b", &VehicleParams::A_b},
      {"B_b", &VehicleParams::B_b},
      {"a_max", &VehicleParams::a_max},
      {"b_max", &VehicleParams::b_max},
      {"b_comf", &VehicleParams::b_comf},
      {"a_lat", &VehicleParams::a_lat},
      {"k_lat", &VehicleParams::k_lat},
      {"c_lat", &VehicleParams::c_lat},
      {"T_gap", &VehicleParams::T_gap},
      {"L", &VehicleParams::L},
      {"delta_max", &VehicleParams::delta_max},
      {"shy_away", &VehicleParams::shy_away},
      {"min_gap", &VehicleParams::min_gap},
      {"headway", &VehicleParams::headway},
      {"lateral_sigma", &VehicleParams::lateral_sigma},
      {"length", &VehicleParams::length},
      {"width", &VehicleParams::width}};
  return f;
}

constexpr const char* kVehicleKinds[] = {"car", "truck", "bus", "bicycle"};

void require_positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name + ": expected a positive number");
}

}  // namespace

void PedestrianParams::validate(const std::string& prefix) const {
  for (const auto& [name, field] : ped_fields()) require_positive(this->*field, prefix + "." + name);
}

void VehicleParams::validate(const std::string& prefix) const {
  for (const auto& [name, field] : veh_fields()) {
    if (field == &VehicleParams::lateral_sigma) {
      if (!(lateral_sigma >= 0.0)) throw ConfigError(prefix + ".lateral_sigma: expected a non-negative number");
      continue;
    }
    require_positive(this->*field, prefix + "." + name);
  }
}

ModelParams ModelParams::defaults() {
  ModelParams p;
  p.truck.v0 = 12.0;
  p.truck.a_max = 1.2;
  p.truck.length = 10.0;
  p.truck.width = 2.5;
  p.truck.L = 5.5;
  p.truck.a_lat = 2.0;
  p.bus = p.truck;
  p.bus.length = 12.0;
  p.bus.L = 6.0;
  p.bicycle.v0 = 5.0;
  p.bicycle.tau = 0.8;
  p.bicycle.a_max = 1.2;
  p.bicycle.b_max = 3.0;
  p.bicycle.b_comf = 1.5;
  p.bicycle.a_lat = 1.5;
  p.bicycle.L = 1.1;
  p.bicycle.delta_max = 0.8;
  p.bicycle.length = 1.8;
  p.bicycle.width = 0.6;
  p.bicycle.min_gap = 1.0;
  p.bicycle.headway = 0.8;
  p.bicycle.shy_away = 0.8;
  p.bicycle.lateral_sigma = 0.15;
  return p;
}

void ModelParams::validate() const {
  pedestrian.validate("pedestrian");
  car.validate("car");
  truck.validate("truck");
  bus.validate("bus");
  bicycle.validate("bicycle");
}

const VehicleParams& ModelParams::vehicle(AgentKind kind) const {
  switch (kind) {
    case AgentKind::truck: return truck;
    case AgentKind::bus: return bus;
    case AgentKind::bicycle: return bicycle;
    default: return car;
  }
}

VehicleParams& ModelParams::vehicle(AgentKind kind) {
  return const_cast<VehicleParams&>(std::as_const(*this).vehicle(kind));
}

double ModelParams::get(const std::string& name) const {
  return const_cast<ModelParams*>(this)->set_or_get(name, nullptr);
}

void ModelParams::set(const std::string& name, double value) { set_or_get(name, &value); }

double ModelParams::set_or_get(const std::string& name, const double* value) {
  const auto dot = name.find('.');
  if (dot == std::string::npos) throw ConfigError("unknown model parameter '" + name + "'");
  const std::string group = name.substr(0, dot);
  const std::string field = name.substr(dot + 1);
  if (group == "pedestrian") {
    for (const auto& [n, f] : ped_fields()) {
      if (field == n) {
        if (value) pedestrian.*f = *value;
        return pedestrian.*f;
      }
    }
  } else {
    const auto kind = parse_agent_kind(group);
    if (kind && *kind != AgentKind::pedestrian && group != "pedestrian") {
      VehicleParams& vp = vehicle(*kind);
      for (const auto& [n, f] : veh_fields()) {
        if (field == n) {
          if (value) vp.*f = *value;
          return vp.*f;
        }
      }
    }
  }
  throw ConfigError("unknown model parameter '" + name + "'");
}

std::vector<std::string> ModelParams::names() {
  std::vector<std::string> out;
  for (const auto& [n, f] : ped_fields()) out.push_back(std::string("pedestrian.") + n);
  for (const char* k : kVehicleKinds) {
    for (const auto& [n, f] : veh_fields()) out.push_back(std::string(k) + "." + n);
  }
  return out;
}

std::string ModelParams::to_json() const {
  nlohmann::ordered_json doc;
  for (const auto& [n, f] : ped_fields()) doc["pedestrian"][n] = pedestrian.*f;
  for (const char* k : kVehicleKinds) {
    const VehicleParams& vp = vehicle(*parse_agent_kind(k));
    for (const auto& [n, f] : veh_fields()) doc[k][n] = vp.*f;
  }
  return doc.dump(2) + "\n";
}

ModelParams ModelParams::from_json(const std::string& text) {
  ModelParams p = defaults();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model parameters: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("model parameters: expected an object");
  for (const auto& [group, fields] : doc.items()) {
    if (!fields.is_object()) throw ConfigError("model parameters: '" + group + "' must be an object");
    for (const auto& [field, v] : fields.items()) {
      if (!v.is_number()) throw ConfigError(group + "." + field + ": expected a number");
      p.set(group + "." + field, v.get<double>());
    }
  }
  p.validate();
  return p;
}

}  // namespace junction
