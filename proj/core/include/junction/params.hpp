#pragma once

#include <string>
#include <vector>

#include "junction/types.hpp"

namespace junction {

struct PedestrianParams {
  double v0 = 1.34;   // desired speed [m/s]
  double tau = 0.5;   // relaxation time [s]
  double A = 2.1;     // agent repulsion strength [m/s^2]
  double B = 0.3;     // agent repulsion range [m]
  double radius = 0.3;
  double A_wall = 10.0;
  double B_wall = 0.2;

  void validate(const std::string& prefix = "pedestrian") const;
};

struct VehicleParams {
  double v0 = 13.9;
  double tau = 1.2;
  double A_v = 3.0;   // repulsion from leading agents [m/s^2]
  double B_v = 4.0;   // [m]
  double A_b = 3.0;   // repulsion from VRU footprints
  double B_b = 1.0;
  double a_max = 2.0;
  double b_max = 6.0;
  double b_comf = 2.0;  // deceleration used for anticipatory speed profiles
  double a_lat = 2.5;
  double k_lat = 0.8;   // lateral stiffness [1/s^2]
  double c_lat = 1.8;   // lateral damping [1/s]
  double T_gap = 2.0;   // accepted time gap at priority conflicts [s]
  double L = 2.8;       // wheelbase [m]
  double delta_max = 0.6;
  double shy_away = 1.5;  // lateral distance kept from VRUs [m]
  double min_gap = 2.0;
  double headway = 1.2;   // [s]
  double lateral_sigma = 0.2;  // std. dev. of the preferred in-lane offset [m]
  double length = 4.5;
  double width = 1.8;

  void validate(const std::string& prefix = "car") const;
};

// Named per-kind parameter sets. Names are "<kind>.<field>", e.g. "car.v0", "pedestrian.tau".
struct ModelParams {
  PedestrianParams pedestrian;
  VehicleParams car;
  VehicleParams truck;
  VehicleParams bus;
  VehicleParams bicycle;

  static ModelParams defaults();
  void validate() const;

  const VehicleParams& vehicle(AgentKind kind) const;
  VehicleParams& vehicle(AgentKind kind);

  double get(const std::string& name) const;
  // Throws ConfigError for unknown names.
  void set(const std::string& name, double value);
  static std::vector<std::string> names();

  std::string to_json() const;
  static ModelParams from_json(const std::string& text);

 private:
  double set_or_get(const std::string& name, const double* value);
};

}  // namespace junction
