#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace junction {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  // Counter-clockwise perpendicular.
  constexpr Vec2 left() const { return {-y, x}; }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{};
  }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  static Vec2 from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Maps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

enum class AgentKind { car, truck, bus, pedestrian, bicycle };

inline constexpr AgentKind kAllKinds[] = {AgentKind::car, AgentKind::truck, AgentKind::bus,
                                          AgentKind::pedestrian, AgentKind::bicycle};

std::string_view to_string(AgentKind kind);
// Accepts canonical names plus common dataset aliases ("truck_bus", "ped", "bike").
std::optional<AgentKind> parse_agent_kind(std::string_view text);

inline bool is_motor_vehicle(AgentKind k) {
  return k == AgentKind::car || k == AgentKind::truck || k == AgentKind::bus;
}
inline bool is_vru(AgentKind k) { return k == AgentKind::pedestrian || k == AgentKind::bicycle; }

// Error hierarchy. The CLI maps these onto exit codes 1 (config), 2 (data), 3 (runtime).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class IngestError : public DataError {
 public:
  using DataError::DataError;
};

class NotFoundError : public DataError {
 public:
  using DataError::DataError;
};

class RuntimeAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace junction
