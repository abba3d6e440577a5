#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace junction {

// Library version stamped into every artifact.
std::string version();

enum class ValueType { string, path, number, integer, boolean };
std::string_view to_string(ValueType t);

struct ConfigKey {
  std::string name;  // a trailing ".*" matches any single suffix, e.g. "param.*"
  ValueType type = ValueType::string;
  std::optional<std::string> default_value;
  std::string help;
};

// Every key a run configuration may contain.
const std::vector<ConfigKey>& config_keys();

// Flat "section.key = value" configuration. '#' starts a comment; later assignments win.
// Values are type-checked when set, so errors name the key and the expected type.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& origin = "config");
  static RunConfig load(const std::filesystem::path& file);

  // Relative paths set from the file resolve against this directory; defaults and
  // command-line overrides resolve against the working directory.
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }
  // "key=value" form as given on the command line.
  void set_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;  // explicitly set
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::filesystem::path get_path(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // Explicitly set keys matching "prefix.*", suffix -> value.
  std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

  // Effective configuration (explicit values plus defaults), sorted, one "key = value" per line.
  std::string canonical() const;
  // Content hash of canonical() and the version, leaving out the keys that only choose
  // where artifacts go (paths.output, run.id).
  std::string hash() const;

 private:
  const ConfigKey& key_or_throw(const std::string& key) const;
  std::optional<std::string> effective(const std::string& key) const;

  std::string canonical(bool with_location) const;

  std::map<std::string, std::string> values_;
  std::set<std::string> from_command_line_;
  std::filesystem::path base_dir_;
};

}  // namespace junction
