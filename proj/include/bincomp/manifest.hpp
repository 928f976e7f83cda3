#pragma once

#include "bincomp/common.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace bincomp {

/// Record of one CLI invocation: command, file paths, the fully resolved
/// configuration, tool versions and wall-clock timings. Serializes to JSON
/// and round-trips losslessly.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> versions;
  std::map<std::string, double> timings_seconds;

  bool operator==(const RunManifest&) const = default;
};

inline nlohmann::json to_json(const RunManifest& m) {
  return nlohmann::json{{"command", m.command},     {"inputs", m.inputs},
                        {"outputs", m.outputs},     {"config", m.config},
                        {"versions", m.versions},   {"timings_seconds", m.timings_seconds}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.inputs = j.at("inputs").get<std::vector<std::string>>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.config = j.at("config").get<std::map<std::string, std::string>>();
  m.versions = j.at("versions").get<std::map<std::string, std::string>>();
  m.timings_seconds = j.at("timings_seconds").get<std::map<std::string, double>>();
  return m;
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << to_json(m).dump(2) << '\n';
}

inline RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return manifest_from_json(j);
}

}  // namespace bincomp
