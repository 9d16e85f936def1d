#pragma once

#include "feasreg/common.hpp"
#include "feasreg/constraints.hpp"
#include "feasreg/model.hpp"
#include "feasreg/terrain.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace feasreg {

struct RegionDefaults {
  double eps = 1e-6;          // m^2, area-gap tolerance of the projection loop
  double bounding_box = 10.0; // m, half-width of the outer seed box
  double scale = 0.8;         // region scaling factor used by the planners
  int max_iterations = 200;
};

struct ContactSpec {
  std::string leg;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  bool normal_from_heightmap = false;
  double mu = 0.8;
  ContactMode mode = ContactMode::unilateral;
};

/// Full input of a region computation: robot, stance, mass and defaults.
/// The base origin coincides with the nominal CoM (orientation identity).
struct Scenario {
  RobotModel robot;
  double mass = 0.0;  // kg; defaults to robot.total_mass when unset
  Vec3 com = Vec3::Zero();
  std::vector<ContactSpec> contact_specs;
  std::optional<std::string> terrain_file;
  std::optional<HeightMap> terrain;
  RegionDefaults region;

  // Resolved stance (finalize() fills these).
  std::vector<Contact> contacts;
  std::vector<int> leg_indices;

  /// Joint states of the stance legs from IK at the nominal CoM.
  std::vector<LimbState> limb_states() const {
    std::vector<Vec3> targets;
    for (const Contact& c : contacts) targets.push_back(c.position);
    return solve_stance_ik(robot, com, leg_indices, targets);
  }

  Vec2 stance_centroid() const {
    Vec2 c = Vec2::Zero();
    for (const Contact& ct : contacts) c += ct.position.head<2>();
    return c / static_cast<double>(contacts.size());
  }

  /// Resolves contact specs against the robot (and terrain when referenced).
  void finalize() {
    if (mass <= 0.0) mass = robot.total_mass;
    if (mass <= 0.0) throw ParseError("scenario: mass must be positive");
    if (contact_specs.empty()) throw ParseError("scenario: contacts block is empty");
    contacts.clear();
    leg_indices.clear();
    for (const ContactSpec& spec : contact_specs) {
      leg_indices.push_back(robot.leg_index(spec.leg));
      Vec3 pos = spec.position;
      Vec3 normal = spec.normal;
      if (spec.normal_from_heightmap) {
        if (!terrain)
          throw ParseError("scenario: contact '" + spec.leg +
                           "' wants from_heightmap but no terrain is loaded");
        const TerrainSample s = sample(*terrain, pos.x(), pos.y());
        pos.z() = s.z;
        normal = s.normal;
      }
      contacts.push_back(make_contact(pos, normal, spec.mu, spec.mode));
    }
  }
};

/// The declared fixture scenario: default robot standing on flat ground,
/// feet under the hip pivots.
inline Scenario default_scenario(double mu = 0.8, double base_height = 0.55) {
  Scenario sc;
  sc.robot = default_robot();
  sc.mass = sc.robot.total_mass;
  sc.com = Vec3(0.0, 0.0, base_height);
  for (const LegModel& leg : sc.robot.legs) {
    ContactSpec cs;
    cs.leg = leg.name;
    cs.position = Vec3(leg.hip_offset.x(), leg.hip_offset.y() + leg.side_sign * leg.l1, 0.0);
    cs.mu = mu;
    sc.contact_specs.push_back(cs);
  }
  sc.finalize();
  return sc;
}

namespace detail {

struct ScenarioLine {
  int number = 0;
  std::vector<std::string> tokens;
};

struct ScenarioBlock {
  std::string name;
  std::string arg;
  int line = 0;
  std::vector<ScenarioLine> entries;
  std::vector<ScenarioBlock> children;
};

inline ScenarioBlock parse_block_tree(std::istream& in, const std::string& path,
                                      int consumed_lines = 1) {
  ScenarioBlock root;
  std::vector<ScenarioBlock*> stack = {&root};
  std::string raw;
  int lineno = consumed_lines;  // the version header was read by the caller
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.back() == "{") {
      if (tokens.size() < 2 || tokens.size() > 3)
        throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'name [arg] {'");
      ScenarioBlock child;
      child.name = tokens[0];
      child.arg = tokens.size() == 3 ? tokens[1] : "";
      child.line = lineno;
      stack.back()->children.push_back(child);
      stack.push_back(&stack.back()->children.back());
    } else if (tokens.size() == 1 && tokens[0] == "}") {
      if (stack.size() == 1)
        throw ParseError(path + ":" + std::to_string(lineno) + ": unmatched '}'");
      stack.pop_back();
    } else {
      stack.back()->entries.push_back({lineno, tokens});
    }
  }
  if (stack.size() != 1) throw ParseError(path + ": unclosed block '" + stack.back()->name + "'");
  return root;
}

inline double parse_number(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": expected a number, got '" + tok + "'");
  }
}

inline Vec3 parse_vec3(const ScenarioLine& e, const std::string& where) {
  if (e.tokens.size() != 4) throw ParseError(where + ": expected 3 numbers");
  return Vec3(parse_number(e.tokens[1], where), parse_number(e.tokens[2], where),
              parse_number(e.tokens[3], where));
}

inline LegModel parse_leg(const ScenarioBlock& b, const std::string& path) {
  LegModel leg;
  leg.name = b.arg;
  if (leg.name.empty())
    throw ParseError(path + ":" + std::to_string(b.line) + ": leg block needs a name");
  std::optional<Vec3> tau_lower;
  for (const ScenarioLine& e : b.entries) {
    const std::string where =
        path + ":" + std::to_string(e.number) + ": robot.leg[" + leg.name + "]." + e.tokens[0];
    const std::string& key = e.tokens[0];
    if (key == "hip_offset") {
      leg.hip_offset = parse_vec3(e, where);
    } else if (key == "link_lengths") {
      const Vec3 l = parse_vec3(e, where);
      leg.l1 = l[0];
      leg.l2 = l[1];
      leg.l3 = l[2];
      if (leg.l2 <= 0.0 || leg.l3 <= 0.0 || leg.l1 < 0.0)
        throw ParseError(where + ": link lengths must be positive");
    } else if (key == "link_masses") {
      leg.link_masses = parse_vec3(e, where);
    } else if (key == "link_com_1") {
      leg.link_com[0] = parse_vec3(e, where);
    } else if (key == "link_com_2") {
      leg.link_com[1] = parse_vec3(e, where);
    } else if (key == "link_com_3") {
      leg.link_com[2] = parse_vec3(e, where);
    } else if (key == "torque_limits") {
      leg.torque_limit = parse_vec3(e, where);
      if (leg.torque_limit.minCoeff() <= 0.0)
        throw ParseError(where + ": torque limits must be positive");
    } else if (key == "torque_limits_lower") {
      tau_lower = parse_vec3(e, where);
    } else if (key == "joint_lower") {
      leg.joint_lower = parse_vec3(e, where);
    } else if (key == "joint_upper") {
      leg.joint_upper = parse_vec3(e, where);
    } else if (key == "side_sign") {
      leg.side_sign = parse_number(e.tokens.at(1), where);
    } else if (key == "knee_sign") {
      leg.knee_sign = parse_number(e.tokens.at(1), where);
    } else {
      throw ParseError(where + ": unknown key");
    }
  }
  if (tau_lower && (*tau_lower + leg.torque_limit).norm() > 1e-12)
    throw ParseError(path + ":" + std::to_string(b.line) + ": robot.leg[" + leg.name +
                     "]: asymmetric torque limits are not supported (lower must equal -upper)");
  // Default CoM offsets when not given: mid-link.
  if (leg.link_com[0].norm() == 0.0)
    leg.link_com[0] = Vec3(0.0, leg.side_sign * leg.l1 / 2.0, 0.0);
  if (leg.link_com[1].norm() == 0.0) leg.link_com[1] = Vec3(0.0, 0.0, -leg.l2 / 2.0);
  if (leg.link_com[2].norm() == 0.0) leg.link_com[2] = Vec3(0.0, 0.0, -leg.l3 / 2.0);
  return leg;
}

}  // namespace detail

/// Parses the "scenario v1" block format. All units SI. Errors carry
/// file:line plus the offending schema path.
inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_scenario: cannot open " + path);
  std::string first;
  std::getline(in, first);
  {
    std::istringstream ss(first);
    std::string magic, version;
    ss >> magic >> version;
    if (magic != "scenario" || version != "v1")
      throw ParseError(path + ":1: expected 'scenario v1'");
  }
  const detail::ScenarioBlock root = detail::parse_block_tree(in, path);

  Scenario sc;
  bool robot_seen = false;
  std::optional<Vec3> tau_override;
  double tau_scale = 1.0;
  for (const detail::ScenarioLine& e : root.entries) {
    const std::string where = path + ":" + std::to_string(e.number) + ": " + e.tokens[0];
    const std::string& key = e.tokens[0];
    if (key == "robot" && e.tokens.size() == 2 && e.tokens[1] == "default") {
      sc.robot = default_robot();
      robot_seen = true;
    } else if (key == "com") {
      sc.com = detail::parse_vec3(e, where);
    } else if (key == "mass") {
      sc.mass = detail::parse_number(e.tokens.at(1), where);
    } else if (key == "gravity") {
      sc.robot.gravity = detail::parse_number(e.tokens.at(1), where);
    } else if (key == "terrain") {
      sc.terrain_file = e.tokens.at(1);
    } else if (key == "torque_limits") {
      tau_override = detail::parse_vec3(e, where);
    } else if (key == "torque_limit_scale") {
      tau_scale = detail::parse_number(e.tokens.at(1), where);
      if (tau_scale <= 0.0) throw ParseError(where + ": scale must be positive");
    } else {
      throw ParseError(where + ": unknown key");
    }
  }
  for (const detail::ScenarioBlock& b : root.children) {
    if (b.name == "robot") {
      robot_seen = true;
      for (const detail::ScenarioLine& e : b.entries) {
        const std::string where = path + ":" + std::to_string(e.number) + ": robot." + e.tokens[0];
        if (e.tokens[0] == "total_mass")
          sc.robot.total_mass = detail::parse_number(e.tokens.at(1), where);
        else if (e.tokens[0] == "gravity")
          sc.robot.gravity = detail::parse_number(e.tokens.at(1), where);
        else
          throw ParseError(where + ": unknown key");
      }
      for (const detail::ScenarioBlock& lb : b.children) {
        if (lb.name != "leg")
          throw ParseError(path + ":" + std::to_string(lb.line) + ": robot." + lb.name +
                           ": unknown block");
        sc.robot.legs.push_back(detail::parse_leg(lb, path));
      }
    } else if (b.name == "contacts") {
      for (const detail::ScenarioBlock& cb : b.children) {
        if (cb.name != "contact")
          throw ParseError(path + ":" + std::to_string(cb.line) + ": contacts." + cb.name +
                           ": unknown block");
        ContactSpec spec;
        spec.leg = cb.arg;
        for (const detail::ScenarioLine& e : cb.entries) {
          const std::string where = path + ":" + std::to_string(e.number) + ": contacts.contact[" +
                                    spec.leg + "]." + e.tokens[0];
          const std::string& key = e.tokens[0];
          if (key == "position") {
            spec.position = detail::parse_vec3(e, where);
          } else if (key == "normal") {
            if (e.tokens.size() == 2 && e.tokens[1] == "from_heightmap")
              spec.normal_from_heightmap = true;
            else
              spec.normal = detail::parse_vec3(e, where);
          } else if (key == "mu") {
            spec.mu = detail::parse_number(e.tokens.at(1), where);
          } else if (key == "mode") {
            const std::string& m = e.tokens.at(1);
            if (m == "unilateral")
              spec.mode = ContactMode::unilateral;
            else if (m == "bilateral")
              spec.mode = ContactMode::bilateral;
            else
              throw ParseError(where + ": expected unilateral|bilateral");
          } else {
            throw ParseError(where + ": unknown key");
          }
        }
        sc.contact_specs.push_back(spec);
      }
    } else if (b.name == "region") {
      for (const detail::ScenarioLine& e : b.entries) {
        const std::string where = path + ":" + std::to_string(e.number) + ": region." + e.tokens[0];
        const std::string& key = e.tokens[0];
        if (key == "eps")
          sc.region.eps = detail::parse_number(e.tokens.at(1), where);
        else if (key == "bounding_box")
          sc.region.bounding_box = detail::parse_number(e.tokens.at(1), where);
        else if (key == "scale")
          sc.region.scale = detail::parse_number(e.tokens.at(1), where);
        else if (key == "max_iterations")
          sc.region.max_iterations = static_cast<int>(detail::parse_number(e.tokens.at(1), where));
        else
          throw ParseError(where + ": unknown key");
      }
      if (sc.region.eps <= 0.0 || sc.region.bounding_box <= 0.0)
        throw ParseError(path + ": region: eps and bounding_box must be positive");
      if (sc.region.scale <= 0.0 || sc.region.scale > 1.0)
        throw ParseError(path + ": region.scale must be in (0, 1]");
    } else {
      throw ParseError(path + ":" + std::to_string(b.line) + ": unknown block '" + b.name + "'");
    }
  }
  if (!robot_seen) throw ParseError(path + ": missing robot block (or 'robot default')");
  if (tau_override)
    for (LegModel& leg : sc.robot.legs) leg.torque_limit = *tau_override;
  if (tau_scale != 1.0)
    for (LegModel& leg : sc.robot.legs) leg.torque_limit *= tau_scale;

  if (sc.terrain_file) {
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    sc.terrain = load_heightmap((base / *sc.terrain_file).string());
  }
  sc.finalize();
  return sc;
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_scenario: cannot open " + path);
  auto v3 = [](const Vec3& v) {
    return detail::format_double(v[0]) + " " + detail::format_double(v[1]) + " " +
           detail::format_double(v[2]);
  };
  out << "scenario v1\n";
  out << "robot {\n";
  out << "  total_mass " << detail::format_double(sc.robot.total_mass) << "\n";
  out << "  gravity " << detail::format_double(sc.robot.gravity) << "\n";
  for (const LegModel& leg : sc.robot.legs) {
    out << "  leg " << leg.name << " {\n";
    out << "    hip_offset " << v3(leg.hip_offset) << "\n";
    out << "    link_lengths " << detail::format_double(leg.l1) << " "
        << detail::format_double(leg.l2) << " " << detail::format_double(leg.l3) << "\n";
    out << "    link_masses " << v3(leg.link_masses) << "\n";
    out << "    link_com_1 " << v3(leg.link_com[0]) << "\n";
    out << "    link_com_2 " << v3(leg.link_com[1]) << "\n";
    out << "    link_com_3 " << v3(leg.link_com[2]) << "\n";
    out << "    torque_limits " << v3(leg.torque_limit) << "\n";
    out << "    joint_lower " << v3(leg.joint_lower) << "\n";
    out << "    joint_upper " << v3(leg.joint_upper) << "\n";
    out << "    side_sign " << detail::format_double(leg.side_sign) << "\n";
    out << "    knee_sign " << detail::format_double(leg.knee_sign) << "\n";
    out << "  }\n";
  }
  out << "}\n";
  out << "mass " << detail::format_double(sc.mass) << "\n";
  out << "com " << v3(sc.com) << "\n";
  if (sc.terrain_file) out << "terrain " << *sc.terrain_file << "\n";
  out << "contacts {\n";
  for (const ContactSpec& spec : sc.contact_specs) {
    out << "  contact " << spec.leg << " {\n";
    out << "    position " << v3(spec.position) << "\n";
    if (spec.normal_from_heightmap)
      out << "    normal from_heightmap\n";
    else
      out << "    normal " << v3(spec.normal) << "\n";
    out << "    mu " << detail::format_double(spec.mu) << "\n";
    out << "    mode " << (spec.mode == ContactMode::unilateral ? "unilateral" : "bilateral")
        << "\n";
    out << "  }\n";
  }
  out << "}\n";
  out << "region {\n";
  out << "  eps " << detail::format_double(sc.region.eps) << "\n";
  out << "  bounding_box " << detail::format_double(sc.region.bounding_box) << "\n";
  out << "  scale " << detail::format_double(sc.region.scale) << "\n";
  out << "  max_iterations " << sc.region.max_iterations << "\n";
  out << "}\n";
}

}  // namespace feasreg
