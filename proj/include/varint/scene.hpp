// varint: linear-time variational integration for kinematic trees
// SPDX-License-Identifier: MIT
//
// Scene document ingestion. The format is JSON; the exact grammar is
// documented in the README. Unknown keys are rejected so typos fail loudly.

#ifndef VARINT_SCENE_HPP
#define VARINT_SCENE_HPP

#include <set>
#include <string>

#include <json.hpp>

#include "varint/model.hpp"

namespace varint {

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::set<std::string> allowed,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw ParseError("scene: unknown key '" + key + "' in " + where);
}

inline Vec3 parse_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
    throw ParseError("scene: " + where + " must be 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json dump_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace detail

/// Parse a scene document into a validated tree.
inline KinematicTree load_scene(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scene: malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scene: top level must be an object");
  detail::reject_unknown_keys(doc, {"gravity", "bodies"}, "top level");
  if (!doc.contains("bodies") || !doc["bodies"].is_array())
    throw ParseError("scene: missing 'bodies' list");

  Vec3 gravity(0.0, -9.81, 0.0);
  if (doc.contains("gravity")) gravity = detail::parse_vec3(doc["gravity"], "gravity");

  std::vector<Body> bodies;
  int index = 0;
  for (const auto& jb : doc["bodies"]) {
    ++index;
    const std::string tag = "body " + std::to_string(index);
    if (!jb.is_object()) throw ParseError("scene: " + tag + " must be an object");
    detail::reject_unknown_keys(jb, {"mass", "inertia", "joint", "parent"}, tag);
    for (const char* key : {"mass", "inertia", "joint", "parent"})
      if (!jb.contains(key)) throw ParseError("scene: " + tag + " missing '" + key + "'");

    Body b;
    if (!jb["mass"].is_number()) throw ParseError("scene: " + tag + " mass must be a number");
    b.inertia.mass = jb["mass"].get<double>();

    const auto& ji = jb["inertia"];
    if (!ji.is_array() || ji.size() != 6)
      throw ParseError("scene: " + tag + " inertia must be 6 numbers (Ixx Iyy Izz Ixy Ixz Iyz)");
    Mat3 I;
    // clang-format off
    I << ji[0].get<double>(), ji[3].get<double>(), ji[4].get<double>(),
         ji[3].get<double>(), ji[1].get<double>(), ji[5].get<double>(),
         ji[4].get<double>(), ji[5].get<double>(), ji[2].get<double>();
    // clang-format on
    b.inertia.rotational_inertia = I;

    const auto& jj = jb["joint"];
    if (!jj.is_object()) throw ParseError("scene: " + tag + " joint must be an object");
    detail::reject_unknown_keys(jj, {"type", "axis", "offset", "com"}, tag + " joint");
    for (const char* key : {"type", "axis", "offset"})
      if (!jj.contains(key)) throw ParseError("scene: " + tag + " joint missing '" + key + "'");
    const std::string type = jj["type"].get<std::string>();
    if (type == "revolute")
      b.joint.kind = JointKind::Revolute;
    else if (type == "prismatic")
      b.joint.kind = JointKind::Prismatic;
    else
      throw ParseError("scene: " + tag + " joint type must be 'revolute' or 'prismatic'");
    b.joint.axis = detail::parse_vec3(jj["axis"], tag + " joint axis");

    const auto& jo = jj["offset"];
    if (!jo.is_object()) throw ParseError("scene: " + tag + " joint offset must be an object");
    detail::reject_unknown_keys(jo, {"translation", "rotation"}, tag + " joint offset");
    const Vec3 tr = jo.contains("translation")
                        ? detail::parse_vec3(jo["translation"], tag + " offset translation")
                        : Vec3::Zero();
    const Vec3 rot = jo.contains("rotation")
                         ? detail::parse_vec3(jo["rotation"], tag + " offset rotation")
                         : Vec3::Zero();
    b.joint.parent_to_joint = Transform(retract(Twist(rot, Vec3::Zero())).rotation, tr);
    if (jj.contains("com")) b.joint.com = detail::parse_vec3(jj["com"], tag + " joint com");

    if (!jb["parent"].is_number_integer())
      throw ParseError("scene: " + tag + " parent must be an integer");
    b.parent = jb["parent"].get<int>();
    bodies.push_back(std::move(b));
  }
  return KinematicTree(std::move(bodies), gravity);
}

/// Serialize a tree back to the scene format; load_scene(save_scene(t))
/// reproduces t field-for-field.
inline std::string save_scene(const KinematicTree& tree) {
  using nlohmann::json;
  json doc;
  doc["gravity"] = detail::dump_vec3(tree.gravity());
  doc["bodies"] = json::array();
  for (int i = 0; i < tree.size(); ++i) {
    const Body& b = tree.body(i);
    const Mat3& I = b.inertia.rotational_inertia;
    json jb;
    jb["mass"] = b.inertia.mass;
    jb["inertia"] = json::array({I(0, 0), I(1, 1), I(2, 2), I(0, 1), I(0, 2), I(1, 2)});
    json jj;
    jj["type"] = b.joint.kind == JointKind::Revolute ? "revolute" : "prismatic";
    jj["axis"] = detail::dump_vec3(b.joint.axis);
    const Transform& M = b.joint.parent_to_joint;
    Vec3 rot = Vec3::Zero();
    if ((M.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 0)
      rot = retract_inverse(Transform(M.rotation, Vec3::Zero())).angular;
    jj["offset"] = {{"translation", detail::dump_vec3(M.translation)},
                    {"rotation", detail::dump_vec3(rot)}};
    if (b.joint.com != Vec3::Zero()) jj["com"] = detail::dump_vec3(b.joint.com);
    jb["joint"] = std::move(jj);
    jb["parent"] = b.parent;
    doc["bodies"].push_back(std::move(jb));
  }
  return doc.dump(2);
}

}  // namespace varint

#endif
