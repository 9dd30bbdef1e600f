#pragma once

#include "gantry/kinematics.hpp"
#include "gantry/singmap.hpp"
#include "gantry/transmission.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace gantry {

/// {"p":[x,y,z],"q":[w,x,y,z]}
nlohmann::json pose_to_json(const Posed& pose);
Posed pose_from_json(const nlohmann::json& j);

struct JointStateMessage {
    JointStated position;
    std::optional<Vector6d> velocity;
};

/// ROS JointState shape: {"name":[...],"position":[...],"velocity":[...]}.
/// Names may come in any order on input; output always uses x,y,z,roll,pitch,yaw.
nlohmann::json joint_state_to_json(const JointStated& q, const std::optional<Vector6d>& velocity = std::nullopt);
JointStateMessage joint_state_from_json(const nlohmann::json& j);

nlohmann::json belt_params_to_json(const BeltParams& bp);
BeltParams belt_params_from_json(const nlohmann::json& j);

/// DH table: {"name", "base": {"xyz","rpy"}, "tool": {...}, "links": [{"a","alpha","d",
/// "theta_offset","type","limits":[lo,hi]}]}. Errors are ChainParse with the field path.
DhChain chain_from_json(const nlohmann::json& j);
/// Parses text; syntax errors report the line and column.
DhChain chain_from_text(const std::string& text, const std::string& source = "<chain>");
DhChain chain_from_file(const std::string& path);
nlohmann::json chain_to_json(const DhChain& chain);

}  // namespace gantry
