#include "gantry/json_io.hpp"

#include "gantry/error.hpp"

#include <fstream>
#include <sstream>

namespace gantry {

using nlohmann::json;

namespace {

[[noreturn]] void chain_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ChainParse, path + ": " + what);
}

double number_at(const json& j, const std::string& key, const std::string& path, std::optional<double> fallback) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        chain_error(path + "." + key, "missing");
    }
    if (!j.at(key).is_number()) chain_error(path + "." + key, "expected a number");
    return j.at(key).get<double>();
}

Eigen::Vector3d vec3_at(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return Eigen::Vector3d::Zero();
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3) chain_error(path + "." + key, "expected an array of 3 numbers");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) {
        if (!a[i].is_number()) chain_error(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
        v[i] = a[i].get<double>();
    }
    return v;
}

Eigen::Isometry3d frame_from_json(const json& j, const std::string& path) {
    Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
    if (!j.is_object()) chain_error(path, "expected an object");
    const Eigen::Vector3d rpy = vec3_at(j, "rpy", path);
    T.translation() = vec3_at(j, "xyz", path);
    T.linear() = rotation_zyx(rpy[0], rpy[1], rpy[2]);
    return T;
}

json frame_to_json(const Eigen::Isometry3d& T) {
    const auto ik = inverse_kinematics(Posed{T.translation(), T.linear()});
    return {{"xyz", {T.translation().x(), T.translation().y(), T.translation().z()}},
            {"rpy", {ik.q.roll(), ik.q.pitch(), ik.q.yaw()}}};
}

}  // namespace

json pose_to_json(const Posed& pose) {
    const auto q = pose.quaternion();
    return {{"p", {pose.position.x(), pose.position.y(), pose.position.z()}}, {"q", {q.w(), q.x(), q.y(), q.z()}}};
}

Posed pose_from_json(const json& j) {
    try {
        const auto p = j.at("p").get<std::vector<double>>();
        const auto q = j.at("q").get<std::vector<double>>();
        if (p.size() != 3 || q.size() != 4) throw Error(ErrorCode::InvalidArgument, "pose needs p[3] and q[4]");
        const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
        if (std::abs(quat.norm() - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "pose quaternion is not unit norm");
        return Posed::from_quaternion(Eigen::Vector3d(p[0], p[1], p[2]), quat);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad pose: ") + e.what());
    }
}

json joint_state_to_json(const JointStated& q, const std::optional<Vector6d>& velocity) {
    json j;
    j["name"] = json::array();
    for (auto n : kAxisNames) j["name"].push_back(std::string(n));
    j["position"] = std::vector<double>(q.vector().data(), q.vector().data() + 6);
    if (velocity) j["velocity"] = std::vector<double>(velocity->data(), velocity->data() + 6);
    return j;
}

JointStateMessage joint_state_from_json(const json& j) {
    try {
        const auto names = j.at("name").get<std::vector<std::string>>();
        const auto pos = j.at("position").get<std::vector<double>>();
        if (names.size() != 6 || pos.size() != 6)
            throw Error(ErrorCode::InvalidArgument, "JointState needs 6 names and 6 positions");
        std::vector<double> vel;
        if (j.contains("velocity")) {
            vel = j.at("velocity").get<std::vector<double>>();
            if (!vel.empty() && vel.size() != 6) throw Error(ErrorCode::InvalidArgument, "velocity needs 6 entries");
        }
        Vector6d p = Vector6d::Zero(), v = Vector6d::Zero();
        std::array<bool, 6> seen{};
        for (std::size_t i = 0; i < 6; ++i) {
            int axis = -1;
            for (int a = 0; a < 6; ++a)
                if (names[i] == kAxisNames[a]) axis = a;
            if (axis < 0 || seen[axis]) throw Error(ErrorCode::InvalidArgument, "bad joint name '" + names[i] + "'");
            seen[axis] = true;
            p[axis] = pos[i];
            if (!vel.empty()) v[axis] = vel[i];
        }
        JointStateMessage msg{JointStated(p), std::nullopt};
        if (!vel.empty()) msg.velocity = v;
        return msg;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad JointState: ") + e.what());
    }
}

json belt_params_to_json(const BeltParams& bp) {
    return {{"pulley_radius", bp.pulley_radius},
            {"x_gain", bp.x_gain},
            {"differential_sign", bp.differential_sign},
            {"wrist_gear_ratio", bp.wrist_gear_ratio}};
}

BeltParams belt_params_from_json(const json& j) {
    BeltParams bp;
    try {
        bp.pulley_radius = j.value("pulley_radius", bp.pulley_radius);
        bp.x_gain = j.value("x_gain", bp.x_gain);
        bp.differential_sign = j.value("differential_sign", bp.differential_sign);
        bp.wrist_gear_ratio = j.value("wrist_gear_ratio", bp.wrist_gear_ratio);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad transmission block: ") + e.what());
    }
    bp.validate();
    return bp;
}

DhChain chain_from_json(const json& j) {
    if (!j.is_object()) chain_error("$", "expected an object");
    DhChain chain;
    if (j.contains("name")) {
        if (!j.at("name").is_string()) chain_error("$.name", "expected a string");
        chain.name = j.at("name").get<std::string>();
    }
    if (j.contains("base")) chain.base = frame_from_json(j.at("base"), "$.base");
    if (j.contains("tool")) chain.tool = frame_from_json(j.at("tool"), "$.tool");
    if (!j.contains("links") || !j.at("links").is_array() || j.at("links").empty())
        chain_error("$.links", "expected a non-empty array");
    const auto& links = j.at("links");
    for (std::size_t i = 0; i < links.size(); ++i) {
        const std::string path = "$.links[" + std::to_string(i) + "]";
        const auto& l = links[i];
        if (!l.is_object()) chain_error(path, "expected an object");
        DhLink link;
        link.a = number_at(l, "a", path, 0.0);
        link.alpha = number_at(l, "alpha", path, 0.0);
        link.d = number_at(l, "d", path, 0.0);
        link.theta_offset = number_at(l, "theta_offset", path, 0.0);
        const std::string type = l.value("type", std::string("revolute"));
        if (type == "revolute") link.kind = JointKind::Revolute;
        else if (type == "prismatic") link.kind = JointKind::Prismatic;
        else chain_error(path + ".type", "expected \"revolute\" or \"prismatic\", got \"" + type + "\"");
        if (l.contains("limits")) {
            const auto& lim = l.at("limits");
            if (!lim.is_array() || lim.size() != 2 || !lim[0].is_number() || !lim[1].is_number())
                chain_error(path + ".limits", "expected [lower, upper]");
            link.lower = lim[0].get<double>();
            link.upper = lim[1].get<double>();
            if (!(link.lower <= link.upper)) chain_error(path + ".limits", "lower exceeds upper");
        }
        chain.links.push_back(link);
    }
    return chain;
}

DhChain chain_from_text(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line/column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::ChainParse,
                    source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
    }
    try {
        return chain_from_json(j);
    } catch (const Error& e) {
        throw Error(ErrorCode::ChainParse, source + ": " + e.what());
    }
}

DhChain chain_from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ChainParse, path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return chain_from_text(ss.str(), path);
}

json chain_to_json(const DhChain& chain) {
    json j;
    j["name"] = chain.name;
    j["base"] = frame_to_json(chain.base);
    j["tool"] = frame_to_json(chain.tool);
    j["links"] = json::array();
    for (const auto& l : chain.links) {
        j["links"].push_back({{"a", l.a},
                              {"alpha", l.alpha},
                              {"d", l.d},
                              {"theta_offset", l.theta_offset},
                              {"type", l.kind == JointKind::Revolute ? "revolute" : "prismatic"},
                              {"limits", {l.lower, l.upper}}});
    }
    return j;
}

}  // namespace gantry
