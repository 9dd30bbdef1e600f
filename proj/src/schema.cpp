#include "gantry/schema.hpp"

#include "gantry/error.hpp"
#include "gantry/schema_text.hpp"

#include <string>

namespace gantry {

using nlohmann::json;

namespace {

bool has_type(const json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    if (type == "number") return value.is_number();
    if (type == "integer") {
        if (value.is_number_integer()) return true;
        if (value.is_number_float()) {
            const double d = value.get<double>();
            return d == static_cast<double>(static_cast<long long>(d));
        }
        return false;
    }
    return false;
}

class Validator {
public:
    explicit Validator(const json& root) : root_(root) {}

    void check(const json& value, const json& schema, const std::string& path) const {
        if (schema.contains("$ref")) {
            check(value, resolve(schema.at("$ref").get<std::string>()), path);
            return;
        }
        if (schema.contains("type")) {
            const auto& t = schema.at("type");
            bool ok = false;
            std::string expected;
            if (t.is_string()) {
                ok = has_type(value, t.get<std::string>());
                expected = t.get<std::string>();
            } else {
                for (const auto& alt : t) {
                    ok = ok || has_type(value, alt.get<std::string>());
                    expected += (expected.empty() ? "" : " or ") + alt.get<std::string>();
                }
            }
            if (!ok) throw ConfigError(path, "expected " + expected);
        }
        if (schema.contains("enum")) {
            bool found = false;
            for (const auto& e : schema.at("enum")) found = found || e == value;
            if (!found) throw ConfigError(path, "value " + value.dump() + " not in " + schema.at("enum").dump());
        }
        if (value.is_number()) check_number(value.get<double>(), schema, path);
        if (value.is_object()) check_object(value, schema, path);
        if (value.is_array()) check_array(value, schema, path);
    }

private:
    const json& resolve(const std::string& ref) const {
        const std::string prefix = "#/";
        if (ref.rfind(prefix, 0) != 0) throw ConfigError("", "unsupported $ref " + ref);
        return root_.at(json::json_pointer(ref.substr(1)));
    }

    static void check_number(double v, const json& schema, const std::string& path) {
        if (schema.contains("minimum") && v < schema.at("minimum").get<double>())
            throw ConfigError(path, "must be >= " + schema.at("minimum").dump());
        if (schema.contains("maximum") && v > schema.at("maximum").get<double>())
            throw ConfigError(path, "must be <= " + schema.at("maximum").dump());
        if (schema.contains("exclusiveMinimum") && v <= schema.at("exclusiveMinimum").get<double>())
            throw ConfigError(path, "must be > " + schema.at("exclusiveMinimum").dump());
        if (schema.contains("exclusiveMaximum") && v >= schema.at("exclusiveMaximum").get<double>())
            throw ConfigError(path, "must be < " + schema.at("exclusiveMaximum").dump());
    }

    void check_object(const json& value, const json& schema, const std::string& path) const {
        if (schema.contains("required")) {
            for (const auto& key : schema.at("required")) {
                if (!value.contains(key.get<std::string>()))
                    throw ConfigError(path + "." + key.get<std::string>(), "required field missing");
            }
        }
        const json* props = schema.contains("properties") ? &schema.at("properties") : nullptr;
        const bool closed = schema.contains("additionalProperties") && schema.at("additionalProperties") == false;
        for (const auto& [key, child] : value.items()) {
            const std::string child_path = path + "." + key;
            if (props && props->contains(key)) {
                check(child, props->at(key), child_path);
            } else if (closed) {
                throw ConfigError(child_path, "unknown field");
            }
        }
    }

    void check_array(const json& value, const json& schema, const std::string& path) const {
        if (schema.contains("minItems") && value.size() < schema.at("minItems").get<std::size_t>())
            throw ConfigError(path, "needs at least " + schema.at("minItems").dump() + " items");
        if (schema.contains("maxItems") && value.size() > schema.at("maxItems").get<std::size_t>())
            throw ConfigError(path, "allows at most " + schema.at("maxItems").dump() + " items");
        if (schema.contains("items")) {
            for (std::size_t i = 0; i < value.size(); ++i)
                check(value[i], schema.at("items"), path + "[" + std::to_string(i) + "]");
        }
    }

    const json& root_;
};

}  // namespace

const json& scenario_schema() {
    static const json schema = json::parse(detail::kScenarioSchema);
    return schema;
}

void validate_schema(const json& instance, const json& schema) {
    Validator(schema).check(instance, schema, "$");
}

}  // namespace gantry
