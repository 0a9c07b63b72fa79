#include "ems/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ems/errors.hpp"
#include "ems/format.hpp"

namespace ems {

namespace {

using json = nlohmann::json;

constexpr Eigen::Index kPlantOrder = 3;

[[noreturn]] void schema_error(const std::string& key, const std::string& what) {
    throw ConfigError("key '" + key + "': " + what);
}

double as_number(const json& j, const std::string& key) {
    if (!j.is_number()) {
        schema_error(key, "expected a number");
    }
    return j.get<double>();
}

std::uint64_t as_u64(const json& j, const std::string& key) {
    if (!j.is_number_unsigned()) {
        schema_error(key, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

bool as_bool(const json& j, const std::string& key) {
    if (!j.is_boolean()) {
        schema_error(key, "expected true or false");
    }
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& key) {
    if (!j.is_string()) {
        schema_error(key, "expected a string");
    }
    return j.get<std::string>();
}

std::vector<double> as_vector(const json& j, const std::string& key) {
    if (!j.is_array()) {
        schema_error(key, "expected an array of numbers");
    }
    std::vector<double> out;
    for (const json& e : j) {
        out.push_back(as_number(e, key));
    }
    return out;
}

// number -> 1x1, flat array -> column, nested arrays -> rows.
Matrix as_matrix(const json& j, const std::string& key) {
    if (j.is_number()) {
        return Matrix::Constant(1, 1, j.get<double>());
    }
    if (!j.is_array() || j.empty()) {
        schema_error(key, "expected a number or a non-empty array");
    }
    if (!j.front().is_array()) {
        const std::vector<double> v = as_vector(j, key);
        return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::vector<double> row = as_vector(j[static_cast<std::size_t>(r)], key);
        if (static_cast<Eigen::Index>(row.size()) != cols || cols == 0) {
            schema_error(key, "matrix rows must have equal, non-zero length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)];
        }
    }
    return m;
}

std::string render_matrix(const Matrix& m) {
    if (m.rows() == 1 && m.cols() == 1) {
        return format_double(m(0, 0));
    }
    std::string out = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r > 0) {
            out += ",";
        }
        if (m.cols() == 1) {
            out += format_double(m(r, 0));
            continue;
        }
        out += "[";
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) {
                out += ",";
            }
            out += format_double(m(r, c));
        }
        out += "]";
    }
    return out + "]";
}

std::string render_vector(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i > 0 ? "," : "") + format_double(v[i]);
    }
    return out + "]";
}

struct Field {
    std::function<void(RunConfig&, const json&, const std::string&)> set;
    // Returns an empty string when the field is absent and must not render.
    std::function<std::string(const RunConfig&)> render;
};

template <class Get>
Field number_field(Get get) {
    return {[get](RunConfig& c, const json& j, const std::string& k) { get(c) = as_number(j, k); },
            [get](const RunConfig& c) { return format_double(get(const_cast<RunConfig&>(c))); }};
}

template <class Get>
Field optional_number_field(Get get) {
    return {[get](RunConfig& c, const json& j, const std::string& k) {
                if (j.is_null()) {
                    get(c).reset();
                } else {
                    get(c) = as_number(j, k);
                }
            },
            [get](const RunConfig& c) {
                const auto& v = get(const_cast<RunConfig&>(c));
                return v ? format_double(*v) : std::string();
            }};
}

template <class Get>
Field matrix_field(Get get) {
    return {[get](RunConfig& c, const json& j, const std::string& k) { get(c) = as_matrix(j, k); },
            [get](const RunConfig& c) { return render_matrix(get(const_cast<RunConfig&>(c))); }};
}

Field road_shape_field(RoadProfile RunConfig::*which, RoadProfile SimConfig::*nested) {
    auto get = [which, nested](RunConfig& c) -> RoadProfile& {
        return which ? c.*which : c.sim.*nested;
    };
    return {[get](RunConfig& c, const json& j, const std::string& k) {
                const auto shape = parse_road_shape(as_string(j, k));
                if (!shape) {
                    schema_error(k, "expected one of zero, step, half_sine_bump");
                }
                get(c).shape = *shape;
            },
            [get](const RunConfig& c) { return to_string(get(const_cast<RunConfig&>(c)).shape); }};
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        t["plant.m"] = number_field([](RunConfig& c) -> double& { return c.plant.m; });
        t["plant.R_coil"] = number_field([](RunConfig& c) -> double& { return c.plant.R_coil; });
        t["plant.L_coil"] = number_field([](RunConfig& c) -> double& { return c.plant.L_coil; });
        t["plant.i0"] = number_field([](RunConfig& c) -> double& { return c.plant.i0; });
        t["plant.x0"] = number_field([](RunConfig& c) -> double& { return c.plant.x0; });
        t["plant.k_em"] = number_field([](RunConfig& c) -> double& { return c.plant.k_em; });
        t["plant.E_pot"] = number_field([](RunConfig& c) -> double& { return c.plant.E_pot; });
        t["plant.D_pot"] = number_field([](RunConfig& c) -> double& { return c.plant.D_pot; });
        t["plant.g"] = number_field([](RunConfig& c) -> double& { return c.plant.g; });
        t["plant.mu0"] = optional_number_field(
            [](RunConfig& c) -> std::optional<double>& { return c.plant.mu0; });
        t["plant.N_turns"] = optional_number_field(
            [](RunConfig& c) -> std::optional<double>& { return c.plant.N_turns; });
        t["plant.A_pole"] = optional_number_field(
            [](RunConfig& c) -> std::optional<double>& { return c.plant.A_pole; });

        t["synthesis.realization"] = {
            [](RunConfig& c, const json& j, const std::string& k) {
                const std::string s = as_string(j, k);
                if (s == "companion") {
                    c.realization = Realization::companion;
                } else if (s == "physical") {
                    c.realization = Realization::physical;
                } else {
                    schema_error(k, "expected companion or physical");
                }
            },
            [](const RunConfig& c) { return to_string(c.realization); }};

        t["lqg.Q"] = matrix_field([](RunConfig& c) -> Matrix& { return c.lqg.Q; });
        t["lqg.R"] = matrix_field([](RunConfig& c) -> Matrix& { return c.lqg.R; });
        t["lqg.N"] = matrix_field([](RunConfig& c) -> Matrix& { return c.lqg.N; });
        t["lqg.xi"] = matrix_field([](RunConfig& c) -> Matrix& { return c.noise.Xi; });
        t["lqg.theta"] = matrix_field([](RunConfig& c) -> Matrix& { return c.noise.Theta; });
        t["lqg.N_f"] = matrix_field([](RunConfig& c) -> Matrix& { return c.noise.N_f; });
        t["lqi.Q"] = matrix_field([](RunConfig& c) -> Matrix& { return c.lqi.Q; });
        t["lqi.R"] = matrix_field([](RunConfig& c) -> Matrix& { return c.lqi.R; });
        t["lqi.N"] = matrix_field([](RunConfig& c) -> Matrix& { return c.lqi.N; });

        t["road.shape"] = road_shape_field(&RunConfig::road, nullptr);
        t["road.amplitude"] = number_field([](RunConfig& c) -> double& { return c.road.amplitude; });
        t["road.start"] = number_field([](RunConfig& c) -> double& { return c.road.start; });
        t["road.duration"] = number_field([](RunConfig& c) -> double& { return c.road.duration; });

        t["sim.dt"] = number_field([](RunConfig& c) -> double& { return c.sim.dt; });
        t["sim.t_final"] = number_field([](RunConfig& c) -> double& { return c.sim.t_final; });
        t["sim.road_gain"] = number_field([](RunConfig& c) -> double& { return c.sim.road_gain; });
        t["sim.seed"] = {
            [](RunConfig& c, const json& j, const std::string& k) { c.sim.seed = as_u64(j, k); },
            [](const RunConfig& c) { return std::to_string(c.sim.seed); }};
        t["sim.noise"] = {
            [](RunConfig& c, const json& j, const std::string& k) { c.sim.noise_on = as_bool(j, k); },
            [](const RunConfig& c) { return std::string(c.sim.noise_on ? "true" : "false"); }};
        t["sim.initial_state"] = {
            [](RunConfig& c, const json& j, const std::string& k) {
                c.sim.initial_state = as_vector(j, k);
            },
            [](const RunConfig& c) { return render_vector(c.sim.initial_state); }};
        t["sim.reference.shape"] = road_shape_field(nullptr, &SimConfig::reference);
        t["sim.reference.amplitude"] =
            number_field([](RunConfig& c) -> double& { return c.sim.reference.amplitude; });
        t["sim.reference.start"] =
            number_field([](RunConfig& c) -> double& { return c.sim.reference.start; });
        t["sim.reference.duration"] =
            number_field([](RunConfig& c) -> double& { return c.sim.reference.duration; });

        t["output.dir"] = {
            [](RunConfig& c, const json& j, const std::string& k) { c.out_dir = as_string(j, k); },
            [](const RunConfig& c) { return json(c.out_dir).dump(); }};
        return t;
    }();
    return table;
}

void assign(RunConfig& cfg, const std::string& key, const json& value) {
    const auto it = fields().find(key);
    if (it == fields().end()) {
        throw ConfigError("unknown key '" + key + "'");
    }
    it->second.set(cfg, value, key);
}

std::string position(std::size_t line, std::size_t column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

// Line/column of a 1-based byte offset.
std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

void flatten(const json& obj, const std::string& prefix,
             std::vector<std::pair<std::string, json>>& out) {
    for (const auto& [k, v] : obj.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) {
            flatten(v, key, out);
        } else {
            out.emplace_back(key, v);
        }
    }
}

RunConfig parse_json_document(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = locate(text, e.byte);
        throw ConfigError("syntax error at " + position(line, col) + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("syntax error at line 1, column 1: top level must be an object");
    }
    std::vector<std::pair<std::string, json>> entries;
    flatten(doc, "", entries);
    RunConfig cfg;
    for (const auto& [key, value] : entries) {
        assign(cfg, key, value);
    }
    return cfg;
}

bool is_bare_word(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    for (char ch : s) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) {
            return false;
        }
    }
    return s != "true" && s != "false" && s != "null";
}

RunConfig parse_key_value_document(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') {
            raw.pop_back();
        }
        // Strip a trailing comment outside string literals.
        bool quoted = false;
        std::size_t end = raw.size();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"' && (i == 0 || raw[i - 1] != '\\')) {
                quoted = !quoted;
            } else if (raw[i] == '#' && !quoted) {
                end = i;
                break;
            }
        }
        const std::string line = raw.substr(0, end);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("syntax error at " + position(line_no, first + 1) +
                              ": expected 'key = value'");
        }
        std::string key = line.substr(first, eq - first);
        key.erase(key.find_last_not_of(" \t") + 1);
        if (key.empty() || key.find_first_of(" \t") != std::string::npos) {
            throw ConfigError("syntax error at " + position(line_no, first + 1) +
                              ": malformed key");
        }
        const auto value_start = line.find_first_not_of(" \t", eq + 1);
        if (value_start == std::string::npos) {
            throw ConfigError("syntax error at " + position(line_no, eq + 2) + ": missing value");
        }
        std::string value = line.substr(value_start);
        value.erase(value.find_last_not_of(" \t") + 1);

        json parsed;
        if (is_bare_word(value)) {
            parsed = value;
        } else {
            try {
                parsed = json::parse(value);
            } catch (const json::parse_error& e) {
                const std::size_t col = value_start + (e.byte == 0 ? 1 : e.byte);
                throw ConfigError("syntax error at " + position(line_no, col) +
                                  ": invalid value for '" + key + "'");
            }
        }
        if (!seen.insert(key).second) {
            throw ConfigError("duplicate key '" + key + "' at " + position(line_no, first + 1));
        }
        assign(cfg, key, parsed);
    }
    return cfg;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* key) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ConfigError(std::string("key '") + key + "': expected a " + std::to_string(rows) +
                          "x" + std::to_string(cols) + " matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

} // namespace

RunConfig::RunConfig() {
    lqg.Q = 5.0 * Matrix::Identity(kPlantOrder, kPlantOrder);
    lqg.R = Matrix::Constant(1, 1, 10.0);
    lqg.N = Matrix::Zero(kPlantOrder, 1);
    noise.Xi = Matrix::Constant(1, 1, 5e-4);
    noise.Theta = Matrix::Constant(1, 1, 1e-7);
    noise.N_f = Matrix::Zero(1, 1);
    lqi.Q = 5.0 * Matrix::Identity(kPlantOrder + 1, kPlantOrder + 1);
    lqi.R = Matrix::Constant(1, 1, 10.0);
    lqi.N = Matrix::Zero(kPlantOrder + 1, 1);
    lqi.N << 0.0, 1.0, 1.0, 1.0;
}

void RunConfig::validate() const {
    require_shape(lqg.Q, kPlantOrder, kPlantOrder, "lqg.Q");
    require_shape(lqg.R, 1, 1, "lqg.R");
    require_shape(lqg.N, kPlantOrder, 1, "lqg.N");
    require_shape(noise.Xi, 1, 1, "lqg.xi");
    require_shape(noise.Theta, 1, 1, "lqg.theta");
    require_shape(noise.N_f, 1, 1, "lqg.N_f");
    require_shape(lqi.Q, kPlantOrder + 1, kPlantOrder + 1, "lqi.Q");
    require_shape(lqi.R, 1, 1, "lqi.R");
    require_shape(lqi.N, kPlantOrder + 1, 1, "lqi.N");
    if (!sim.initial_state.empty() &&
        sim.initial_state.size() != static_cast<std::size_t>(kPlantOrder)) {
        throw ConfigError("key 'sim.initial_state': expected 3 entries");
    }
    try {
        plant.validate();
        lqg.validate();
        noise.validate();
        lqi.validate();
        road.validate();
        sim.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("invariant violated: ") + e.what());
    }
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.plant == b.plant && a.realization == b.realization && same_matrix(a.lqg.Q, b.lqg.Q) &&
           same_matrix(a.lqg.R, b.lqg.R) && same_matrix(a.lqg.N, b.lqg.N) &&
           same_matrix(a.noise.Xi, b.noise.Xi) && same_matrix(a.noise.Theta, b.noise.Theta) &&
           same_matrix(a.noise.N_f, b.noise.N_f) && same_matrix(a.lqi.Q, b.lqi.Q) &&
           same_matrix(a.lqi.R, b.lqi.R) && same_matrix(a.lqi.N, b.lqi.N) && a.road == b.road &&
           a.sim == b.sim && a.out_dir == b.out_dir;
}

RunConfig parse_config(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    RunConfig cfg = (first != std::string::npos && text[first] == '{')
                        ? parse_json_document(text)
                        : parse_key_value_document(text);
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string render_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& [key, field] : fields()) {
        const std::string value = field.render(cfg);
        if (!value.empty()) {
            out += key + " = " + value + "\n";
        }
    }
    return out;
}

} // namespace ems
