// Command-line front end: model, synth, simulate, compare, validate.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "ems/acceptance.hpp"
#include "ems/commands.hpp"
#include "ems/errors.hpp"
#include "ems/trace_io.hpp"

namespace {

constexpr int kExitAcceptance = 4;

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> t_final;
    std::string road;
    bool no_noise = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Configuration file (key = value or JSON)");
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--seed", o.seed, "Master seed (overrides EMS_SEED and the config)");
    cmd->add_option("--dt", o.dt, "Integration step [s]");
    cmd->add_option("--t-final", o.t_final, "Simulation horizon [s]");
    cmd->add_option("--road", o.road, "bump:<amp>,<start>,<dur> | step:<amp>,<start> | zero");
    cmd->add_flag("--no-noise", o.no_noise, "Disable process and measurement noise");
}

std::vector<double> split_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw ems::ConfigError("--road: '" + item + "' is not a number");
        }
        out.push_back(v);
    }
    return out;
}

ems::RoadProfile parse_road_flag(const std::string& text) {
    ems::RoadProfile p;
    if (text == "zero") {
        p.shape = ems::RoadShape::zero;
        p.amplitude = 0.0;
        return p;
    }
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::vector<double> args =
        colon == std::string::npos ? std::vector<double>{} : split_numbers(text.substr(colon + 1));
    if (kind == "bump" && args.size() == 3) {
        p.shape = ems::RoadShape::half_sine_bump;
        p.amplitude = args[0];
        p.start = args[1];
        p.duration = args[2];
        return p;
    }
    if (kind == "step" && args.size() == 2) {
        p.shape = ems::RoadShape::step;
        p.amplitude = args[0];
        p.start = args[1];
        return p;
    }
    throw ems::ConfigError("--road must be bump:<amp>,<start>,<dur>, step:<amp>,<start> or zero");
}

ems::RunConfig resolve_config(const CommonOptions& o) {
    ems::RunConfig cfg = o.config_path.empty() ? ems::RunConfig{} : ems::load_config(o.config_path);
    if (const char* env = std::getenv("EMS_SEED"); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            cfg.sim.seed = std::stoull(env, &used);
            if (used != std::string(env).size()) {
                throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception&) {
            throw ems::ConfigError("EMS_SEED must be an unsigned 64-bit integer");
        }
    }
    if (o.seed) {
        cfg.sim.seed = *o.seed;
    }
    if (o.dt) {
        cfg.sim.dt = *o.dt;
    }
    if (o.t_final) {
        cfg.sim.t_final = *o.t_final;
    }
    if (!o.road.empty()) {
        cfg.road = parse_road_flag(o.road);
    }
    if (o.no_noise) {
        cfg.sim.noise_on = false;
    }
    if (!o.out_dir.empty()) {
        cfg.out_dir = o.out_dir;
    }
    cfg.validate();
    return cfg;
}

void print_spectrum(const ems::Spectrum& s) {
    std::cout << "closed-loop eigenvalues:\n";
    for (const ems::Complex& l : s) {
        std::cout << "  " << l.real() << (l.imag() < 0 ? " - " : " + ") << std::abs(l.imag())
                  << "j\n";
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) {
        throw ems::Error("cannot write " + path.string());
    }
}

int cmd_model(const ems::RunConfig& cfg) {
    std::cout << ems::model_text(cfg);
    return ems::kExitOk;
}

int cmd_synth(const ems::RunConfig& cfg, const std::string& which) {
    const std::filesystem::path out = std::filesystem::path(cfg.out_dir) / ("controller_" + which + ".json");
    bool hurwitz = false;
    if (which == "lqg") {
        const ems::LqgDesign d = ems::design_lqg(cfg);
        write_json(out, ems::lqg_artifact(d));
        std::cout << "LQG compensator order " << d.compensator.A_c.rows() << " written to " << out.string()
                  << '\n';
        print_spectrum(d.spectrum);
        hurwitz = ems::is_hurwitz(d.closed_loop);
    } else {
        const ems::LqiDesign d = ems::design_lqi(cfg);
        const auto artifact = ems::lqi_artifact(d);
        write_json(out, artifact);
        std::cout << "LQI gain written to " << out.string() << '\n';
        for (const auto& c : artifact["comparisons"]) {
            std::cout << "  " << c["quantity"].get<std::string>() << ": computed "
                      << c["computed_value"].get<double>() << ", published "
                      << c["paper_value"].get<double>() << ", delta " << c["delta"].get<double>()
                      << '\n';
        }
        print_spectrum(d.spectrum);
        hurwitz = ems::is_hurwitz(d.closed_loop);
    }
    if (!hurwitz) {
        std::cerr << "error: closed loop is not Hurwitz\n";
        return ems::kExitSynthesis;
    }
    return ems::kExitOk;
}

int cmd_simulate(const ems::RunConfig& cfg, const std::string& controller) {
    ems::Compensator comp = ems::OpenLoop{};
    ems::StateSpace plant = ems::design_plant(cfg.plant, cfg.realization);
    if (controller == "lqg") {
        comp = ems::design_lqg(cfg).compensator;
    } else if (controller == "lqi") {
        comp = ems::design_lqi(cfg).compensator;
    }
    const ems::SimTrace trace = ems::simulate_closed_loop(plant, comp, cfg.road, cfg.noise, cfg.sim);
    const std::filesystem::path out = std::filesystem::path(cfg.out_dir) / (controller + ".csv");
    std::filesystem::create_directories(out.parent_path());
    std::ofstream csv(out, std::ios::binary);
    ems::write_trace_csv(trace, csv);
    if (!csv) {
        throw ems::Error("cannot write " + out.string());
    }
    std::cout << controller << ": " << trace.size() << " samples written to " << out.string()
              << "\npeak body travel " << ems::peak_body_travel(trace) << " m, cost "
              << ems::lqg_cost(trace, cfg.lqg) << '\n';
    return ems::kExitOk;
}

int cmd_compare(const ems::RunConfig& cfg) {
    const ems::CompareResult res = ems::run_compare(cfg, cfg.out_dir);
    std::cout << "scenario        peak [m]      cost\n";
    for (const auto& row : res.report["scenarios"]) {
        std::cout << "  " << row["name"].get<std::string>();
        if (row["status"] == "ok") {
            std::cout << "  " << row["peak_body_travel_m"].get<double>() << "  "
                      << row["cost"].get<double>() << '\n';
        } else {
            std::cout << "  FAILED: " << row["error"].get<std::string>() << '\n';
        }
    }
    std::cout << "published: road 0.1 m, LQG 0.01 m, LQI 0.05 m\n";
    std::cout << "peak ordering LQG < LQI < open loop: "
              << (res.report["peak_ordering"]["holds"].get<bool>() ? "holds" : "does not hold")
              << "\nreport: " << (std::filesystem::path(cfg.out_dir) / "report.json").string() << '\n';
    return res.exit_code;
}

int cmd_validate(const ems::RunConfig& cfg, double injection) {
    ems::ValidateOptions opts;
    opts.care_residual_injection = injection;
    const auto results = ems::run_acceptance(cfg, opts);
    const bool ok = ems::print_acceptance(results, std::cout);
    std::cout << (ok ? "all criteria passed\n" : "some criteria failed\n");
    return ok ? ems::kExitOk : kExitAcceptance;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Electromagnetic suspension LQG/LQI synthesis and simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ems::kToolkitVersion);

    CommonOptions opts;
    std::string which = "lqg";
    std::string controller = "lqg";
    double injection = 0.0;

    CLI::App* model = app.add_subcommand("model", "Print the linearized model and transfer function");
    add_common(model, opts);
    CLI::App* synth = app.add_subcommand("synth", "Synthesize a controller and write its artifact");
    synth->add_option("which", which, "lqg or lqi")->required()->check(CLI::IsMember({"lqg", "lqi"}));
    add_common(synth, opts);
    CLI::App* simulate = app.add_subcommand("simulate", "Simulate one closed loop and write a CSV trace");
    simulate->add_option("--controller", controller, "open, lqg or lqi")
        ->check(CLI::IsMember({"open", "lqg", "lqi"}));
    add_common(simulate, opts);
    CLI::App* compare = app.add_subcommand("compare", "Open loop vs LQG vs LQI on the same road");
    add_common(compare, opts);
    CLI::App* validate = app.add_subcommand("validate", "Run the acceptance criteria");
    validate->add_option("--inject-care-residual", injection,
                         "Perturb Riccati solutions before the residual check");
    add_common(validate, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ems::kExitConfig;
    }

    ems::RunConfig cfg;
    try {
        cfg = resolve_config(opts);
    } catch (const ems::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ems::kExitConfig;
    }

    try {
        if (model->parsed()) {
            return cmd_model(cfg);
        }
        if (synth->parsed()) {
            return cmd_synth(cfg, which);
        }
        if (simulate->parsed()) {
            return cmd_simulate(cfg, controller);
        }
        if (compare->parsed()) {
            return cmd_compare(cfg);
        }
        return cmd_validate(cfg, injection);
    } catch (const ems::SimulationDiverged& e) {
        std::cerr << "simulation failed: " << e.what() << '\n';
        return ems::kExitSimulation;
    } catch (const ems::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ems::kExitConfig;
    } catch (const ems::Error& e) {
        std::cerr << "synthesis failed: " << e.what() << '\n';
        return ems::kExitSynthesis;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return ems::kExitConfig;
    }
}
