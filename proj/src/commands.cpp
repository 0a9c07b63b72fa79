#include "ems/commands.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "ems/errors.hpp"
#include "ems/trace_io.hpp"

namespace ems {

namespace {

using ojson = nlohmann::ordered_json;

ojson state_space_json(const StateSpace& ss) {
    ojson j;
    j["realization"] = to_string(ss.realization);
    j["state_labels"] = ss.state_labels;
    j["A"] = matrix_json(ss.A);
    j["B"] = matrix_json(ss.B);
    j["C"] = matrix_json(ss.C);
    j["D"] = matrix_json(ss.D);
    return j;
}

ojson tf_json(const TransferFunction& tf) {
    ojson j;
    j["num"] = tf.num;
    j["den"] = tf.den;
    return j;
}

std::string format_complex(Complex c) {
    std::ostringstream os;
    os << std::setprecision(6) << c.real();
    if (c.imag() != 0.0) {
        os << (c.imag() < 0 ? " - " : " + ") << std::abs(c.imag()) << "j";
    }
    return os.str();
}

std::string format_row(const Matrix& m, Eigen::Index r) {
    std::ostringstream os;
    os << std::setprecision(6);
    os << "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        os << (c ? ", " : "") << std::setw(11) << m(r, c);
    }
    os << "]";
    return os.str();
}

void print_matrix(std::ostream& os, const char* name, const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        os << "  " << (r == 0 ? name : " ") << (r == 0 ? " = " : "   ") << format_row(m, r) << '\n';
    }
}

} // namespace

ojson matrix_json(const Matrix& m) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ojson row = ojson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(row);
    }
    return rows;
}

ojson spectrum_json(const Spectrum& s) {
    ojson out = ojson::array();
    for (const Complex& c : s) {
        out.push_back(ojson::array({c.real(), c.imag()}));
    }
    return out;
}

ojson comparison_json(const std::string& quantity, double paper_value, double computed_value) {
    ojson j;
    j["quantity"] = quantity;
    j["paper_value"] = paper_value;
    j["computed_value"] = computed_value;
    j["delta"] = computed_value - paper_value;
    return j;
}

LqgDesign design_lqg(const RunConfig& cfg) {
    LqgDesign d;
    d.plant = design_plant(cfg.plant, cfg.realization);
    d.regulator = solve_lqr(d.plant.A, d.plant.B, cfg.lqg);
    d.estimator = solve_kalman(d.plant, cfg.noise);
    d.compensator = build_lqg(d.plant, d.regulator.K, d.estimator.K);
    d.closed_loop = closed_loop_matrix(d.plant, d.compensator);
    d.spectrum = eig(d.closed_loop);
    return d;
}

LqiDesign design_lqi(const RunConfig& cfg) {
    LqiDesign d;
    d.plant = design_plant(cfg.plant, cfg.realization);
    d.augmented = augment_with_integrator(d.plant);
    d.solution = solve_lqr(d.augmented.A, d.augmented.B, cfg.lqi);
    d.compensator = IntegralStateFeedback{d.solution.K};
    d.closed_loop = closed_loop_matrix(d.plant, d.compensator);
    d.spectrum = eig(d.closed_loop);
    return d;
}

ojson model_report(const RunConfig& cfg) {
    const StateSpace physical = linearize(cfg.plant);
    const StateSpace companion = companion_plant(cfg.plant);
    const TransferFunction tf = ss_to_tf(physical);

    ojson j;
    j["physical"] = state_space_json(physical);
    j["companion"] = state_space_json(companion);
    j["transfer_function"] = tf_json(tf);
    j["companion_transfer_function"] = tf_json(ss_to_tf(companion));
    j["open_loop_eigenvalues"] = spectrum_json(eig(physical.A));
    j["magnet_force_at_operating_point_N"] =
        electromagnet_force(cfg.plant.x0, cfg.plant.i0, cfg.plant.k_em);
    j["equilibrium_residual_N"] = equilibrium_residual(cfg.plant);

    ojson cmp = ojson::array();
    for (std::size_t k = 1; k < published::kDenominator.size() && k < tf.den.size(); ++k) {
        cmp.push_back(comparison_json("tf.den[" + std::to_string(k) + "]",
                                      published::kDenominator[k], tf.den[k]));
    }
    cmp.push_back(comparison_json("tf.num[0]", published::kNumerator, tf.num.front()));
    j["comparisons"] = cmp;
    return j;
}

std::string model_text(const RunConfig& cfg) {
    const StateSpace physical = linearize(cfg.plant);
    const StateSpace companion = companion_plant(cfg.plant);
    const TransferFunction tf = ss_to_tf(physical);
    std::ostringstream os;
    os << std::setprecision(6);
    os << "Physical realization (states: gap, velocity, current)\n";
    print_matrix(os, "A", physical.A);
    print_matrix(os, "B", physical.B);
    print_matrix(os, "C", physical.C);
    os << "Companion realization\n";
    print_matrix(os, "A", companion.A);
    print_matrix(os, "B", companion.B);
    print_matrix(os, "C", companion.C);
    os << "Transfer function X(s)/Y(s)\n  num =";
    for (double c : tf.num) {
        os << ' ' << c;
    }
    os << "\n  den =";
    for (double c : tf.den) {
        os << ' ' << c;
    }
    os << "\n  published den = 1 50 0.1375 6.874\n";
    os << "Open-loop eigenvalues\n";
    for (const Complex& l : eig(physical.A)) {
        os << "  " << format_complex(l) << '\n';
    }
    const double force = electromagnet_force(cfg.plant.x0, cfg.plant.i0, cfg.plant.k_em);
    os << "Magnet force at (x0, i0): " << force << " N\n";
    os << "warning: operating point is not a force balance, |m g - f_m(x0, i0)| = "
       << equilibrium_residual(cfg.plant) << " N\n";
    return os.str();
}

ojson lqg_artifact(const LqgDesign& d) {
    ojson j;
    j["kind"] = "lqg_dynamic";
    j["realization"] = to_string(d.plant.realization);
    j["feedback_sign"] = "negative";
    j["order"] = d.compensator.A_c.rows();
    j["A_c"] = matrix_json(d.compensator.A_c);
    j["B_c"] = matrix_json(d.compensator.B_c);
    j["C_c"] = matrix_json(d.compensator.C_c);
    j["D_c"] = matrix_json(d.compensator.D_c);
    j["regulator_gain"] = matrix_json(d.regulator.K);
    j["estimator_gain"] = matrix_json(d.estimator.K);
    StateSpace comp_ss{d.compensator.A_c, d.compensator.B_c, d.compensator.C_c, d.compensator.D_c,
                       Realization::companion, {}};
    for (Eigen::Index i = 0; i < d.compensator.A_c.rows(); ++i) {
        comp_ss.state_labels.push_back("xc" + std::to_string(i + 1));
    }
    j["transfer_function"] = tf_json(ss_to_tf(comp_ss));
    ojson printed;
    printed["num"] = published::kCompensatorNum;
    printed["den"] = published::kCompensatorDen;
    printed["note"] = "published 4th-order compensator; not reproducible by a 3rd-order design";
    j["published_transfer_function"] = printed;
    j["closed_loop_spectrum"] = spectrum_json(d.spectrum);
    j["hurwitz"] = is_hurwitz(d.closed_loop);
    return j;
}

ojson lqi_artifact(const LqiDesign& d) {
    ojson j;
    j["kind"] = "lqi_static";
    j["realization"] = to_string(d.plant.realization);
    j["feedback_sign"] = "negative";
    j["K"] = matrix_json(d.compensator.K);
    j["integrator"] = "x_i' = r - y";
    j["closed_loop_spectrum"] = spectrum_json(d.spectrum);
    j["hurwitz"] = is_hurwitz(d.closed_loop);
    ojson cmp = ojson::array();
    for (Eigen::Index i = 0; i < d.compensator.K.cols() && i < 4; ++i) {
        cmp.push_back(comparison_json("lqi.K[" + std::to_string(i) + "]",
                                      published::kLqiGain[static_cast<std::size_t>(i)],
                                      d.compensator.K(0, i)));
    }
    j["comparisons"] = cmp;
    return j;
}

std::vector<Scenario> compare_scenarios(const RunConfig& cfg, const LqgDesign& lqg,
                                        const LqiDesign& lqi) {
    return {
        Scenario{"open_loop", OpenLoop{}, cfg.road},
        Scenario{"lqg", lqg.compensator, cfg.road},
        Scenario{"lqi", lqi.compensator, cfg.road},
    };
}

CompareResult run_compare(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const LqgDesign lqg = design_lqg(cfg);
    const LqiDesign lqi = design_lqi(cfg);
    const std::vector<Scenario> scenarios = compare_scenarios(cfg, lqg, lqi);

    CompareResult result;
    result.outcomes = run_scenarios_parallel(lqg.plant, scenarios, cfg.noise, cfg.sim);

    std::filesystem::create_directories(out_dir);
    ojson rows = ojson::array();
    ojson peaks;
    bool all_ok = true;
    for (const ScenarioOutcome& o : result.outcomes) {
        ojson row;
        row["name"] = o.name;
        if (!o.trace) {
            all_ok = false;
            row["status"] = "failed";
            row["error"] = o.error;
            rows.push_back(row);
            continue;
        }
        const double peak = peak_body_travel(*o.trace);
        peaks[o.name] = peak;
        row["status"] = "ok";
        row["samples"] = o.trace->size();
        row["peak_body_travel_m"] = peak;
        row["cost"] = lqg_cost(*o.trace, cfg.lqg);
        row["csv"] = o.name + ".csv";
        rows.push_back(row);

        std::ofstream csv(out_dir / (o.name + ".csv"), std::ios::binary);
        write_trace_csv(*o.trace, csv);
        if (!csv) {
            throw Error("cannot write " + (out_dir / (o.name + ".csv")).string());
        }
    }

    ojson& r = result.report;
    r["toolkit_version"] = kToolkitVersion;
    r["seed"] = cfg.sim.seed;
    r["realization"] = to_string(cfg.realization);
    r["road"] = {{"shape", to_string(cfg.road.shape)},
                 {"amplitude_m", cfg.road.amplitude},
                 {"start_s", cfg.road.start},
                 {"duration_s", cfg.road.duration}};
    r["simulation"] = {{"dt_s", cfg.sim.dt},
                       {"t_final_s", cfg.sim.t_final},
                       {"noise", cfg.sim.noise_on},
                       {"road_gain", cfg.sim.road_gain}};
    r["model"] = model_report(cfg);
    r["gains"] = {{"lqr_K_C", matrix_json(lqg.regulator.K)},
                  {"kalman_K_f", matrix_json(lqg.estimator.K)},
                  {"lqi_K", matrix_json(lqi.compensator.K)}};
    r["closed_loop_spectra"] = {{"lqg", spectrum_json(lqg.spectrum)},
                                {"lqi", spectrum_json(lqi.spectrum)}};
    r["scenarios"] = rows;

    ojson cmp = r["model"]["comparisons"];
    const ojson lqi_json = lqi_artifact(lqi);
    for (const auto& c : lqi_json["comparisons"]) {
        cmp.push_back(c);
    }
    cmp.push_back(comparison_json("road_profile_m", published::kRoadAmplitude,
                                  cfg.road.amplitude));
    if (peaks.contains("lqg")) {
        cmp.push_back(comparison_json("peak_lqg_m", published::kPeakLqg,
                                      peaks["lqg"].get<double>()));
    }
    if (peaks.contains("lqi")) {
        cmp.push_back(comparison_json("peak_lqi_m", published::kPeakLqi,
                                      peaks["lqi"].get<double>()));
    }
    r["comparisons"] = cmp;

    if (all_ok) {
        const double open = peaks["open_loop"].get<double>();
        const double pg = peaks["lqg"].get<double>();
        const double pi = peaks["lqi"].get<double>();
        r["peak_ordering"] = {{"lqg_below_lqi", pg < pi},
                              {"lqi_below_open_loop", pi < open},
                              {"holds", pg < pi && pi < open}};
    } else {
        r["peak_ordering"] = {{"holds", false}, {"note", "one or more scenarios failed"}};
    }

    std::ofstream report(out_dir / "report.json", std::ios::binary);
    report << r.dump(2) << '\n';
    if (!report) {
        throw Error("cannot write " + (out_dir / "report.json").string());
    }
    result.exit_code = all_ok ? kExitOk : kExitSimulation;
    return result;
}

} // namespace ems
