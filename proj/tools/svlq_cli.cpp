// Command-line front end: scenario ingestion/emission, gain design, stability
// and degradation analysis, and Monte Carlo simulation. Exit codes: 0 on
// success, 1 on usage/input errors, 2 on numerical divergence.
#include <svlq/analysis.hpp>
#include <svlq/scenario.hpp>
#include <svlq/simulate.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace svlq;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;

Scenario load_scenario(const std::string& spec) {
    static const char* kBuiltins[] = {"example1", "example2", "example2-highvar", "scalar-unit"};
    for (const char* b : kBuiltins)
        if (spec == b) return builtin(spec);
    std::ifstream in(spec);
    if (!in) throw std::invalid_argument("cannot open scenario file '" + spec + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("scenario '" + spec + "': " + e.what());
    }
    return scenario_from_json(j);
}

void require_valid(const Scenario& sc, bool infinite) {
    auto violations = validate(sc.sys, sc.cost, infinite);
    if (!violations.empty()) {
        std::string msg = "scenario fails validation:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw std::invalid_argument(msg);
    }
}

void emit(const json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream os(out);
        if (!os) throw std::invalid_argument("cannot write '" + out + "'");
        os << j.dump(2) << "\n";
    }
}

json policy_to_json(const AffinePolicy& p) {
    json g;
    g["k_bar"] = matrix_to_json(p.k_bar);
    g["corrections"] = json::array();
    for (size_t s = 0; s < p.corrections.size(); ++s)
        g["corrections"].push_back({{"term", s + 1}, {"matrix", matrix_to_json(p.corrections[s])}});
    return g;
}

// Design an infinite-horizon policy for the requested regime; returns the
// policy plus certificate data merged into the report.
AffinePolicy design_infinite(const Scenario& sc, const std::string& regime,
                             const SolveOptions& opt, json& report) {
    AffinePolicy policy;
    if (regime == "lmi") {
        auto [cert, gain] = infinite_lmi(sc.sys, sc.cost, opt);
        policy = gain.policy(sc.sys);
        report["p"] = matrix_to_json(cert.p);
        report["iterations"] = cert.iterations;
        report["residual"] = cert.residual;
    } else if (regime == "fmi") {
        auto [cert, gain] = infinite_fmi(sc.sys, sc.cost, opt);
        policy = gain.policy(sc.sys);
        report["h"] = matrix_to_json(gain.h);
        report["p"] = matrix_to_json(cert.p);
        report["iterations"] = cert.iterations;
        report["residual"] = cert.residual;
    } else if (regime == "smi") {
        auto [cert, gain] = infinite_smi(sc.sys, sc.cost, opt);
        policy = gain.policy(sc.sys);
        report["p"] = matrix_to_json(cert.p);
        report["iterations"] = cert.iterations;
        report["residual"] = cert.residual;
    } else if (regime == "deadbeat") {
        policy = deadbeat(sc.sys);
        double rho = 0.0;
        if (is_ms_stable(sc.sys, policy, &rho))
            report["p"] = matrix_to_json(policy_value_infinite(sc.sys, sc.cost, policy));
        report["iterations"] = 0;
        report["residual"] = 0.0;
    } else {
        throw std::invalid_argument("unknown regime '" + regime + "'");
    }
    report["regime"] = regime;
    report["gain"] = policy_to_json(policy);
    return policy;
}

int run(int argc, char** argv) {
    CLI::App app{"controller synthesis and analysis for interconnected "
                 "discrete-time systems with stochastically varying parameters"};
    app.require_subcommand(1);

    std::string scenario_arg, out, regime = "lmi", horizon = "inf", dump_csv;
    double tol = 1e-12;
    int max_iter = 100000, trials = 10000, sim_horizon = 20;
    std::uint64_t seed = 0;
    bool terminal_zero = false;
    std::string num_regime = "lmi", den_regime = "fmi";
    std::string builtin_name;

    auto* cmd_scenario = app.add_subcommand("scenario", "emit a built-in scenario as JSON");
    cmd_scenario->add_option("--builtin", builtin_name, "scenario name")->required();
    cmd_scenario->add_option("--out", out, "output file (default stdout)");

    auto* cmd_design = app.add_subcommand("design", "compute optimal gains");
    cmd_design->add_option("scenario", scenario_arg, "scenario file or builtin name")->required();
    cmd_design->add_option("--regime", regime, "lmi|fmi|smi|deadbeat");
    cmd_design->add_option("--horizon", horizon, "inf or a step count T");
    cmd_design->add_option("--tol", tol, "fixed-point stopping tolerance");
    cmd_design->add_option("--max-iter", max_iter, "fixed-point iteration cap");
    cmd_design->add_flag("--terminal-zero", terminal_zero, "use Q(T)=0 for finite horizon");
    cmd_design->add_option("--out", out, "report file (default stdout)");

    auto* cmd_analyze = app.add_subcommand("analyze", "stability and degradation report");
    cmd_analyze->add_option("scenario", scenario_arg, "scenario file or builtin name")->required();
    cmd_analyze->add_option("--num", num_regime, "numerator regime (default lmi)");
    cmd_analyze->add_option("--den", den_regime, "denominator regime (default fmi)");
    cmd_analyze->add_option("--tol", tol, "fixed-point stopping tolerance");
    cmd_analyze->add_option("--max-iter", max_iter, "fixed-point iteration cap");
    cmd_analyze->add_option("--out", out, "report file (default stdout)");

    auto* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo cost estimation");
    cmd_simulate->add_option("scenario", scenario_arg, "scenario file or builtin name")->required();
    cmd_simulate->add_option("--regime", regime, "lmi|fmi|smi|deadbeat");
    cmd_simulate->add_option("--trials", trials, "number of trials");
    cmd_simulate->add_option("--horizon", sim_horizon, "steps per trial");
    cmd_simulate->add_option("--seed", seed, "master seed");
    cmd_simulate->add_option("--tol", tol, "fixed-point stopping tolerance");
    cmd_simulate->add_option("--dump-csv", dump_csv, "write the first trial's trajectory as CSV");
    cmd_simulate->add_option("--out", out, "report file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    SolveOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;

    if (cmd_scenario->parsed()) {
        emit(scenario_to_json(builtin(builtin_name)), out);
        return kExitOk;
    }

    Scenario sc = load_scenario(scenario_arg);

    if (cmd_design->parsed()) {
        json report;
        if (horizon == "inf") {
            require_valid(sc, true);
            design_infinite(sc, regime, opt, report);
            report["horizon"] = "inf";
        } else {
            int T = 0;
            try {
                T = std::stoi(horizon);
            } catch (...) {
                throw std::invalid_argument("--horizon must be 'inf' or an integer");
            }
            if (T < 1) throw std::invalid_argument("--horizon must be >= 1");
            require_valid(sc, false);
            if (terminal_zero)
                sc.cost.q_terminal = Matrix::Zero(sc.sys.n(), sc.sys.n());
            report["regime"] = regime;
            report["horizon"] = T;
            if (regime == "lmi") {
                auto fl = finite_lmi(sc.sys, sc.cost, T);
                report["p"] = matrix_to_json(fl.p_schedule.front());
                report["gain"] = policy_to_json(fl.gains.front().policy(sc.sys));
                report["iterations"] = T;
                report["residual"] = 0.0;
            } else if (regime == "fmi") {
                auto ff = finite_fmi(sc.sys, sc.cost, T);
                report["p"] = matrix_to_json(ff.p_schedule.front());
                report["gain"] = policy_to_json(ff.gains.front().policy(sc.sys));
                report["iterations"] = T;
                report["residual"] = 0.0;
            } else {
                throw std::invalid_argument("finite horizon supports --regime lmi or fmi");
            }
        }
        emit(report, out);
        return kExitOk;
    }

    if (cmd_analyze->parsed()) {
        require_valid(sc, true);
        json report;
        json num_rep, den_rep;
        AffinePolicy num_policy = design_infinite(sc, num_regime, opt, num_rep);
        design_infinite(sc, den_regime, opt, den_rep);
        Matrix p_num = num_rep.contains("p")
                           ? matrix_from_json(num_rep["p"], "p_num")
                           : policy_value_infinite(sc.sys, sc.cost, num_policy);
        Matrix p_den = matrix_from_json(den_rep.at("p"), "p_den");
        double rho = 0.0;
        is_ms_stable(sc.sys, num_policy, &rho);
        RatioReport ratio = degradation_ratio(p_num, p_den);
        report["regime"] = num_regime + "-vs-" + den_regime;
        report["gain"] = num_rep["gain"];
        report["p"] = matrix_to_json(p_num);
        report["p_den"] = matrix_to_json(p_den);
        report["iterations"] = num_rep.value("iterations", 0);
        report["residual"] = num_rep.value("residual", 0.0);
        report["rho"] = rho;
        report["r"] = ratio.r;
        if (auto eb = epsilon_bound(sc.sys)) {
            report["epsilon"] = eb->first;
            report["bound"] = eb->second;
        } else {
            report["epsilon"] = nullptr;
            report["bound"] = nullptr;
        }
        emit(report, out);
        return kExitOk;
    }

    if (cmd_simulate->parsed()) {
        require_valid(sc, true);
        json design_rep;
        AffinePolicy policy = design_infinite(sc, regime, opt, design_rep);
        SimConfig cfg;
        cfg.trials = trials;
        cfg.horizon = sim_horizon;
        cfg.seed = seed;
        cfg.x0 = sc.x0;
        CostEstimate est = estimate_cost(sc.sys, sc.cost, policy, cfg);
        if (!dump_csv.empty()) {
            std::ofstream os(dump_csv);
            if (!os) throw std::invalid_argument("cannot write '" + dump_csv + "'");
            write_csv(os, rollout(sc.sys, sc.cost, policy, cfg.x0, cfg.horizon,
                                  detail::trial_seed(cfg.seed, 0)));
        }
        json report;
        report["regime"] = regime;
        report["trials"] = est.trials;
        report["horizon"] = cfg.horizon;
        report["seed"] = cfg.seed;
        report["mean"] = est.mean;
        report["std_error"] = est.std_error;
        emit(report, out);
        return kExitOk;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const svlq::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
