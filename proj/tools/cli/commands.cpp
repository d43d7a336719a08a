#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace etcdos::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

void write_text_atomically(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        f << content;
        if (!f) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

void apply_seed(ScenarioFile& file, std::uint64_t seed) {
    file.simulation.seed = seed;
    if (auto* r = std::get_if<RandomPolicy>(&file.attack.policy.kind)) r->seed = seed;
}

json decay_to_json(const DecayParameters& d) {
    return {{"gamma", finite_or_null(d.gamma)},
            {"beta", finite_or_null(d.beta)},
            {"admissible", d.admissible},
            {"delay_factor", finite_or_null(d.delay_factor)},
            {"tau_critical", finite_or_null(d.tau_critical)},
            {"literal_condition", d.literal_condition}};
}

struct OracleComparison {
    std::size_t attempts_simulate = 0;
    std::size_t attempts_oracle = 0;
    double max_event_time_delta = 0.0;
    double terminal_relative_delta = 0.0;
};

OracleComparison compare_with_oracle(const ClosedLoopTrace& fast, const ClosedLoopTrace& dense) {
    OracleComparison c;
    const auto& a = fast.sampler.attempts();
    const auto& b = dense.sampler.attempts();
    c.attempts_simulate = a.size();
    c.attempts_oracle = b.size();
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        c.max_event_time_delta = std::max(c.max_event_time_delta, std::abs(a[i].time - b[i].time));
    }
    if (!fast.rows.empty() && !dense.rows.empty()) {
        const Vector& xf = fast.rows.back().x;
        const Vector& xd = dense.rows.back().x;
        c.terminal_relative_delta = (xf - xd).norm() / std::max(xd.norm(), 1e-300);
    }
    return c;
}

}  // namespace

json theory_to_json(const TheoryReport& r) {
    return {{"lambda", r.lambda},
            {"c", r.c},
            {"mu", r.mu},
            {"kappa", r.kappa},
            {"tau", finite_or_null(r.tau)},
            {"omega1", r.omega1},
            {"omega2", r.omega2},
            {"gamma", finite_or_null(r.gamma)},
            {"beta", finite_or_null(r.beta)},
            {"delta_star", r.delta_star},
            {"tau_star", finite_or_null(r.tau_star)},
            {"ideal", decay_to_json(r.ideal)},
            {"delayed", decay_to_json(r.delayed)},
            {"R", r.R},
            {"r_X", finite_or_null(r.r_X)},
            {"r_E", finite_or_null(r.r_E)},
            {"L", r.L},
            {"L_source", r.lipschitz_source},
            {"sigma", r.sigma},
            {"sigma_source", r.sigma_source},
            {"epsilon_R", finite_or_null(r.epsilon_R)},
            {"admissible", r.admissible}};
}

json summary_to_json(const RunSummary& s) {
    json counts = json::object();
    for (const auto& [k, v] : s.event_counts) counts[k] = v;
    json final_state = json::array();
    for (Eigen::Index i = 0; i < s.final_state.size(); ++i) final_state.push_back(finite_or_null(s.final_state[i]));
    return {{"outcome", to_string(s.outcome)},
            {"attempts", s.attempts},
            {"successes", s.successes},
            {"blocked", s.blocked},
            {"min_intersample", s.min_intersample ? finite_or_null(*s.min_intersample) : json(nullptr)},
            {"max_state_norm", finite_or_null(s.max_state_norm)},
            {"final_time", s.final_time},
            {"final_state", final_state},
            {"event_counts", counts},
            {"dos_intervals", s.dos_intervals},
            {"delta_star", s.delta_star},
            {"tau_star", finite_or_null(s.tau_star)}};
}

PredictedDelay predicted_delay(const Scenario& sc) {
    PredictedDelay p;
    if (sc.attack.is_online()) {
        p.tau_star = std::get<ReactivePolicy>(sc.attack.kind).pulse;
    } else {
        p.tau_star = scenario_schedule(sc).min_duration();
    }
    if (sc.retry == RetryPolicy::Periodic && std::isfinite(p.tau_star)) {
        p.delta_star = sc.integrator.effective_retry_period();
    }
    return p;
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    ScenarioFile file;
    Scenario sc;
    try {
        file = load_scenario_file(opt.scenario);
        if (opt.seed_override) apply_seed(file, *opt.seed_override);
        sc = build_scenario(file);
        (void)scenario_schedule(sc);  // surface infeasible attack parameters as input errors
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    ClosedLoopTrace trace = simulate(sc);
    const RunSummary summary = summarize(trace);
    json summary_json = summary_to_json(summary);
    summary_json["scenario"] = opt.scenario.string();
    summary_json["seed"] = sc.seed;

    json theory_json;
    try {
        const auto in = theory_inputs(file, summary.delta_star, summary.tau_star);
        const TheoryReport report = analyze(sc.system, in);
        theory_json = theory_to_json(report);
        if (trace.outcome == Outcome::Completed) {
            const auto check = envelope_check(trace, sc.system.certificate, report, file.analysis.tol);
            summary_json["envelope"] = {{"pass", check.pass},
                                        {"checked_against_admissible_theory", report.admissible},
                                        {"max_exceedance", finite_or_null(check.max_exceedance)},
                                        {"witness_time", check.witness_time},
                                        {"max_lyapunov_exceedance", finite_or_null(check.max_lyapunov_exceedance)}};
        }
    } catch (const std::exception& e) {
        theory_json = {{"error", e.what()}};
    }

    if (opt.dense_oracle) {
        const auto dense = brute_force_simulate(sc, file.analysis.dense_step);
        const auto cmp = compare_with_oracle(trace, dense);
        summary_json["oracle"] = {{"dense_step", file.analysis.dense_step},
                                  {"outcome", to_string(dense.outcome)},
                                  {"attempts_simulate", cmp.attempts_simulate},
                                  {"attempts_oracle", cmp.attempts_oracle},
                                  {"max_event_time_delta", cmp.max_event_time_delta},
                                  {"terminal_relative_delta", cmp.terminal_relative_delta}};
    }

    try {
        fs::create_directories(opt.out);
        std::ostringstream csv;
        write_trace_csv(csv, trace);
        write_text_atomically(opt.out / "trace.csv", csv.str());
        write_text_atomically(opt.out / "summary.json", summary_json.dump(2) + "\n");
        write_text_atomically(opt.out / "theory.json", theory_json.dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    out << "outcome " << to_string(trace.outcome) << ", " << summary.attempts << " attempts (" << summary.blocked
        << " blocked), max |x| " << fmt(summary.max_state_norm) << "\n";
    if (summary_json.contains("oracle")) {
        out << "oracle: max event-time delta " << fmt(summary_json["oracle"]["max_event_time_delta"].get<double>())
            << " s\n";
    }
    return trace.outcome == Outcome::Diverged ? kDiverged : kOk;
}

int cmd_certify(const CertifyOptions& opt, std::ostream& out, std::ostream& err) {
    TheoryReport r;
    try {
        const ScenarioFile file = load_scenario_file(opt.scenario);
        const Scenario sc = build_scenario(file);
        const auto delay = predicted_delay(sc);
        r = analyze(sc.system, theory_inputs(file, delay.delta_star, delay.tau_star));
    } catch (const EstimationError& e) {
        err << "error: " << e.what() << "\n"
            << "hint: set trigger.sigma (or analysis.lipschitz) to an analytic value\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    const double growth = r.omega1 + r.omega2;
    const double factor = r.delayed.delay_factor;
    out << std::setprecision(6);
    out << "omega1     " << r.omega1 << "\n";
    out << "omega2     " << r.omega2 << "\n";
    out << "kappa      " << r.kappa << "\n";
    out << "tau        " << fmt(r.tau) << "\n";
    out << "delta*     " << r.delta_star << "\n";
    out << "tau*       " << fmt(r.tau_star) << "\n";
    out << "gamma      " << r.gamma << "\n";
    out << "beta       " << r.beta << "\n";
    out << "beta_ideal " << r.ideal.beta << "\n";
    out << "L          " << r.L << " (" << r.lipschitz_source << ")\n";
    out << "sigma      " << r.sigma << " (" << r.sigma_source << ")\n";
    out << "epsilon_R  " << std::setprecision(5) << r.epsilon_R << std::setprecision(6) << "\n";
    out << "r_X, r_E   " << r.r_X << ", " << r.r_E << "\n";
    out << "condition  beta > 0  <=>  tau > (lambda+2mu)(1+delta*/tau*)/(c lambda) = " << r.delayed.tau_critical
        << ": " << (r.admissible ? "holds" : "fails") << "\n";
    out << "literal    tau > c lambda/(lambda+2mu) (1+delta*/tau*) = " << r.c * r.lambda / growth * factor << ": "
        << (r.delayed.literal_condition ? "holds" : "fails") << " (reported only; not used)\n";
    out << "admissible " << (r.admissible ? "yes" : "no") << "\n";

    if (opt.out) {
        try {
            write_text_atomically(*opt.out, theory_to_json(r).dump(2) + "\n");
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kInputError;
        }
    }
    return r.admissible ? kOk : kInadmissible;
}

int cmd_attack_gen(const AttackGenOptions& opt, std::ostream& out, std::ostream& err) {
    AttackPolicy policy;
    if (opt.kappa.has_value() != opt.tau.has_value()) {
        err << "error: --kappa and --tau must be given together\n";
        return kInputError;
    }
    if (opt.kappa) policy.budget = DosBudget{*opt.kappa, *opt.tau};
    if (opt.policy == "periodic") {
        policy.kind = PeriodicPolicy{opt.period, opt.duty, opt.phase};
    } else if (opt.policy == "random") {
        policy.kind = RandomPolicy{opt.mean_gap, opt.mean_duration, opt.min_gap, opt.seed};
    } else if (opt.policy == "greedy") {
        policy.kind = GreedyPolicy{opt.pulse, opt.gap};
    } else {
        err << "error: policy must be periodic, random or greedy (reactive attacks are online only)\n";
        return kInputError;
    }

    DosSchedule schedule;
    try {
        if (policy.budget) policy.budget->validate();
        if (!(opt.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
        schedule = generate(policy, opt.horizon);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    json doc;
    doc["policy"] = policy.name();
    doc["horizon"] = opt.horizon;
    doc["schedule"] = schedule_to_json(schedule);
    doc["total_duration"] = schedule.total_duration();
    if (const auto budget = effective_budget(policy)) {
        const auto verdict = verify_budget(schedule, *budget, opt.horizon);
        doc["budget"] = {{"kappa", budget->kappa}, {"tau", budget->tau}};
        doc["verification"] = {{"pass", verdict.pass},
                               {"worst_slack", verdict.worst_slack},
                               {"witness_time", verdict.witness_time}};
    } else {
        doc["budget"] = nullptr;
        doc["verification"] = nullptr;
    }
    try {
        if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
        write_text_atomically(opt.out, doc.dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    out << schedule.size() << " intervals, total " << fmt(schedule.total_duration()) << " s";
    if (doc["verification"].is_object()) {
        out << ", budget " << (doc["verification"]["pass"].get<bool>() ? "verified" : "VIOLATED") << " (slack "
            << fmt(doc["verification"]["worst_slack"].get<double>()) << ")";
    }
    out << "\n";
    return kOk;
}

std::vector<double> parse_range(const std::string& spec) {
    auto to_double = [&](std::string_view s) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
            throw std::invalid_argument("malformed number '" + std::string(s) + "' in range '" + spec + "'");
        }
        return v;
    };

    std::vector<double> values;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string_view> parts;
        std::string_view rest(spec);
        for (auto pos = rest.find(':'); pos != std::string_view::npos; pos = rest.find(':')) {
            parts.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        parts.push_back(rest);
        if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step");
        const double a = to_double(parts[0]);
        const double b = to_double(parts[1]);
        const double step = to_double(parts[2]);
        if (!(step > 0.0)) throw std::invalid_argument("range step must be positive");
        const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
        for (long i = 0; i <= n; ++i) values.push_back(a + static_cast<double>(i) * step);
    } else {
        std::string_view rest(spec);
        while (!rest.empty()) {
            const auto pos = rest.find(',');
            values.push_back(to_double(rest.substr(0, pos)));
            if (pos == std::string_view::npos) break;
            rest.remove_prefix(pos + 1);
        }
    }
    if (values.empty()) throw std::invalid_argument("empty range '" + spec + "'");
    return values;
}

SweepRow run_sweep_point(const ScenarioFile& base, const std::string& parameter, double value, std::uint64_t seed) {
    SweepRow row;
    row.value = value;
    row.outcome = "error";
    try {
        ScenarioFile file = base;
        apply_seed(file, seed);
        if (parameter == "tau") {
            if (!file.attack.policy.budget) throw ScenarioError("attack.tau", "sweeping tau needs a declared budget");
            file.attack.policy.budget->tau = value;
        } else if (parameter == "duty") {
            auto* p = std::get_if<PeriodicPolicy>(&file.attack.policy.kind);
            if (!p) throw ScenarioError("attack.duty", "sweeping duty needs a periodic attack");
            p->duty = value;
        } else if (parameter == "c") {
            file.certificate.c = value;
        } else if (parameter == "mu") {
            file.certificate.mu = value;
        } else {
            throw std::invalid_argument("unknown sweep parameter '" + parameter + "'");
        }
        const Scenario sc = build_scenario(file);
        const auto trace = simulate(sc);
        const auto summary = summarize(trace);
        row.outcome = trace.outcome == Outcome::Diverged ? "diverged" : "completed";
        row.delta_star = summary.delta_star;
        row.tau_star = summary.tau_star;
        row.min_intersample = summary.min_intersample;
        const TheoryInputs inputs = theory_inputs(file, summary.delta_star, summary.tau_star);
        TheoryReport report;
        try {
            report = analyze(sc.system, inputs);
        } catch (const EstimationError& e) {
            // L and sigma are not needed for the decay columns; keep the
            // rates and envelope constants (a large gamma makes the regions
            // overflow, which is common deep in the inadmissible range).
            const auto& cert = sc.system.certificate;
            const auto w = rates(cert.lambda, cert.c, cert.mu);
            report.omega1 = w.omega1;
            report.omega2 = w.omega2;
            const double kappa = inputs.budget ? inputs.budget->kappa : 0.0;
            const double tau = inputs.budget ? inputs.budget->tau : std::numeric_limits<double>::infinity();
            report.ideal = decay_parameters(kappa, tau, cert.lambda, cert.c, cert.mu, 0.0, summary.tau_star);
            report.delayed = decay_parameters(kappa, tau, cert.lambda, cert.c, cert.mu, summary.delta_star,
                                              summary.tau_star);
            report.gamma = report.delayed.gamma;
            report.beta = report.delayed.beta;
            report.admissible = report.delayed.admissible;
            row.message = e.what();
        }
        row.beta = report.beta;
        row.admissible = report.admissible;
        row.gamma = report.gamma;
        row.beta_ideal = report.ideal.beta;
        row.max_exceedance =
            envelope_check(trace, sc.system.certificate, report, file.analysis.tol).max_exceedance;
    } catch (const std::exception& e) {
        row.message = e.what();
    }
    return row;
}

std::string sweep_csv_header(const std::string& parameter) {
    return parameter + ",beta,admissible,outcome,max_exceedance,min_intersample,gamma,delta_star,tau_star,beta_ideal";
}

std::string sweep_csv_row(const SweepRow& r) {
    std::string s = fmt(r.value) + "," + fmt(r.beta) + "," + (r.admissible ? "1" : "0") + "," + r.outcome + ",";
    s += fmt(r.max_exceedance) + ",";
    s += (r.min_intersample ? fmt(*r.min_intersample) : std::string()) + ",";
    s += fmt(r.gamma) + "," + fmt(r.delta_star) + "," + fmt(r.tau_star) + "," + fmt(r.beta_ideal);
    return s;
}

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
    static const std::vector<std::string> allowed{"tau", "duty", "c", "mu"};
    if (std::find(allowed.begin(), allowed.end(), opt.parameter) == allowed.end()) {
        err << "error: sweep parameter must be one of tau, duty, c, mu\n";
        return kInputError;
    }
    if (opt.values.empty()) {
        err << "error: empty sweep range\n";
        return kInputError;
    }
    ScenarioFile base;
    try {
        base = load_scenario_file(opt.scenario);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    const std::uint64_t seed0 = opt.seed_override.value_or(base.simulation.seed);

    unsigned jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::vector<SweepRow> rows(opt.values.size());
    for (std::size_t first = 0; first < opt.values.size(); first += jobs) {
        const std::size_t last = std::min(opt.values.size(), first + jobs);
        std::vector<std::future<SweepRow>> batch;
        for (std::size_t i = first; i < last; ++i) {
            batch.push_back(std::async(std::launch::async, run_sweep_point, std::cref(base), std::cref(opt.parameter),
                                       opt.values[i], seed0 + i));
        }
        for (std::size_t i = first; i < last; ++i) rows[i] = batch[i - first].get();
    }

    std::string csv = sweep_csv_header(opt.parameter) + "\n";
    for (const auto& r : rows) csv += sweep_csv_row(r) + "\n";
    try {
        if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
        write_text_atomically(opt.out, csv);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    std::size_t errors = 0;
    for (const auto& r : rows) {
        if (r.outcome == "error") {
            ++errors;
            err << "point " << opt.parameter << "=" << fmt(r.value) << ": " << r.message << '\n';
        }
    }
    out << rows.size() << " points written to " << opt.out.string() << "\n";
    return errors == rows.size() ? kInputError : kOk;
}

}  // namespace etcdos::cli
