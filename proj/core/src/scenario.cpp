#include "etcdos/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace etcdos {

using json = nlohmann::json;

ScenarioError::ScenarioError(std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ScenarioError(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
        if (!known) throw ScenarioError(join(path, item.key()), "unknown field");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ScenarioError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ScenarioError(path, "must be finite");
    return v;
}

double positive(const json& j, const std::string& path) {
    const double v = number(j, path);
    if (!(v > 0.0)) throw ScenarioError(path, "must be positive");
    return v;
}

double nonnegative(const json& j, const std::string& path) {
    const double v = number(j, path);
    if (!(v >= 0.0)) throw ScenarioError(path, "must be nonnegative");
    return v;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ScenarioError(path, "expected an integer");
    return j.get<int>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw ScenarioError(path, "expected a string");
    return j.get<std::string>();
}

template <class Fn>
void optional_field(const json& obj, const std::string& path, const char* key, Fn&& fn) {
    if (const json* v = find(obj, key)) fn(*v, join(path, key));
}

std::vector<int> exponents(const json& j, const std::string& path) {
    if (!j.is_array()) throw ScenarioError(path, "expected an array of exponents");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const int p = integer(j[i], index_path(path, i));
        if (p < 0) throw ScenarioError(index_path(path, i), "exponent must be nonnegative");
        out.push_back(p);
    }
    return out;
}

Polynomial polynomial_from_json(const json& j, const std::string& path, int nx, int nu) {
    if (!j.is_array()) throw ScenarioError(path, "expected an array of monomials");
    std::vector<Monomial> terms;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto p = index_path(path, i);
        require_object(j[i], p);
        check_keys(j[i], p, {"coef", "x", "u"});
        Monomial m;
        if (const json* c = find(j[i], "coef")) {
            m.coefficient = number(*c, join(p, "coef"));
        } else {
            throw ScenarioError(join(p, "coef"), "missing");
        }
        optional_field(j[i], p, "x", [&](const json& v, const std::string& q) { m.x_powers = exponents(v, q); });
        optional_field(j[i], p, "u", [&](const json& v, const std::string& q) { m.u_powers = exponents(v, q); });
        terms.push_back(std::move(m));
    }
    Polynomial poly(std::move(terms));
    try {
        poly.check_dimensions(nx, nu);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(path, e.what());
    }
    return poly;
}

json polynomial_to_json(const Polynomial& poly) {
    json out = json::array();
    for (const auto& m : poly.terms()) {
        json t = {{"coef", m.coefficient}};
        if (!m.x_powers.empty()) t["x"] = m.x_powers;
        if (!m.u_powers.empty()) t["u"] = m.u_powers;
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Polynomial> polynomial_list(const json& j, const std::string& path, int nx, int nu,
                                        std::size_t expected) {
    if (!j.is_array()) throw ScenarioError(path, "expected an array of polynomials");
    if (j.size() != expected) {
        throw ScenarioError(path, "expected " + std::to_string(expected) + " components, got " +
                                      std::to_string(j.size()));
    }
    std::vector<Polynomial> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(polynomial_from_json(j[i], index_path(path, i), nx, nu));
    return out;
}

PlantSpec parse_plant(const json& doc) {
    const json* p = find(doc, "plant");
    if (!p) throw ScenarioError("plant", "missing section");
    require_object(*p, "plant");
    check_keys(*p, "plant", {"builtin", "state_dim", "input_dim", "field"});
    PlantSpec spec;
    if (const json* b = find(*p, "builtin")) {
        spec.builtin = text(*b, "plant.builtin");
        const auto names = builtin_system_names();
        if (std::find(names.begin(), names.end(), spec.builtin) == names.end()) {
            throw ScenarioError("plant.builtin", "unknown built-in plant '" + spec.builtin + "'");
        }
        for (const char* k : {"state_dim", "input_dim", "field"}) {
            if (find(*p, k)) throw ScenarioError(join("plant", k), "not allowed with a built-in plant");
        }
        if (find(doc, "feedback")) throw ScenarioError("feedback", "not allowed with a built-in plant");
        return spec;
    }
    const json* nx = find(*p, "state_dim");
    const json* nu = find(*p, "input_dim");
    const json* f = find(*p, "field");
    if (!nx) throw ScenarioError("plant.state_dim", "missing (or give plant.builtin)");
    if (!nu) throw ScenarioError("plant.input_dim", "missing");
    if (!f) throw ScenarioError("plant.field", "missing");
    spec.state_dim = integer(*nx, "plant.state_dim");
    spec.input_dim = integer(*nu, "plant.input_dim");
    if (spec.state_dim <= 0) throw ScenarioError("plant.state_dim", "must be positive");
    if (spec.input_dim <= 0) throw ScenarioError("plant.input_dim", "must be positive");
    spec.field = polynomial_list(*f, "plant.field", spec.state_dim, spec.input_dim,
                                 static_cast<std::size_t>(spec.state_dim));

    const json* fb = find(doc, "feedback");
    if (!fb) throw ScenarioError("feedback", "missing section (required for a polynomial plant)");
    require_object(*fb, "feedback");
    check_keys(*fb, "feedback", {"law"});
    const json* law = find(*fb, "law");
    if (!law) throw ScenarioError("feedback.law", "missing");
    spec.feedback =
        polynomial_list(*law, "feedback.law", spec.state_dim, 0, static_cast<std::size_t>(spec.input_dim));
    return spec;
}

CertificateSpec parse_certificate(const json& doc, const PlantSpec& plant) {
    CertificateSpec spec;
    const json* c = find(doc, "certificate");
    if (c) {
        require_object(*c, "certificate");
        check_keys(*c, "certificate", {"V", "alpha1", "alpha2", "gamma2", "lambda", "mu", "c"});
        const std::string path = "certificate";
        optional_field(*c, path, "V", [&](const json& v, const std::string& q) {
            spec.V = polynomial_from_json(v, q, plant.state_dim, 0);
        });
        optional_field(*c, path, "alpha1", [&](const json& v, const std::string& q) {
            spec.alpha1 = comparison_from_json(v, q);
        });
        optional_field(*c, path, "alpha2", [&](const json& v, const std::string& q) {
            spec.alpha2 = comparison_from_json(v, q);
        });
        optional_field(*c, path, "gamma2", [&](const json& v, const std::string& q) {
            spec.gamma2 = comparison_from_json(v, q);
        });
        optional_field(*c, path, "lambda",
                       [&](const json& v, const std::string& q) { spec.lambda = positive(v, q); });
        optional_field(*c, path, "mu", [&](const json& v, const std::string& q) { spec.mu = positive(v, q); });
        optional_field(*c, path, "c", [&](const json& v, const std::string& q) {
            const double value = number(v, q);
            if (!(value > 0.0 && value < 1.0)) throw ScenarioError(q, "must lie in (0, 1), got " + v.dump());
            spec.c = value;
        });
    }
    if (!plant.builtin.empty()) {
        for (const char* k : {"V", "alpha1", "alpha2", "gamma2"}) {
            if (c && find(*c, k)) {
                throw ScenarioError(join("certificate", k), "not allowed with a built-in plant");
            }
        }
    } else {
        if (!c) throw ScenarioError("certificate", "missing section (required for a polynomial plant)");
        if (!spec.V) throw ScenarioError("certificate.V", "missing");
        if (!spec.alpha1) throw ScenarioError("certificate.alpha1", "missing");
        if (!spec.alpha2) throw ScenarioError("certificate.alpha2", "missing");
        if (!spec.gamma2) throw ScenarioError("certificate.gamma2", "missing");
        if (!spec.lambda) throw ScenarioError("certificate.lambda", "missing");
        if (!spec.mu) throw ScenarioError("certificate.mu", "missing");
    }
    return spec;
}

TriggerSpec parse_trigger(const json& doc) {
    TriggerSpec spec;
    const json* t = find(doc, "trigger");
    if (!t) return spec;
    require_object(*t, "trigger");
    check_keys(*t, "trigger", {"mode", "sigma", "retry"});
    optional_field(*t, "trigger", "mode", [&](const json& v, const std::string& q) {
        const auto s = text(v, q);
        if (s == "ideal") {
            spec.mode = TriggerMode::Ideal;
        } else if (s == "simplified") {
            spec.mode = TriggerMode::Simplified;
        } else {
            throw ScenarioError(q, "expected \"ideal\" or \"simplified\"");
        }
    });
    optional_field(*t, "trigger", "sigma", [&](const json& v, const std::string& q) {
        if (v.is_string()) {
            if (v.get<std::string>() != "estimate") throw ScenarioError(q, "expected a number or \"estimate\"");
        } else {
            spec.sigma = positive(v, q);
        }
    });
    optional_field(*t, "trigger", "retry", [&](const json& v, const std::string& q) {
        const auto s = text(v, q);
        if (s == "periodic") {
            spec.retry = RetryPolicy::Periodic;
        } else if (s == "at-dos-end") {
            spec.retry = RetryPolicy::AtDosEnd;
        } else {
            throw ScenarioError(q, "expected \"periodic\" or \"at-dos-end\"");
        }
    });
    return spec;
}

DosSchedule read_schedule_file(const std::filesystem::path& path, const std::string& field) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(field, "cannot read schedule file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError(field, "schedule file '" + path.string() + "': " + e.what());
    }
    // Either a bare list or an attack-gen output object.
    if (j.is_object()) {
        const json* s = find(j, "schedule");
        if (!s) throw ScenarioError(field, "schedule file has no 'schedule' list");
        return schedule_from_json(*s, field);
    }
    return schedule_from_json(j, field);
}

AttackSpec parse_attack(const json& doc, const std::filesystem::path& base_dir, std::uint64_t default_seed) {
    AttackSpec spec;
    const json* a = find(doc, "attack");
    if (!a) return spec;
    require_object(*a, "attack");
    const std::string path = "attack";
    std::string policy = "none";
    optional_field(*a, path, "policy", [&](const json& v, const std::string& q) { policy = text(v, q); });

    auto req = [&](const char* key) -> const json& {
        const json* v = find(*a, key);
        if (!v) throw ScenarioError(join(path, key), "missing (required by policy '" + policy + "')");
        return *v;
    };

    if (policy == "none") {
        check_keys(*a, path, {"policy", "kappa", "tau"});
        spec.policy.kind = NoAttack{};
    } else if (policy == "offline") {
        check_keys(*a, path, {"policy", "kappa", "tau", "schedule", "schedule_file"});
        const json* inline_schedule = find(*a, "schedule");
        const json* file = find(*a, "schedule_file");
        if (inline_schedule && file) throw ScenarioError("attack.schedule", "give either schedule or schedule_file");
        if (inline_schedule) {
            spec.policy.kind = OfflinePolicy{schedule_from_json(*inline_schedule, "attack.schedule")};
        } else if (file) {
            spec.schedule_file = text(*file, "attack.schedule_file");
            spec.policy.kind = OfflinePolicy{read_schedule_file(base_dir / spec.schedule_file, "attack.schedule_file")};
        } else {
            throw ScenarioError("attack.schedule", "missing (or give attack.schedule_file)");
        }
    } else if (policy == "periodic") {
        check_keys(*a, path, {"policy", "kappa", "tau", "period", "duty", "phase"});
        PeriodicPolicy p;
        p.period = positive(req("period"), "attack.period");
        p.duty = number(req("duty"), "attack.duty");
        if (!(p.duty > 0.0 && p.duty < 1.0)) throw ScenarioError("attack.duty", "must lie in (0, 1)");
        optional_field(*a, path, "phase", [&](const json& v, const std::string& q) { p.phase = nonnegative(v, q); });
        spec.policy.kind = p;
    } else if (policy == "random") {
        check_keys(*a, path, {"policy", "kappa", "tau", "mean_gap", "mean_duration", "min_gap", "seed"});
        RandomPolicy p;
        p.mean_gap = positive(req("mean_gap"), "attack.mean_gap");
        p.mean_duration = positive(req("mean_duration"), "attack.mean_duration");
        optional_field(*a, path, "min_gap",
                       [&](const json& v, const std::string& q) { p.min_gap = nonnegative(v, q); });
        p.seed = default_seed;
        optional_field(*a, path, "seed", [&](const json& v, const std::string& q) {
            if (!v.is_number_unsigned()) throw ScenarioError(q, "expected a nonnegative integer");
            p.seed = v.get<std::uint64_t>();
        });
        spec.policy.kind = p;
    } else if (policy == "greedy") {
        check_keys(*a, path, {"policy", "kappa", "tau", "pulse", "gap"});
        GreedyPolicy p;
        p.pulse = positive(req("pulse"), "attack.pulse");
        optional_field(*a, path, "gap", [&](const json& v, const std::string& q) { p.gap = nonnegative(v, q); });
        spec.policy.kind = p;
    } else if (policy == "reactive") {
        check_keys(*a, path, {"policy", "kappa", "tau", "pulse"});
        spec.policy.kind = ReactivePolicy{positive(req("pulse"), "attack.pulse")};
    } else {
        throw ScenarioError("attack.policy",
                            "expected one of none, offline, periodic, random, greedy, reactive; got '" + policy + "'");
    }

    const json* kappa = find(*a, "kappa");
    const json* tau = find(*a, "tau");
    if (static_cast<bool>(kappa) != static_cast<bool>(tau)) {
        throw ScenarioError(kappa ? "attack.tau" : "attack.kappa", "kappa and tau must be given together");
    }
    if (kappa) {
        spec.policy.budget = DosBudget{nonnegative(*kappa, "attack.kappa"), positive(*tau, "attack.tau")};
    }
    if ((policy == "greedy" || policy == "reactive") && !spec.policy.budget) {
        throw ScenarioError("attack.kappa", "policy '" + policy + "' requires a budget (kappa, tau)");
    }
    return spec;
}

SimulationSpec parse_simulation(const json& doc, int state_dim) {
    SimulationSpec spec;
    spec.x0.assign(static_cast<std::size_t>(state_dim), 0.0);
    spec.x0[0] = 1.0;
    const json* s = find(doc, "simulation");
    if (s) {
        require_object(*s, "simulation");
        const std::string path = "simulation";
        check_keys(*s, path, {"x0", "horizon", "step", "event_tol", "retry_period", "divergence_cap", "seed"});
        optional_field(*s, path, "x0", [&](const json& v, const std::string& q) {
            if (!v.is_array()) throw ScenarioError(q, "expected an array");
            spec.x0.clear();
            for (std::size_t i = 0; i < v.size(); ++i) spec.x0.push_back(number(v[i], index_path(q, i)));
        });
        optional_field(*s, path, "horizon", [&](const json& v, const std::string& q) { spec.horizon = positive(v, q); });
        optional_field(*s, path, "step",
                       [&](const json& v, const std::string& q) { spec.integrator.step = positive(v, q); });
        optional_field(*s, path, "event_tol", [&](const json& v, const std::string& q) {
            spec.integrator.event_tolerance = positive(v, q);
        });
        optional_field(*s, path, "retry_period", [&](const json& v, const std::string& q) {
            spec.integrator.retry_period = nonnegative(v, q);
        });
        optional_field(*s, path, "divergence_cap", [&](const json& v, const std::string& q) {
            spec.integrator.divergence_cap = positive(v, q);
        });
        optional_field(*s, path, "seed", [&](const json& v, const std::string& q) {
            if (!v.is_number_unsigned()) throw ScenarioError(q, "expected a nonnegative integer");
            spec.seed = v.get<std::uint64_t>();
        });
    }
    if (static_cast<int>(spec.x0.size()) != state_dim) {
        throw ScenarioError("simulation.x0", "expected " + std::to_string(state_dim) + " components, got " +
                                                 std::to_string(spec.x0.size()));
    }
    return spec;
}

AnalysisSpec parse_analysis(const json& doc) {
    AnalysisSpec spec;
    const json* a = find(doc, "analysis");
    if (!a) return spec;
    require_object(*a, "analysis");
    const std::string path = "analysis";
    check_keys(*a, path, {"R", "tol", "grid_density", "lipschitz", "dense_step"});
    optional_field(*a, path, "R", [&](const json& v, const std::string& q) { spec.R = positive(v, q); });
    optional_field(*a, path, "tol", [&](const json& v, const std::string& q) { spec.tol = nonnegative(v, q); });
    optional_field(*a, path, "grid_density", [&](const json& v, const std::string& q) {
        spec.grid_density = integer(v, q);
        if (spec.grid_density < 2) throw ScenarioError(q, "must be at least 2");
    });
    optional_field(*a, path, "lipschitz", [&](const json& v, const std::string& q) { spec.lipschitz = positive(v, q); });
    optional_field(*a, path, "dense_step",
                   [&](const json& v, const std::string& q) { spec.dense_step = positive(v, q); });
    return spec;
}

}  // namespace

json schedule_to_json(const DosSchedule& schedule) {
    json out = json::array();
    for (const auto& iv : schedule.intervals()) out.push_back({iv.start, iv.duration});
    return out;
}

DosSchedule schedule_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) throw ScenarioError(field, "expected a list of [start, duration] pairs");
    std::vector<DosInterval> intervals;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto p = index_path(field, i);
        if (!j[i].is_array() || j[i].size() != 2) throw ScenarioError(p, "expected [start, duration]");
        intervals.push_back({nonnegative(j[i][0], p + "[0]"), positive(j[i][1], p + "[1]")});
    }
    try {
        return DosSchedule(std::move(intervals));
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(field, e.what());
    }
}

json comparison_to_json(const ComparisonFunction& f) {
    switch (f.kind()) {
        case ComparisonFunction::Kind::Linear:
            return {{"kind", "linear"}, {"a", f.terms().front().coefficient}};
        case ComparisonFunction::Kind::Power:
            return {{"kind", "power"}, {"a", f.terms().front().coefficient}, {"p", f.terms().front().exponent}};
        case ComparisonFunction::Kind::Polynomial: {
            json terms = json::array();
            for (const auto& t : f.terms()) terms.push_back({t.coefficient, t.exponent});
            return {{"kind", "polynomial"}, {"terms", terms}};
        }
        case ComparisonFunction::Kind::Tabulated: {
            json points = json::array();
            for (const auto& p : f.table()) points.push_back({p.r, p.value});
            return {{"kind", "tabulated"}, {"points", points}};
        }
    }
    return {};
}

ComparisonFunction comparison_from_json(const json& j, const std::string& field) {
    require_object(j, field);
    const json* k = find(j, "kind");
    if (!k) throw ScenarioError(join(field, "kind"), "missing");
    const auto kind = text(*k, join(field, "kind"));
    auto req = [&](const char* key) -> const json& {
        const json* v = find(j, key);
        if (!v) throw ScenarioError(join(field, key), "missing");
        return *v;
    };
    auto pairs = [&](const char* key) {
        const auto path = join(field, key);
        const json& list = req(key);
        if (!list.is_array()) throw ScenarioError(path, "expected a list of pairs");
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto p = index_path(path, i);
            if (!list[i].is_array() || list[i].size() != 2) throw ScenarioError(p, "expected a pair");
            out.emplace_back(number(list[i][0], p + "[0]"), number(list[i][1], p + "[1]"));
        }
        return out;
    };
    try {
        if (kind == "linear") {
            check_keys(j, field, {"kind", "a"});
            return ComparisonFunction::linear(number(req("a"), join(field, "a")));
        }
        if (kind == "power") {
            check_keys(j, field, {"kind", "a", "p"});
            return ComparisonFunction::power(number(req("a"), join(field, "a")), number(req("p"), join(field, "p")));
        }
        if (kind == "polynomial") {
            check_keys(j, field, {"kind", "terms"});
            std::vector<PowerTerm> terms;
            for (const auto& [a, p] : pairs("terms")) terms.push_back({a, p});
            return ComparisonFunction::polynomial(std::move(terms));
        }
        if (kind == "tabulated") {
            check_keys(j, field, {"kind", "points"});
            std::vector<TablePoint> points;
            for (const auto& [r, v] : pairs("points")) points.push_back({r, v});
            return ComparisonFunction::tabulated(std::move(points));
        }
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(field, e.what());
    }
    throw ScenarioError(join(field, "kind"), "expected linear, power, polynomial or tabulated; got '" + kind + "'");
}

ScenarioFile parse_scenario_text(const std::string& text_in, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text_in);
    } catch (const json::parse_error& e) {
        throw ScenarioError("", std::string("syntax error: ") + e.what());
    }
    require_object(doc, "");
    check_keys(doc, "", {"plant", "feedback", "certificate", "trigger", "attack", "simulation", "analysis"});

    ScenarioFile file;
    file.base_dir = base_dir;
    file.plant = parse_plant(doc);
    file.certificate = parse_certificate(doc, file.plant);
    file.trigger = parse_trigger(doc);
    file.simulation = parse_simulation(doc, file.plant.state_dim);
    file.attack = parse_attack(doc, base_dir, file.simulation.seed);
    file.analysis = parse_analysis(doc);
    if (file.trigger.retry == RetryPolicy::AtDosEnd && file.attack.policy.is_online()) {
        throw ScenarioError("trigger.retry", "at-dos-end retry needs an offline attack");
    }
    return file;
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("", "cannot read scenario file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path.parent_path());
}

json scenario_to_json(const ScenarioFile& file) {
    json doc;
    if (!file.plant.builtin.empty()) {
        doc["plant"] = {{"builtin", file.plant.builtin}};
    } else {
        json field = json::array();
        for (const auto& p : file.plant.field) field.push_back(polynomial_to_json(p));
        json law = json::array();
        for (const auto& p : file.plant.feedback) law.push_back(polynomial_to_json(p));
        doc["plant"] = {{"state_dim", file.plant.state_dim}, {"input_dim", file.plant.input_dim}, {"field", field}};
        doc["feedback"] = {{"law", law}};
    }

    json cert = json::object();
    const auto& cs = file.certificate;
    if (cs.V) cert["V"] = polynomial_to_json(*cs.V);
    if (cs.alpha1) cert["alpha1"] = comparison_to_json(*cs.alpha1);
    if (cs.alpha2) cert["alpha2"] = comparison_to_json(*cs.alpha2);
    if (cs.gamma2) cert["gamma2"] = comparison_to_json(*cs.gamma2);
    if (cs.lambda) cert["lambda"] = *cs.lambda;
    if (cs.mu) cert["mu"] = *cs.mu;
    if (cs.c) cert["c"] = *cs.c;
    if (!cert.empty()) doc["certificate"] = cert;

    doc["trigger"] = {{"mode", to_string(file.trigger.mode)}, {"retry", to_string(file.trigger.retry)}};
    doc["trigger"]["sigma"] = file.trigger.sigma ? json(*file.trigger.sigma) : json("estimate");

    json attack = json::object();
    const auto& policy = file.attack.policy;
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, NoAttack>) {
                attack["policy"] = "none";
            } else if constexpr (std::is_same_v<T, OfflinePolicy>) {
                attack["policy"] = "offline";
                if (!file.attack.schedule_file.empty()) {
                    attack["schedule_file"] = file.attack.schedule_file;
                } else {
                    attack["schedule"] = schedule_to_json(k.schedule);
                }
            } else if constexpr (std::is_same_v<T, PeriodicPolicy>) {
                attack["policy"] = "periodic";
                attack["period"] = k.period;
                attack["duty"] = k.duty;
                attack["phase"] = k.phase;
            } else if constexpr (std::is_same_v<T, RandomPolicy>) {
                attack["policy"] = "random";
                attack["mean_gap"] = k.mean_gap;
                attack["mean_duration"] = k.mean_duration;
                attack["min_gap"] = k.min_gap;
                attack["seed"] = k.seed;
            } else if constexpr (std::is_same_v<T, GreedyPolicy>) {
                attack["policy"] = "greedy";
                attack["pulse"] = k.pulse;
                attack["gap"] = k.gap;
            } else if constexpr (std::is_same_v<T, ReactivePolicy>) {
                attack["policy"] = "reactive";
                attack["pulse"] = k.pulse;
            }
        },
        policy.kind);
    if (policy.budget) {
        attack["kappa"] = policy.budget->kappa;
        attack["tau"] = policy.budget->tau;
    }
    doc["attack"] = attack;

    const auto& s = file.simulation;
    doc["simulation"] = {{"x0", s.x0},
                         {"horizon", s.horizon},
                         {"step", s.integrator.step},
                         {"event_tol", s.integrator.event_tolerance},
                         {"retry_period", s.integrator.retry_period},
                         {"divergence_cap", s.integrator.divergence_cap},
                         {"seed", s.seed}};

    const auto& a = file.analysis;
    doc["analysis"] = {{"R", a.R}, {"tol", a.tol}, {"grid_density", a.grid_density}, {"dense_step", a.dense_step}};
    if (a.lipschitz) doc["analysis"]["lipschitz"] = *a.lipschitz;
    return doc;
}

std::string serialize_scenario(const ScenarioFile& file) { return scenario_to_json(file).dump(2) + "\n"; }

ControlSystem build_system(const ScenarioFile& file) {
    const auto& cs = file.certificate;
    const double c = cs.c.value_or(0.5);
    ControlSystem sys;
    if (!file.plant.builtin.empty()) {
        sys = builtin_system(file.plant.builtin, c);
    } else {
        const auto& ps = file.plant;
        sys.name = "polynomial";
        sys.plant.state_dim = ps.state_dim;
        sys.plant.input_dim = ps.input_dim;
        sys.plant.field = [field = ps.field](const Vector& x, const Vector& u) {
            Vector dx(static_cast<Eigen::Index>(field.size()));
            for (std::size_t i = 0; i < field.size(); ++i) dx[static_cast<Eigen::Index>(i)] = field[i].eval(x, u);
            return dx;
        };
        sys.feedback.output_dim = ps.input_dim;
        sys.feedback.law = [law = ps.feedback](const Vector& x) {
            Vector u(static_cast<Eigen::Index>(law.size()));
            for (std::size_t i = 0; i < law.size(); ++i) u[static_cast<Eigen::Index>(i)] = law[i].eval(x);
            return u;
        };
        sys.certificate.V = [V = *cs.V](const Vector& x) { return V.eval(x); };
        sys.certificate.gradV = [V = *cs.V](const Vector& x) { return V.gradient_x(x); };
        sys.certificate.alpha1 = *cs.alpha1;
        sys.certificate.alpha2 = *cs.alpha2;
        sys.certificate.gamma2 = *cs.gamma2;
        sys.certificate.c = c;
    }
    if (cs.lambda) sys.certificate.lambda = *cs.lambda;
    if (cs.mu) sys.certificate.mu = *cs.mu;
    return sys;
}

TheoryInputs theory_inputs(const ScenarioFile& file, double delta_star, double tau_star) {
    TheoryInputs in;
    in.budget = effective_budget(file.attack.policy);
    in.delta_star = delta_star;
    in.tau_star = tau_star;
    in.R = file.analysis.R;
    in.grid_density = file.analysis.grid_density;
    in.lipschitz = file.analysis.lipschitz;
    in.sigma = file.trigger.sigma;
    return in;
}

Scenario build_scenario(const ScenarioFile& file) {
    Scenario sc;
    sc.system = build_system(file);
    const auto& cert = sc.system.certificate;
    sc.trigger.mode = file.trigger.mode;
    sc.trigger.c = cert.c;
    if (file.trigger.sigma) {
        sc.trigger.sigma = *file.trigger.sigma;
    } else if (file.trigger.mode == TriggerMode::Simplified) {
        const auto in = theory_inputs(file);
        const double kappa = in.budget ? in.budget->kappa : 0.0;
        const double tau = in.budget ? in.budget->tau : std::numeric_limits<double>::infinity();
        const auto ideal = decay_parameters(kappa, tau, cert.lambda, cert.c, cert.mu, 0.0, in.tau_star);
        const auto radii = region_radii(file.analysis.R, ideal.gamma, cert);
        sc.trigger.sigma = estimate_sigma(cert, radii.error, file.analysis.grid_density);
    }
    sc.retry = file.trigger.retry;
    sc.attack = file.attack.policy;
    sc.x0 = Eigen::Map<const Vector>(file.simulation.x0.data(), static_cast<Eigen::Index>(file.simulation.x0.size()));
    sc.horizon = file.simulation.horizon;
    sc.integrator = file.simulation.integrator;
    sc.seed = file.simulation.seed;
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError("scenario", e.what());
    }
    return sc;
}

}  // namespace etcdos
