#pragma once

// Scenario documents (JSON): parsing with field-addressed errors,
// serialization, and assembly into a runnable Scenario.
//
// Top-level sections: plant, feedback, certificate, trigger, attack,
// simulation, analysis. See scenarios/*.json for complete examples.

#include "etcdos/dos.hpp"
#include "etcdos/plant.hpp"
#include "etcdos/simulation.hpp"
#include "etcdos/theory.hpp"
#include "etcdos/trigger.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace etcdos {

/// Schema or value error in a scenario document. `field()` is a dotted path
/// such as "certificate.c" ("" for syntax errors, which carry line/column in
/// the message).
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string field, const std::string& message);
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct PlantSpec {
    std::string builtin;  // empty: polynomial plant below
    int state_dim = 1;
    int input_dim = 1;
    std::vector<Polynomial> field;     // one polynomial in (x, u) per state component
    std::vector<Polynomial> feedback;  // one polynomial in x per input component

    friend bool operator==(const PlantSpec&, const PlantSpec&) = default;
};

struct CertificateSpec {
    std::optional<Polynomial> V;
    std::optional<ComparisonFunction> alpha1;
    std::optional<ComparisonFunction> alpha2;
    std::optional<ComparisonFunction> gamma2;
    std::optional<double> lambda;
    std::optional<double> mu;
    std::optional<double> c;

    friend bool operator==(const CertificateSpec&, const CertificateSpec&) = default;
};

struct TriggerSpec {
    TriggerMode mode = TriggerMode::Ideal;
    std::optional<double> sigma;  // empty: "estimate"
    RetryPolicy retry = RetryPolicy::Periodic;

    friend bool operator==(const TriggerSpec&, const TriggerSpec&) = default;
};

struct AttackSpec {
    AttackPolicy policy;
    /// Set when the offline schedule was loaded from a file (relative to the
    /// scenario's directory); serialization keeps the reference.
    std::string schedule_file;

    friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

struct SimulationSpec {
    std::vector<double> x0{1.0};
    double horizon = 10.0;
    IntegratorSettings integrator;
    std::uint64_t seed = 1;

    friend bool operator==(const SimulationSpec& a, const SimulationSpec& b) {
        return a.x0 == b.x0 && a.horizon == b.horizon && a.seed == b.seed && a.integrator.step == b.integrator.step &&
               a.integrator.event_tolerance == b.integrator.event_tolerance &&
               a.integrator.retry_period == b.integrator.retry_period &&
               a.integrator.divergence_cap == b.integrator.divergence_cap;
    }
};

struct AnalysisSpec {
    double R = 1.0;
    double tol = 1e-6;
    int grid_density = 200;
    std::optional<double> lipschitz;  // analytic L
    double dense_step = 1e-5;

    friend bool operator==(const AnalysisSpec&, const AnalysisSpec&) = default;
};

struct ScenarioFile {
    PlantSpec plant;
    CertificateSpec certificate;
    TriggerSpec trigger;
    AttackSpec attack;
    SimulationSpec simulation;
    AnalysisSpec analysis;
    std::filesystem::path base_dir;  // for schedule_file resolution; not serialized

    friend bool operator==(const ScenarioFile& a, const ScenarioFile& b) {
        return a.plant == b.plant && a.certificate == b.certificate && a.trigger == b.trigger &&
               a.attack == b.attack && a.simulation == b.simulation && a.analysis == b.analysis;
    }
};

/// Throws ScenarioError.
[[nodiscard]] ScenarioFile parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir = {});
[[nodiscard]] ScenarioFile load_scenario_file(const std::filesystem::path& path);

[[nodiscard]] nlohmann::json scenario_to_json(const ScenarioFile& file);
[[nodiscard]] std::string serialize_scenario(const ScenarioFile& file);

/// Plant, feedback and certificate described by the file (certificate
/// overrides applied). Throws ScenarioError.
[[nodiscard]] ControlSystem build_system(const ScenarioFile& file);

/// Runnable, validated Scenario. sigma = "estimate" for the simplified rule is
/// resolved with estimate_sigma on the ideal-case error region. Throws
/// ScenarioError (EstimationError propagates for non-Lipschitz sigma).
[[nodiscard]] Scenario build_scenario(const ScenarioFile& file);

/// Inputs for analyze(): effective attack budget, R, grid density and the
/// analytic L / sigma from the file.
[[nodiscard]] TheoryInputs theory_inputs(const ScenarioFile& file, double delta_star = 0.0,
                                         double tau_star = std::numeric_limits<double>::infinity());

/// [[start, duration], ...]
[[nodiscard]] nlohmann::json schedule_to_json(const DosSchedule& schedule);
/// Throws ScenarioError addressed at `field`.
[[nodiscard]] DosSchedule schedule_from_json(const nlohmann::json& j, const std::string& field);

[[nodiscard]] nlohmann::json comparison_to_json(const ComparisonFunction& f);
[[nodiscard]] ComparisonFunction comparison_from_json(const nlohmann::json& j, const std::string& field);

}  // namespace etcdos
