#pragma once

// Subcommands of the etcdos tool. Each returns the process exit status:
// 0 success / admissible, 1 input error, 2 divergence, 3 inadmissible.

#include "etcdos/scenario.hpp"
#include "etcdos/simulation.hpp"
#include "etcdos/theory.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace etcdos::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kDiverged = 2, kInadmissible = 3 };

struct SimulateOptions {
    std::filesystem::path scenario;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed_override;
    bool dense_oracle = false;
};

/// Writes trace.csv, summary.json and theory.json into `out`.
int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);

struct CertifyOptions {
    std::filesystem::path scenario;
    std::optional<std::filesystem::path> out;  // theory JSON
};

int cmd_certify(const CertifyOptions& opt, std::ostream& out, std::ostream& err);

struct AttackGenOptions {
    std::string policy = "periodic";  // periodic | random | greedy
    double horizon = 10.0;
    std::optional<double> kappa;
    std::optional<double> tau;
    double period = 1.0;
    double duty = 0.1;
    double phase = 0.0;
    double mean_gap = 1.0;
    double mean_duration = 0.1;
    double min_gap = 0.0;
    std::uint64_t seed = 1;
    double pulse = 0.1;
    double gap = 0.0;
    std::filesystem::path out = "schedule.json";
};

/// Writes {"schedule": [[start, duration], ...], "budget": {...}, "verification": {...}}.
int cmd_attack_gen(const AttackGenOptions& opt, std::ostream& out, std::ostream& err);

struct SweepOptions {
    std::filesystem::path scenario;
    std::string parameter;  // tau | duty | c | mu
    std::vector<double> values;
    std::filesystem::path out = "sweep.csv";
    unsigned jobs = 0;  // 0: hardware concurrency
    std::optional<std::uint64_t> seed_override;
};

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);

/// "a:b:step" (inclusive, tolerant to rounding) or "v1,v2,...". Throws
/// std::invalid_argument on malformed or empty input.
[[nodiscard]] std::vector<double> parse_range(const std::string& spec);

struct SweepRow {
    double value = 0.0;
    double beta = 0.0;
    bool admissible = false;
    std::string outcome;  // completed | diverged | error
    double max_exceedance = 0.0;
    std::optional<double> min_intersample;
    double gamma = 1.0;
    double delta_star = 0.0;
    double tau_star = 0.0;
    double beta_ideal = 0.0;
    std::string message;
};

/// One sweep point, exposed for tests: applies the parameter, simulates and
/// analyzes. Never throws; failures become outcome "error".
[[nodiscard]] SweepRow run_sweep_point(const ScenarioFile& base, const std::string& parameter, double value,
                                       std::uint64_t seed);

[[nodiscard]] std::string sweep_csv_header(const std::string& parameter);
[[nodiscard]] std::string sweep_csv_row(const SweepRow& row);

/// Delta_* and tau_* expected for a scenario before simulating: the retry
/// period bounds every prolongation under periodic retries (0 at DoS end),
/// tau_* is the shortest interval of the offline schedule (the pulse for
/// reactive attacks).
struct PredictedDelay {
    double delta_star = 0.0;
    double tau_star = std::numeric_limits<double>::infinity();
};
[[nodiscard]] PredictedDelay predicted_delay(const Scenario& scenario);

[[nodiscard]] nlohmann::json theory_to_json(const TheoryReport& report);
[[nodiscard]] nlohmann::json summary_to_json(const RunSummary& summary);

}  // namespace etcdos::cli
