#pragma once

// Sample-and-hold closed loop under DoS: fixed-step RK4 with bisection event
// localization, plus a dense fixed-step oracle with no localization.

#include "etcdos/dos.hpp"
#include "etcdos/plant.hpp"
#include "etcdos/trigger.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace etcdos {

struct IntegratorSettings {
    double step = 1e-3;
    double event_tolerance = 1e-9;
    /// Seconds between retries after a blocked attempt; 0 means "use step".
    double retry_period = 0.0;
    double divergence_cap = 1e9;

    [[nodiscard]] double effective_retry_period() const noexcept { return retry_period > 0.0 ? retry_period : step; }
};

struct Scenario {
    ControlSystem system;
    TriggerRule trigger;
    RetryPolicy retry = RetryPolicy::Periodic;
    AttackPolicy attack;
    Vector x0;
    double horizon = 10.0;
    IntegratorSettings integrator;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;
};

enum class EventTag { None, SampleSuccess, SampleBlocked, DosStart, DosEnd };
enum class Outcome { Completed, Diverged, Error };

[[nodiscard]] const char* to_string(EventTag tag) noexcept;
[[nodiscard]] const char* to_string(Outcome outcome) noexcept;

struct TraceRow {
    double t = 0.0;
    Vector x;
    Vector u;
    double V = 0.0;
    Vector e;  // held state - x
    bool jammed = false;
    EventTag event = EventTag::None;

    [[nodiscard]] Vector held() const { return x + e; }
};

struct ClosedLoopTrace {
    std::vector<TraceRow> rows;
    SamplerState sampler;
    /// Schedule as realized during the run (includes online adversary pulses).
    DosSchedule schedule;
    RetryPolicy retry = RetryPolicy::Periodic;
    Outcome outcome = Outcome::Completed;
    std::string message;
    double final_time = 0.0;
    int state_dim = 1;
    int input_dim = 1;

    [[nodiscard]] ProlongationStats prolongation() const {
        return prolonged_dos_stats(schedule, sampler, final_time, retry);
    }
};

/// Offline schedule a scenario runs against (empty for online adversaries).
[[nodiscard]] DosSchedule scenario_schedule(const Scenario& scenario);

[[nodiscard]] ClosedLoopTrace simulate(const Scenario& scenario);

/// Same semantics with the trigger checked after every dense step and no
/// localization; rows are kept every `record_interval` seconds (default: the
/// scenario's integrator step) plus at every event.
[[nodiscard]] ClosedLoopTrace brute_force_simulate(const Scenario& scenario, double dense_step = 1e-5,
                                                   double record_interval = 0.0);

/// Smallest gap between consecutive attempts; empty with fewer than two.
[[nodiscard]] std::optional<double> min_intersample(const ClosedLoopTrace& trace);

struct RunSummary {
    Outcome outcome = Outcome::Completed;
    std::size_t attempts = 0;
    std::size_t successes = 0;
    std::size_t blocked = 0;
    std::optional<double> min_intersample;
    double max_state_norm = 0.0;
    double final_time = 0.0;
    Vector final_state;
    std::map<std::string, std::size_t> event_counts;
    std::size_t dos_intervals = 0;
    double delta_star = 0.0;
    double tau_star = 0.0;
};

[[nodiscard]] RunSummary summarize(const ClosedLoopTrace& trace);

/// Fixed header: t,x_1..x_n,u_1..u_m,V,e_norm,jammed,event
[[nodiscard]] std::string trace_csv_header(int state_dim, int input_dim);
void write_trace_csv(std::ostream& out, const ClosedLoopTrace& trace);

}  // namespace etcdos
