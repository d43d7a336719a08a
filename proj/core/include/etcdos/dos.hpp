#pragma once

// Denial-of-Service schedules: half-open jamming intervals [h_n, h_n + tau_n),
// the (kappa, tau) budget |Xi(t)| <= kappa + t / tau, and generators that
// realize budget-respecting attacks.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace etcdos {

struct DosInterval {
    double start = 0.0;
    double duration = 0.0;

    [[nodiscard]] double end() const noexcept { return start + duration; }
    [[nodiscard]] bool contains(double t) const noexcept { return t >= start && t < end(); }

    friend bool operator==(const DosInterval&, const DosInterval&) = default;
};

/// Ordered, non-overlapping, positive-duration intervals. Adjacent intervals
/// (one ending exactly where the next starts) are allowed.
class DosSchedule {
public:
    DosSchedule() = default;
    /// Throws std::invalid_argument on unsorted, overlapping or non-positive input.
    explicit DosSchedule(std::vector<DosInterval> intervals);

    [[nodiscard]] const std::vector<DosInterval>& intervals() const noexcept { return intervals_; }
    [[nodiscard]] bool empty() const noexcept { return intervals_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return intervals_.size(); }
    [[nodiscard]] double total_duration() const noexcept;
    /// inf_n tau_n; +infinity for an empty schedule.
    [[nodiscard]] double min_duration() const noexcept;
    /// Interval containing t, if any.
    [[nodiscard]] const DosInterval* interval_at(double t) const noexcept;

    friend bool operator==(const DosSchedule&, const DosSchedule&) = default;

private:
    std::vector<DosInterval> intervals_;
};

struct DosBudget {
    double kappa = 0.0;
    double tau = 1.0;

    /// kappa >= 0, tau > 0.
    void validate() const;
    /// tau <= 1 admits every schedule; such a budget constrains nothing.
    [[nodiscard]] bool is_vacuous() const noexcept { return tau <= 1.0; }

    friend bool operator==(const DosBudget&, const DosBudget&) = default;
};

/// Lebesgue measure of the jammed set within [0, t].
[[nodiscard]] double xi_measure(const DosSchedule& schedule, double t);

/// True iff t lies in some [h_n, h_n + tau_n).
[[nodiscard]] bool is_jammed(const DosSchedule& schedule, double t);

/// Measure of the union of possibly overlapping [start, end) intervals within [0, t].
[[nodiscard]] double union_measure(std::span<const DosInterval> intervals, double t);

struct BudgetVerdict {
    bool pass = true;
    /// kappa - max_t (|Xi(t)| - t / tau); negative on failure.
    double worst_slack = 0.0;
    double witness_time = 0.0;
};

/// Exact check of |Xi(t)| - t/tau <= kappa on [0, horizon]: the excess is
/// piecewise linear, so it suffices to evaluate it at 0, every interval
/// endpoint inside the horizon, and the horizon itself.
[[nodiscard]] BudgetVerdict verify_budget(const DosSchedule& schedule, const DosBudget& budget, double horizon);

struct NoAttack {
    friend bool operator==(const NoAttack&, const NoAttack&) = default;
};

struct OfflinePolicy {
    DosSchedule schedule;
    friend bool operator==(const OfflinePolicy&, const OfflinePolicy&) = default;
};

/// [k P + phase, k P + phase + duty P) for every k that fits in the horizon.
struct PeriodicPolicy {
    double period = 1.0;
    double duty = 0.1;
    double phase = 0.0;
    friend bool operator==(const PeriodicPolicy&, const PeriodicPolicy&) = default;
};

/// Exponential gaps (shifted by min_gap) and exponential durations, clipped
/// to the remaining budget slack when a budget is declared.
struct RandomPolicy {
    double mean_gap = 1.0;
    double mean_duration = 0.1;
    double min_gap = 0.0;
    std::uint64_t seed = 1;
    friend bool operator==(const RandomPolicy&, const RandomPolicy&) = default;
};

/// Pulses of fixed length placed as early as the budget slack allows,
/// separated by at least `gap`.
struct GreedyPolicy {
    double pulse = 0.1;
    double gap = 0.0;
    friend bool operator==(const GreedyPolicy&, const GreedyPolicy&) = default;
};

/// Online adversary: jams each transmission attempt with a pulse whenever the
/// budget slack permits (see ReactiveAdversary).
struct ReactivePolicy {
    double pulse = 0.1;
    friend bool operator==(const ReactivePolicy&, const ReactivePolicy&) = default;
};

using AttackKind = std::variant<NoAttack, OfflinePolicy, PeriodicPolicy, RandomPolicy, GreedyPolicy, ReactivePolicy>;

struct AttackPolicy {
    AttackKind kind = NoAttack{};
    std::optional<DosBudget> budget;

    [[nodiscard]] bool is_online() const noexcept { return std::holds_alternative<ReactivePolicy>(kind); }
    [[nodiscard]] std::string name() const;

    friend bool operator==(const AttackPolicy&, const AttackPolicy&) = default;
};

/// Declared budget, or the natural one for periodic attacks
/// (kappa = duty * period, tau = 1 / duty). Empty when nothing is declared.
[[nodiscard]] std::optional<DosBudget> effective_budget(const AttackPolicy& policy);

/// Offline schedule over [0, horizon]. Every interval fits inside the
/// horizon. The result is checked against effective_budget(); infeasible
/// parameters throw std::invalid_argument. Reactive policies are online and
/// yield an empty schedule (intervals are created during simulation).
[[nodiscard]] DosSchedule generate(const AttackPolicy& policy, double horizon);

class ReactiveAdversary {
public:
    ReactiveAdversary(DosBudget budget, double pulse);

    /// Called at every transmission attempt; returns true when the attempt is
    /// jammed. Starts a new pulse at t if the budget slack permits it.
    bool on_attempt(double t);

    [[nodiscard]] const std::vector<DosInterval>& realized() const noexcept { return intervals_; }
    [[nodiscard]] DosSchedule schedule() const { return DosSchedule(intervals_); }

private:
    DosBudget budget_;
    double pulse_;
    std::vector<DosInterval> intervals_;
    double jammed_total_ = 0.0;
};

}  // namespace etcdos
