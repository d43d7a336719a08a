#pragma once

// Event-triggering rules, the sample-and-hold sampler state, and the
// DoS-prolongation statistics used by the delayed-update stability bound.

#include "etcdos/dos.hpp"
#include "etcdos/plant.hpp"

#include <vector>

namespace etcdos {

enum class TriggerMode {
    /// gamma2(4|e|) <= lambda (1 - c) V(x)
    Ideal,
    /// |e| <= sigma |x|
    Simplified,
};

/// What the sensor does after a blocked transmission.
enum class RetryPolicy {
    /// Retry every retry_period seconds until a transmission succeeds.
    Periodic,
    /// Retry exactly when the current DoS interval ends. Not implementable
    /// online; reproduces the idealized logic with no update delay.
    AtDosEnd,
};

[[nodiscard]] const char* to_string(TriggerMode mode) noexcept;
[[nodiscard]] const char* to_string(RetryPolicy policy) noexcept;

struct TriggerRule {
    TriggerMode mode = TriggerMode::Ideal;
    double c = 0.5;
    double sigma = 0.0;  // Simplified only

    void validate() const;

    friend bool operator==(const TriggerRule&, const TriggerRule&) = default;
};

/// lambda (1 - c) V(x) - gamma2(4 |e|), Euclidean norm. A sample is due when
/// this reaches zero from above.
[[nodiscard]] double trigger_margin(const IssCertificate& cert, const Vector& x, const Vector& e);

/// sigma |x| - |e|.
[[nodiscard]] double simplified_margin(const TriggerRule& rule, const Vector& x, const Vector& e);

/// Margin of whichever rule is active.
[[nodiscard]] double rule_margin(const TriggerRule& rule, const IssCertificate& cert, const Vector& x,
                                 const Vector& e);

enum class AttemptKind { Initial, Trigger, Retry };

[[nodiscard]] const char* to_string(AttemptKind kind) noexcept;

struct Attempt {
    double time = 0.0;
    bool success = false;
    AttemptKind kind = AttemptKind::Trigger;
};

/// Transmission attempts t_k with their outcome, and the actuator's held
/// state x(t_{k(t)}). Before the first success the held state is zero and
/// last_index is -1.
class SamplerState {
public:
    explicit SamplerState(int state_dim = 1);

    void record(double t, bool success, AttemptKind kind, const Vector& x);

    [[nodiscard]] const std::vector<Attempt>& attempts() const noexcept { return attempts_; }
    [[nodiscard]] std::vector<double> sample_times() const;
    [[nodiscard]] const Vector& held_state() const noexcept { return held_; }
    [[nodiscard]] int last_index() const noexcept { return last_index_; }
    [[nodiscard]] bool has_sample() const noexcept { return last_index_ >= 0; }

private:
    std::vector<Attempt> attempts_;
    Vector held_;
    int last_index_ = -1;
};

/// sup{k : attempt k succeeded and t_k <= t}, or -1.
[[nodiscard]] int last_update_index(const SamplerState& sampler, double t);

struct ProlongedInterval {
    double start = 0.0;      // h_n
    double dos_end = 0.0;    // h_n + tau_n
    double delay = 0.0;      // Delta_{S_n}
    std::size_t attempts = 0;

    [[nodiscard]] double end() const noexcept { return dos_end + delay; }
};

struct ProlongationStats {
    std::vector<ProlongedInterval> intervals;
    double delta_star = 0.0;
    double tau_star = std::numeric_limits<double>::infinity();

    /// 1 + Delta_* / tau_*, taking 0/inf as 0.
    [[nodiscard]] double delay_factor() const noexcept;
    /// |Xi-bar(t)|: measure of the union of prolonged intervals within [0, t].
    [[nodiscard]] double measure(double t) const;
    [[nodiscard]] bool contains(double t) const noexcept;
};

/// For each DoS interval, collects the attempts inside it and sets
/// Delta_{S_n} to the largest gap from one of those attempts to the next
/// (0 when there are none). A final blocked attempt with no successor is
/// closed at end_time. Under RetryPolicy::AtDosEnd no prolongation occurs.
[[nodiscard]] ProlongationStats prolonged_dos_stats(const DosSchedule& schedule, const SamplerState& sampler,
                                                    double end_time,
                                                    RetryPolicy retry = RetryPolicy::Periodic);

}  // namespace etcdos
