#include "etcdos/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace etcdos {

const char* to_string(EventTag tag) noexcept {
    switch (tag) {
        case EventTag::None: return "none";
        case EventTag::SampleSuccess: return "sample-success";
        case EventTag::SampleBlocked: return "sample-blocked";
        case EventTag::DosStart: return "dos-start";
        case EventTag::DosEnd: return "dos-end";
    }
    return "none";
}

const char* to_string(Outcome outcome) noexcept {
    switch (outcome) {
        case Outcome::Completed: return "completed";
        case Outcome::Diverged: return "diverged";
        case Outcome::Error: return "error";
    }
    return "error";
}

void Scenario::validate() const {
    const auto& sys = system;
    if (sys.plant.state_dim <= 0 || sys.plant.input_dim <= 0) {
        throw std::invalid_argument("plant dimensions must be positive");
    }
    if (sys.feedback.output_dim != sys.plant.input_dim) {
        throw std::invalid_argument("feedback output dimension must equal plant input dimension");
    }
    sys.certificate.validate();
    trigger.validate();
    if (trigger.c != sys.certificate.c) {
        throw std::invalid_argument("trigger c must match certificate c");
    }
    if (x0.size() != sys.plant.state_dim || !x0.allFinite()) {
        throw std::invalid_argument("x0 must be a finite vector of the plant's state dimension");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("horizon must be positive");
    }
    if (!(integrator.step > 0.0)) {
        throw std::invalid_argument("integrator step must be positive");
    }
    if (!(integrator.event_tolerance > 0.0)) {
        throw std::invalid_argument("event tolerance must be positive");
    }
    if (!(integrator.retry_period >= 0.0)) {
        throw std::invalid_argument("retry period must be nonnegative");
    }
    if (!(integrator.divergence_cap > 0.0)) {
        throw std::invalid_argument("divergence cap must be positive");
    }
    if (attack.is_online() && retry == RetryPolicy::AtDosEnd) {
        throw std::invalid_argument("retry-at-DoS-end cannot be combined with an online adversary");
    }
}

DosSchedule scenario_schedule(const Scenario& scenario) {
    if (scenario.attack.is_online()) {
        return {};
    }
    return generate(scenario.attack, scenario.horizon);
}

namespace {

// DoS channel seen by the sampler: a fixed schedule, or one that an online
// adversary extends at transmission attempts. Boundaries are visited in the
// order start_0, end_0, start_1, ... which is time-sorted with ends first on ties.
class Channel {
public:
    explicit Channel(const Scenario& sc) {
        if (sc.attack.is_online()) {
            const auto& re = std::get<ReactivePolicy>(sc.attack.kind);
            adversary_.emplace(*sc.attack.budget, re.pulse);
        } else {
            intervals_ = generate(sc.attack, sc.horizon).intervals();
        }
    }

    [[nodiscard]] const std::vector<DosInterval>& intervals() const {
        return adversary_ ? adversary_->realized() : intervals_;
    }

    [[nodiscard]] bool jammed(double t) const {
        const auto& ivs = intervals();
        return std::any_of(ivs.begin(), ivs.end(), [t](const DosInterval& iv) { return iv.contains(t); });
    }

    /// Returns {jammed, new interval started}.
    std::pair<bool, bool> on_attempt(double t) {
        if (jammed(t)) {
            return {true, false};
        }
        if (adversary_) {
            const std::size_t before = adversary_->realized().size();
            const bool jam = adversary_->on_attempt(t);
            return {jam, adversary_->realized().size() > before};
        }
        return {false, false};
    }

    [[nodiscard]] double current_interval_end(double t) const {
        for (const auto& iv : intervals()) {
            if (iv.contains(t)) return iv.end();
        }
        return t;
    }

    [[nodiscard]] std::optional<double> next_boundary() const {
        if (cursor_ >= 2 * intervals().size()) return std::nullopt;
        return boundary_time(cursor_);
    }

    /// Pops every boundary at or before t; returns their tags in order.
    std::vector<EventTag> pop_boundaries(double t) {
        std::vector<EventTag> tags;
        while (cursor_ < 2 * intervals().size() && boundary_time(cursor_) <= t) {
            tags.push_back(cursor_ % 2 == 0 ? EventTag::DosStart : EventTag::DosEnd);
            ++cursor_;
        }
        return tags;
    }

    [[nodiscard]] DosSchedule realized() const { return DosSchedule(intervals()); }

private:
    [[nodiscard]] double boundary_time(std::size_t index) const {
        const auto& iv = intervals()[index / 2];
        return index % 2 == 0 ? iv.start : iv.end();
    }

    std::vector<DosInterval> intervals_;
    std::optional<ReactiveAdversary> adversary_;
    std::size_t cursor_ = 0;
};

Vector rk4(const Plant& plant, const Vector& u, const Vector& x, double dt) {
    const Vector k1 = plant(x, u);
    const Vector k2 = plant(x + 0.5 * dt * k1, u);
    const Vector k3 = plant(x + 0.5 * dt * k2, u);
    const Vector k4 = plant(x + dt * k3, u);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool diverged(const Vector& x, double cap) { return !x.allFinite() || x.norm() > cap; }

// Shared bookkeeping of a run: rows, sampler, held input.
class RunRecorder {
public:
    RunRecorder(const Scenario& sc, ClosedLoopTrace& trace)
        : sc_(sc), trace_(trace), u_(Vector::Zero(sc.system.plant.input_dim)) {
        trace_.sampler = SamplerState(sc.system.plant.state_dim);
        trace_.retry = sc.retry;
        trace_.state_dim = sc.system.plant.state_dim;
        trace_.input_dim = sc.system.plant.input_dim;
    }

    [[nodiscard]] const Vector& input() const { return u_; }
    [[nodiscard]] Vector error(const Vector& x) const { return trace_.sampler.held_state() - x; }

    void row(double t, const Vector& x, bool jammed, EventTag tag) {
        trace_.rows.push_back({t, x, u_, sc_.system.certificate.value(x), error(x), jammed, tag});
    }

    /// Records an attempt; returns true on success.
    bool attempt(double t, const Vector& x, bool jammed, AttemptKind kind) {
        trace_.sampler.record(t, !jammed, kind, x);
        if (!jammed) {
            u_ = sc_.system.feedback(x);
        }
        row(t, x, jammed, jammed ? EventTag::SampleBlocked : EventTag::SampleSuccess);
        return !jammed;
    }

    void finish(double t, Outcome outcome, std::string message = {}) {
        trace_.final_time = t;
        trace_.outcome = outcome;
        trace_.message = std::move(message);
    }

private:
    const Scenario& sc_;
    ClosedLoopTrace& trace_;
    Vector u_;
};

}  // namespace

ClosedLoopTrace simulate(const Scenario& sc) {
    sc.validate();
    const auto& plant = sc.system.plant;
    const auto& cert = sc.system.certificate;
    const double h = sc.integrator.step;
    const double retry_period = sc.integrator.effective_retry_period();
    const double cap = sc.integrator.divergence_cap;

    ClosedLoopTrace trace;
    RunRecorder rec(sc, trace);
    Channel channel(sc);

    double t = 0.0;
    Vector x = sc.x0;
    std::optional<double> retry_at;

    auto attempt = [&](AttemptKind kind) {
        auto [jam, started] = channel.on_attempt(t);
        if (started) {
            for (auto tag : channel.pop_boundaries(t)) rec.row(t, x, true, tag);
        }
        if (rec.attempt(t, x, jam, kind)) {
            retry_at.reset();
        } else {
            retry_at = sc.retry == RetryPolicy::Periodic ? t + retry_period : channel.current_interval_end(t);
        }
    };

    auto margin = [&](const Vector& xs) { return rule_margin(sc.trigger, cert, xs, rec.error(xs)); };

    for (auto tag : channel.pop_boundaries(0.0)) rec.row(0.0, x, channel.jammed(0.0), tag);
    attempt(AttemptKind::Initial);

    std::size_t grid_index = 1;
    while (t < sc.horizon) {
        const double grid_next = std::min(static_cast<double>(grid_index) * h, sc.horizon);
        double t_next = grid_next;
        if (retry_at) t_next = std::min(t_next, *retry_at);
        if (auto b = channel.next_boundary()) t_next = std::min(t_next, *b);
        const double dt = t_next - t;

        Vector x_next = rk4(plant, rec.input(), x, dt);
        if (diverged(x_next, cap)) {
            t = t_next;
            x = x_next;
            if (x.allFinite()) rec.row(t, x, channel.jammed(t), EventTag::None);
            rec.finish(t, Outcome::Diverged, "state norm exceeded divergence cap");
            trace.schedule = channel.realized();
            return trace;
        }

        if (!retry_at && margin(x_next) < 0.0) {
            // Localize the crossing; keep the side where the rule still holds.
            double lo = 0.0;
            double hi = dt;
            while (hi - lo > sc.integrator.event_tolerance) {
                const double mid = lo + 0.5 * (hi - lo);
                if (margin(rk4(plant, rec.input(), x, mid)) < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if (lo > 0.0) {
                x = rk4(plant, rec.input(), x, lo);
                t += lo;
            }
            attempt(AttemptKind::Trigger);
            continue;
        }

        t = t_next;
        x = std::move(x_next);
        const std::size_t rows_before = trace.rows.size();
        for (auto tag : channel.pop_boundaries(t)) rec.row(t, x, channel.jammed(t), tag);
        if (retry_at && *retry_at <= t) {
            attempt(AttemptKind::Retry);
        }
        if (trace.rows.size() == rows_before) {
            rec.row(t, x, channel.jammed(t), EventTag::None);
        }
        while (static_cast<double>(grid_index) * h <= t) ++grid_index;
    }

    rec.finish(t, Outcome::Completed);
    trace.schedule = channel.realized();
    return trace;
}

ClosedLoopTrace brute_force_simulate(const Scenario& sc, double dense_step, double record_interval) {
    sc.validate();
    if (!(dense_step > 0.0)) {
        throw std::invalid_argument("dense step must be positive");
    }
    if (record_interval <= 0.0) record_interval = sc.integrator.step;
    const auto record_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(record_interval / dense_step)));

    const auto& plant = sc.system.plant;
    const auto& cert = sc.system.certificate;
    const double retry_period = sc.integrator.effective_retry_period();

    std::vector<DosInterval> dos = scenario_schedule(sc).intervals();
    std::optional<ReactiveAdversary> adversary;
    if (sc.attack.is_online()) {
        adversary.emplace(*sc.attack.budget, std::get<ReactivePolicy>(sc.attack.kind).pulse);
    }
    auto jammed_at = [&](double t) {
        return std::any_of(dos.begin(), dos.end(), [t](const DosInterval& iv) { return iv.contains(t); });
    };

    ClosedLoopTrace trace;
    RunRecorder rec(sc, trace);
    double t = 0.0;
    Vector x = sc.x0;
    bool retry_pending = false;
    double retry_time = 0.0;

    auto attempt = [&](AttemptKind kind) {
        bool jam = jammed_at(t);
        if (!jam && adversary) {
            jam = adversary->on_attempt(t);
            if (jam) {
                dos = adversary->realized();
                rec.row(t, x, true, EventTag::DosStart);
            }
        }
        retry_pending = !rec.attempt(t, x, jam, kind);
        if (!retry_pending) return;
        if (sc.retry == RetryPolicy::Periodic) {
            retry_time = t + retry_period;
        } else {
            for (const auto& iv : dos) {
                if (iv.contains(t)) retry_time = iv.end();
            }
        }
    };

    // every boundary strictly after `after`, ascending
    auto next_boundary = [&](double after) -> std::optional<double> {
        std::optional<double> best;
        for (const auto& iv : dos) {
            for (double b : {iv.start, iv.end()}) {
                if (b > after && (!best || b < *best)) best = b;
            }
        }
        return best;
    };

    for (const auto& iv : dos) {
        if (iv.start == 0.0) rec.row(0.0, x, true, EventTag::DosStart);
    }
    attempt(AttemptKind::Initial);

    std::size_t step_index = 1;
    while (t < sc.horizon) {
        const double grid_t = std::min(static_cast<double>(step_index) * dense_step, sc.horizon);
        double t_next = grid_t;
        if (retry_pending) t_next = std::min(t_next, retry_time);
        if (auto b = next_boundary(t)) t_next = std::min(t_next, *b);
        const double dt = t_next - t;
        const Vector& u = rec.input();

        const Vector k1 = plant(x, u);
        const Vector k2 = plant(x + 0.5 * dt * k1, u);
        const Vector k3 = plant(x + 0.5 * dt * k2, u);
        const Vector k4 = plant(x + dt * k3, u);
        const double t_prev = t;
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t_next;

        if (!x.allFinite() || x.norm() > sc.integrator.divergence_cap) {
            if (x.allFinite()) rec.row(t, x, jammed_at(t), EventTag::None);
            rec.finish(t, Outcome::Diverged, "state norm exceeded divergence cap");
            trace.schedule = DosSchedule(dos);
            return trace;
        }

        const std::size_t rows_before = trace.rows.size();
        for (const auto& iv : dos) {
            if (iv.end() > t_prev && iv.end() <= t) rec.row(t, x, jammed_at(t), EventTag::DosEnd);
        }
        for (const auto& iv : dos) {
            if (iv.start > t_prev && iv.start <= t) rec.row(t, x, true, EventTag::DosStart);
        }
        if (retry_pending) {
            if (retry_time <= t) attempt(AttemptKind::Retry);
        } else if (rule_margin(sc.trigger, cert, x, rec.error(x)) < 0.0) {
            attempt(AttemptKind::Trigger);
        }
        if (t == grid_t) {
            if (trace.rows.size() == rows_before && (step_index % record_every == 0 || t >= sc.horizon)) {
                rec.row(t, x, jammed_at(t), EventTag::None);
            }
            ++step_index;
        }
    }

    rec.finish(t, Outcome::Completed);
    trace.schedule = DosSchedule(dos);
    return trace;
}

std::optional<double> min_intersample(const ClosedLoopTrace& trace) {
    const auto& a = trace.sampler.attempts();
    if (a.size() < 2) {
        return std::nullopt;
    }
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
        m = std::min(m, a[k + 1].time - a[k].time);
    }
    return m;
}

RunSummary summarize(const ClosedLoopTrace& trace) {
    RunSummary s;
    s.outcome = trace.outcome;
    for (const auto& a : trace.sampler.attempts()) {
        ++s.attempts;
        (a.success ? s.successes : s.blocked)++;
    }
    s.min_intersample = min_intersample(trace);
    for (const auto& r : trace.rows) {
        s.max_state_norm = std::max(s.max_state_norm, r.x.norm());
        if (r.event != EventTag::None) ++s.event_counts[to_string(r.event)];
    }
    s.final_time = trace.final_time;
    if (!trace.rows.empty()) s.final_state = trace.rows.back().x;
    s.dos_intervals = trace.schedule.size();
    const auto stats = trace.prolongation();
    s.delta_star = stats.delta_star;
    s.tau_star = stats.tau_star;
    return s;
}

std::string trace_csv_header(int state_dim, int input_dim) {
    std::string h = "t";
    for (int i = 1; i <= state_dim; ++i) h += ",x_" + std::to_string(i);
    for (int i = 1; i <= input_dim; ++i) h += ",u_" + std::to_string(i);
    h += ",V,e_norm,jammed,event";
    return h;
}

namespace {

void put_number(std::ostream& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, end - buf);
}

}  // namespace

void write_trace_csv(std::ostream& out, const ClosedLoopTrace& trace) {
    out << trace_csv_header(trace.state_dim, trace.input_dim) << '\n';
    for (const auto& r : trace.rows) {
        put_number(out, r.t);
        for (Eigen::Index i = 0; i < r.x.size(); ++i) {
            out << ',';
            put_number(out, r.x[i]);
        }
        for (Eigen::Index i = 0; i < r.u.size(); ++i) {
            out << ',';
            put_number(out, r.u[i]);
        }
        out << ',';
        put_number(out, r.V);
        out << ',';
        put_number(out, r.e.norm());
        out << ',' << (r.jammed ? 1 : 0) << ',' << to_string(r.event) << '\n';
    }
}

}  // namespace etcdos
