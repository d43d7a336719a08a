#include "etcdos/dos.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace etcdos {

namespace {

constexpr double kBudgetTol = 1e-9;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

// Largest pulse that may start at `start` given the jammed time already spent.
double budget_room(const DosBudget& budget, double jammed_before, double start) {
    if (budget.is_vacuous()) {
        return std::numeric_limits<double>::infinity();
    }
    const double slack = budget.kappa + start / budget.tau - jammed_before;
    return std::max(0.0, slack / (1.0 - 1.0 / budget.tau));
}

}  // namespace

DosSchedule::DosSchedule(std::vector<DosInterval> intervals) : intervals_(std::move(intervals)) {
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& iv = intervals_[i];
        if (!std::isfinite(iv.start) || iv.start < 0.0) {
            throw std::invalid_argument("DoS interval " + std::to_string(i) + " has invalid start");
        }
        if (!(iv.duration > 0.0) || !std::isfinite(iv.duration)) {
            throw std::invalid_argument("DoS interval " + std::to_string(i) + " must have positive duration");
        }
        if (i > 0 && intervals_[i - 1].end() > iv.start) {
            throw std::invalid_argument("DoS intervals " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                        " are unsorted or overlapping");
        }
    }
}

double DosSchedule::total_duration() const noexcept {
    double sum = 0.0;
    for (const auto& iv : intervals_) sum += iv.duration;
    return sum;
}

double DosSchedule::min_duration() const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& iv : intervals_) m = std::min(m, iv.duration);
    return m;
}

const DosInterval* DosSchedule::interval_at(double t) const noexcept {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                               [](double v, const DosInterval& iv) { return v < iv.start; });
    if (it == intervals_.begin()) {
        return nullptr;
    }
    --it;
    return it->contains(t) ? &*it : nullptr;
}

void DosBudget::validate() const {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("budget kappa must be nonnegative");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw std::invalid_argument("budget tau must be positive");
    }
}

double xi_measure(const DosSchedule& schedule, double t) {
    double sum = 0.0;
    for (const auto& iv : schedule.intervals()) {
        if (iv.start >= t) {
            break;
        }
        sum += std::min(iv.end(), t) - iv.start;
    }
    return sum;
}

bool is_jammed(const DosSchedule& schedule, double t) { return schedule.interval_at(t) != nullptr; }

double union_measure(std::span<const DosInterval> intervals, double t) {
    std::vector<std::pair<double, double>> spans;
    spans.reserve(intervals.size());
    for (const auto& iv : intervals) {
        const double a = std::max(0.0, iv.start);
        const double b = std::min(iv.end(), t);
        if (b > a) spans.emplace_back(a, b);
    }
    std::sort(spans.begin(), spans.end());
    double total = 0.0;
    double cur_a = 0.0;
    double cur_b = -1.0;
    for (const auto& [a, b] : spans) {
        if (a > cur_b) {
            if (cur_b > cur_a) total += cur_b - cur_a;
            cur_a = a;
            cur_b = b;
        } else {
            cur_b = std::max(cur_b, b);
        }
    }
    if (cur_b > cur_a) total += cur_b - cur_a;
    return total;
}

BudgetVerdict verify_budget(const DosSchedule& schedule, const DosBudget& budget, double horizon) {
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("verify_budget: horizon must be positive");
    }
    budget.validate();

    double worst = 0.0;  // g(0) = 0
    double witness = 0.0;
    auto consider = [&](double t, double xi) {
        const double g = xi - t / budget.tau;
        if (g > worst) {
            worst = g;
            witness = t;
        }
    };

    double jammed = 0.0;
    for (const auto& iv : schedule.intervals()) {
        if (iv.start >= horizon) {
            break;
        }
        consider(iv.start, jammed);
        const double end = std::min(iv.end(), horizon);
        jammed += end - iv.start;
        consider(end, jammed);
    }
    consider(horizon, jammed);

    BudgetVerdict v;
    v.worst_slack = budget.kappa - worst;
    v.witness_time = witness;
    v.pass = v.worst_slack >= -kBudgetTol;
    return v;
}

std::string AttackPolicy::name() const {
    struct Visitor {
        std::string operator()(const NoAttack&) const { return "none"; }
        std::string operator()(const OfflinePolicy&) const { return "offline"; }
        std::string operator()(const PeriodicPolicy&) const { return "periodic"; }
        std::string operator()(const RandomPolicy&) const { return "random"; }
        std::string operator()(const GreedyPolicy&) const { return "greedy"; }
        std::string operator()(const ReactivePolicy&) const { return "reactive"; }
    };
    return std::visit(Visitor{}, kind);
}

std::optional<DosBudget> effective_budget(const AttackPolicy& policy) {
    if (policy.budget) {
        return policy.budget;
    }
    if (const auto* p = std::get_if<PeriodicPolicy>(&policy.kind)) {
        return DosBudget{p->duty * p->period, 1.0 / p->duty};
    }
    return std::nullopt;
}

namespace {

DosSchedule generate_periodic(const PeriodicPolicy& p, double horizon) {
    require_positive(p.period, "periodic.period");
    if (!(p.duty > 0.0 && p.duty < 1.0)) {
        throw std::invalid_argument("periodic.duty must lie in (0, 1)");
    }
    if (!(p.phase >= 0.0)) {
        throw std::invalid_argument("periodic.phase must be nonnegative");
    }
    std::vector<DosInterval> out;
    const double on = p.duty * p.period;
    for (long k = 0;; ++k) {
        const double start = p.phase + static_cast<double>(k) * p.period;
        if (start + on > horizon) break;
        out.push_back({start, on});
    }
    return DosSchedule(std::move(out));
}

DosSchedule generate_random(const RandomPolicy& p, const std::optional<DosBudget>& budget, double horizon) {
    require_positive(p.mean_gap, "random.mean_gap");
    require_positive(p.mean_duration, "random.mean_duration");
    if (!(p.min_gap >= 0.0)) {
        throw std::invalid_argument("random.min_gap must be nonnegative");
    }
    std::mt19937_64 rng(p.seed);
    std::exponential_distribution<double> gap_dist(1.0 / p.mean_gap);
    std::exponential_distribution<double> dur_dist(1.0 / p.mean_duration);

    std::vector<DosInterval> out;
    double cursor = 0.0;
    double jammed = 0.0;
    bool first = true;
    while (true) {
        const double gap = gap_dist(rng);
        double start = first ? gap : cursor + p.min_gap + gap;
        first = false;
        double duration = dur_dist(rng);
        if (start >= horizon) break;
        if (budget) {
            duration = std::min(duration, budget_room(*budget, jammed, start));
        }
        // too little budget left for a meaningful burst: skip it, keep drawing
        if (duration < 0.1 * p.mean_duration) {
            cursor = start;
            continue;
        }
        if (start + duration > horizon) break;
        out.push_back({start, duration});
        jammed += duration;
        cursor = start + duration;
    }
    return DosSchedule(std::move(out));
}

DosSchedule generate_greedy(const GreedyPolicy& p, const DosBudget& budget, double horizon) {
    require_positive(p.pulse, "greedy.pulse");
    if (!(p.gap >= 0.0)) {
        throw std::invalid_argument("greedy.gap must be nonnegative");
    }
    std::vector<DosInterval> out;
    double jammed = 0.0;
    double earliest = 0.0;
    while (true) {
        double start = earliest;
        if (!budget.is_vacuous()) {
            // g(start + pulse) <= kappa  <=>  start >= tau (jammed + pulse - kappa) - pulse
            start = std::max(start, budget.tau * (jammed + p.pulse - budget.kappa) - p.pulse);
        }
        if (start + p.pulse > horizon) break;
        out.push_back({start, p.pulse});
        jammed += p.pulse;
        earliest = start + p.pulse + p.gap;
    }
    return DosSchedule(std::move(out));
}

}  // namespace

DosSchedule generate(const AttackPolicy& policy, double horizon) {
    require_positive(horizon, "horizon");
    if (policy.budget) {
        policy.budget->validate();
    }
    DosSchedule schedule;
    if (const auto* off = std::get_if<OfflinePolicy>(&policy.kind)) {
        schedule = off->schedule;
    } else if (const auto* per = std::get_if<PeriodicPolicy>(&policy.kind)) {
        schedule = generate_periodic(*per, horizon);
    } else if (const auto* rnd = std::get_if<RandomPolicy>(&policy.kind)) {
        schedule = generate_random(*rnd, policy.budget, horizon);
    } else if (const auto* gr = std::get_if<GreedyPolicy>(&policy.kind)) {
        if (!policy.budget) throw std::invalid_argument("greedy policy requires kappa and tau");
        schedule = generate_greedy(*gr, *policy.budget, horizon);
    } else if (const auto* re = std::get_if<ReactivePolicy>(&policy.kind)) {
        if (!policy.budget) throw std::invalid_argument("reactive policy requires kappa and tau");
        require_positive(re->pulse, "reactive.pulse");
        return {};
    }

    if (const auto budget = effective_budget(policy)) {
        const auto verdict = verify_budget(schedule, *budget, horizon);
        if (!verdict.pass) {
            throw std::invalid_argument("generated schedule violates its budget (slack " +
                                        std::to_string(verdict.worst_slack) + " at t=" +
                                        std::to_string(verdict.witness_time) + ")");
        }
    }
    return schedule;
}

ReactiveAdversary::ReactiveAdversary(DosBudget budget, double pulse) : budget_(budget), pulse_(pulse) {
    budget_.validate();
    require_positive(pulse_, "reactive.pulse");
}

bool ReactiveAdversary::on_attempt(double t) {
    if (!intervals_.empty()) {
        const auto& last = intervals_.back();
        if (last.contains(t)) {
            return true;
        }
        if (t < last.end()) {
            throw std::invalid_argument("reactive adversary queried out of order");
        }
    }
    if (budget_room(budget_, jammed_total_, t) + kBudgetTol * 1e-3 < pulse_) {
        return false;
    }
    intervals_.push_back({t, pulse_});
    jammed_total_ += pulse_;
    return true;
}

}  // namespace etcdos
