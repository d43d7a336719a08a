#include "etcdos/trigger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etcdos {

const char* to_string(TriggerMode mode) noexcept {
    return mode == TriggerMode::Ideal ? "ideal" : "simplified";
}

const char* to_string(RetryPolicy policy) noexcept {
    return policy == RetryPolicy::Periodic ? "periodic" : "at-dos-end";
}

const char* to_string(AttemptKind kind) noexcept {
    switch (kind) {
        case AttemptKind::Initial: return "initial";
        case AttemptKind::Trigger: return "trigger";
        case AttemptKind::Retry: return "retry";
    }
    return "unknown";
}

void TriggerRule::validate() const {
    if (!(c > 0.0 && c < 1.0)) {
        throw std::invalid_argument("trigger c must lie in (0, 1)");
    }
    if (mode == TriggerMode::Simplified && (!(sigma > 0.0) || !std::isfinite(sigma))) {
        throw std::invalid_argument("simplified trigger requires sigma > 0");
    }
}

double trigger_margin(const IssCertificate& cert, const Vector& x, const Vector& e) {
    if (x.size() != e.size()) {
        throw std::invalid_argument("trigger_margin: dimension mismatch");
    }
    return cert.lambda * (1.0 - cert.c) * cert.value(x) - cert.gamma2(4.0 * e.norm());
}

double simplified_margin(const TriggerRule& rule, const Vector& x, const Vector& e) {
    if (rule.mode != TriggerMode::Simplified) {
        throw std::invalid_argument("simplified_margin requires a simplified rule");
    }
    return rule.sigma * x.norm() - e.norm();
}

double rule_margin(const TriggerRule& rule, const IssCertificate& cert, const Vector& x, const Vector& e) {
    return rule.mode == TriggerMode::Ideal ? trigger_margin(cert, x, e) : simplified_margin(rule, x, e);
}

SamplerState::SamplerState(int state_dim) : held_(Vector::Zero(state_dim)) {}

void SamplerState::record(double t, bool success, AttemptKind kind, const Vector& x) {
    if (!attempts_.empty() && t < attempts_.back().time) {
        throw std::invalid_argument("sampler attempts must be time-ordered");
    }
    attempts_.push_back({t, success, kind});
    if (success) {
        held_ = x;
        last_index_ = static_cast<int>(attempts_.size()) - 1;
    }
}

std::vector<double> SamplerState::sample_times() const {
    std::vector<double> out;
    out.reserve(attempts_.size());
    for (const auto& a : attempts_) out.push_back(a.time);
    return out;
}

int last_update_index(const SamplerState& sampler, double t) {
    int index = -1;
    const auto& attempts = sampler.attempts();
    for (std::size_t k = 0; k < attempts.size() && attempts[k].time <= t; ++k) {
        if (attempts[k].success) {
            index = static_cast<int>(k);
        }
    }
    return index;
}

double ProlongationStats::delay_factor() const noexcept {
    if (delta_star <= 0.0 || !std::isfinite(tau_star)) {
        return 1.0;
    }
    return 1.0 + delta_star / tau_star;
}

double ProlongationStats::measure(double t) const {
    std::vector<DosInterval> spans;
    spans.reserve(intervals.size());
    for (const auto& p : intervals) spans.push_back({p.start, p.end() - p.start});
    return union_measure(spans, t);
}

bool ProlongationStats::contains(double t) const noexcept {
    return std::any_of(intervals.begin(), intervals.end(),
                       [t](const ProlongedInterval& p) { return t >= p.start && t < p.end(); });
}

ProlongationStats prolonged_dos_stats(const DosSchedule& schedule, const SamplerState& sampler, double end_time,
                                      RetryPolicy retry) {
    ProlongationStats stats;
    stats.tau_star = schedule.min_duration();
    const auto& attempts = sampler.attempts();

    std::size_t k = 0;
    for (const auto& iv : schedule.intervals()) {
        ProlongedInterval p{iv.start, iv.end(), 0.0, 0};
        while (k < attempts.size() && attempts[k].time < iv.start) ++k;
        for (std::size_t j = k; j < attempts.size() && iv.contains(attempts[j].time); ++j) {
            ++p.attempts;
            const double next = (j + 1 < attempts.size()) ? attempts[j + 1].time : std::max(end_time, attempts[j].time);
            if (retry == RetryPolicy::Periodic) {
                p.delay = std::max(p.delay, next - attempts[j].time);
            }
        }
        stats.delta_star = std::max(stats.delta_star, p.delay);
        stats.intervals.push_back(p);
    }
    return stats;
}

}  // namespace etcdos
