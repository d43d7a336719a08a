#include "etcdos/simulation.hpp"
#include "etcdos/theory.hpp"
#include "etcdos/trigger.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace etcdos;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

}  // namespace

TEST_CASE("trigger_margin examples") {
    const auto cert = benchmark_linear(0.5).certificate;
    // 0.5 * 4 - 4 * (4 * 0.1)^2
    CHECK(trigger_margin(cert, v1(2.0), v1(0.1)) == doctest::Approx(1.36));
    CHECK(trigger_margin(cert, v1(0.0), v1(0.0)) == 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng);
        CHECK(trigger_margin(cert, v1(x), v1(0.0)) == doctest::Approx(0.5 * x * x));
        CHECK(trigger_margin(cert, v1(x), v1(0.0)) >= 0.0);
    }
}

TEST_CASE("simplified_margin examples") {
    const TriggerRule rule{TriggerMode::Simplified, 0.5, 0.0884};
    CHECK(simplified_margin(rule, v1(1.0), v1(0.05)) == doctest::Approx(0.0384));
    CHECK(simplified_margin(rule, v1(-3.0), v1(0.0)) == doctest::Approx(0.0884 * 3.0));
    CHECK(simplified_margin(rule, v1(0.0), v1(0.0)) == 0.0);
    const auto cert = benchmark_linear().certificate;
    CHECK(rule_margin(rule, cert, v1(1.0), v1(0.05)) == simplified_margin(rule, v1(1.0), v1(0.05)));
    const TriggerRule ideal{TriggerMode::Ideal, 0.5, 0.0};
    CHECK(rule_margin(ideal, cert, v1(2.0), v1(0.1)) == trigger_margin(cert, v1(2.0), v1(0.1)));
}

TEST_CASE("rule validation") {
    CHECK_THROWS_AS((TriggerRule{TriggerMode::Simplified, 0.5, 0.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TriggerRule{TriggerMode::Ideal, 1.0, 0.0}.validate()), std::invalid_argument);
    CHECK_NOTHROW((TriggerRule{TriggerMode::Ideal, 0.5, 0.0}.validate()));
}

TEST_CASE("last_update_index") {
    SamplerState s(1);
    CHECK(last_update_index(s, 0.0) == -1);
    CHECK(s.last_index() == -1);
    CHECK_FALSE(s.has_sample());
    s.record(0.0, true, AttemptKind::Initial, v1(3.0));
    CHECK(last_update_index(s, 0.5) == 0);
    s.record(1.0, false, AttemptKind::Trigger, v1(2.0));
    CHECK(last_update_index(s, 1.5) == 0);
    CHECK(s.held_state()(0) == 3.0);
    s.record(2.0, true, AttemptKind::Retry, v1(1.5));
    CHECK(last_update_index(s, 1.99) == 0);
    CHECK(last_update_index(s, 2.0) == 2);
    CHECK(s.held_state()(0) == 1.5);
    CHECK(s.last_index() == 2);
}

TEST_CASE("prolonged DoS statistics") {
    SUBCASE("one blocked attempt inside the interval") {
        const DosSchedule sched({{1.0, 1.0}});
        SamplerState s(1);
        s.record(0.0, true, AttemptKind::Initial, v1(1.0));
        s.record(1.5, false, AttemptKind::Trigger, v1(1.0));
        s.record(2.3, true, AttemptKind::Retry, v1(1.0));
        const auto st = prolonged_dos_stats(sched, s, 5.0);
        REQUIRE(st.intervals.size() == 1);
        CHECK(st.intervals[0].delay == doctest::Approx(0.8));
        CHECK(st.intervals[0].start == 1.0);
        CHECK(st.intervals[0].end() == doctest::Approx(2.8));
        CHECK(st.delta_star == doctest::Approx(0.8));
        CHECK(st.measure(5.0) == doctest::Approx(1.8));
        CHECK(st.contains(2.7));
        CHECK_FALSE(st.contains(2.8));
        CHECK(st.delay_factor() == doctest::Approx(1.8));
    }
    SUBCASE("no attempt inside the interval") {
        const DosSchedule sched({{1.0, 1.0}});
        SamplerState s(1);
        s.record(0.0, true, AttemptKind::Initial, v1(1.0));
        s.record(3.0, true, AttemptKind::Trigger, v1(1.0));
        const auto st = prolonged_dos_stats(sched, s, 5.0);
        REQUIRE(st.intervals.size() == 1);
        CHECK(st.intervals[0].delay == 0.0);
        CHECK(st.intervals[0].end() == 2.0);
    }
    SUBCASE("tau_star is the shortest interval") {
        const DosSchedule sched({{0.0, 1.0}, {5.0, 0.5}});
        SamplerState s(1);
        CHECK(prolonged_dos_stats(sched, s, 10.0).tau_star == 0.5);
    }
    SUBCASE("retry at the DoS end never prolongs") {
        const DosSchedule sched({{1.0, 1.0}});
        SamplerState s(1);
        s.record(0.0, true, AttemptKind::Initial, v1(1.0));
        s.record(1.5, false, AttemptKind::Trigger, v1(1.0));
        s.record(2.0, true, AttemptKind::Retry, v1(1.0));
        const auto st = prolonged_dos_stats(sched, s, 5.0, RetryPolicy::AtDosEnd);
        CHECK(st.delta_star == 0.0);
        CHECK(st.delay_factor() == 1.0);
    }
    SUBCASE("a trailing blocked attempt is closed at the end time") {
        const DosSchedule sched({{1.0, 1.0}});
        SamplerState s(1);
        s.record(0.0, true, AttemptKind::Initial, v1(1.0));
        s.record(1.9, false, AttemptKind::Trigger, v1(1.0));
        CHECK(prolonged_dos_stats(sched, s, 2.5).delta_star == doctest::Approx(0.6));
    }
}

TEST_CASE("property: simplified rule implies the ideal rule inside the state ball") {
    const auto sys = benchmark_linear(0.5);
    const double sigma = estimate_sigma(sys.certificate, 2.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0), x0(0.1, 1.0), pulse(0.01, 0.05);
    int checked = 0;
    for (int run = 0; run < 20; ++run) {
        Scenario sc;
        sc.system = sys;
        sc.trigger = {TriggerMode::Simplified, 0.5, sigma};
        sc.x0 = v1(x0(rng) * (u(rng) < 0 ? -1.0 : 1.0));
        sc.horizon = 3.0;
        sc.attack = {GreedyPolicy{pulse(rng), 0.5}, DosBudget{0.05, 200.0}};
        const auto trace = simulate(sc);
        for (const auto& row : trace.rows) {
            if (row.x.norm() > 1.0) continue;
            const TriggerRule rule{TriggerMode::Simplified, 0.5, sigma};
            if (simplified_margin(rule, row.x, row.e) >= 0.0) {
                CHECK(trigger_margin(sys.certificate, row.x, row.e) >= -1e-15);
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("property: hold correctness and the prolonged measure estimate") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int run = 0; run < 30; ++run) {
        Scenario sc;
        sc.system = benchmark_linear(0.5);
        sc.x0 = v1(0.2 + u(rng));
        sc.horizon = 6.0;
        sc.integrator.retry_period = 0.002;
        const DosBudget budget{0.02 + 0.03 * u(rng), 300.0 + 300.0 * u(rng)};
        sc.attack = {GreedyPolicy{0.01 + 0.02 * u(rng), 0.5 + u(rng)}, budget};
        const auto trace = simulate(sc);
        REQUIRE(trace.outcome == Outcome::Completed);

        // The held state is constant between successes and equals x at the
        // last success.
        const auto& attempts = trace.sampler.attempts();
        Vector held;
        for (const auto& row : trace.rows) {
            if (row.event == EventTag::SampleSuccess) {
                CHECK(row.e.norm() == 0.0);
                held = row.x;
            } else if (held.size() > 0) {
                CHECK((row.held() - held).norm() <= 1e-12);
            }
        }
        CHECK_FALSE(attempts.empty());

        const auto st = trace.prolongation();
        for (std::size_t n = 0; n < st.intervals.size(); ++n) {
            CHECK(st.intervals[n].end() >= st.intervals[n].dos_end);
        }
        const double factor = st.delay_factor();
        for (double t = 0.0; t <= sc.horizon; t += 0.05) {
            CHECK(st.measure(t) <= (budget.kappa + t / budget.tau) * factor + 1e-12);
            CHECK(st.measure(t) >= xi_measure(trace.schedule, t) - 1e-12);
        }
    }
}
