#include "etcdos/simulation.hpp"
#include "etcdos/theory.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace etcdos;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Scenario benchmark(double x0, double horizon) {
    Scenario sc;
    sc.system = benchmark_linear(0.5);
    sc.x0 = v1(x0);
    sc.horizon = horizon;
    return sc;
}

Scenario full_jam(double horizon) {
    Scenario sc;
    sc.system = open_loop_unstable();
    sc.x0 = v1(1.0);
    sc.horizon = horizon;
    sc.attack = {OfflinePolicy{DosSchedule({{0.0, horizon + 1.0}})}, std::nullopt};
    return sc;
}

std::string csv(const ClosedLoopTrace& t) {
    std::ostringstream os;
    write_trace_csv(os, t);
    return os.str();
}

}  // namespace

TEST_CASE("benchmark with no attack decays inside the envelope") {
    const auto sc = benchmark(1.0, 10.0);
    const auto trace = simulate(sc);
    CHECK(trace.outcome == Outcome::Completed);
    CHECK(trace.final_time == doctest::Approx(10.0));
    TheoryInputs in;
    in.lipschitz = 2.0;
    in.sigma = std::sqrt(0.5) / 8.0;
    const auto report = analyze(sc.system, in);
    for (const auto& row : trace.rows) {
        CHECK(row.x.norm() <= bound_envelope(sc.system.certificate, 1.0, 0.5, 1.0, row.t) + 1e-9);
    }
    CHECK(verify_trace_bound(trace, sc.system.certificate, report, 1e-6).pass);
    CHECK(trace.rows.back().x.norm() < 1e-2);
}

TEST_CASE("full jam on the open-loop plant follows e^t") {
    const auto trace = simulate(full_jam(1.0));
    CHECK(trace.outcome == Outcome::Completed);
    CHECK(trace.rows.back().t == doctest::Approx(1.0));
    CHECK(std::abs(trace.rows.back().x(0) / std::exp(1.0) - 1.0) <= 1e-4);
    for (const auto& row : trace.rows) {
        CHECK(row.jammed);
        CHECK(row.u(0) == 0.0);
        CHECK(std::abs(row.x(0) - std::exp(row.t)) <= 1e-9 * std::exp(row.t));
    }
    const auto oracle = brute_force_simulate(full_jam(1.0));
    CHECK(std::abs(oracle.rows.back().x(0) / std::exp(1.0) - 1.0) <= 1e-4);
}

TEST_CASE("divergence is an outcome, not an exception") {
    const auto trace = simulate(full_jam(30.0));
    CHECK(trace.outcome == Outcome::Diverged);
    CHECK(trace.final_time == doctest::Approx(std::log(1e9)).epsilon(1e-3));
    CHECK(summarize(trace).outcome == Outcome::Diverged);
}

TEST_CASE("x0 = 0 stays at the origin") {
    auto sc = benchmark(0.0, 5.0);
    sc.attack = {PeriodicPolicy{1.0, 0.3, 0.2}, std::nullopt};
    const auto trace = simulate(sc);
    for (const auto& row : trace.rows) {
        CHECK(row.x(0) == 0.0);
        CHECK(row.e(0) == 0.0);
        CHECK(row.V == 0.0);
    }
    std::size_t triggers = 0;
    for (const auto& a : trace.sampler.attempts()) triggers += a.kind == AttemptKind::Trigger ? 1 : 0;
    CHECK(triggers == 0);
    const auto oracle = brute_force_simulate(sc);
    for (const auto& row : oracle.rows) CHECK(row.x(0) == 0.0);
}

TEST_CASE("identical scenarios give bit-identical traces") {
    auto sc = benchmark(0.7, 5.0);
    sc.attack = {RandomPolicy{1.0, 0.05, 0.2, 99}, DosBudget{0.1, 50.0}};
    sc.integrator.retry_period = 0.005;
    const auto a = simulate(sc);
    const auto b = simulate(sc);
    CHECK(csv(a) == csv(b));
    auto other = sc;
    std::get<RandomPolicy>(other.attack.kind).seed = 100;
    CHECK(csv(simulate(other)) != csv(a));
}

TEST_CASE("trace structure") {
    auto sc = benchmark(-1.3, 4.0);
    sc.attack = {GreedyPolicy{0.03, 0.7}, DosBudget{0.06, 100.0}};
    sc.integrator.retry_period = 0.004;
    const auto trace = simulate(sc);
    REQUIRE(trace.rows.size() > 2);
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        const auto& row = trace.rows[i];
        CHECK((row.e - (row.held() - row.x)).norm() == 0.0);
        CHECK(row.V == doctest::Approx(row.x.squaredNorm()));
        if (row.event == EventTag::SampleSuccess) CHECK(row.e.norm() == 0.0);
        CHECK(row.jammed == is_jammed(trace.schedule, row.t));
        if (i == 0) continue;
        CHECK(row.t >= trace.rows[i - 1].t);
        if (row.event != EventTag::SampleSuccess && (row.u - trace.rows[i - 1].u).norm() != 0.0) {
            FAIL("u changed outside a success row at t = " << row.t);
        }
    }
    std::ostringstream os;
    write_trace_csv(os, trace);
    const std::string text = os.str();
    const std::string header = text.substr(0, text.find('\n'));
    CHECK(header == "t,x_1,u_1,V,e_norm,jammed,event");
    CHECK(trace_csv_header(2, 3) == "t,x_1,x_2,u_1,u_2,u_3,V,e_norm,jammed,event");
}

TEST_CASE("min_intersample") {
    ClosedLoopTrace t;
    CHECK_FALSE(min_intersample(t).has_value());
    t.sampler.record(0.0, true, AttemptKind::Initial, v1(1.0));
    CHECK_FALSE(min_intersample(t).has_value());
    t.sampler.record(0.1, true, AttemptKind::Trigger, v1(1.0));
    t.sampler.record(0.3, true, AttemptKind::Trigger, v1(1.0));
    REQUIRE(min_intersample(t).has_value());
    CHECK(*min_intersample(t) == doctest::Approx(0.1));
}

TEST_CASE("simplified rule respects the minimum inter-event time") {
    const double L = 2.0;
    const double sigma = std::sqrt(0.5) / 8.0;
    const double eps = min_intersample_theory(L, sigma);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> x0(-1.0, 1.0);
    for (int run = 0; run < 10; ++run) {
        auto sc = benchmark(x0(rng), 5.0);
        sc.trigger = {TriggerMode::Simplified, 0.5, sigma};
        const auto trace = simulate(sc);
        const auto gap = min_intersample(trace);
        REQUIRE(gap.has_value());
        CHECK(*gap >= eps - 1e-9);
    }
}

TEST_CASE("event times agree with the dense oracle") {
    auto sc = benchmark(0.9, 2.0);
    sc.attack = {OfflinePolicy{DosSchedule({{0.31, 0.05}, {1.2, 0.02}})}, std::nullopt};
    sc.integrator.retry_period = 0.01;
    const auto fast = simulate(sc);
    const auto dense = brute_force_simulate(sc);
    const auto& a = fast.sampler.attempts();
    const auto& b = dense.sampler.attempts();
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(std::abs(a[k].time - b[k].time) <= 1e-3);
        CHECK(a[k].success == b[k].success);
    }
}

TEST_CASE("dense oracle converges as its step shrinks") {
    // The oracle detects events up to one dense step late, so its terminal
    // state drifts by roughly (events x step); a 10x finer step cuts it ~10x.
    auto sc = benchmark(1.0, 2.0);
    sc.attack = {OfflinePolicy{DosSchedule({{0.5, 0.03}, {1.4, 0.03}})}, std::nullopt};
    const double reference = simulate(sc).rows.back().x(0);
    const double coarse = std::abs(brute_force_simulate(sc, 1e-5).rows.back().x(0) - reference);
    const double fine = std::abs(brute_force_simulate(sc, 1e-6).rows.back().x(0) - reference);
    CHECK(fine < 0.3 * coarse);
    CHECK(coarse / std::abs(reference) < 1e-3);
}

TEST_CASE("scenario validation") {
    auto sc = benchmark(1.0, 1.0);
    sc.x0 = Vector::Zero(2);
    CHECK_THROWS_AS(simulate(sc), std::invalid_argument);
    sc = benchmark(1.0, -1.0);
    CHECK_THROWS_AS(simulate(sc), std::invalid_argument);
    sc = benchmark(1.0, 1.0);
    sc.integrator.step = 0.0;
    CHECK_THROWS_AS(simulate(sc), std::invalid_argument);
}

TEST_CASE("reactive adversary jams attempts within its budget") {
    auto sc = benchmark(1.0, 10.0);
    sc.attack = {ReactivePolicy{0.02}, DosBudget{0.1, 100.0}};
    sc.integrator.retry_period = 0.01;
    const auto trace = simulate(sc);
    CHECK(trace.outcome == Outcome::Completed);
    CHECK_FALSE(trace.schedule.empty());
    CHECK(verify_budget(trace.schedule, DosBudget{0.1, 100.0}, 10.0).pass);
    const auto s = summarize(trace);
    CHECK(s.blocked > 0);
    CHECK(s.attempts == s.successes + s.blocked);
}
