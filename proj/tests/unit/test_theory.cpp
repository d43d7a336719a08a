#include "etcdos/theory.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace etcdos;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector v1(double a) { return Vector::Constant(1, a); }

IssCertificate square_cert() {
    IssCertificate c;
    c.V = [](const Vector& x) { return x.squaredNorm(); };
    c.alpha1 = ComparisonFunction::power(1.0, 2.0);
    c.alpha2 = ComparisonFunction::power(1.0, 2.0);
    c.gamma2 = ComparisonFunction::power(4.0, 2.0);
    c.lambda = 1.0;
    c.mu = 64.0;
    c.c = 0.5;
    return c;
}

// Independent evaluation of the decay rate.
double beta_oracle(double tau, double lambda, double c, double mu, double ds, double ts) {
    const double factor = ds > 0.0 && std::isfinite(ts) ? 1.0 + ds / ts : 1.0;
    return c * lambda - (lambda + 2.0 * mu) / tau * factor;
}

}  // namespace

TEST_CASE("rates") {
    const auto r = rates(1.0, 0.5, 0.25);
    CHECK(r.omega1 == doctest::Approx(0.5));
    CHECK(r.omega2 == doctest::Approx(1.0));
    CHECK(r.omega1 + r.omega2 == doctest::Approx(1.5));
    const auto lim = rates(2.0, 1.0 - 1e-12, 0.3);
    CHECK(lim.omega1 == doctest::Approx(2.0));
    CHECK(lim.omega2 == doctest::Approx(0.6));
    CHECK_THROWS_AS((void)rates(0.0, 0.5, 0.25), std::invalid_argument);
    CHECK_THROWS_AS((void)rates(1.0, 1.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS((void)rates(1.0, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("property: omega1 + omega2 = lambda + 2 mu") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lam(0.01, 10.0), c(0.001, 0.999), mu(0.01, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double l = lam(rng), ci = c(rng), m = mu(rng);
        const auto r = rates(l, ci, m);
        CHECK(r.omega1 + r.omega2 == doctest::Approx(l + 2.0 * m).epsilon(1e-14));
    }
}

TEST_CASE("decay_parameters examples") {
    SUBCASE("kappa = 0, no delay") {
        for (double tau : {1.0, 6.0, kInf}) CHECK(decay_parameters(0.0, tau, 1.0, 0.5, 0.25, 0.0, kInf).gamma == 1.0);
    }
    SUBCASE("tau = 6") {
        const auto d = decay_parameters(0.0, 6.0, 1.0, 0.5, 0.25, 0.0, kInf);
        CHECK(d.beta == doctest::Approx(0.25));
        CHECK(d.admissible);
        CHECK(d.tau_critical == doctest::Approx(3.0));
    }
    SUBCASE("tau = 1") {
        const auto d = decay_parameters(0.0, 1.0, 1.0, 0.5, 0.25, 0.0, kInf);
        CHECK(d.beta == doctest::Approx(-1.0));
        CHECK_FALSE(d.admissible);
        // The inverted literal inequality holds here even though beta < 0.
        CHECK(d.literal_condition);
    }
    SUBCASE("no attack") {
        const auto d = decay_parameters(0.0, kInf, 1.0, 0.5, 0.25, 0.0, kInf);
        CHECK(d.beta == doctest::Approx(0.5));
        CHECK(d.admissible);
    }
    SUBCASE("delay factor") {
        const auto d = decay_parameters(0.3, 12.0, 1.0, 0.5, 0.25, 0.1, 0.5);
        CHECK(d.delay_factor == doctest::Approx(1.2));
        CHECK(d.beta == doctest::Approx(0.5 - 1.5 / 12.0 * 1.2));
        CHECK(d.gamma == doctest::Approx(std::exp(0.3 * 1.5 * 1.2)));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS((void)decay_parameters(0.0, 6.0, 1.0, 0.5, 0.25, 0.1, 0.0), std::invalid_argument);
        CHECK_THROWS_AS((void)decay_parameters(-1.0, 6.0, 1.0, 0.5, 0.25, 0.0, kInf), std::invalid_argument);
        CHECK_THROWS_AS((void)decay_parameters(0.0, 0.0, 1.0, 0.5, 0.25, 0.0, kInf), std::invalid_argument);
    }
}

TEST_CASE("property: beta sign matches the critical tau") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double lambda = 0.1 + 3.0 * u(rng), c = 0.05 + 0.9 * u(rng), mu = 0.05 + 5.0 * u(rng);
        const double tau = 0.5 + 100.0 * u(rng), kappa = 2.0 * u(rng);
        const double ts = 0.01 + u(rng), ds = (i % 2) ? 0.0 : u(rng);
        const auto d = decay_parameters(kappa, tau, lambda, c, mu, ds, ts);
        CHECK(d.beta == doctest::Approx(beta_oracle(tau, lambda, c, mu, ds, ts)).epsilon(1e-12));
        CHECK(d.admissible == (d.beta > 0.0));
        CHECK(d.admissible == (tau > d.tau_critical));
        CHECK(d.gamma >= 1.0);
    }
}

TEST_CASE("bound_envelope") {
    const auto cert = square_cert();
    CHECK(bound_envelope(cert, 1.0, 0.25, 2.0, 4.0) == doctest::Approx(2.0 * std::exp(-0.5)));
    CHECK(bound_envelope(cert, 1.0, 0.25, 2.0, 4.0) == doctest::Approx(1.21306).epsilon(1e-5));
    CHECK(bound_envelope(cert, 1.0, 0.7, 3.0, 0.0) == doctest::Approx(3.0));
    for (double t : {0.0, 1.0, 100.0}) CHECK(bound_envelope(cert, 5.0, 0.3, 0.0, t) == 0.0);
}

TEST_CASE("property: envelope is nonincreasing in t when beta > 0") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto cert = square_cert();
    for (int i = 0; i < 500; ++i) {
        const double gamma = 1.0 + 5.0 * u(rng), beta = 1e-3 + u(rng), x0 = 10.0 * u(rng);
        double prev = bound_envelope(cert, gamma, beta, x0, 0.0);
        for (double t = 0.1; t < 20.0; t += 0.37) {
            const double cur = bound_envelope(cert, gamma, beta, x0, t);
            CHECK(cur <= prev * (1.0 + 1e-12));
            prev = cur;
        }
    }
}

TEST_CASE("region_radii") {
    IssCertificate lin;
    lin.alpha1 = ComparisonFunction::linear(1.0);
    lin.alpha2 = ComparisonFunction::linear(1.0);
    const auto a = region_radii(1.0, 1.0, lin);
    CHECK(a.state == doctest::Approx(1.0));
    CHECK(a.error == doctest::Approx(2.0));
    const auto b = region_radii(1.0, std::exp(1.0), square_cert());
    CHECK(b.state == doctest::Approx(1.64872).epsilon(1e-5));
    CHECK(b.error == doctest::Approx(3.29744).epsilon(1e-5));
    const auto z = region_radii(0.0, 3.0, square_cert());
    CHECK(z.state == 0.0);
    CHECK(z.error == 0.0);
}

TEST_CASE("estimate_L") {
    const auto sys = benchmark_linear();
    const double bench = estimate_L(sys.plant, sys.feedback, 1.0, 2.0);
    CHECK(bench <= 2.0 * 1.05 + 1e-12);
    CHECK(bench >= 2.0 * 1.05 * 0.99);

    Plant decay{1, 1, [](const Vector& x, const Vector&) { return Vector(-x); }};
    Feedback zero_fb{1, [](const Vector&) { return Vector::Zero(1); }};
    CHECK(estimate_L(decay, zero_fb, 1.0, 2.0) == doctest::Approx(1.05).epsilon(1e-9));
    CHECK(estimate_L(decay, zero_fb, 5.0, 0.1) == doctest::Approx(1.05).epsilon(1e-9));

    Plant zero{1, 1, [](const Vector& x, const Vector&) { return Vector::Zero(x.size()); }};
    CHECK(estimate_L(zero, zero_fb, 1.0, 2.0) == 0.0);

    Plant bad{1, 1, [](const Vector& x, const Vector&) { return Vector::Constant(x.size(), std::nan("")); }};
    CHECK_THROWS((void)estimate_L(bad, zero_fb, 1.0, 2.0));
}

TEST_CASE("estimate_L in two dimensions") {
    // f(x, u) = A x + u with u = K x; the ratio is bounded by the spectral
    // norm of [A + K, K] over (x, e), |x| + |e| >= sqrt(|x|^2 + |e|^2).
    Plant p{2, 2, [](const Vector& x, const Vector& u) {
                Vector f(2);
                f << 0.5 * x(1) + u(0), -x(0) + u(1);
                return f;
            }};
    Feedback k{2, [](const Vector& x) { return Vector(-x); }};
    Eigen::MatrixXd M(2, 4);
    M << -1.0, 0.5, -1.0, 0.0, -2.0, -1.0, 0.0, -1.0;
    const double upper = M.jacobiSvd().singularValues()(0);
    const double L = estimate_L(p, k, 1.0, 1.0, 40);
    CHECK(L <= 1.05 * upper + 1e-12);
    CHECK(L > 0.0);
}

TEST_CASE("estimate_sigma") {
    const double s = estimate_sigma(square_cert(), 2.0);
    CHECK(s == doctest::Approx(std::sqrt(0.5) / 8.0 / 1.05).epsilon(1e-9));

    for (double m : {0.5, 2.0, 7.0}) {
        // alpha1 = r, gamma2(4s) / (lambda (1 - c)) = m s  =>  q(s) = m s.
        IssCertificate c;
        c.alpha1 = ComparisonFunction::linear(1.0);
        c.gamma2 = ComparisonFunction::linear(m / 4.0 * 0.5);
        c.lambda = 1.0;
        c.c = 0.5;
        CHECK(estimate_sigma(c, 3.0) == doctest::Approx(1.0 / m / 1.05).epsilon(1e-9));
    }

    double previous = kInf;
    for (double cval : {0.5, 0.9, 0.99, 0.9999}) {
        auto c = square_cert();
        c.c = cval;
        const double sv = estimate_sigma(c, 2.0);
        CHECK(sv == doctest::Approx(std::sqrt(1.0 - cval) / 8.0 / 1.05).epsilon(1e-9));
        CHECK(sv < previous);
        previous = sv;
    }
    CHECK(previous < 2e-3);

    // alpha1 = r^2, gamma2 = r: q(s) ~ sqrt(s), not Lipschitz at 0.
    auto bad = square_cert();
    bad.gamma2 = ComparisonFunction::linear(1.0);
    CHECK_THROWS_AS((void)estimate_sigma(bad, 2.0), EstimationError);
}

TEST_CASE("min_intersample_theory") {
    CHECK(min_intersample_theory(1.0, 1.0) == doctest::Approx(0.5 * std::log(2.0)));
    CHECK(min_intersample_theory(1.0, 1.0) == doctest::Approx(0.34657).epsilon(1e-5));
    const double sigma = std::sqrt(0.5) / 8.0;
    const double eps = min_intersample_theory(2.0, sigma);
    CHECK(eps == doctest::Approx(0.25 * std::log((3.0 * sigma + 1.0) / (sigma + 1.0))).epsilon(1e-14));
    CHECK(std::abs(eps - 0.03761) < 5e-5);
    CHECK(min_intersample_theory(2.0, 1e12) == doctest::Approx(std::log(3.0) / 4.0).epsilon(1e-9));
    CHECK_THROWS_AS((void)min_intersample_theory(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)min_intersample_theory(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("analyze on the benchmark") {
    TheoryInputs in;
    in.lipschitz = 2.0;
    in.sigma = std::sqrt(0.5) / 8.0;
    in.budget = DosBudget{0.0, 516.0};
    const auto r = analyze(benchmark_linear(), in);
    CHECK(r.omega1 == doctest::Approx(0.5));
    CHECK(r.omega2 == doctest::Approx(128.5));
    CHECK(r.beta == doctest::Approx(0.25));
    CHECK(r.admissible);
    CHECK(r.L == 2.0);
    CHECK(r.lipschitz_source == "analytic");
    CHECK(r.epsilon_R == doctest::Approx(min_intersample_theory(2.0, in.sigma.value())));
    CHECK(r.r_X == doctest::Approx(1.0));
    CHECK(r.r_E == doctest::Approx(2.0));

    TheoryInputs est;
    const auto e = analyze(benchmark_linear(), est);
    CHECK(e.lipschitz_source == "estimate");
    CHECK(e.sigma_source == "estimate");
    CHECK(e.L == doctest::Approx(2.1).epsilon(1e-2));
    CHECK(e.sigma == doctest::Approx(std::sqrt(0.5) / 8.0 / 1.05).epsilon(1e-9));
}

TEST_CASE("verify_trace_bound") {
    Scenario sc;
    sc.system = benchmark_linear();
    sc.x0 = v1(1.0);
    sc.horizon = 5.0;
    const auto trace = simulate(sc);
    TheoryInputs in;
    in.lipschitz = 2.0;
    in.sigma = std::sqrt(0.5) / 8.0;
    const auto report = analyze(sc.system, in);

    const auto ok = verify_trace_bound(trace, sc.system.certificate, report, 1e-6);
    CHECK(ok.pass);
    CHECK(ok.max_exceedance <= 0.0);

    auto inflated = trace;
    for (auto& row : inflated.rows) {
        if (row.t == 0.0) continue;  // the envelope is anchored at the true x(0)
        row.x *= 10.0;
        row.V = row.x.squaredNorm();
    }
    const auto bad = verify_trace_bound(inflated, sc.system.certificate, report, 1e-6);
    CHECK_FALSE(bad.pass);
    CHECK(bad.max_exceedance > 0.0);

    Scenario zero = sc;
    zero.x0 = v1(0.0);
    const auto z = verify_trace_bound(simulate(zero), sc.system.certificate, report, 1e-6);
    CHECK(z.pass);
    CHECK(z.max_exceedance == 0.0);

    TheoryInputs inadmissible = in;
    inadmissible.budget = DosBudget{0.0, 2.0};
    const auto r2 = analyze(sc.system, inadmissible);
    CHECK_FALSE(r2.admissible);
    CHECK_THROWS_AS((void)verify_trace_bound(trace, sc.system.certificate, r2, 1e-6), std::invalid_argument);
    CHECK_NOTHROW((void)envelope_check(trace, sc.system.certificate, r2, 1e-6));
}

TEST_CASE("onset_bound_check") {
    SUBCASE("onset right after a success") {
        Scenario sc;
        sc.system = benchmark_linear();
        sc.x0 = v1(1.0);
        sc.horizon = 1.0;
        sc.attack = {OfflinePolicy{DosSchedule({{0.0, 0.1}, {0.5, 0.05}})}, std::nullopt};
        sc.retry = RetryPolicy::AtDosEnd;
        const auto trace = simulate(sc);
        const auto rep = onset_bound_check(trace, trace.schedule, sc.system.certificate);
        CHECK(rep.pass);
        CHECK(rep.onsets_checked == 2);
    }
    SUBCASE("origin") {
        Scenario sc;
        sc.system = benchmark_linear();
        sc.x0 = v1(0.0);
        sc.horizon = 1.0;
        sc.attack = {OfflinePolicy{DosSchedule({{0.2, 0.1}})}, std::nullopt};
        const auto trace = simulate(sc);
        const auto rep = onset_bound_check(trace, trace.schedule, sc.system.certificate);
        CHECK(rep.pass);
        CHECK(rep.worst_excess <= 0.0);
    }
    SUBCASE("randomized runs") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::size_t onsets = 0;
        for (int run = 0; run < 20; ++run) {
            Scenario sc;
            sc.system = benchmark_linear();
            sc.x0 = v1(0.1 + 2.0 * u(rng));
            sc.horizon = 6.0;
            sc.integrator.retry_period = 1e-3;
            sc.attack = {GreedyPolicy{0.01 + 0.02 * u(rng), 0.3 + u(rng)}, DosBudget{0.05, 400.0}};
            const auto trace = simulate(sc);
            const auto rep = onset_bound_check(trace, trace.schedule, sc.system.certificate);
            CHECK(rep.pass);
            onsets += rep.onsets_checked;
        }
        CHECK(onsets > 20);
    }
}

TEST_CASE("gronwall and inter-event checks on simplified-rule runs") {
    const double L = 2.0, sigma = std::sqrt(0.5) / 8.0;
    const double eps = min_intersample_theory(L, sigma);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int run = 0; run < 10; ++run) {
        Scenario sc;
        sc.system = benchmark_linear();
        sc.trigger = {TriggerMode::Simplified, 0.5, sigma};
        sc.x0 = v1(u(rng));
        sc.horizon = 4.0;
        const auto trace = simulate(sc);
        const auto g = gronwall_check(trace, L, region_radii(1.0, 1.0, sc.system.certificate), 1e-9);
        CHECK(g.pass);
        CHECK(g.rows_checked > 0);
        const auto ie = inter_event_check(trace, L, sigma, eps, 1e-9);
        CHECK(ie.pass);
        CHECK(ie.min_gap >= eps - 1e-9);
        CHECK(ie.worst_g_margin >= -1e-9);
    }
    // A constant that is too small must be caught.
    Scenario sc;
    sc.system = benchmark_linear();
    sc.trigger = {TriggerMode::Simplified, 0.5, sigma};
    sc.x0 = v1(1.0);
    sc.horizon = 2.0;
    const auto trace = simulate(sc);
    CHECK_FALSE(gronwall_check(trace, 0.2, region_radii(1.0, 1.0, sc.system.certificate), 1e-9).pass);
    CHECK_FALSE(inter_event_check(trace, L, sigma, 10.0 * eps, 1e-9).pass);
}
