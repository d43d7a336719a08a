#include "etcdos/theory.hpp"

#include <algorithm>
#include <cmath>

namespace etcdos {

namespace {

constexpr double kSafety = 1.05;

void check_parameters(double lambda, double c, double mu) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("c must lie in (0, 1)");
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
}

std::vector<double> axis_points(double radius, int count) {
    std::vector<double> pts;
    if (count < 2) count = 2;
    pts.reserve(static_cast<std::size_t>(count) + 1);
    for (int i = 0; i < count; ++i) {
        pts.push_back(-radius + 2.0 * radius * i / (count - 1));
    }
    pts.push_back(0.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// Calls fn for every point of the per-axis grid of [-r, r]^n that lies in the ball.
template <class Fn>
void for_each_ball_point(int n, const std::vector<double>& axis, double radius, Fn&& fn) {
    Vector p(n);
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        for (int i = 0; i < n; ++i) p[i] = axis[idx[static_cast<std::size_t>(i)]];
        if (p.norm() <= radius * (1.0 + 1e-12)) fn(p);
        int d = 0;
        while (d < n && ++idx[static_cast<std::size_t>(d)] == axis.size()) {
            idx[static_cast<std::size_t>(d)] = 0;
            ++d;
        }
        if (d == n) break;
    }
}

}  // namespace

Rates rates(double lambda, double c, double mu) {
    check_parameters(lambda, c, mu);
    return {c * lambda, lambda * (1.0 - c) + 2.0 * mu};
}

DecayParameters decay_parameters(double kappa, double tau, double lambda, double c, double mu, double delta_star,
                                 double tau_star) {
    check_parameters(lambda, c, mu);
    if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be nonnegative");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (!(delta_star >= 0.0)) throw std::invalid_argument("delta_star must be nonnegative");
    if (delta_star > 0.0 && !(tau_star > 0.0)) {
        throw std::invalid_argument("tau_star must be positive when delta_star > 0");
    }
    DecayParameters d;
    d.delay_factor = (delta_star > 0.0 && std::isfinite(tau_star)) ? 1.0 + delta_star / tau_star : 1.0;
    const double growth = lambda + 2.0 * mu;  // omega1 + omega2
    d.gamma = std::exp(kappa * growth * d.delay_factor);
    d.beta = c * lambda - (growth / tau) * d.delay_factor;
    d.admissible = d.beta > 0.0;
    d.tau_critical = growth * d.delay_factor / (c * lambda);
    d.literal_condition = tau > c * lambda / growth * d.delay_factor;
    return d;
}

double bound_envelope(const IssCertificate& cert, double gamma, double beta, double x0_norm, double t) {
    if (!(t >= 0.0)) throw std::domain_error("bound_envelope: negative time");
    return cert.alpha1.inverse(gamma * std::exp(-beta * t) * cert.alpha2(x0_norm));
}

RegionRadii region_radii(double R, double gamma, const IssCertificate& cert) {
    if (!(R >= 0.0)) throw std::invalid_argument("R must be nonnegative");
    if (!(gamma >= 1.0)) throw std::invalid_argument("gamma must be >= 1");
    const double r = cert.alpha1.inverse(gamma * cert.alpha2(R));
    return {r, 2.0 * r};
}

double estimate_L(const Plant& plant, const Feedback& feedback, double r_X, double r_E, int grid_density) {
    if (!(r_X > 0.0) || !(r_E > 0.0)) throw std::invalid_argument("estimate_L: radii must be positive");
    const int n = plant.state_dim;
    const double cap = 4e6;
    const int per_axis =
        std::max(3, std::min(grid_density, static_cast<int>(std::floor(std::pow(cap, 1.0 / (2.0 * n))))));
    const auto ax_x = axis_points(r_X, per_axis);
    const auto ax_e = axis_points(r_E, per_axis);

    double sup = 0.0;
    for_each_ball_point(n, ax_x, r_X, [&](const Vector& x) {
        for_each_ball_point(n, ax_e, r_E, [&](const Vector& e) {
            const double denom = x.norm() + e.norm();
            if (denom == 0.0) return;
            const Vector f = plant(x, feedback(Vector(x + e)));
            if (!f.allFinite()) throw EstimationError("estimate_L: non-finite vector field on the grid");
            sup = std::max(sup, f.norm() / denom);
        });
    });
    return kSafety * sup;
}

double estimate_sigma(const IssCertificate& cert, double r_E, int grid_density) {
    if (!(r_E > 0.0)) throw std::invalid_argument("estimate_sigma: radius must be positive");
    const double scale = cert.lambda * (1.0 - cert.c);
    auto q = [&](double s) { return cert.alpha1.inverse(cert.gamma2(4.0 * s) / scale); };

    const int cells = std::max(2, grid_density);
    const double h = r_E / cells;
    double sup = 0.0;
    double prev = q(0.0);
    for (int i = 1; i <= cells; ++i) {
        const double cur = q(i * h);
        sup = std::max(sup, (cur - prev) / h);
        prev = cur;
    }
    // Refine towards the origin: the quotients must settle for q to be Lipschitz there.
    double last = q(h) / h;
    for (int j = 1; j <= 6; ++j) {
        const double s = h * std::pow(10.0, -j);
        const double quotient = q(s) / s;
        if (quotient > 1.05 * last && j >= 3) {
            throw EstimationError(
                "estimate_sigma: difference quotients of alpha1^-1(gamma2(4s)/(lambda(1-c))) diverge at the "
                "origin; supply sigma analytically");
        }
        sup = std::max(sup, quotient);
        last = quotient;
    }
    if (!(sup > 0.0) || !std::isfinite(sup)) {
        throw EstimationError("estimate_sigma: degenerate difference quotients");
    }
    return 1.0 / (kSafety * sup);
}

double min_intersample_theory(double L, double sigma) {
    if (!(L > 0.0)) throw std::invalid_argument("L must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    return std::log((3.0 * sigma + 1.0) / (sigma + 1.0)) / (2.0 * L);
}

TheoryReport analyze(const ControlSystem& system, const TheoryInputs& in) {
    const auto& cert = system.certificate;
    cert.validate();
    TheoryReport r;
    r.lambda = cert.lambda;
    r.c = cert.c;
    r.mu = cert.mu;
    r.kappa = in.budget ? in.budget->kappa : 0.0;
    r.tau = in.budget ? in.budget->tau : std::numeric_limits<double>::infinity();
    const auto w = rates(cert.lambda, cert.c, cert.mu);
    r.omega1 = w.omega1;
    r.omega2 = w.omega2;
    r.delta_star = in.delta_star;
    r.tau_star = in.tau_star;
    r.ideal = decay_parameters(r.kappa, r.tau, cert.lambda, cert.c, cert.mu, 0.0, in.tau_star);
    r.delayed = decay_parameters(r.kappa, r.tau, cert.lambda, cert.c, cert.mu, in.delta_star, in.tau_star);
    r.gamma = r.delayed.gamma;
    r.beta = r.delayed.beta;
    r.admissible = r.delayed.admissible;

    r.R = in.R;
    const auto radii = region_radii(in.R, r.gamma, cert);
    r.r_X = radii.state;
    r.r_E = radii.error;

    if (in.lipschitz) {
        r.L = *in.lipschitz;
        r.lipschitz_source = "analytic";
    } else {
        r.L = estimate_L(system.plant, system.feedback, r.r_X, r.r_E, in.grid_density);
        r.lipschitz_source = "estimate";
    }
    if (in.sigma) {
        r.sigma = *in.sigma;
        r.sigma_source = "analytic";
    } else {
        r.sigma = estimate_sigma(cert, r.r_E, in.grid_density);
        r.sigma_source = "estimate";
    }
    r.epsilon_R = (r.L > 0.0 && r.sigma > 0.0) ? min_intersample_theory(r.L, r.sigma)
                                               : std::numeric_limits<double>::infinity();
    return r;
}

BoundCheck envelope_check(const ClosedLoopTrace& trace, const IssCertificate& cert, const TheoryReport& theory,
                          double tol) {
    BoundCheck check;
    if (trace.rows.empty()) return check;
    const auto stats = trace.prolongation();
    const double x0_norm = trace.rows.front().x.norm();
    const double V0 = trace.rows.front().V;
    for (const auto& row : trace.rows) {
        ++check.rows;
        const double env = bound_envelope(cert, theory.gamma, theory.beta, x0_norm, row.t);
        const double exceed = row.x.norm() - env;
        if (exceed > check.max_exceedance) {
            check.max_exceedance = exceed;
            check.witness_time = row.t;
        }
        if (exceed > tol) check.pass = false;

        const double xi_bar = stats.measure(row.t);
        const double level = std::exp(-theory.omega1 * (row.t - xi_bar) + theory.omega2 * xi_bar) * V0;
        const double lyap_exceed = row.V - level;
        if (lyap_exceed > check.max_lyapunov_exceedance) {
            check.max_lyapunov_exceedance = lyap_exceed;
            check.lyapunov_witness_time = row.t;
        }
        if (lyap_exceed > tol) check.pass = false;
    }
    return check;
}

BoundCheck verify_trace_bound(const ClosedLoopTrace& trace, const IssCertificate& cert, const TheoryReport& theory,
                              double tol) {
    if (!theory.admissible) {
        throw std::invalid_argument("verify_trace_bound: theory report is not admissible (beta <= 0)");
    }
    return envelope_check(trace, cert, theory, tol);
}

OnsetBoundReport onset_bound_check(const ClosedLoopTrace& trace, const DosSchedule& schedule, const IssCertificate& cert,
                          double rtol) {
    OnsetBoundReport report;
    const auto stats = prolonged_dos_stats(schedule, trace.sampler, trace.final_time, trace.retry);
    const double split = cert.lambda * (1.0 - cert.c);

    std::size_t row_cursor = 0;
    for (std::size_t n = 0; n < schedule.size(); ++n) {
        const double onset = schedule.intervals()[n].start;
        while (row_cursor < trace.rows.size() &&
               !(trace.rows[row_cursor].event == EventTag::DosStart && trace.rows[row_cursor].t == onset)) {
            ++row_cursor;
        }
        if (row_cursor == trace.rows.size()) break;  // onset after the end of the run
        const auto& row = trace.rows[row_cursor];

        if (n > 0 && onset < stats.intervals[n - 1].end()) {
            ++report.onsets_skipped;
            continue;
        }
        ++report.onsets_checked;
        const double lhs = row.held().norm();
        const double rhs = 0.25 * cert.gamma2.inverse(split * row.V) + 0.25 * cert.gamma2.inverse(cert.mu * row.V);
        const double excess = lhs - rhs;
        if (excess > report.worst_excess) {
            report.worst_excess = excess;
            report.witness_time = onset;
        }
        if (excess > rtol * std::max(rhs, std::numeric_limits<double>::min())) {
            report.pass = false;
        }
    }
    return report;
}

GronwallReport gronwall_check(const ClosedLoopTrace& trace, double L, const RegionRadii& region, double tol) {
    GronwallReport report;
    const auto& attempts = trace.sampler.attempts();
    std::size_t next_attempt = 0;
    std::optional<double> last_success;
    for (const auto& row : trace.rows) {
        while (next_attempt < attempts.size() && attempts[next_attempt].time <= row.t) {
            if (attempts[next_attempt].success) last_success = attempts[next_attempt].time;
            ++next_attempt;
        }
        if (!last_success) continue;
        if (row.x.norm() > region.state || row.e.norm() > region.error) continue;
        ++report.rows_checked;
        const double bound = 0.5 * std::expm1(2.0 * L * (row.t - *last_success)) * row.held().norm();
        const double excess = row.e.norm() - bound;
        if (excess > report.worst_excess) {
            report.worst_excess = excess;
            report.witness_time = row.t;
        }
        if (excess > tol) report.pass = false;
    }
    return report;
}

InterEventReport inter_event_check(const ClosedLoopTrace& trace, double L, double sigma, double epsilon, double tol) {
    InterEventReport report;
    report.epsilon = epsilon;
    const auto& a = trace.sampler.attempts();
    const double threshold = sigma / (sigma + 1.0);
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
        const double gap = a[k + 1].time - a[k].time;
        ++report.gaps_checked;
        report.min_gap = std::min(report.min_gap, gap);
        if (gap < epsilon - tol) report.pass = false;
        if (a[k].success && a[k + 1].kind == AttemptKind::Trigger) {
            const double g = 0.5 * std::expm1(2.0 * L * gap);
            report.worst_g_margin = std::min(report.worst_g_margin, g - threshold);
            if (g < threshold - tol) report.pass = false;
        }
    }
    return report;
}

}  // namespace etcdos
