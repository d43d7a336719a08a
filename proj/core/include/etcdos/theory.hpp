#pragma once

// Derived constants of the stability and inter-sample results, and checks of
// simulated traces against them.
//
// Admissibility is decided by positivity of the decay rate
//   beta = c lambda - ((lambda + 2 mu) / tau) (1 + Delta_* / tau_*),
// i.e. tau > (lambda + 2 mu)(1 + Delta_* / tau_*) / (c lambda). The literal
// condition tau > c lambda / (lambda + 2 mu) (1 + Delta_* / tau_*) is the
// inverted fraction; it is still reported (DecayParameters::literal_condition)
// but never used to decide anything.

#include "etcdos/dos.hpp"
#include "etcdos/plant.hpp"
#include "etcdos/simulation.hpp"
#include "etcdos/trigger.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace etcdos {

/// Raised when a Lipschitz-type constant cannot be estimated from samples.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Rates {
    double omega1 = 0.0;  // c lambda: decay rate while the trigger rule holds
    double omega2 = 0.0;  // lambda (1 - c) + 2 mu: growth rate under DoS
};

[[nodiscard]] Rates rates(double lambda, double c, double mu);

struct DecayParameters {
    double gamma = 1.0;
    double beta = 0.0;
    bool admissible = false;
    double delay_factor = 1.0;  // 1 + Delta_* / tau_*
    /// Smallest tau with beta > 0 (the frontier).
    double tau_critical = 0.0;
    /// tau > c lambda / (lambda + 2 mu) * delay_factor, reported for comparison.
    bool literal_condition = false;
};

/// tau may be +infinity (no attack). Throws std::invalid_argument when
/// tau_star = 0 with delta_star > 0, or on parameter-domain violations.
[[nodiscard]] DecayParameters decay_parameters(double kappa, double tau, double lambda, double c, double mu,
                                               double delta_star, double tau_star);

/// alpha1^{-1}(gamma e^{-beta t} alpha2(x0_norm)).
[[nodiscard]] double bound_envelope(const IssCertificate& cert, double gamma, double beta, double x0_norm, double t);

struct RegionRadii {
    double state = 0.0;  // r_X = alpha1^{-1}(gamma alpha2(R))
    double error = 0.0;  // r_E = 2 r_X
};

[[nodiscard]] RegionRadii region_radii(double R, double gamma, const IssCertificate& cert);

/// 1.05 * sup |f(x, k(x+e))| / (|x| + |e|) over a deterministic grid of the
/// two balls. Points per axis are reduced in higher dimension to keep the grid
/// below ~4e6 points.
[[nodiscard]] double estimate_L(const Plant& plant, const Feedback& feedback, double r_X, double r_E,
                                int grid_density = 200);

/// 1 / (1.05 * sup difference quotient of q(s) = alpha1^{-1}(gamma2(4 s) / (lambda (1 - c))))
/// on [0, r_E]. Throws EstimationError when the quotients blow up at the
/// origin (q not Lipschitz there); supply sigma analytically in that case.
[[nodiscard]] double estimate_sigma(const IssCertificate& cert, double r_E, int grid_density = 200);

/// (1 / 2L) ln((3 sigma + 1) / (sigma + 1)).
[[nodiscard]] double min_intersample_theory(double L, double sigma);

struct TheoryInputs {
    std::optional<DosBudget> budget;  // none: no attack (kappa = 0, tau = inf)
    double delta_star = 0.0;
    double tau_star = std::numeric_limits<double>::infinity();
    double R = 1.0;
    int grid_density = 200;
    std::optional<double> lipschitz;  // analytic override
    std::optional<double> sigma;      // analytic override
};

struct TheoryReport {
    double lambda = 0.0;
    double c = 0.0;
    double mu = 0.0;
    double kappa = 0.0;
    double tau = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    DecayParameters ideal;    // Delta_* = 0
    DecayParameters delayed;  // measured / predicted Delta_*, tau_*
    double gamma = 1.0;       // == delayed.gamma
    double beta = 0.0;        // == delayed.beta
    double delta_star = 0.0;
    double tau_star = 0.0;
    double R = 0.0;
    double r_X = 0.0;
    double r_E = 0.0;
    double L = 0.0;
    double sigma = 0.0;
    double epsilon_R = 0.0;
    std::string lipschitz_source;  // "estimate" or "analytic"
    std::string sigma_source;
    bool admissible = false;
};

[[nodiscard]] TheoryReport analyze(const ControlSystem& system, const TheoryInputs& inputs);

struct BoundCheck {
    bool pass = true;
    std::size_t rows = 0;
    /// max over rows of |x(t)| - envelope(t)
    double max_exceedance = -std::numeric_limits<double>::infinity();
    double witness_time = 0.0;
    /// max over rows of V(x(t)) - e^{-w1 (t - |Xi-bar(t)|) + w2 |Xi-bar(t)|} V(x(0))
    double max_lyapunov_exceedance = -std::numeric_limits<double>::infinity();
    double lyapunov_witness_time = 0.0;
};

/// Envelope and Lyapunov-level bounds at every row, using the run's own
/// prolonged DoS set. No admissibility precondition.
[[nodiscard]] BoundCheck envelope_check(const ClosedLoopTrace& trace, const IssCertificate& cert,
                                        const TheoryReport& theory, double tol);

/// envelope_check with the admissibility precondition (throws
/// std::invalid_argument for an inadmissible report).
[[nodiscard]] BoundCheck verify_trace_bound(const ClosedLoopTrace& trace, const IssCertificate& cert,
                                            const TheoryReport& theory, double tol);

struct OnsetBoundReport {
    bool pass = true;
    std::size_t onsets_checked = 0;
    /// Onsets that fall inside the previous prolonged interval, where the
    /// trigger condition need not hold and the bound is not claimed.
    std::size_t onsets_skipped = 0;
    /// max over onsets of lhs - rhs
    double worst_excess = -std::numeric_limits<double>::infinity();
    double witness_time = 0.0;
};

/// At every DoS onset h_n: |x(t_{k(h_n)})| <= 1/4 gamma2^{-1}(lambda (1 - c) V(x(h_n)))
///                                           + 1/4 gamma2^{-1}(mu V(x(h_n))).
[[nodiscard]] OnsetBoundReport onset_bound_check(const ClosedLoopTrace& trace, const DosSchedule& schedule,
                                        const IssCertificate& cert, double rtol = 1e-9);

struct GronwallReport {
    bool pass = true;
    std::size_t rows_checked = 0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    double witness_time = 0.0;
};

/// |e(t)| <= 1/2 (e^{2L (t - t_s)} - 1) |x(t_s)| + tol at every row inside the
/// two balls, t_s being the last successful update.
[[nodiscard]] GronwallReport gronwall_check(const ClosedLoopTrace& trace, double L, const RegionRadii& region,
                                            double tol);

struct InterEventReport {
    bool pass = true;
    std::size_t gaps_checked = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    double epsilon = 0.0;
    /// min over success-to-trigger gaps of g(gap) - sigma / (sigma + 1)
    double worst_g_margin = std::numeric_limits<double>::infinity();
};

/// Every inter-attempt gap >= epsilon - tol, and every trigger event that
/// follows a successful update satisfies g(t_{k+1} - t_k) >= sigma / (sigma + 1) - tol
/// with g(s) = 1/2 (e^{2 L s} - 1).
[[nodiscard]] InterEventReport inter_event_check(const ClosedLoopTrace& trace, double L, double sigma,
                                                 double epsilon, double tol);

}  // namespace etcdos
