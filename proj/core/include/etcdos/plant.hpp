#pragma once

// Plant dx/dt = f(x, u), state feedback u = k(x) and the ISS-Lyapunov
// certificate (V, alpha1, alpha2, gamma2, lambda) together with the growth
// constant mu bounding gamma2(4r) <= mu * alpha1(r).
//
// Naming note: the feedback law is Feedback::law. The index of the last
// successful control update is a separate quantity (see
// SamplerState::last_index in trigger.hpp); the two are never conflated even
// though both are traditionally written with the letter k.

#include "etcdos/comparison_function.hpp"
#include "etcdos/polynomial.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace etcdos {

using VectorField = std::function<Vector(const Vector& x, const Vector& u)>;
using FeedbackLaw = std::function<Vector(const Vector& x)>;
using ScalarField = std::function<double(const Vector& x)>;
using GradientField = std::function<Vector(const Vector& x)>;

struct Plant {
    int state_dim = 1;
    int input_dim = 1;
    VectorField field;

    /// f(x, u); throws std::invalid_argument on dimension mismatch.
    [[nodiscard]] Vector operator()(const Vector& x, const Vector& u) const;
};

struct Feedback {
    int output_dim = 1;
    FeedbackLaw law;

    [[nodiscard]] Vector operator()(const Vector& x) const;
};

struct IssCertificate {
    ScalarField V;
    GradientField gradV;  // optional; central differences when empty
    ComparisonFunction alpha1 = ComparisonFunction::linear(1.0);
    ComparisonFunction alpha2 = ComparisonFunction::linear(1.0);
    ComparisonFunction gamma2 = ComparisonFunction::linear(1.0);
    double lambda = 1.0;
    double mu = 1.0;
    double c = 0.5;

    /// Parameter-domain checks: lambda > 0, mu > 0, c in (0, 1).
    void validate() const;

    [[nodiscard]] double value(const Vector& x) const { return V(x); }
    [[nodiscard]] Vector gradient(const Vector& x) const;
};

/// Plant, feedback and certificate bundled under a name.
struct ControlSystem {
    std::string name;
    Plant plant;
    Feedback feedback;
    IssCertificate certificate;
};

/// Central-difference gradient with step 1e-6 * max(1, |x|).
[[nodiscard]] Vector numerical_gradient(const ScalarField& f, const Vector& x);

/// dx/dt = x + u, u = -2x, V = x^2, alpha1 = alpha2 = r^2, gamma2 = 4 r^2,
/// lambda = 1, mu = 64. The dissipation inequality is Young's inequality.
[[nodiscard]] ControlSystem benchmark_linear(double c = 0.5);

/// dx/dt = x + u with the zero feedback law; the benchmark certificate is
/// attached but does not hold. Used for divergence demonstrations.
[[nodiscard]] ControlSystem open_loop_unstable(double c = 0.5);

/// "benchmark-linear" or "open-loop-unstable"; throws std::invalid_argument.
[[nodiscard]] ControlSystem builtin_system(std::string_view name, double c = 0.5);
[[nodiscard]] std::vector<std::string> builtin_system_names();

/// f(x, k(x_held)).
[[nodiscard]] Vector closed_loop_field(const Plant& plant, const Feedback& feedback, const Vector& x,
                                       const Vector& x_held);

struct CertificateSample {
    Vector x;
    Vector e;
};

struct CertificateReport {
    bool pass = true;
    std::size_t samples = 0;
    std::size_t violations = 0;
    /// Largest (lhs - rhs) over all checked inequalities; <= 0 means slack.
    double worst_violation = -std::numeric_limits<double>::infinity();
    std::string worst_inequality;
    Vector witness_x;
    Vector witness_e;
};

struct CertificateTolerance {
    double absolute = 1e-9;
    double relative = 1e-9;
};

/// Checks alpha1(|x|) <= V(x) <= alpha2(|x|) and
/// gradV(x) f(x, k(x+e)) <= -lambda V(x) + gamma2(|e|) at every sample.
[[nodiscard]] CertificateReport verify_certificate(const Plant& plant, const Feedback& feedback,
                                                   const IssCertificate& cert,
                                                   std::span<const CertificateSample> samples,
                                                   CertificateTolerance tol = {});

/// Uniform (x, e) samples in the box [-radius, radius]^n, deterministic in seed.
[[nodiscard]] std::vector<CertificateSample> sample_box(int state_dim, double radius, std::size_t count,
                                                        std::uint64_t seed);

struct GainGrowthReport {
    bool pass = false;
    double minimal_mu = 0.0;
    double witness_r = 0.0;
};

/// sup over the grid of gamma2(4r) / alpha1(r), compared against cert.mu.
[[nodiscard]] GainGrowthReport verify_gain_growth(const IssCertificate& cert, std::span<const double> r_grid,
                                                   double tol = 1e-9);

}  // namespace etcdos
