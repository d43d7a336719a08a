#include "etcdos/plant.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace etcdos {

Vector Plant::operator()(const Vector& x, const Vector& u) const {
    if (x.size() != state_dim || u.size() != input_dim) {
        throw std::invalid_argument("plant evaluated with mismatched state/input dimension");
    }
    Vector dx = field(x, u);
    if (dx.size() != state_dim) {
        throw std::invalid_argument("vector field returned wrong dimension");
    }
    return dx;
}

Vector Feedback::operator()(const Vector& x) const {
    Vector u = law(x);
    if (u.size() != output_dim) {
        throw std::invalid_argument("feedback law returned wrong dimension");
    }
    return u;
}

void IssCertificate::validate() const {
    if (!V) {
        throw std::invalid_argument("certificate.V is missing");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("certificate.lambda must be positive");
    }
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("certificate.mu must be positive");
    }
    if (!(c > 0.0 && c < 1.0)) {
        throw std::invalid_argument("certificate.c must lie in (0, 1)");
    }
}

Vector IssCertificate::gradient(const Vector& x) const {
    if (gradV) {
        return gradV(x);
    }
    return numerical_gradient(V, x);
}

Vector numerical_gradient(const ScalarField& f, const Vector& x) {
    const double h = 1e-6 * std::max(1.0, x.norm());
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

namespace {

IssCertificate benchmark_certificate(double c) {
    IssCertificate cert{
        .V = [](const Vector& x) { return x.squaredNorm(); },
        .gradV = [](const Vector& x) -> Vector { return 2.0 * x; },
        .alpha1 = ComparisonFunction::power(1.0, 2.0),
        .alpha2 = ComparisonFunction::power(1.0, 2.0),
        .gamma2 = ComparisonFunction::power(4.0, 2.0),
        .lambda = 1.0,
        .mu = 64.0,
        .c = c,
    };
    cert.validate();
    return cert;
}

}  // namespace

ControlSystem benchmark_linear(double c) {
    return ControlSystem{
        .name = "benchmark-linear",
        .plant = Plant{1, 1, [](const Vector& x, const Vector& u) -> Vector { return x + u; }},
        .feedback = Feedback{1, [](const Vector& x) -> Vector { return -2.0 * x; }},
        .certificate = benchmark_certificate(c),
    };
}

ControlSystem open_loop_unstable(double c) {
    return ControlSystem{
        .name = "open-loop-unstable",
        .plant = Plant{1, 1, [](const Vector& x, const Vector& u) -> Vector { return x + u; }},
        .feedback = Feedback{1, [](const Vector& x) -> Vector { return Vector::Zero(x.size()); }},
        .certificate = benchmark_certificate(c),
    };
}

ControlSystem builtin_system(std::string_view name, double c) {
    if (name == "benchmark-linear") {
        return benchmark_linear(c);
    }
    if (name == "open-loop-unstable") {
        return open_loop_unstable(c);
    }
    throw std::invalid_argument("unknown built-in plant '" + std::string(name) + "'");
}

std::vector<std::string> builtin_system_names() { return {"benchmark-linear", "open-loop-unstable"}; }

Vector closed_loop_field(const Plant& plant, const Feedback& feedback, const Vector& x, const Vector& x_held) {
    if (x.size() != x_held.size()) {
        throw std::invalid_argument("closed_loop_field: state and held state differ in dimension");
    }
    return plant(x, feedback(x_held));
}

CertificateReport verify_certificate(const Plant& plant, const Feedback& feedback, const IssCertificate& cert,
                                     std::span<const CertificateSample> samples, CertificateTolerance tol) {
    if (samples.empty()) {
        throw std::invalid_argument("verify_certificate: empty sample set");
    }
    CertificateReport report;
    report.samples = samples.size();

    auto record = [&](double lhs, double rhs, const char* which, const CertificateSample& s) {
        const double excess = lhs - rhs;
        const double slack = tol.absolute + tol.relative * std::max(std::abs(lhs), std::abs(rhs));
        if (excess > slack || !std::isfinite(excess)) {
            report.pass = false;
            ++report.violations;
        }
        if (excess > report.worst_violation || !std::isfinite(excess)) {
            report.worst_violation = excess;
            report.worst_inequality = which;
            report.witness_x = s.x;
            report.witness_e = s.e;
        }
    };

    for (const auto& s : samples) {
        const double r = s.x.norm();
        const double v = cert.value(s.x);
        record(cert.alpha1(r), v, "alpha1(|x|) <= V(x)", s);
        record(v, cert.alpha2(r), "V(x) <= alpha2(|x|)", s);
        const Vector dx = closed_loop_field(plant, feedback, s.x, Vector(s.x + s.e));
        const double lhs = cert.gradient(s.x).dot(dx);
        const double rhs = -cert.lambda * v + cert.gamma2(s.e.norm());
        record(lhs, rhs, "gradV f(x, k(x+e)) <= -lambda V + gamma2(|e|)", s);
    }
    return report;
}

std::vector<CertificateSample> sample_box(int state_dim, double radius, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-radius, radius);
    std::vector<CertificateSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        CertificateSample s{Vector(state_dim), Vector(state_dim)};
        for (int j = 0; j < state_dim; ++j) s.x[j] = dist(rng);
        for (int j = 0; j < state_dim; ++j) s.e[j] = dist(rng);
        out.push_back(std::move(s));
    }
    return out;
}

GainGrowthReport verify_gain_growth(const IssCertificate& cert, std::span<const double> r_grid, double tol) {
    if (r_grid.empty()) {
        throw std::invalid_argument("verify_gain_growth: empty radius grid");
    }
    GainGrowthReport report;
    double prev = 0.0;
    for (double r : r_grid) {
        if (!(r > prev)) {
            throw std::invalid_argument("verify_gain_growth: grid must be strictly increasing and positive");
        }
        prev = r;
        const double a1 = cert.alpha1(r);
        if (!(a1 > 0.0)) {
            throw std::invalid_argument("certificate invalid: alpha1(r) = 0 for r > 0");
        }
        const double ratio = cert.gamma2(4.0 * r) / a1;
        if (ratio > report.minimal_mu) {
            report.minimal_mu = ratio;
            report.witness_r = r;
        }
    }
    report.pass = report.minimal_mu <= cert.mu * (1.0 + tol);
    return report;
}

}  // namespace etcdos
