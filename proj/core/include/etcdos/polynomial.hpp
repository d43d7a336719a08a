#pragma once

// Multivariate polynomials in (x, u), used to describe plants, feedback laws
// and Lyapunov functions read from scenario files.

#include <Eigen/Dense>

#include <vector>

namespace etcdos {

using Vector = Eigen::VectorXd;

struct Monomial {
    double coefficient = 0.0;
    std::vector<int> x_powers;  // one entry per state component (may be empty = all zero)
    std::vector<int> u_powers;  // one entry per input component (may be empty = all zero)

    friend bool operator==(const Monomial&, const Monomial&) = default;
};

class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Monomial> terms);

    [[nodiscard]] double eval(const Vector& x, const Vector& u = Vector()) const;
    /// d/dx, analytic.
    [[nodiscard]] Vector gradient_x(const Vector& x, const Vector& u = Vector()) const;

    [[nodiscard]] const std::vector<Monomial>& terms() const noexcept { return terms_; }
    /// Validates every exponent list against the given dimensions.
    void check_dimensions(int nx, int nu) const;

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    std::vector<Monomial> terms_;
};

}  // namespace etcdos
