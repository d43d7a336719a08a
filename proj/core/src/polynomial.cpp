#include "etcdos/polynomial.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace etcdos {

namespace {

double int_pow(double base, int exponent) {
    double result = 1.0;
    for (int i = 0; i < exponent; ++i) {
        result *= base;
    }
    return result;
}

double monomial_value(const Monomial& m, const Vector& x, const Vector& u) {
    double v = m.coefficient;
    for (std::size_t i = 0; i < m.x_powers.size(); ++i) {
        v *= int_pow(x[static_cast<Eigen::Index>(i)], m.x_powers[i]);
    }
    for (std::size_t i = 0; i < m.u_powers.size(); ++i) {
        v *= int_pow(u[static_cast<Eigen::Index>(i)], m.u_powers[i]);
    }
    return v;
}

}  // namespace

Polynomial::Polynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {
    for (const auto& m : terms_) {
        for (int p : m.x_powers) {
            if (p < 0) throw std::invalid_argument("monomial exponents must be nonnegative");
        }
        for (int p : m.u_powers) {
            if (p < 0) throw std::invalid_argument("monomial exponents must be nonnegative");
        }
    }
}

void Polynomial::check_dimensions(int nx, int nu) const {
    for (const auto& m : terms_) {
        if (static_cast<int>(m.x_powers.size()) > nx) {
            throw std::invalid_argument("monomial has " + std::to_string(m.x_powers.size()) +
                                        " state exponents, state dimension is " + std::to_string(nx));
        }
        if (static_cast<int>(m.u_powers.size()) > nu) {
            throw std::invalid_argument("monomial has " + std::to_string(m.u_powers.size()) +
                                        " input exponents, input dimension is " + std::to_string(nu));
        }
    }
}

double Polynomial::eval(const Vector& x, const Vector& u) const {
    double sum = 0.0;
    for (const auto& m : terms_) {
        sum += monomial_value(m, x, u);
    }
    return sum;
}

Vector Polynomial::gradient_x(const Vector& x, const Vector& u) const {
    Vector g = Vector::Zero(x.size());
    for (const auto& m : terms_) {
        for (std::size_t j = 0; j < m.x_powers.size(); ++j) {
            const int p = m.x_powers[j];
            if (p == 0) {
                continue;
            }
            Monomial d = m;
            d.coefficient *= p;
            d.x_powers[j] = p - 1;
            g[static_cast<Eigen::Index>(j)] += monomial_value(d, x, u);
        }
    }
    return g;
}

}  // namespace etcdos
