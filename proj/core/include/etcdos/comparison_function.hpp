#pragma once

// Class-K-infinity comparison functions: the alpha/gamma bounds that appear in
// every stability estimate of the toolkit. Evaluation and inversion are both
// guaranteed monotone; inversion is closed form where the kind allows it and
// bracketed bisection otherwise.

#include <stdexcept>
#include <string>
#include <vector>

namespace etcdos {

/// Raised when an iterative numeric routine fails to converge.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PowerTerm {
    double coefficient = 0.0;
    double exponent = 1.0;

    friend bool operator==(const PowerTerm&, const PowerTerm&) = default;
};

struct TablePoint {
    double r = 0.0;
    double value = 0.0;

    friend bool operator==(const TablePoint&, const TablePoint&) = default;
};

class ComparisonFunction {
public:
    enum class Kind { Linear, Power, Polynomial, Tabulated };

    static constexpr double kDefaultRtol = 1e-10;

    /// a * r
    static ComparisonFunction linear(double a);
    /// a * r^p, p > 0
    static ComparisonFunction power(double a, double p);
    /// sum_i a_i r^{p_i}, every a_i > 0 and p_i > 0
    static ComparisonFunction polynomial(std::vector<PowerTerm> terms);
    /// Piecewise-linear through strictly increasing samples starting at
    /// (0, 0); extended past the last sample with the last segment's slope.
    static ComparisonFunction tabulated(std::vector<TablePoint> points);

    [[nodiscard]] Kind kind() const noexcept;

    /// Throws std::domain_error for r < 0.
    [[nodiscard]] double eval(double r) const;
    [[nodiscard]] double operator()(double r) const { return eval(r); }

    /// Smallest r >= 0 with eval(r) = y, to relative tolerance rtol.
    /// Throws std::domain_error for y < 0, NumericError if bisection stalls.
    [[nodiscard]] double inverse(double y, double rtol = kDefaultRtol) const;

    /// Canonical term list (Linear/Power/Polynomial kinds); empty for tables.
    [[nodiscard]] const std::vector<PowerTerm>& terms() const noexcept { return terms_; }
    [[nodiscard]] const std::vector<TablePoint>& table() const noexcept { return table_; }

    [[nodiscard]] std::string describe() const;

    friend bool operator==(const ComparisonFunction&, const ComparisonFunction&) = default;

private:
    ComparisonFunction(Kind kind, std::vector<PowerTerm> terms, std::vector<TablePoint> table);

    [[nodiscard]] double bisect_inverse(double y, double rtol) const;

    Kind kind_;
    std::vector<PowerTerm> terms_;
    std::vector<TablePoint> table_;
};

[[nodiscard]] const char* to_string(ComparisonFunction::Kind kind) noexcept;

}  // namespace etcdos
