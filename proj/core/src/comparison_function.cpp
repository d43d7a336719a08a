#include "etcdos/comparison_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace etcdos {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

}  // namespace

ComparisonFunction::ComparisonFunction(Kind kind, std::vector<PowerTerm> terms,
                                       std::vector<TablePoint> table)
    : kind_(kind), terms_(std::move(terms)), table_(std::move(table)) {}

ComparisonFunction ComparisonFunction::linear(double a) {
    require_positive(a, "linear coefficient");
    return ComparisonFunction(Kind::Linear, {{a, 1.0}}, {});
}

ComparisonFunction ComparisonFunction::power(double a, double p) {
    require_positive(a, "power coefficient");
    require_positive(p, "power exponent");
    return ComparisonFunction(Kind::Power, {{a, p}}, {});
}

ComparisonFunction ComparisonFunction::polynomial(std::vector<PowerTerm> terms) {
    if (terms.empty()) {
        throw std::invalid_argument("polynomial comparison function needs at least one term");
    }
    for (const auto& t : terms) {
        require_positive(t.coefficient, "polynomial coefficient");
        require_positive(t.exponent, "polynomial exponent");
    }
    return ComparisonFunction(Kind::Polynomial, std::move(terms), {});
}

ComparisonFunction ComparisonFunction::tabulated(std::vector<TablePoint> points) {
    if (points.size() < 2) {
        throw std::invalid_argument("tabulated comparison function needs at least two samples");
    }
    if (points.front().r != 0.0 || points.front().value != 0.0) {
        throw std::invalid_argument("tabulated comparison function must start at (0, 0)");
    }
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].r > points[i - 1].r) || !(points[i].value > points[i - 1].value) ||
            !std::isfinite(points[i].r) || !std::isfinite(points[i].value)) {
            throw std::invalid_argument("tabulated samples must be strictly increasing in r and value");
        }
    }
    return ComparisonFunction(Kind::Tabulated, {}, std::move(points));
}

ComparisonFunction::Kind ComparisonFunction::kind() const noexcept { return kind_; }

double ComparisonFunction::eval(double r) const {
    if (!(r >= 0.0)) {
        throw std::domain_error("comparison function evaluated at negative argument");
    }
    if (r == 0.0) {
        return 0.0;
    }
    switch (kind_) {
        case Kind::Linear:
            return terms_[0].coefficient * r;
        case Kind::Power:
        case Kind::Polynomial: {
            double sum = 0.0;
            for (const auto& t : terms_) {
                sum += t.coefficient * std::pow(r, t.exponent);
            }
            return sum;
        }
        case Kind::Tabulated: {
            auto it = std::upper_bound(table_.begin(), table_.end(), r,
                                       [](double v, const TablePoint& p) { return v < p.r; });
            // past the last sample: extrapolate with the last segment
            if (it == table_.end()) {
                it = table_.end() - 1;
            }
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double slope = (hi.value - lo.value) / (hi.r - lo.r);
            return lo.value + slope * (r - lo.r);
        }
    }
    return 0.0;
}

double ComparisonFunction::inverse(double y, double rtol) const {
    if (!(y >= 0.0)) {
        throw std::domain_error("comparison function inverse at negative argument");
    }
    if (y == 0.0) {
        return 0.0;
    }
    switch (kind_) {
        case Kind::Linear:
            return y / terms_[0].coefficient;
        case Kind::Power:
            return std::pow(y / terms_[0].coefficient, 1.0 / terms_[0].exponent);
        case Kind::Polynomial:
            return bisect_inverse(y, rtol);
        case Kind::Tabulated: {
            auto it = std::upper_bound(table_.begin(), table_.end(), y,
                                       [](double v, const TablePoint& p) { return v < p.value; });
            if (it == table_.end()) {
                it = table_.end() - 1;
            }
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double slope = (hi.value - lo.value) / (hi.r - lo.r);
            return lo.r + (y - lo.value) / slope;
        }
    }
    return 0.0;
}

double ComparisonFunction::bisect_inverse(double y, double rtol) const {
    double lo = 0.0;
    double hi = std::max(1.0, y);
    int expansions = 0;
    while (eval(hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 2100 || !std::isfinite(hi)) {
            throw NumericError("comparison function inverse: no upper bracket found");
        }
    }
    // Bisect to the floating-point resolution of the bracket.
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (eval(mid) < y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double r = (y - eval(lo) < eval(hi) - y) ? lo : hi;
    if (std::abs(eval(r) - y) > rtol * std::max(y, 1.0) && hi - lo > rtol * std::max(hi, 1.0)) {
        throw NumericError("comparison function inverse did not converge");
    }
    return r;
}

std::string ComparisonFunction::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case Kind::Linear:
            os << terms_[0].coefficient << "*r";
            break;
        case Kind::Power:
        case Kind::Polynomial:
            for (std::size_t i = 0; i < terms_.size(); ++i) {
                if (i > 0) {
                    os << " + ";
                }
                os << terms_[i].coefficient << "*r^" << terms_[i].exponent;
            }
            break;
        case Kind::Tabulated:
            os << "table[" << table_.size() << " samples]";
            break;
    }
    return os.str();
}

const char* to_string(ComparisonFunction::Kind kind) noexcept {
    switch (kind) {
        case ComparisonFunction::Kind::Linear: return "linear";
        case ComparisonFunction::Kind::Power: return "power";
        case ComparisonFunction::Kind::Polynomial: return "polynomial";
        case ComparisonFunction::Kind::Tabulated: return "tabulated";
    }
    return "unknown";
}

}  // namespace etcdos
