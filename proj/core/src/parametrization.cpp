#include "qmetro/parametrization.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace qmetro {

Parametrization::Parametrization(std::string name, Map s, Map ds, Map s_inverse,
                                 double eps_min, double eps_max)
    : name_(std::move(name)),
      s_(std::move(s)),
      ds_(std::move(ds)),
      s_inverse_(std::move(s_inverse)),
      eps_min_(eps_min),
      eps_max_(eps_max) {
    if (!(eps_min_ < eps_max_)) {
        throw std::invalid_argument("Parametrization: empty epsilon domain");
    }
}

double Parametrization::s(double epsilon) const { return s_(epsilon); }
double Parametrization::ds(double epsilon) const { return ds_(epsilon); }
double Parametrization::s_inverse(double s_value) const { return s_inverse_(s_value); }

bool Parametrization::contains(double epsilon) const {
    return epsilon >= eps_min_ && epsilon <= eps_max_;
}

Parametrization Parametrization::default_quadratic() {
    return Parametrization(
        "default_quadratic",
        [](double e) { return 1.0 - e * e / 8.0; },
        [](double e) { return -e / 4.0; },
        [](double s) { return std::sqrt(std::max(0.0, 8.0 * (1.0 - s))); },
        0.0, 2.0 * std::sqrt(2.0));
}

Parametrization Parametrization::identity() {
    return Parametrization(
        "identity",
        [](double e) { return e; },
        [](double) { return 1.0; },
        [](double s) { return s; },
        0.0, 1.0);
}

namespace {

// Piecewise cubic Hermite data for a monotone table.
struct Pchip {
    std::vector<double> x, y, d; // knots, values, endpoint-adjusted slopes

    double eval(double t) const {
        const std::size_t i = segment(t);
        const double h = x[i + 1] - x[i];
        const double u = (t - x[i]) / h;
        const double u2 = u * u, u3 = u2 * u;
        const double h00 = 2 * u3 - 3 * u2 + 1;
        const double h10 = u3 - 2 * u2 + u;
        const double h01 = -2 * u3 + 3 * u2;
        const double h11 = u3 - u2;
        return h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
    }

    double deriv(double t) const {
        const std::size_t i = segment(t);
        const double h = x[i + 1] - x[i];
        const double u = (t - x[i]) / h;
        const double u2 = u * u;
        const double dh00 = (6 * u2 - 6 * u) / h;
        const double dh10 = 3 * u2 - 4 * u + 1;
        const double dh01 = (-6 * u2 + 6 * u) / h;
        const double dh11 = 3 * u2 - 2 * u;
        return dh00 * y[i] + dh10 * d[i] + dh01 * y[i + 1] + dh11 * d[i + 1];
    }

    std::size_t segment(double t) const {
        auto it = std::upper_bound(x.begin(), x.end(), t);
        auto i = static_cast<std::size_t>(std::distance(x.begin(), it));
        if (i == 0) return 0;
        if (i >= x.size()) return x.size() - 2;
        return i - 1;
    }
};

Pchip make_pchip(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> slope(n - 1), d(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        slope[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    }
    if (n == 2) {
        d[0] = d[1] = slope[0];
    } else {
        d[0] = slope[0];
        d[n - 1] = slope[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (slope[i - 1] * slope[i] <= 0.0) {
                d[i] = 0.0;
            } else {
                const double w1 = 2 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
                const double w2 = (x[i + 1] - x[i]) + 2 * (x[i] - x[i - 1]);
                d[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
            }
        }
    }
    return Pchip{x, y, d};
}

} // namespace

Parametrization Parametrization::from_table(std::vector<std::pair<double, double>> samples,
                                            std::string name) {
    if (samples.size() < 2) {
        throw std::invalid_argument("from_table: need at least two (epsilon, s) samples");
    }
    std::sort(samples.begin(), samples.end());
    std::vector<double> xs, ys;
    xs.reserve(samples.size());
    ys.reserve(samples.size());
    for (const auto& [e, s] : samples) {
        if (s < 0.0 || s > 1.0) {
            throw std::invalid_argument("from_table: s values must lie in [0,1]");
        }
        xs.push_back(e);
        ys.push_back(s);
    }
    bool increasing = ys.back() > ys.front();
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (!(xs[i + 1] > xs[i])) {
            throw std::invalid_argument("from_table: epsilon samples must be strictly increasing");
        }
        const bool up = ys[i + 1] > ys[i];
        if (up != increasing || ys[i + 1] == ys[i]) {
            throw std::invalid_argument("from_table: s samples must be strictly monotone");
        }
    }

    auto fwd = std::make_shared<Pchip>(make_pchip(xs, ys));
    const double lo = xs.front(), hi = xs.back();

    auto inverse = [fwd, lo, hi, increasing](double target) {
        double a = lo, b = hi;
        double fa = fwd->eval(a) - target;
        for (int iter = 0; iter < 200; ++iter) {
            const double mid = 0.5 * (a + b);
            const double fm = fwd->eval(mid) - target;
            if (std::abs(fm) < 1e-15 || (b - a) < 1e-15) return mid;
            if ((fa < 0) == (fm < 0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        (void)increasing;
        return 0.5 * (a + b);
    };

    return Parametrization(
        std::move(name),
        [fwd](double e) { return fwd->eval(e); },
        [fwd](double e) { return fwd->deriv(e); },
        inverse, lo, hi);
}

} // namespace qmetro
