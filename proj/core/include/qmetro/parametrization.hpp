#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace qmetro {

/// Maps the scalar parameter epsilon to a Bloch-vector length s in [0,1],
/// together with its derivative and the inverse on the monotone branch in use.
class Parametrization {
public:
    using Map = std::function<double(double)>;

    Parametrization(std::string name, Map s, Map ds, Map s_inverse,
                    double eps_min, double eps_max);

    double s(double epsilon) const;
    double ds(double epsilon) const;
    double s_inverse(double s_value) const;

    const std::string& name() const { return name_; }
    double domain_min() const { return eps_min_; }
    double domain_max() const { return eps_max_; }
    bool contains(double epsilon) const;

    /// s(eps) = 1 - eps^2/8 on eps in [0, 2*sqrt(2)]; the nearly-pure choice.
    static Parametrization default_quadratic();

    /// s(eps) = eps on [0, 1], for driving s directly.
    static Parametrization identity();

    /// Monotone cubic (Fritsch-Carlson) interpolant through (eps, s) samples.
    /// Samples must be strictly monotone in both coordinates.
    static Parametrization from_table(std::vector<std::pair<double, double>> samples,
                                      std::string name = "custom-table");

private:
    std::string name_;
    Map s_;
    Map ds_;
    Map s_inverse_;
    double eps_min_;
    double eps_max_;
};

} // namespace qmetro
