#pragma once

#include "qmetro/parametrization.hpp"

#include <cmath>
#include <stdexcept>

namespace qmetro {

/// A qubit whose Bloch vector of length s(epsilon) lies in the x-z plane,
/// tilted from z by the angle phi.
class BlochState {
public:
    BlochState(double epsilon, double phi, Parametrization parametrization)
        : epsilon_(epsilon), phi_(phi), parametrization_(std::move(parametrization)) {
        const double sv = parametrization_.s(epsilon_);
        if (sv < -1e-12 || sv > 1.0 + 1e-12) {
            throw std::invalid_argument("BlochState: s(epsilon) outside [0, 1]");
        }
    }

    double epsilon() const { return epsilon_; }
    double phi() const { return phi_; }
    const Parametrization& parametrization() const { return parametrization_; }

    double s() const { return std::clamp(parametrization_.s(epsilon_), 0.0, 1.0); }
    double ds() const { return parametrization_.ds(epsilon_); }

    /// tanh(beta) = s; only defined for s < 1.
    double beta() const {
        const double sv = s();
        if (sv >= 1.0) throw std::domain_error("BlochState: beta diverges at s = 1");
        return std::atanh(sv);
    }

    /// Convenience for tests and sweeps that fix s directly.
    static BlochState from_s(double s_value, double phi) {
        return BlochState(s_value, phi, Parametrization::identity());
    }

private:
    double epsilon_;
    double phi_;
    Parametrization parametrization_;
};

} // namespace qmetro
