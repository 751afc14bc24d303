#pragma once

#include "qmetro/bloch_state.hpp"
#include "qmetro/operators.hpp"

#include <cstdint>
#include <vector>

namespace qmetro {

/// Exact binomial coefficient (arbitrary-precision internally); n up to 65
/// keeps every multiplicity exact through N = 64.
std::uint64_t binomial(int n, int k);

/// Number of inequivalent spin-j blocks in the N-fold product of spin-1/2s.
/// Both closed forms are evaluated and must agree.
std::uint64_t multiplicity(int N, int twice_j);

struct SpectrumEntry {
    int twice_j = 0;
    std::uint64_t mu = 0;
    double p = 0.0;
};

/// Distribution of the total angular momentum quantum number j for N copies.
struct AngularSpectrum {
    int N = 0;
    std::vector<SpectrumEntry> entries; // ordered j = N/2 downwards
};

/// Exact j-distribution; independent of phi by construction.
AngularSpectrum spectrum_exact(const BlochState& state, int N);

/// (p_j, dp_j/d epsilon) pairs from the closed-form derivative.
std::vector<std::pair<double, double>> spectrum_with_derivative(const BlochState& state,
                                                                int N);

/// Two-leading-term small-epsilon expansion of p_j for the nearly-pure
/// parametrization s = 1 - eps^2/8. Valid when N eps^2 << 1 (not enforced).
double spectrum_expansion(double epsilon, int N, int twice_j);

/// Per-subspace Fisher information in the nearly-pure regime.
struct SubspaceFisher {
    double f_top = 0.0;    // j = N/2
    double f_minus1 = 0.0; // j = N/2 - 1
    double f_minus2 = 0.0; // j = N/2 - 2 (zero below N = 4)
    double truncated_total = 0.0;
};

SubspaceFisher fi_per_subspace(double epsilon, int N);

/// rho_N split into a dominant pure part and a uniform single-flip mixture,
/// accurate to O(N eps^2): w0 tau0(phi) + w1 tau1(phi), w1 = N eps^2 / 16.
struct NearlyPureDecomposition {
    int N = 0;
    double w0 = 1.0;
    double w1 = 0.0;
    DenseOperator tau0;
    DenseOperator tau1;
};

NearlyPureDecomposition nearly_pure_decomposition(const BlochState& state, int N);

} // namespace qmetro
