#include "qmetro/angular.hpp"

#include "qmetro/states.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>

namespace qmetro {

namespace {

using boost::multiprecision::cpp_int;

cpp_int binomial_exact(int n, int k) {
    if (k < 0 || k > n) return 0;
    cpp_int result = 1;
    for (int i = 1; i <= k; ++i) {
        result *= (n - k + i);
        result /= i;
    }
    return result;
}

// Valid j values satisfy 2j in {N mod 2, N mod 2 + 2, ..., N}.
void check_j(int N, int twice_j) {
    if (twice_j < 0 || twice_j > N || (N - twice_j) % 2 != 0) {
        throw std::invalid_argument("invalid (N, j) pair");
    }
}

double log_sinh(double x) {
    // x > 0; stable for large x where sinh overflows.
    if (x > 20.0) return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0);
    return std::log(std::sinh(x));
}

double log_2cosh(double x) {
    return x + std::log1p(std::exp(-2.0 * x));
}

} // namespace

std::uint64_t binomial(int n, int k) {
    if (n < 0 || n > 65) throw std::invalid_argument("binomial: n out of supported range");
    const cpp_int b = binomial_exact(n, k);
    return b.convert_to<std::uint64_t>();
}

std::uint64_t multiplicity(int N, int twice_j) {
    if (N < 1 || N > 64) throw std::invalid_argument("multiplicity: N out of range [1, 64]");
    check_j(N, twice_j);
    const int k = (N - twice_j) / 2; // N/2 - j
    const cpp_int form1 = binomial_exact(N, k) - binomial_exact(N, k - 1);
    const cpp_int form2 = (cpp_int(twice_j + 1) * binomial_exact(N + 1, k)) / (N + 1);
    if (form1 != form2) {
        throw std::logic_error("multiplicity: closed forms disagree");
    }
    return form1.convert_to<std::uint64_t>();
}

AngularSpectrum spectrum_exact(const BlochState& state, int N) {
    if (N < 1 || N > 64) throw std::invalid_argument("spectrum_exact: N out of range [1, 64]");
    const double s = state.s();

    AngularSpectrum spec;
    spec.N = N;
    for (int twice_j = N; twice_j >= (N % 2); twice_j -= 2) {
        SpectrumEntry entry;
        entry.twice_j = twice_j;
        entry.mu = multiplicity(N, twice_j);

        if (s >= 1.0 - 1e-12) {
            entry.p = (twice_j == N) ? 1.0 : 0.0;
        } else if (s <= 1e-12) {
            // beta -> 0: the Boltzmann ladder flattens to (2j+1) states.
            entry.p = static_cast<double>(entry.mu) * (twice_j + 1) / std::pow(2.0, N);
        } else {
            const double beta = std::atanh(s);
            const double logp = log_sinh(beta * (twice_j + 1)) - log_sinh(beta) -
                                N * log_2cosh(beta);
            entry.p = static_cast<double>(entry.mu) * std::exp(logp);
        }
        spec.entries.push_back(entry);
    }
    return spec;
}

std::vector<std::pair<double, double>> spectrum_with_derivative(const BlochState& state,
                                                                int N) {
    const AngularSpectrum spec = spectrum_exact(state, N);
    const double s = state.s();
    const double ds = state.ds();

    std::vector<std::pair<double, double>> out;
    out.reserve(spec.entries.size());

    if (s >= 1.0 - 1e-12 || s <= 1e-12) {
        // At the endpoints the beta chain rule degenerates; fall back to a
        // one-sided finite difference on epsilon.
        const double h = 1e-6;
        const double e0 = state.epsilon();
        const BlochState inner(e0 + (s <= 1e-12 ? h : -h), state.phi(), state.parametrization());
        const AngularSpectrum spec_h = spectrum_exact(inner, N);
        for (std::size_t i = 0; i < spec.entries.size(); ++i) {
            const double dp = (spec_h.entries[i].p - spec.entries[i].p) /
                              (s <= 1e-12 ? h : -h);
            out.emplace_back(spec.entries[i].p, dp);
        }
        return out;
    }

    const double beta = std::atanh(s);
    const double dbeta = ds / (1.0 - s * s);
    for (const auto& entry : spec.entries) {
        const double a = beta * (entry.twice_j + 1);
        // d log p / d beta = (2j+1) coth((2j+1) beta) - coth(beta) - N tanh(beta)
        const double dlogp = (entry.twice_j + 1) / std::tanh(a) - 1.0 / std::tanh(beta) -
                             N * std::tanh(beta);
        out.emplace_back(entry.p, entry.p * dlogp * dbeta);
    }
    return out;
}

double spectrum_expansion(double epsilon, int N, int twice_j) {
    if (N < 1) throw std::invalid_argument("spectrum_expansion: N must be >= 1");
    check_j(N, twice_j);
    const double mu = static_cast<double>(multiplicity(N, twice_j));
    const double delta_j0 = (twice_j == 0) ? 1.0 : 0.0;
    const double a = (1.0 - 0.5 * twice_j - 0.5 * N - delta_j0) / 16.0;
    return mu * std::pow(epsilon / 4.0, N - twice_j) * (1.0 + a * epsilon * epsilon);
}

SubspaceFisher fi_per_subspace(double epsilon, int N) {
    if (N < 2) throw std::invalid_argument("fi_per_subspace: N must be >= 2");
    const double e2 = epsilon * epsilon;
    const double delta_N2 = (N == 2) ? 1.0 : 0.0;

    SubspaceFisher f;
    f.f_top = (N - 1.0) * (N - 1.0) / 64.0 * e2;
    f.f_minus1 = (N - 1.0) / 4.0 +
                 3.0 * (N - 1.0) / 64.0 * (2.0 - N - delta_N2) * e2;
    f.f_minus2 = (N >= 4) ? N * (N - 3.0) / 32.0 * e2 : 0.0;
    f.truncated_total = f.f_top + f.f_minus1 + f.f_minus2;
    return f;
}

NearlyPureDecomposition nearly_pure_decomposition(const BlochState& state, int N) {
    if (N < 1 || N > kMaxDenseQubits) {
        throw std::invalid_argument("nearly_pure_decomposition: N out of dense range");
    }
    const double eps = state.epsilon();
    const double phi = state.phi();

    NearlyPureDecomposition d;
    d.N = N;
    d.w1 = N * eps * eps / 16.0;
    d.w0 = 1.0 - d.w1;

    const DenseOperator rot = qubit_rotation_y(phi);
    DenseOperator h_proj(2, 2), v_proj(2, 2);
    h_proj << 1, 0, 0, 0;
    v_proj << 0, 0, 0, 1;
    const DenseOperator h_rot = rot * h_proj * rot.adjoint();
    const DenseOperator v_rot = rot * v_proj * rot.adjoint();

    d.tau0 = kron_power(h_rot, N);

    const Eigen::Index dim = Eigen::Index{1} << N;
    d.tau1 = DenseOperator::Zero(dim, dim);
    for (int flip = 0; flip < N; ++flip) {
        std::vector<DenseOperator> factors(static_cast<std::size_t>(N), h_rot);
        factors[static_cast<std::size_t>(flip)] = v_rot;
        d.tau1 += tensor_chain(factors);
    }
    d.tau1 /= static_cast<double>(N);
    return d;
}

} // namespace qmetro
