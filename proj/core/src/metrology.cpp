#include "qmetro/metrology.hpp"

#include <cmath>
#include <stdexcept>

namespace qmetro {

FisherReport qfi_closed_form(const BlochState& state, int N, Which which) {
    if (N < 1) throw std::invalid_argument("qfi_closed_form: N must be >= 1");
    const double s = state.s();
    FisherReport report;
    report.which = which;
    report.N = N;
    if (which == Which::epsilon) {
        if (s >= 1.0 - 1e-12) {
            throw std::domain_error("qfi_closed_form: singular at s = 1 for epsilon");
        }
        const double ds = state.ds();
        report.value = N * ds * ds / (1.0 - s * s);
    } else {
        report.value = N * s * s;
    }
    return report;
}

double fisher_information(const std::vector<std::pair<double, double>>& probs,
                          double floor) {
    double psum = 0.0, dsum = 0.0;
    for (const auto& [p, dp] : probs) {
        if (p < -1e-12) throw std::invalid_argument("fisher_information: negative probability");
        psum += p;
        dsum += dp;
    }
    if (std::abs(psum - 1.0) > 1e-9) {
        throw std::invalid_argument("fisher_information: probabilities do not sum to 1");
    }
    if (std::abs(dsum) > 1e-9) {
        throw std::invalid_argument("fisher_information: derivatives do not sum to 0");
    }
    double fi = 0.0;
    for (const auto& [p, dp] : probs) {
        if (p > floor) {
            fi += dp * dp / p;
        } else if (std::abs(dp) > 1e-9) {
            throw std::domain_error("fisher_information: diverging term (p ~ 0, dp != 0)");
        }
    }
    return fi;
}

double sld_orthogonality(const BlochState& state, int N) {
    if (N > kMaxDiagonalizationQubits) {
        throw std::invalid_argument("sld_orthogonality: N exceeds the dense budget");
    }
    const DenseOperator rho = build_density(state, N);
    const DenseOperator L_eps = sld_closed_form(state, N, Which::epsilon);
    const DenseOperator L_phi = sld_closed_form(state, N, Which::phi);
    return std::abs((rho * L_eps * L_phi).trace());
}

MomentReport j2_moments(const BlochState& state, int N) {
    if (N < 1) throw std::invalid_argument("j2_moments: N must be >= 1");
    const double s = state.s();
    const double s2 = s * s;
    const double ds = state.ds();

    const double n = N; // double arithmetic: N*(N-1) overflows int near N ~ 5e4
    MomentReport report;
    report.mean_J2 = 0.75 * n + 0.25 * n * (n - 1.0) * s2;
    report.d_mean_J2 = 0.5 * n * (n - 1.0) * s * ds;
    report.variance =
        n * (n - 1.0) / 8.0 * ((3.0 - 2.0 * n) * s2 * s2 + 2.0 * (n - 3.0) * s2 + 3.0);
    report.mean_J2sq = report.variance + report.mean_J2 * report.mean_J2;
    return report;
}

double j2_error_propagation(const BlochState& state, int N) {
    if (N < 2) throw std::invalid_argument("j2_error_propagation: N must be >= 2");
    const double s = state.s();
    const double ds = state.ds();
    if (s <= 0.0 || ds == 0.0) {
        throw std::domain_error("j2_error_propagation: uninformative point (s = 0 or ds = 0)");
    }
    const MomentReport m = j2_moments(state, N);
    return m.variance / (m.d_mean_J2 * m.d_mean_J2);
}

double asymptotic_gap(const BlochState& state, int N) {
    if (state.s() >= 1.0 - 1e-12) {
        throw std::domain_error("asymptotic_gap: undefined at s = 1");
    }
    const double mse = j2_error_propagation(state, N);
    const double crb = 1.0 / qfi_closed_form(state, N, Which::epsilon).value;
    return static_cast<double>(N) * N * (mse - crb);
}

std::vector<MseTableRow> weighted_mse_table(const Parametrization& parametrization,
                                            double epsilon,
                                            const std::vector<int>& N_range,
                                            double w_eps, double w_phi) {
    if (w_eps < 0.0 || w_phi < 0.0 || std::abs(w_eps + w_phi - 1.0) > 1e-12) {
        throw std::invalid_argument("weighted_mse_table: weights must be >= 0 and sum to 1");
    }
    const BlochState state(epsilon, 0.0, parametrization);
    const double s2 = state.s() * state.s();

    std::vector<MseTableRow> rows;
    rows.reserve(N_range.size());
    for (int N : N_range) {
        MseTableRow row;
        row.N = N;
        const double crb_eps = 1.0 / qfi_closed_form(state, N, Which::epsilon).value;
        const double crb_phi = 1.0 / qfi_closed_form(state, N, Which::phi).value;
        row.collective = w_eps * j2_error_propagation(state, N) + w_phi / (N * s2);
        row.ultimate = w_eps * crb_eps + w_phi * crb_phi;
        // Splitting the repetitions equally between the two parameters doubles
        // each mean squared error at bound saturation.
        row.split = 2.0 * w_eps * crb_eps + 2.0 * w_phi * crb_phi;
        rows.push_back(row);
    }
    return rows;
}

} // namespace qmetro
