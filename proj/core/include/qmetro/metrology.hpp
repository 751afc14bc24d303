#pragma once

#include "qmetro/bloch_state.hpp"
#include "qmetro/states.hpp"

#include <utility>
#include <vector>

namespace qmetro {

/// Fisher information for an ensemble of N copies, in units of 1/theta^2.
struct FisherReport {
    double value = 0.0;
    Which which = Which::epsilon;
    int N = 0;
};

/// First and second moments of the total angular momentum squared.
struct MomentReport {
    double mean_J2 = 0.0;
    double mean_J2sq = 0.0;
    double d_mean_J2 = 0.0; // d<J^2>/d epsilon
    double variance = 0.0;
};

/// One row of the weighted mean-squared-error comparison table.
struct MseTableRow {
    int N = 0;
    double collective = 0.0; // J^2 strategy for epsilon + local basis for phi
    double ultimate = 0.0;   // weighted single-parameter quantum bounds
    double split = 0.0;      // halving the repetitions between the parameters
};

/// N ds^2/(1-s^2) for epsilon, N s^2 for phi.
FisherReport qfi_closed_form(const BlochState& state, int N, Which which);

/// Classical Fisher information sum dp^2/p over outcome probabilities.
/// Probabilities below the floor with non-negligible derivative signal a
/// diverging contribution and are rejected.
double fisher_information(const std::vector<std::pair<double, double>>& probs,
                          double floor = 1e-15);

/// |tr(rho_N L_eps L_phi)|; vanishes identically for this state family.
double sld_orthogonality(const BlochState& state, int N);

MomentReport j2_moments(const BlochState& state, int N);

/// Error-propagation mean squared error (nu-normalized) of the moment-based
/// epsilon estimator read off the total-angular-momentum distribution.
double j2_error_propagation(const BlochState& state, int N);

/// N^2 * (j2_error_propagation - 1/QFI_eps); bounded in N for fixed state.
double asymptotic_gap(const BlochState& state, int N);

std::vector<MseTableRow> weighted_mse_table(const Parametrization& parametrization,
                                            double epsilon,
                                            const std::vector<int>& N_range,
                                            double w_eps = 0.5, double w_phi = 0.5);

} // namespace qmetro
