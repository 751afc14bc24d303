#pragma once

#include "qmetro/bloch_state.hpp"
#include "qmetro/metrology.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qmetro {

enum class Strategy { local_eps, local_phi, j2_lphi, signatures };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct SampleConfig {
    BlochState state;
    int N = 1;
    std::uint64_t nu = 1;
    std::uint64_t seed = 0;
    Strategy strategy = Strategy::local_eps;
};

/// Per-round outcome records. Which vectors are filled depends on the
/// strategy: local strategies store the per-round '+' counts over the N
/// qubits, the collective strategy stores the measured j (doubled) plus the
/// '+' counts of the commuting direction measurement, and the signature
/// strategy stores the binary outside-reference-set outcome.
struct Dataset {
    Strategy strategy = Strategy::local_eps;
    int N = 1;
    std::uint64_t nu = 0;
    std::vector<int> plus_counts;
    std::vector<int> twice_j;
    std::vector<std::uint8_t> flip_outcomes;
};

/// Reproducible: identical (config, seed) produce bitwise-identical datasets,
/// serially or in parallel (counter-based per-(repetition, qubit) substreams).
Dataset sample_outcomes(const SampleConfig& config);

struct EstimateOptions {
    std::uint64_t batch_count = 100;
    std::uint64_t bootstrap_resamples = 400;
};

struct RunReport {
    Strategy strategy = Strategy::local_eps;
    Which which = Which::epsilon;
    int N = 1;
    std::uint64_t nu = 0;
    std::uint64_t batch_size = 0;

    double full_estimate = 0.0;      // estimator applied to the pooled run
    std::vector<double> estimates;   // one estimate per repetition batch

    double empirical_mse = 0.0;      // nu-normalized squared error vs truth
    double empirical_stderr = 0.0;   // bootstrap over batches
    double propagated_mse = 0.0;     // sample-moment error propagation
    double propagated_stderr = 0.0;  // leave-one-batch-out jackknife
    double theory_mse = 0.0;         // matching asymptotic value
    double crb = 0.0;                // 1 / QFI
    std::uint64_t clamp_count = 0;   // estimator inversions hitting the domain edge
};

RunReport estimate(const Dataset& dataset, const SampleConfig& config,
                   Which which = Which::epsilon, const EstimateOptions& options = {});

struct MseExperimentRow {
    int N = 0;
    double eps_mse = 0.0, eps_stderr = 0.0;
    double phi_mse = 0.0, phi_stderr = 0.0;
    double weighted = 0.0, weighted_stderr = 0.0;
    double eps_theory = 0.0;      // moment-based error propagation value
    double phi_theory = 0.0;      // 1 / (N s^2)
    double weighted_theory = 0.0; // the collective reference line
    double ultimate = 0.0;
    double split = 0.0;
    std::uint64_t clamp_count = 0;
};

/// Monte Carlo weighted-MSE sweep with the collective-measurement strategy,
/// against the analytic reference lines.
std::vector<MseExperimentRow> mse_experiment(const Parametrization& parametrization,
                                             double epsilon, double phi,
                                             const std::vector<int>& N_range,
                                             std::uint64_t nu, std::uint64_t seed,
                                             double w_eps = 0.5, double w_phi = 0.5,
                                             const EstimateOptions& options = {});

std::string run_report_to_json(const RunReport& report, int indent = 2);
std::string run_report_to_csv(const RunReport& report); // one row per batch
std::string dataset_to_csv(const Dataset& dataset);     // one row per round
std::string mse_rows_to_json(const std::vector<MseExperimentRow>& rows, int indent = 2);
std::string mse_rows_to_csv(const std::vector<MseExperimentRow>& rows);

} // namespace qmetro
