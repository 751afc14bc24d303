#include "qmetro/simulate.hpp"

#include "qmetro/angular.hpp"
#include "qmetro/multiport.hpp"
#include "qmetro/philox.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qmetro {

namespace {

using nlohmann::json;

// Substream ids for the counter-based generator.
constexpr std::uint64_t kStreamQubitBase = 0;  // + qubit index
constexpr std::uint64_t kStreamJDraw = 1u << 20;
constexpr std::uint64_t kStreamSignature = (1u << 20) + 1;
constexpr std::uint64_t kStreamBootstrap = (1u << 20) + 2;

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double clamp_counted(double v, double lo, double hi, std::uint64_t& clamps) {
    if (v < lo) {
        ++clamps;
        return lo;
    }
    if (v > hi) {
        ++clamps;
        return hi;
    }
    return v;
}

struct BatchLayout {
    std::uint64_t count = 1;
    std::uint64_t size = 1;
};

BatchLayout make_batches(std::uint64_t nu, std::uint64_t requested) {
    BatchLayout layout;
    layout.count = std::max<std::uint64_t>(1, std::min(requested, nu));
    layout.size = nu / layout.count;
    layout.count = nu / layout.size; // drop the ragged tail rounds
    return layout;
}

} // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::local_eps: return "local_eps";
        case Strategy::local_phi: return "local_phi";
        case Strategy::j2_lphi: return "j2_lphi";
        case Strategy::signatures: return "signatures";
    }
    return "?";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "local_eps") return Strategy::local_eps;
    if (name == "local_phi") return Strategy::local_phi;
    if (name == "j2_lphi") return Strategy::j2_lphi;
    if (name == "signatures") return Strategy::signatures;
    throw std::invalid_argument("unknown strategy: " + name);
}

Dataset sample_outcomes(const SampleConfig& config) {
    if (config.nu < 1) throw std::invalid_argument("sample_outcomes: nu must be >= 1");
    if (config.N < 1) throw std::invalid_argument("sample_outcomes: N must be >= 1");
    const Philox rng(config.seed);
    const double s = config.state.s();

    Dataset data;
    data.strategy = config.strategy;
    data.N = config.N;
    data.nu = config.nu;

    switch (config.strategy) {
        case Strategy::local_eps:
        case Strategy::local_phi:
        case Strategy::j2_lphi: {
            // '+' probability along the measured direction: the aligned basis
            // sees the full Bloch length, the orthogonal one is unbiased.
            const double p_plus = config.strategy == Strategy::local_eps
                                      ? 0.5 * (1.0 + s)
                                      : 0.5;
            data.plus_counts.resize(config.nu);
            if (config.strategy == Strategy::j2_lphi) data.twice_j.resize(config.nu);

            std::vector<double> cdf;
            const AngularSpectrum spectrum =
                config.strategy == Strategy::j2_lphi
                    ? spectrum_exact(config.state, config.N)
                    : AngularSpectrum{};
            if (config.strategy == Strategy::j2_lphi) {
                double acc = 0.0;
                for (const auto& e : spectrum.entries) {
                    acc += e.p;
                    cdf.push_back(acc);
                }
            }

            for (std::uint64_t r = 0; r < config.nu; ++r) {
                int plus = 0;
                for (int q = 0; q < config.N; ++q) {
                    if (rng.bernoulli(p_plus, kStreamQubitBase + static_cast<std::uint64_t>(q),
                                      r)) {
                        ++plus;
                    }
                }
                data.plus_counts[r] = plus;
                if (config.strategy == Strategy::j2_lphi) {
                    const double u = rng.uniform(kStreamJDraw, r);
                    std::size_t idx = 0;
                    while (idx + 1 < cdf.size() && u >= cdf[idx]) ++idx;
                    data.twice_j[r] = spectrum.entries[idx].twice_j;
                }
            }
            break;
        }
        case Strategy::signatures: {
            const auto [p0, p1] = signature_probabilities(config.N, config.state.epsilon());
            if (p1 < -1e-9 || p1 > 1.0 + 1e-9) {
                throw std::invalid_argument("sample_outcomes: flip probability off the simplex");
            }
            data.flip_outcomes.resize(config.nu);
            for (std::uint64_t r = 0; r < config.nu; ++r) {
                data.flip_outcomes[r] = rng.bernoulli(p1, kStreamSignature, r) ? 1 : 0;
            }
            break;
        }
    }
    return data;
}

namespace {

// Estimators on pooled counts; clamping at the inversion domain edges is
// counted, never fatal.
struct Inverter {
    const SampleConfig& config;
    Which which;

    double epsilon_from_frequency(double f, std::uint64_t& clamps) const {
        const double s_hat = clamp_counted(f, 0.0, 1.0, clamps);
        return config.state.parametrization().s_inverse(s_hat);
    }

    double phi_from_frequency(double f, std::uint64_t& clamps) const {
        const double s = config.state.s();
        const double arg = clamp_counted(s == 0.0 ? 0.0 : f / s, -1.0, 1.0, clamps);
        return config.state.phi() + std::asin(arg);
    }

    double epsilon_from_mean_j2(double mean_j2, std::uint64_t& clamps) const {
        const int N = config.N;
        const double lo = 0.75 * N;
        const double hi = 0.75 * N + 0.25 * N * (N - 1);
        const double clamped = clamp_counted(mean_j2, lo, hi, clamps);
        const double s2 = (clamped - lo) * 4.0 / (N * (N - 1.0));
        return config.state.parametrization().s_inverse(std::sqrt(std::max(0.0, s2)));
    }

    double epsilon_from_flip_fraction(double nu1) const {
        return 4.0 * std::sqrt(nu1 / (config.N - 1.0));
    }
};

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double sum = 0.0;
    for (double x : v) sum += (x - m) * (x - m);
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

} // namespace

RunReport estimate(const Dataset& dataset, const SampleConfig& config, Which which,
                   const EstimateOptions& options) {
    if (dataset.nu == 0) throw std::invalid_argument("estimate: empty dataset");
    if (dataset.strategy != config.strategy || dataset.N != config.N ||
        dataset.nu != config.nu) {
        throw std::invalid_argument("estimate: dataset does not match the config");
    }
    if (which == Which::phi &&
        !(config.strategy == Strategy::local_phi || config.strategy == Strategy::j2_lphi)) {
        throw std::invalid_argument("estimate: phi is only measured by local_phi / j2_lphi");
    }
    if (which == Which::epsilon && config.strategy == Strategy::local_phi) {
        throw std::invalid_argument("estimate: local_phi carries no epsilon information");
    }

    const Inverter invert{config, which};
    const double truth =
        which == Which::epsilon ? config.state.epsilon() : config.state.phi();
    const double s = config.state.s();

    RunReport report;
    report.strategy = config.strategy;
    report.which = which;
    report.N = config.N;
    report.nu = dataset.nu;

    const BatchLayout batches = make_batches(dataset.nu, options.batch_count);
    report.batch_size = batches.size;

    // Per-round scalar statistic feeding the estimator.
    std::vector<double> per_round(dataset.nu);
    const bool uses_frequency =
        which == Which::phi || config.strategy == Strategy::local_eps;
    for (std::uint64_t r = 0; r < dataset.nu; ++r) {
        switch (config.strategy) {
            case Strategy::local_eps:
            case Strategy::local_phi:
                per_round[r] = 2.0 * dataset.plus_counts[r] / config.N - 1.0;
                break;
            case Strategy::j2_lphi:
                per_round[r] = uses_frequency
                                   ? 2.0 * dataset.plus_counts[r] / config.N - 1.0
                                   : 0.5 * dataset.twice_j[r] * (0.5 * dataset.twice_j[r] + 1.0);
                break;
            case Strategy::signatures:
                per_round[r] = dataset.flip_outcomes[r] ? 1.0 : 0.0;
                break;
        }
    }

    auto estimate_from_mean = [&](double mean, std::uint64_t& clamps) {
        if (which == Which::phi) return invert.phi_from_frequency(mean, clamps);
        switch (config.strategy) {
            case Strategy::local_eps:
                return invert.epsilon_from_frequency(mean, clamps);
            case Strategy::j2_lphi:
                return invert.epsilon_from_mean_j2(mean, clamps);
            case Strategy::signatures:
                return invert.epsilon_from_flip_fraction(mean);
            default:
                throw std::logic_error("estimate: unreachable");
        }
    };

    report.full_estimate = estimate_from_mean(mean_of(per_round), report.clamp_count);

    std::vector<double> batch_sq_errors;
    batch_sq_errors.reserve(batches.count);
    for (std::uint64_t b = 0; b < batches.count; ++b) {
        double sum = 0.0;
        for (std::uint64_t r = b * batches.size; r < (b + 1) * batches.size; ++r) {
            sum += per_round[r];
        }
        const double est =
            estimate_from_mean(sum / static_cast<double>(batches.size), report.clamp_count);
        report.estimates.push_back(est);
        batch_sq_errors.push_back((est - truth) * (est - truth));
    }

    const double nb = static_cast<double>(batches.size);
    report.empirical_mse = nb * mean_of(batch_sq_errors);

    // Bootstrap over batches.
    if (batches.count >= 2 && options.bootstrap_resamples > 0) {
        const Philox rng(config.seed);
        std::vector<double> resampled(options.bootstrap_resamples);
        for (std::uint64_t m = 0; m < options.bootstrap_resamples; ++m) {
            double sum = 0.0;
            for (std::uint64_t i = 0; i < batches.count; ++i) {
                const std::uint64_t pick =
                    rng.bits(kStreamBootstrap, m * batches.count + i) % batches.count;
                sum += batch_sq_errors[pick];
            }
            resampled[m] = nb * sum / static_cast<double>(batches.count);
        }
        report.empirical_stderr = std::sqrt(variance_of(resampled));
    }

    // Moment-based error propagation on the full run: Var of the per-round
    // statistic over the squared slope of the inversion at the estimate.
    const double mean_full = mean_of(per_round);
    const double var_full = variance_of(per_round);
    auto propagated = [&](double mean, double var) {
        std::uint64_t scratch = 0;
        switch (config.strategy) {
            case Strategy::local_eps: {
                const double eps_hat = invert.epsilon_from_frequency(mean, scratch);
                const double slope = config.state.parametrization().ds(eps_hat);
                return slope == 0.0 ? 0.0 : var / (slope * slope);
            }
            case Strategy::local_phi:
                return s == 0.0 ? 0.0
                                : var / (s * s * std::max(1e-12, 1.0 - (mean / s) * (mean / s)));
            case Strategy::j2_lphi: {
                if (which == Which::phi) {
                    return s == 0.0
                               ? 0.0
                               : var / (s * s * std::max(1e-12, 1.0 - (mean / s) * (mean / s)));
                }
                const double eps_hat = invert.epsilon_from_mean_j2(mean, scratch);
                const BlochState at(eps_hat, config.state.phi(), config.state.parametrization());
                const double slope =
                    0.5 * config.N * (config.N - 1.0) * at.s() * at.ds();
                return slope == 0.0 ? 0.0 : var / (slope * slope);
            }
            case Strategy::signatures:
                // Var(nu1) * (d eps / d nu1)^2 reduces to 4 (1 - nu1) / (N - 1),
                // finite even as nu1 -> 0.
                return 4.0 * (1.0 - mean) / (config.N - 1.0);
        }
        return 0.0;
    };
    // For frequency statistics the per-round variance is already the
    // N-qubit-pooled one, matching the per-round normalization of the MSE.
    report.propagated_mse = propagated(mean_full, var_full);

    if (batches.count >= 2) {
        // Leave-one-batch-out jackknife on the propagated value.
        std::vector<double> loo(batches.count);
        const double total_rounds = static_cast<double>(batches.count * batches.size);
        double sum_all = 0.0, sumsq_all = 0.0;
        for (std::uint64_t r = 0; r < batches.count * batches.size; ++r) {
            sum_all += per_round[r];
            sumsq_all += per_round[r] * per_round[r];
        }
        for (std::uint64_t b = 0; b < batches.count; ++b) {
            double sum_b = 0.0, sumsq_b = 0.0;
            for (std::uint64_t r = b * batches.size; r < (b + 1) * batches.size; ++r) {
                sum_b += per_round[r];
                sumsq_b += per_round[r] * per_round[r];
            }
            const double n_rest = total_rounds - static_cast<double>(batches.size);
            const double mean_rest = (sum_all - sum_b) / n_rest;
            const double var_rest = (sumsq_all - sumsq_b) / n_rest - mean_rest * mean_rest;
            loo[b] = propagated(mean_rest, var_rest);
        }
        const double loo_mean = mean_of(loo);
        double acc = 0.0;
        for (double v : loo) acc += (v - loo_mean) * (v - loo_mean);
        const double B = static_cast<double>(batches.count);
        report.propagated_stderr = std::sqrt((B - 1.0) / B * acc);
    }

    // Matching theory value and the quantum bound; singular edges (pure or
    // zero-length states) report 0 rather than failing the run.
    const bool eps_regular = s > 1e-12 && s < 1.0 - 1e-12;
    const double inv_qfi_eps =
        eps_regular ? 1.0 / qfi_closed_form(config.state, config.N, Which::epsilon).value : 0.0;
    const double inv_qfi_phi =
        s > 0.0 ? 1.0 / qfi_closed_form(config.state, config.N, Which::phi).value : 0.0;
    switch (config.strategy) {
        case Strategy::local_eps:
            report.theory_mse = inv_qfi_eps;
            break;
        case Strategy::local_phi:
            report.theory_mse = inv_qfi_phi;
            break;
        case Strategy::j2_lphi:
            if (which == Which::phi) {
                report.theory_mse = inv_qfi_phi;
            } else {
                report.theory_mse = (eps_regular || s >= 1.0 - 1e-12) &&
                                            config.state.ds() != 0.0 && s > 0.0 && config.N >= 2
                                        ? j2_error_propagation(config.state, config.N)
                                        : 0.0;
            }
            break;
        case Strategy::signatures: {
            const auto [p0, p1] = signature_probabilities(config.N, config.state.epsilon());
            report.theory_mse = 4.0 * (1.0 - p1) / (config.N - 1.0);
            break;
        }
    }
    report.crb = which == Which::phi ? inv_qfi_phi : inv_qfi_eps;
    return report;
}

std::vector<MseExperimentRow> mse_experiment(const Parametrization& parametrization,
                                             double epsilon, double phi,
                                             const std::vector<int>& N_range,
                                             std::uint64_t nu, std::uint64_t seed,
                                             double w_eps, double w_phi,
                                             const EstimateOptions& options) {
    std::vector<MseExperimentRow> rows;
    rows.reserve(N_range.size());
    const BlochState state(epsilon, phi, parametrization);
    const double s2 = state.s() * state.s();

    for (int N : N_range) {
        SampleConfig config{state, N, nu, seed + static_cast<std::uint64_t>(N), Strategy::j2_lphi};
        const Dataset data = sample_outcomes(config);
        const RunReport eps_report = estimate(data, config, Which::epsilon, options);
        const RunReport phi_report = estimate(data, config, Which::phi, options);

        MseExperimentRow row;
        row.N = N;
        row.eps_mse = eps_report.empirical_mse;
        row.eps_stderr = eps_report.empirical_stderr;
        row.phi_mse = phi_report.empirical_mse;
        row.phi_stderr = phi_report.empirical_stderr;
        row.weighted = w_eps * row.eps_mse + w_phi * row.phi_mse;
        row.weighted_stderr = std::sqrt(w_eps * w_eps * row.eps_stderr * row.eps_stderr +
                                        w_phi * w_phi * row.phi_stderr * row.phi_stderr);
        row.eps_theory = j2_error_propagation(state, N);
        row.phi_theory = 1.0 / (N * s2);
        row.weighted_theory = w_eps * row.eps_theory + w_phi * row.phi_theory;
        const auto bounds = weighted_mse_table(parametrization, epsilon, {N}, w_eps, w_phi);
        row.ultimate = bounds.front().ultimate;
        row.split = bounds.front().split;
        row.clamp_count = eps_report.clamp_count + phi_report.clamp_count;
        rows.push_back(row);
    }
    return rows;
}

std::string run_report_to_json(const RunReport& report, int indent) {
    json j;
    j["strategy"] = strategy_name(report.strategy);
    j["which"] = report.which == Which::epsilon ? "epsilon" : "phi";
    j["N"] = report.N;
    j["nu"] = report.nu;
    j["batch_size"] = report.batch_size;
    j["full_estimate"] = report.full_estimate;
    j["estimates"] = report.estimates;
    j["empirical_mse"] = report.empirical_mse;
    j["empirical_stderr"] = report.empirical_stderr;
    j["propagated_mse"] = report.propagated_mse;
    j["propagated_stderr"] = report.propagated_stderr;
    j["theory_mse"] = report.theory_mse;
    j["crb"] = report.crb;
    j["clamp_count"] = report.clamp_count;
    return j.dump(indent);
}

std::string run_report_to_csv(const RunReport& report) {
    std::string out = "batch,estimate\n";
    for (std::size_t b = 0; b < report.estimates.size(); ++b) {
        out += std::to_string(b) + "," + format17(report.estimates[b]) + "\n";
    }
    return out;
}

std::string dataset_to_csv(const Dataset& dataset) {
    std::string out;
    switch (dataset.strategy) {
        case Strategy::local_eps:
        case Strategy::local_phi:
            out = "round,plus_count\n";
            for (std::uint64_t r = 0; r < dataset.nu; ++r) {
                out += std::to_string(r) + "," + std::to_string(dataset.plus_counts[r]) + "\n";
            }
            break;
        case Strategy::j2_lphi:
            out = "round,twice_j,plus_count\n";
            for (std::uint64_t r = 0; r < dataset.nu; ++r) {
                out += std::to_string(r) + "," + std::to_string(dataset.twice_j[r]) + "," +
                       std::to_string(dataset.plus_counts[r]) + "\n";
            }
            break;
        case Strategy::signatures:
            out = "round,flip\n";
            for (std::uint64_t r = 0; r < dataset.nu; ++r) {
                out += std::to_string(r) + "," +
                       std::to_string(static_cast<int>(dataset.flip_outcomes[r])) + "\n";
            }
            break;
    }
    return out;
}

std::string mse_rows_to_json(const std::vector<MseExperimentRow>& rows, int indent) {
    json arr = json::array();
    for (const auto& r : rows) {
        json j;
        j["N"] = r.N;
        j["eps_mse"] = r.eps_mse;
        j["eps_stderr"] = r.eps_stderr;
        j["phi_mse"] = r.phi_mse;
        j["phi_stderr"] = r.phi_stderr;
        j["weighted"] = r.weighted;
        j["weighted_stderr"] = r.weighted_stderr;
        j["eps_theory"] = r.eps_theory;
        j["phi_theory"] = r.phi_theory;
        j["weighted_theory"] = r.weighted_theory;
        j["ultimate"] = r.ultimate;
        j["split"] = r.split;
        j["clamp_count"] = r.clamp_count;
        arr.push_back(std::move(j));
    }
    return arr.dump(indent);
}

std::string mse_rows_to_csv(const std::vector<MseExperimentRow>& rows) {
    std::string out =
        "N,eps_mse,eps_stderr,phi_mse,phi_stderr,weighted,weighted_stderr,"
        "eps_theory,phi_theory,weighted_theory,ultimate,split,clamp_count\n";
    for (const auto& r : rows) {
        out += std::to_string(r.N) + "," + format17(r.eps_mse) + "," + format17(r.eps_stderr) +
               "," + format17(r.phi_mse) + "," + format17(r.phi_stderr) + "," +
               format17(r.weighted) + "," + format17(r.weighted_stderr) + "," +
               format17(r.eps_theory) + "," + format17(r.phi_theory) + "," +
               format17(r.weighted_theory) + "," + format17(r.ultimate) + "," +
               format17(r.split) + "," + std::to_string(r.clamp_count) + "\n";
    }
    return out;
}

} // namespace qmetro
