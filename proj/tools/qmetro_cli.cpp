// Command-line front end: every computation in the library surfaces here as a
// subcommand with JSON or CSV output.

#include "qmetro/angular.hpp"
#include "qmetro/metrology.hpp"
#include "qmetro/multiport.hpp"
#include "qmetro/numdiff.hpp"
#include "qmetro/simulate.hpp"
#include "qmetro/states.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;
using namespace qmetro;

constexpr std::uint64_t kLongRunThreshold = 1000000;

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int env_threads() {
    if (const char* v = std::getenv("QMETRO_THREADS")) {
        return std::atoi(v);
    }
    return 0;
}

struct StateFlags {
    std::optional<double> epsilon;
    std::optional<double> s;
    double phi = 0.0;
    std::string parametrization = "default_quadratic";
    std::string table_path;

    void attach(CLI::App* cmd, bool with_phi = true) {
        cmd->add_option("--epsilon", epsilon, "Parameter value epsilon");
        cmd->add_option("--s", s, "Bloch length s (alternative to --epsilon)");
        if (with_phi) cmd->add_option("--phi", phi, "Direction angle phi (radians)");
        cmd->add_option("--parametrization", parametrization,
                        "default_quadratic | identity | custom-table")
            ->check(CLI::IsMember({"default_quadratic", "identity", "custom-table"}));
        cmd->add_option("--table", table_path, "CSV of epsilon,s rows for custom-table");
    }

    Parametrization make_parametrization() const {
        if (parametrization == "default_quadratic") return Parametrization::default_quadratic();
        if (parametrization == "identity") return Parametrization::identity();
        if (table_path.empty()) {
            throw std::invalid_argument("custom-table parametrization requires --table");
        }
        std::ifstream in(table_path);
        if (!in) throw std::invalid_argument("cannot open table file: " + table_path);
        std::vector<std::pair<double, double>> samples;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            double e, sv;
            if (row >> e >> sv) samples.emplace_back(e, sv);
        }
        return Parametrization::from_table(std::move(samples));
    }

    BlochState make_state() const {
        if (epsilon.has_value() == s.has_value()) {
            throw std::invalid_argument("provide exactly one of --epsilon or --s");
        }
        const auto par = make_parametrization();
        if (epsilon) return BlochState(*epsilon, phi, par);
        return BlochState(par.s_inverse(*s), phi, par);
    }
};

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
        out << text << "\n";
    }
}

Statistics parse_statistics(const std::string& s) {
    if (s == "boson") return Statistics::boson;
    if (s == "fermion") return Statistics::fermion;
    throw std::invalid_argument("statistics must be boson or fermion");
}

// "3/2", "1.5" and "-1/2" all parse to twice the value.
int parse_twice(const std::string& text) {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const int num = std::stoi(text.substr(0, slash));
        const int den = std::stoi(text.substr(slash + 1));
        if (den != 2) throw std::invalid_argument("half-integers must use denominator 2");
        return num;
    }
    const double v = std::stod(text);
    const int twice = static_cast<int>(std::lround(2.0 * v));
    if (std::abs(2.0 * v - twice) > 1e-9) {
        throw std::invalid_argument("not a half-integer: " + text);
    }
    return twice;
}

// ---------------------------------------------------------------------------

int run_qfi(const StateFlags& flags, int N, const std::string& which_name,
            const std::string& format, const std::string& out_path) {
    const auto state = flags.make_state();
    const Which which = which_name == "phi" ? Which::phi : Which::epsilon;
    const auto report = qfi_closed_form(state, N, which);

    std::optional<double> numeric;
    std::optional<double> residual;
    if (N <= kMaxDiagonalizationQubits) {
        const auto rho = build_density(state, N);
        DenseOperator drho;
        if (which == Which::epsilon) {
            drho = five_point_derivative(
                [&](double e) {
                    return build_density(BlochState(e, state.phi(), state.parametrization()), N);
                },
                state.epsilon());
        } else {
            drho = five_point_derivative(
                [&](double p) {
                    return build_density(BlochState(state.epsilon(), p, state.parametrization()),
                                         N);
                },
                state.phi());
        }
        const auto L = sld_numeric(rho, drho);
        numeric = (rho * L * L).trace().real();
        residual = std::abs(*numeric - report.value);
    }

    if (format == "csv") {
        std::string csv = "which,N,closed_form,numeric,residual\n";
        csv += which_name + "," + std::to_string(N) + "," + format17(report.value) + "," +
               (numeric ? format17(*numeric) : "") + "," + (residual ? format17(*residual) : "");
        write_output(csv, out_path);
    } else {
        json j;
        j["which"] = which_name;
        j["N"] = N;
        j["closed_form"] = report.value;
        if (numeric) {
            j["numeric"] = *numeric;
            j["residual"] = *residual;
        }
        write_output(j.dump(2), out_path);
    }
    return 0;
}

int run_spectrum(const StateFlags& flags, int N, const std::string& format,
                 const std::string& out_path) {
    const auto state = flags.make_state();
    const auto spec = spectrum_exact(state, N);
    if (format == "csv") {
        std::string csv = "twice_j,j,multiplicity,p\n";
        for (const auto& e : spec.entries) {
            csv += std::to_string(e.twice_j) + "," + format17(e.twice_j / 2.0) + "," +
                   std::to_string(e.mu) + "," + format17(e.p) + "\n";
        }
        csv.pop_back();
        write_output(csv, out_path);
    } else {
        json j;
        j["N"] = N;
        j["epsilon"] = state.epsilon();
        j["s"] = state.s();
        json entries = json::array();
        for (const auto& e : spec.entries) {
            entries.push_back({{"twice_j", e.twice_j},
                               {"j", e.twice_j / 2.0},
                               {"multiplicity", e.mu},
                               {"p", e.p}});
        }
        j["entries"] = std::move(entries);
        write_output(j.dump(2), out_path);
    }
    return 0;
}

int run_moments(const StateFlags& flags, int N, const std::string& format,
                const std::string& out_path) {
    const auto state = flags.make_state();
    const auto m = j2_moments(state, N);
    std::optional<double> propagation;
    if (N >= 2 && state.s() > 0.0 && state.ds() != 0.0) {
        propagation = j2_error_propagation(state, N);
    }
    if (format == "csv") {
        std::string csv = "N,mean_J2,mean_J2sq,d_mean_J2,variance,error_propagation\n" +
                          std::to_string(N) + "," + format17(m.mean_J2) + "," +
                          format17(m.mean_J2sq) + "," + format17(m.d_mean_J2) + "," +
                          format17(m.variance) + "," +
                          (propagation ? format17(*propagation) : "");
        write_output(csv, out_path);
    } else {
        json j;
        j["N"] = N;
        j["mean_J2"] = m.mean_J2;
        j["mean_J2sq"] = m.mean_J2sq;
        j["d_mean_J2"] = m.d_mean_J2;
        j["variance"] = m.variance;
        if (propagation) j["error_propagation"] = *propagation;
        write_output(j.dump(2), out_path);
    }
    return 0;
}

int run_mse_curve(const StateFlags& flags, const std::vector<int>& N_range, double w_eps,
                  std::uint64_t nu, std::uint64_t seed, const std::string& format,
                  const std::string& out_path) {
    const auto par = flags.make_parametrization();
    const auto state = flags.make_state();
    const double w_phi = 1.0 - w_eps;
    const auto analytic = weighted_mse_table(par, state.epsilon(), N_range, w_eps, w_phi);

    std::vector<MseExperimentRow> monte_carlo;
    if (nu > 0) {
        monte_carlo =
            mse_experiment(par, state.epsilon(), state.phi(), N_range, nu, seed, w_eps, w_phi);
    }

    if (format == "csv") {
        std::string csv = "N,collective,ultimate,split";
        if (nu > 0) csv += ",empirical_weighted,empirical_stderr";
        csv += "\n";
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            csv += std::to_string(analytic[i].N) + "," + format17(analytic[i].collective) + "," +
                   format17(analytic[i].ultimate) + "," + format17(analytic[i].split);
            if (nu > 0) {
                csv += "," + format17(monte_carlo[i].weighted) + "," +
                       format17(monte_carlo[i].weighted_stderr);
            }
            csv += "\n";
        }
        csv.pop_back();
        write_output(csv, out_path);
    } else {
        json arr = json::array();
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            json row;
            row["N"] = analytic[i].N;
            row["collective"] = analytic[i].collective;
            row["ultimate"] = analytic[i].ultimate;
            row["split"] = analytic[i].split;
            if (nu > 0) {
                row["empirical_weighted"] = monte_carlo[i].weighted;
                row["empirical_stderr"] = monte_carlo[i].weighted_stderr;
            }
            arr.push_back(std::move(row));
        }
        write_output(arr.dump(2), out_path);
    }
    return 0;
}

std::uint64_t estimated_outputs(int N, int n_h, int n_v) {
    const auto combos = [](int modes, int particles) {
        return binomial(modes + particles - 1, particles);
    };
    return combos(N, n_h) * combos(N, n_v);
}

int run_signatures(const StateFlags& flags, int N, const std::string& input,
                   const std::string& j_text, const std::string& m_text, int g,
                   const std::string& statistics_name, const std::string& zero_test_name,
                   double tolerance, bool long_run, const std::string& out_path) {
    const Statistics statistics = parse_statistics(statistics_name);
    const bool exact_requested = zero_test_name == "exact";
    const double phi = flags.phi;

    std::uint64_t outputs = 0;
    for (int k = 0; k <= N; ++k) outputs = std::max(outputs, estimated_outputs(N, N - k, k));
    if (outputs > kLongRunThreshold && !long_run) {
        throw std::invalid_argument("enumeration exceeds 1e6 signatures; pass --long");
    }

    SignatureSet set;
    if (input == "tau0" || input == "tau1") {
        if (exact_requested && phi != 0.0) {
            throw std::invalid_argument("exact zero test requires phi = 0 product inputs");
        }
        if (input == "tau0") {
            set = exact_requested
                      ? signature_set_exact(N, FockState::one_per_port(N, 0), statistics)
                      : signature_set(N, tau0_input(N, phi), statistics,
                                      ZeroTest::floating(tolerance));
        } else {
            std::vector<std::pair<double, std::vector<FockAmplitude>>> comps;
            for (int i = 0; i < N; ++i) {
                comps.emplace_back(1.0 / N, tau1_component_input(N, i, phi));
            }
            set = signature_set_mixture(N, comps, statistics,
                                        exact_requested ? ZeroTest::exact()
                                                        : ZeroTest::floating(tolerance));
        }
    } else if (input == "eigen") {
        if (exact_requested) {
            throw std::invalid_argument(
                "eigenbasis kets have irrational coefficients; use the float zero test");
        }
        const int twice_j = parse_twice(j_text), twice_m = parse_twice(m_text);
        const auto basis = angular_eigenbasis(N);
        const AngularEigenvector* found = nullptr;
        for (const auto& v : basis) {
            if (v.twice_j == twice_j && v.twice_m == twice_m && v.g == g) found = &v;
        }
        if (!found) throw std::invalid_argument("no eigenvector with the requested (j, m, g)");
        Vector vec = found->vector;
        if (phi != 0.0) {
            vec = kron_power(qubit_rotation_y(phi), N) * vec;
        }
        set = signature_set(N, qubit_vector_input(N, vec), statistics,
                            ZeroTest::floating(tolerance));
    } else {
        throw std::invalid_argument("input must be tau0 | tau1 | eigen");
    }

    write_output(set.to_json(2), out_path);
    return 0;
}

int run_conjecture(int N, const std::string& statistics_name, bool tau_only, int exact_budget,
                   bool long_run, const std::string& out_path) {
    ConjectureOptions options;
    options.tau_only = tau_only;
    options.exact_budget = exact_budget;
    if (tau_only && N >= 10 && !long_run) {
        throw std::invalid_argument("tau-only conjecture above N=9 needs --long");
    }
    const auto report = conjecture_check(N, parse_statistics(statistics_name), options);
    write_output(report.to_json(2), out_path);
    return report.passed ? 0 : 2;
}

int run_ratio(int N, bool long_run, const std::string& checkpoint,
              const std::string& out_path) {
    RatioOptions options;
    options.long_running = long_run;
    options.checkpoint_path = checkpoint;
    options.threads = env_threads();
    const RatioReport report = signature_ratio(N, options);
    if (report.achievable == report.total) {
        write_output("1", out_path);
    } else {
        write_output(std::to_string(report.achievable) + "/" + std::to_string(report.total),
                     out_path);
    }
    return 0;
}

int run_simulate(const StateFlags& flags, const std::vector<int>& N_range, std::uint64_t nu,
                 std::uint64_t seed, double w_eps, const std::string& format,
                 const std::string& out_path) {
    const auto par = flags.make_parametrization();
    const auto state = flags.make_state();
    const auto rows = mse_experiment(par, state.epsilon(), state.phi(), N_range, nu, seed,
                                     w_eps, 1.0 - w_eps);
    write_output(format == "csv" ? mse_rows_to_csv(rows) : mse_rows_to_json(rows, 2), out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collective-measurement estimation and multiport interference toolkit"};
    app.require_subcommand(1);

    std::string format = "json", out_path;
    app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--out", out_path, "Write output to a file instead of stdout");

    int N = 2;
    StateFlags qfi_flags, spectrum_flags, moments_flags, curve_flags, sig_flags, sim_flags;
    std::string which = "epsilon";

    auto* qfi_cmd = app.add_subcommand("qfi", "Closed-form quantum information + numeric check");
    qfi_cmd->add_option("--n", N, "Number of copies")->required();
    qfi_cmd->add_option("--which", which, "epsilon | phi")
        ->check(CLI::IsMember({"epsilon", "phi"}));
    qfi_flags.attach(qfi_cmd);

    auto* spectrum_cmd = app.add_subcommand("spectrum", "Total-angular-momentum distribution");
    spectrum_cmd->add_option("--n", N, "Number of copies")->required();
    spectrum_flags.attach(spectrum_cmd);

    auto* moments_cmd = app.add_subcommand("moments", "First and second collective moments");
    moments_cmd->add_option("--n", N, "Number of copies")->required();
    moments_flags.attach(moments_cmd);

    std::vector<int> n_range;
    double w_eps = 0.5;
    std::uint64_t nu = 0, seed = 0;
    auto* curve_cmd = app.add_subcommand("mse-curve", "Weighted-MSE comparison table");
    curve_cmd->add_option("--n", n_range, "Copy counts (repeatable or comma-separated)")
        ->required()
        ->delimiter(',');
    curve_cmd->add_option("--w-eps", w_eps, "Weight on the epsilon error (rest goes to phi)");
    curve_cmd->add_option("--nu", nu, "Optional Monte Carlo repetitions per N");
    curve_cmd->add_option("--seed", seed, "Monte Carlo seed");
    curve_flags.attach(curve_cmd);

    std::string input = "tau0", j_text = "0", m_text = "0", statistics_name = "boson",
                zero_test_name = "float";
    int g = 1;
    double tolerance = 1e-12;
    bool long_run = false, tau_only = false;
    int exact_budget = 6;
    std::string checkpoint;

    auto* sig_cmd = app.add_subcommand("signatures", "Signature-set dump for a named input");
    sig_cmd->add_option("--n", N, "Number of ports / particles")->required();
    sig_cmd->add_option("--input", input, "tau0 | tau1 | eigen")->required();
    sig_cmd->add_option("--j", j_text, "j for eigen input (e.g. 3/2)");
    sig_cmd->add_option("--m", m_text, "m for eigen input");
    sig_cmd->add_option("--g", g, "Multiplicity label for eigen input");
    sig_cmd->add_option("--statistics", statistics_name, "boson | fermion")
        ->check(CLI::IsMember({"boson", "fermion"}));
    sig_cmd->add_option("--zero-test", zero_test_name, "exact | float")
        ->check(CLI::IsMember({"exact", "float"}));
    sig_cmd->add_option("--tolerance", tolerance, "Float zero-test tolerance");
    sig_cmd->add_flag("--long", long_run, "Allow enumerations beyond 1e6 signatures");
    sig_flags.attach(sig_cmd);

    auto* conj_cmd = app.add_subcommand("conjecture", "Signature-distinguishability check");
    conj_cmd->add_option("--n", N, "Number of copies")->required();
    conj_cmd->add_option("--statistics", statistics_name, "boson | fermion")
        ->check(CLI::IsMember({"boson", "fermion"}));
    conj_cmd->add_flag("--tau-only", tau_only, "Skip the full-eigenbasis sweep");
    conj_cmd->add_option("--exact-budget", exact_budget, "Largest N using exact masses");
    conj_cmd->add_flag("--long", long_run, "Allow long enumerations");

    auto* ratio_cmd = app.add_subcommand("ratio", "Achievable-signature fraction |S1|/|S|");
    ratio_cmd->add_option("--n", N, "Number of copies")->required();
    ratio_cmd->add_flag("--long", long_run, "Required for N >= 9");
    ratio_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file for long runs");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo weighted-MSE experiment");
    sim_cmd->add_option("--n", n_range, "Copy counts")->required()->delimiter(',');
    sim_cmd->add_option("--nu", nu, "Repetitions per point")->required();
    sim_cmd->add_option("--seed", seed, "Sampling seed");
    sim_cmd->add_option("--w-eps", w_eps, "Weight on the epsilon error");
    sim_flags.attach(sim_cmd);

    // Global flags (--format/--out) may appear after the subcommand name.
    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (qfi_cmd->parsed()) return run_qfi(qfi_flags, N, which, format, out_path);
        if (spectrum_cmd->parsed()) return run_spectrum(spectrum_flags, N, format, out_path);
        if (moments_cmd->parsed()) return run_moments(moments_flags, N, format, out_path);
        if (curve_cmd->parsed()) {
            return run_mse_curve(curve_flags, n_range, w_eps, nu, seed, format, out_path);
        }
        if (sig_cmd->parsed()) {
            return run_signatures(sig_flags, N, input, j_text, m_text, g, statistics_name,
                                  zero_test_name, tolerance, long_run, out_path);
        }
        if (conj_cmd->parsed()) {
            return run_conjecture(N, statistics_name, tau_only, exact_budget, long_run, out_path);
        }
        if (ratio_cmd->parsed()) return run_ratio(N, long_run, checkpoint, out_path);
        if (sim_cmd->parsed()) {
            return run_simulate(sim_flags, n_range, nu, seed, w_eps, format, out_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
