#pragma once

#include "qmetro/cyclotomic.hpp"
#include "qmetro/fock.hpp"
#include "qmetro/operators.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qmetro {

/// How amplitude-zero decisions are made when building signature sets.
struct ZeroTest {
    enum class Mode { exact, floating };
    Mode mode = Mode::floating;
    double tolerance = 1e-12;

    static ZeroTest exact() { return {Mode::exact, 0.0}; }
    static ZeroTest floating(double tol = 1e-12) { return {Mode::floating, tol}; }
    std::string describe() const;
};

/// The N-port discrete-Fourier-transform unitary U_{kl} = omega^{kl}/sqrt(N)
/// (0-based indices, omega = exp(2 pi i / N)).
DenseOperator dft_matrix(int N);

/// Exponent of omega in U_{kl}; the exact representation of the entries.
long dft_exponent(int N, int k, int l);

/// U U^dagger == identity, verified entry-wise in cyclotomic arithmetic.
bool dft_unitary_exact(int N);

/// Multi-particle transition amplitude through the multiport. Bosons use the
/// block permanent, fermions the block determinant with the port-major
/// (H before V) mode-ordering sign convention. Mismatched per-polarization
/// totals give exactly zero.
Complex transition_amplitude(int N, const FockState& in, const FockState& out,
                             Statistics statistics);

/// Amplitude with an exact cyclotomic numerator:
///   amplitude = numerator / (sqrt(N)^particles * sqrt(factorials)).
struct ExactAmplitude {
    Cyclotomic numerator;
    int particles = 0;
    BigInt factorials = 1;

    bool is_zero() const { return numerator.is_zero(); }
    ExactReal squared_magnitude() const;
    Complex to_complex() const;
};

ExactAmplitude transition_amplitude_exact(int N, const FockState& in,
                                          const FockState& out, Statistics statistics);

/// A term of a pure input state expanded over the Fock basis.
struct FockAmplitude {
    FockState state;
    Complex amplitude;
};

struct SignatureInfo {
    double probability = 0.0;
    std::optional<ExactReal> exact_mass;
};

/// The set of output port-count signatures reachable from a given input,
/// with the probability mass carried by each.
struct SignatureSet {
    int N = 0;
    Statistics statistics = Statistics::boson;
    ZeroTest zero_test;
    std::map<PortSignature, SignatureInfo> members;

    bool contains(const PortSignature& sig) const { return members.count(sig) > 0; }
    double total_probability() const;

    /// Masses aggregated over signatures sharing a sorted count pattern.
    std::vector<std::pair<std::vector<int>, SignatureInfo>> by_pattern() const;

    std::string to_json(int indent = 2) const;
};

/// Signature set of a normalized pure state given over the Fock basis
/// (floating zero test). Basis states may span several H/V sectors but must
/// share the total particle number.
SignatureSet signature_set(int N, const std::vector<FockAmplitude>& input,
                           Statistics statistics, ZeroTest zero_test = ZeroTest::floating());

/// Signature set of a single Fock basis state with exact zero decisions and
/// exact per-signature masses.
SignatureSet signature_set_exact(int N, const FockState& input, Statistics statistics);

/// Probability-weighted combination of pure-state signature sets.
SignatureSet signature_set_mixture(
    int N, const std::vector<std::pair<double, std::vector<FockAmplitude>>>& components,
    Statistics statistics, ZeroTest zero_test = ZeroTest::floating());

/// |H...H> rotated qubit-wise by phi, as a Fock superposition (one particle per port).
std::vector<FockAmplitude> tau0_input(int N, double phi);

/// |H..V..H> with the flip at `flipped_port`, rotated qubit-wise by phi.
std::vector<FockAmplitude> tau1_component_input(int N, int flipped_port, double phi);

/// General qubit-register vector (dimension 2^N) mapped to one particle per
/// port; used to feed angular-momentum eigenvectors into the multiport.
std::vector<FockAmplitude> qubit_vector_input(int N, const Vector& amplitudes);

struct ConjectureOptions {
    bool tau_only = false;
    int full_budget = 6;
    int tau_budget = 12;
    /// Exact tau masses are used up to this N, floating above.
    int exact_budget = 6;
    double mass_tolerance = 1e-9;
};

struct ConjectureReport {
    int N = 0;
    Statistics statistics = Statistics::boson;
    bool tau_only = false;
    bool exact = false;
    bool passed = false;
    SignatureSet s0; // signatures of the fully aligned reference state
    SignatureSet s1; // signatures of the single-flip states (identical for every flip)
    std::vector<double> overlap_mass;            // per flip, mass inside s0
    std::vector<std::optional<Rational>> overlap_exact;
    std::vector<std::string> failures;

    std::string to_json(int indent = 2) const;
};

/// Checks that (a) every single-flip state produces the same signature set,
/// (b) each carries exactly 1/N of its mass inside the reference set, and
/// (c) in full mode, every eigenvector with j = N/2 (resp. N/2 - 1) lands
/// inside s0 (resp. s1 \ s0).
ConjectureReport conjecture_check(int N, Statistics statistics,
                                  ConjectureOptions options = {});

struct RatioOptions {
    bool long_running = false;          // required for N >= 9
    std::string checkpoint_path;        // optional, long runs only
    int threads = 0;                    // 0 = hardware concurrency
};

struct RatioReport {
    std::uint64_t achievable = 0; // |S1|
    std::uint64_t total = 0;      // |S| = C(2N-1, N)
    Rational ratio() const { return Rational(achievable, total); }
};

/// |S1| / |S| with |S| = C(2N-1, N); exact membership decisions throughout.
/// Bosons only.
RatioReport signature_ratio(int N, const RatioOptions& options = {});

/// Leading-order probabilities (Pr{S0}, Pr{S1 \ S0}) for the nearly-pure
/// parametrization: (1 - (N-1) eps^2/16, (N-1) eps^2/16).
std::pair<double, double> signature_probabilities(int N, double epsilon);

namespace detail {

enum class ExactEngine { cyclotomic, modular };

/// Exact zero test for the bosonic block permanent of conj(U) rows `in_ports`
/// (one per particle) against the expanded output mode list. Exposed so the
/// two engines can be cross-checked.
bool block_permanent_is_zero(int N, const std::vector<int>& in_ports,
                             const std::vector<int>& out_ports, ExactEngine engine);

} // namespace detail

} // namespace qmetro
