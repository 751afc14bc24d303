#include "qmetro/multiport.hpp"

#include "qmetro/angular.hpp"
#include "qmetro/states.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

namespace qmetro {

namespace {

using nlohmann::json;

long long factorial_ll(int n) {
    long long out = 1;
    for (int i = 2; i <= n; ++i) out *= i;
    return out;
}

// ---------------------------------------------------------------------------
// Permanents and determinants over the value types the engine needs.

Complex ryser_permanent(const std::vector<Complex>& a, int n) {
    if (n == 0) return {1.0, 0.0};
    std::vector<Complex> rowsum(static_cast<std::size_t>(n), Complex(0, 0));
    Complex total(0, 0);
    std::uint64_t gray = 0;
    const std::uint64_t end = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < end; ++k) {
        const std::uint64_t next = k ^ (k >> 1);
        const std::uint64_t diff = next ^ gray;
        const int j = std::countr_zero(diff);
        const bool added = (next & diff) != 0;
        for (int i = 0; i < n; ++i) {
            const Complex& e = a[static_cast<std::size_t>(i * n + j)];
            if (added) {
                rowsum[static_cast<std::size_t>(i)] += e;
            } else {
                rowsum[static_cast<std::size_t>(i)] -= e;
            }
        }
        Complex prod(1, 0);
        for (int i = 0; i < n; ++i) prod *= rowsum[static_cast<std::size_t>(i)];
        const int bits = std::popcount(next);
        if ((n - bits) % 2 == 0) {
            total += prod;
        } else {
            total -= prod;
        }
        gray = next;
    }
    return total;
}

// Exact permanent of a matrix of root-of-unity powers: a[i*n+j] is the
// exponent of omega. Same Gray-code walk with cyclotomic row sums.
Cyclotomic ryser_permanent_exact(const std::vector<long>& exponents, int n, int order) {
    if (n == 0) return Cyclotomic::integer(order, 1);
    std::vector<Cyclotomic> rowsum(static_cast<std::size_t>(n), Cyclotomic(order));
    Cyclotomic total(order);
    const BigInt one(1), minus_one(-1);
    std::uint64_t gray = 0;
    const std::uint64_t end = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < end; ++k) {
        const std::uint64_t next = k ^ (k >> 1);
        const std::uint64_t diff = next ^ gray;
        const int j = std::countr_zero(diff);
        const bool added = (next & diff) != 0;
        for (int i = 0; i < n; ++i) {
            rowsum[static_cast<std::size_t>(i)].add_root_power(
                exponents[static_cast<std::size_t>(i * n + j)], added ? one : minus_one);
        }
        Cyclotomic prod = rowsum[0];
        for (int i = 1; i < n; ++i) prod = prod * rowsum[static_cast<std::size_t>(i)];
        const int bits = std::popcount(next);
        if ((n - bits) % 2 == 0) {
            total += prod;
        } else {
            total -= prod;
        }
        gray = next;
    }
    return total;
}

Complex subset_determinant(const std::vector<Complex>& a, int n) {
    if (n == 0) return {1.0, 0.0};
    const std::size_t size = std::size_t{1} << n;
    std::vector<Complex> d(size, Complex(0, 0));
    d[0] = Complex(1, 0);
    for (std::uint64_t mask = 1; mask < size; ++mask) {
        const int r = std::popcount(mask) - 1;
        Complex sum(0, 0);
        int pos = 0;
        for (int j = 0; j < n; ++j) {
            if (!(mask & (std::uint64_t{1} << j))) continue;
            const Complex term =
                a[static_cast<std::size_t>(r * n + j)] * d[mask ^ (std::uint64_t{1} << j)];
            if ((r + pos) % 2 == 0) {
                sum += term;
            } else {
                sum -= term;
            }
            ++pos;
        }
        d[mask] = sum;
    }
    return d[size - 1];
}

Cyclotomic subset_determinant_exact(const std::vector<long>& exponents, int n, int order) {
    if (n == 0) return Cyclotomic::integer(order, 1);
    const std::size_t size = std::size_t{1} << n;
    std::vector<Cyclotomic> d(size, Cyclotomic(order));
    d[0] = Cyclotomic::integer(order, 1);
    const BigInt one(1), minus_one(-1);
    for (std::uint64_t mask = 1; mask < size; ++mask) {
        const int r = std::popcount(mask) - 1;
        Cyclotomic sum(order);
        int pos = 0;
        for (int j = 0; j < n; ++j) {
            if (!(mask & (std::uint64_t{1} << j))) continue;
            Cyclotomic term = d[mask ^ (std::uint64_t{1} << j)];
            Cyclotomic factor(order);
            factor.add_root_power(exponents[static_cast<std::size_t>(r * n + j)],
                                  (r + pos) % 2 == 0 ? one : minus_one);
            sum += term * factor;
            ++pos;
        }
        d[mask] = sum;
    }
    return d[size - 1];
}

// ---------------------------------------------------------------------------
// Deterministic modular zero test for root-of-unity permanents.
//
// The permanent is a polynomial P in omega with integer coefficients bounded
// by n! <= 12!; reducing modulo the order-N cyclotomic polynomial grows them
// by at most 2^N. The amplitude vanishes iff P == 0 mod Phi_N, which holds
// iff P(g^t) == 0 mod p for every residue t coprime to N, for enough primes
// p == 1 (mod N) that their product exceeds twice the coefficient bound.
// Two 31-bit primes give 4.6e18 >> 2 * 12! * 2^12.

struct ModularPlan {
    std::uint64_t p = 0;
    std::vector<std::uint64_t> power_table; // g^(t*e) for the active point, per exponent
};

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t p) {
    std::uint64_t out = 1;
    base %= p;
    while (exp > 0) {
        if (exp & 1) out = mulmod(out, base, p);
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    return out;
}

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull}) {
        if (n % q == 0) return n == q;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull,
                            29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

// Two primes == 1 (mod lcm(1..12) = 27720) above 2^31, found once.
const std::vector<std::uint64_t>& modular_primes() {
    static const std::vector<std::uint64_t> primes = [] {
        std::vector<std::uint64_t> out;
        const std::uint64_t step = 27720;
        std::uint64_t candidate = ((std::uint64_t{1} << 31) / step + 1) * step + 1;
        while (out.size() < 2) {
            if (is_prime_u64(candidate)) out.push_back(candidate);
            candidate += step;
        }
        return out;
    }();
    return primes;
}

// Per-prime evaluation tables: for every residue t coprime to the order, the
// values g^(t e) of each exponent e, with g an element of order `order` mod p.
using PrimeTables = std::pair<std::uint64_t, std::vector<std::vector<std::uint64_t>>>;

std::uint64_t element_of_order(int order, std::uint64_t p) {
    std::vector<int> prime_factors;
    int m = order;
    for (int q = 2; q * q <= m; ++q) {
        while (m % q == 0) {
            prime_factors.push_back(q);
            m /= q;
        }
    }
    if (m > 1) prime_factors.push_back(m);
    for (std::uint64_t h = 2;; ++h) {
        const std::uint64_t g = powmod(h, (p - 1) / static_cast<std::uint64_t>(order), p);
        if (g == 1) continue;
        bool full_order = true;
        for (int q : prime_factors) {
            if (powmod(g, static_cast<std::uint64_t>(order / q), p) == 1) {
                full_order = false;
                break;
            }
        }
        if (full_order) return g;
    }
}

const std::vector<PrimeTables>& modular_tables(int order) {
    static std::mutex mutex;
    static std::map<int, std::vector<PrimeTables>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    std::vector<PrimeTables> tables;
    for (std::uint64_t p : modular_primes()) {
        const std::uint64_t g = element_of_order(order, p);
        std::vector<std::vector<std::uint64_t>> per_point;
        for (int t = 1; t < order; ++t) {
            if (std::gcd(t, order) != 1) continue;
            std::vector<std::uint64_t> values(static_cast<std::size_t>(order));
            for (int e = 0; e < order; ++e) {
                values[static_cast<std::size_t>(e)] = powmod(
                    g, static_cast<std::uint64_t>((static_cast<long long>(t) * e) % order), p);
            }
            per_point.push_back(std::move(values));
        }
        tables.emplace_back(p, std::move(per_point));
    }
    return cache.emplace(order, std::move(tables)).first->second;
}

std::uint64_t ryser_permanent_mod(const std::vector<long>& exponents, int n,
                                  const std::vector<std::uint64_t>& value_of_exponent,
                                  std::uint64_t p) {
    if (n == 0) return 1;
    std::vector<std::uint64_t> rowsum(static_cast<std::size_t>(n), 0);
    std::uint64_t total = 0;
    std::uint64_t gray = 0;
    const std::uint64_t end = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < end; ++k) {
        const std::uint64_t next = k ^ (k >> 1);
        const std::uint64_t diff = next ^ gray;
        const int j = std::countr_zero(diff);
        const bool added = (next & diff) != 0;
        for (int i = 0; i < n; ++i) {
            const std::uint64_t v =
                value_of_exponent[static_cast<std::size_t>(
                    exponents[static_cast<std::size_t>(i * n + j)])];
            std::uint64_t& rs = rowsum[static_cast<std::size_t>(i)];
            rs = added ? (rs + v) % p : (rs + p - v) % p;
        }
        std::uint64_t prod = 1;
        for (int i = 0; i < n; ++i) prod = mulmod(prod, rowsum[static_cast<std::size_t>(i)], p);
        const int bits = std::popcount(next);
        total = ((n - bits) % 2 == 0) ? (total + prod) % p : (total + p - prod) % p;
        gray = next;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Block decomposition of a transition.

std::vector<int> expand_ports(const FockState& f, Pol pol) {
    std::vector<int> ports;
    for (int p = 0; p < f.num_ports; ++p) {
        for (int c = 0; c < f.at(p, pol); ++c) ports.push_back(p);
    }
    return ports;
}

BigInt factorial_product(const FockState& f) {
    BigInt out = 1;
    for (int occ : f.occupations) out *= factorial_ll(occ);
    return out;
}

// Fermions: sign of the permutation that reorders the canonically ordered
// creation operators (mode-major: 2*port + pol) into H block then V block.
int block_reorder_sign(const FockState& f) {
    int v_seen = 0, inversions = 0;
    for (int p = 0; p < f.num_ports; ++p) {
        if (f.at(p, Pol::H) > 0) inversions += v_seen;
        if (f.at(p, Pol::V) > 0) ++v_seen;
    }
    return inversions % 2 == 0 ? 1 : -1;
}

void validate_statistics(const FockState& f, Statistics st) {
    if (st == Statistics::fermion) {
        for (int occ : f.occupations) {
            if (occ > 1) throw std::invalid_argument("fermionic occupation exceeds 1");
        }
    }
    for (int occ : f.occupations) {
        if (occ < 0) throw std::invalid_argument("negative occupation");
    }
}

std::vector<long> block_exponents(int N, const std::vector<int>& in_ports,
                                  const std::vector<int>& out_ports) {
    const auto n = in_ports.size();
    std::vector<long> exps(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // conj(U)_{k l} carries omega^(-k l).
            long e = -static_cast<long>(in_ports[i]) * out_ports[j];
            e %= N;
            if (e < 0) e += N;
            exps[i * n + j] = e;
        }
    }
    return exps;
}

std::vector<Complex> block_entries(int N, const std::vector<long>& exponents) {
    std::vector<Complex> entries(exponents.size());
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(exponents[i]) / N;
        entries[i] = Complex(std::cos(angle), std::sin(angle));
    }
    return entries;
}

Complex block_value(int N, const std::vector<int>& in_ports, const std::vector<int>& out_ports,
                    Statistics st) {
    const int n = static_cast<int>(in_ports.size());
    const auto exps = block_exponents(N, in_ports, out_ports);
    const auto entries = block_entries(N, exps);
    return st == Statistics::boson ? ryser_permanent(entries, n)
                                   : subset_determinant(entries, n);
}

Cyclotomic block_value_exact(int N, const std::vector<int>& in_ports,
                             const std::vector<int>& out_ports, Statistics st) {
    const int n = static_cast<int>(in_ports.size());
    const auto exps = block_exponents(N, in_ports, out_ports);
    return st == Statistics::boson ? ryser_permanent_exact(exps, n, N)
                                   : subset_determinant_exact(exps, n, N);
}

void check_transition(int N, const FockState& in, const FockState& out, Statistics st) {
    if (in.num_ports != N || out.num_ports != N) {
        throw std::invalid_argument("transition_amplitude: port count mismatch");
    }
    validate_statistics(in, st);
    validate_statistics(out, st);
    if (in.total() != out.total()) {
        throw std::invalid_argument("transition_amplitude: particle number mismatch");
    }
}

} // namespace

std::string ZeroTest::describe() const {
    if (mode == Mode::exact) return "exact";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "float(%g)", tolerance);
    return buf;
}

DenseOperator dft_matrix(int N) {
    if (N < 2) throw std::invalid_argument("dft_matrix: N must be >= 2");
    DenseOperator u(N, N);
    const double norm = 1.0 / std::sqrt(static_cast<double>(N));
    for (int k = 0; k < N; ++k) {
        for (int l = 0; l < N; ++l) {
            const double angle = 2.0 * std::numbers::pi * dft_exponent(N, k, l) / N;
            u(k, l) = norm * Complex(std::cos(angle), std::sin(angle));
        }
    }
    return u;
}

long dft_exponent(int N, int k, int l) {
    if (k < 0 || k >= N || l < 0 || l >= N) {
        throw std::invalid_argument("dft_exponent: index out of range");
    }
    return static_cast<long>((static_cast<long long>(k) * l) % N);
}

bool dft_unitary_exact(int N) {
    for (int k = 0; k < N; ++k) {
        for (int l = 0; l < N; ++l) {
            Cyclotomic sum(N);
            for (int m = 0; m < N; ++m) {
                sum.add_root_power(static_cast<long long>(k - l) * m, BigInt(1));
            }
            const auto value = sum.as_integer();
            if (!value) return false;
            if (k == l && *value != N) return false;
            if (k != l && *value != 0) return false;
        }
    }
    return true;
}

Complex transition_amplitude(int N, const FockState& in, const FockState& out,
                             Statistics statistics) {
    check_transition(N, in, out, statistics);
    if (in.total(Pol::H) != out.total(Pol::H)) return {0.0, 0.0};

    const auto in_h = expand_ports(in, Pol::H), in_v = expand_ports(in, Pol::V);
    const auto out_h = expand_ports(out, Pol::H), out_v = expand_ports(out, Pol::V);

    Complex value = block_value(N, in_h, out_h, statistics) *
                    block_value(N, in_v, out_v, statistics);
    if (statistics == Statistics::fermion) {
        value *= static_cast<double>(block_reorder_sign(in) * block_reorder_sign(out));
    }
    const int n = in.total();
    const double denom = std::sqrt(
        std::pow(static_cast<double>(N), n) *
        (factorial_product(in) * factorial_product(out)).convert_to<double>());
    return value / denom;
}

ExactReal ExactAmplitude::squared_magnitude() const {
    Cyclotomic num = numerator * numerator.conjugate();
    BigInt den = factorials;
    for (int i = 0; i < particles; ++i) den *= numerator.order();
    return {std::move(num), std::move(den)};
}

Complex ExactAmplitude::to_complex() const {
    const double denom = std::sqrt(std::pow(static_cast<double>(numerator.order()), particles) *
                                   factorials.convert_to<double>());
    return numerator.to_complex() / denom;
}

ExactAmplitude transition_amplitude_exact(int N, const FockState& in, const FockState& out,
                                          Statistics statistics) {
    check_transition(N, in, out, statistics);
    ExactAmplitude amp{Cyclotomic(N), in.total(), factorial_product(in) * factorial_product(out)};
    if (in.total(Pol::H) != out.total(Pol::H)) return amp;

    const auto in_h = expand_ports(in, Pol::H), in_v = expand_ports(in, Pol::V);
    const auto out_h = expand_ports(out, Pol::H), out_v = expand_ports(out, Pol::V);

    amp.numerator = block_value_exact(N, in_h, out_h, statistics) *
                    block_value_exact(N, in_v, out_v, statistics);
    if (statistics == Statistics::fermion &&
        block_reorder_sign(in) * block_reorder_sign(out) < 0) {
        amp.numerator = -amp.numerator;
    }
    return amp;
}

double SignatureSet::total_probability() const {
    double sum = 0.0;
    for (const auto& [sig, info] : members) sum += info.probability;
    return sum;
}

std::vector<std::pair<std::vector<int>, SignatureInfo>> SignatureSet::by_pattern() const {
    // A pattern mixing exact and non-exact members loses the exact label.
    std::map<std::vector<int>, SignatureInfo> agg;
    for (const auto& [sig, info] : members) {
        auto [it, fresh] = agg.try_emplace(sig.pattern(), SignatureInfo{});
        it->second.probability += info.probability;
        if (fresh) {
            it->second.exact_mass = info.exact_mass;
        } else if (it->second.exact_mass && info.exact_mass) {
            *it->second.exact_mass += *info.exact_mass;
        } else {
            it->second.exact_mass.reset();
        }
    }
    std::vector<std::pair<std::vector<int>, SignatureInfo>> out;
    out.reserve(agg.size());
    for (auto& [pattern, info] : agg) out.emplace_back(pattern, std::move(info));
    return out;
}

namespace {

json signature_set_json(const SignatureSet& set) {
    json j;
    j["N"] = set.N;
    j["statistics"] = set.statistics == Statistics::boson ? "boson" : "fermion";
    j["zero_test"] = set.zero_test.describe();
    json entries = json::array();
    for (const auto& [pattern, info] : set.by_pattern()) {
        json e;
        e["pattern"] = pattern;
        e["probability"] = info.probability;
        if (info.exact_mass) {
            if (const auto r = info.exact_mass->as_rational()) {
                e["exact"] = r->str();
            }
        }
        entries.push_back(std::move(e));
    }
    j["signatures"] = std::move(entries);
    return j;
}

} // namespace

std::string SignatureSet::to_json(int indent) const {
    return signature_set_json(*this).dump(indent);
}

namespace {

struct Sector {
    int n_h = 0, n_v = 0;
    // Distinct block occupations with ids, plus per input state the pair of ids.
    std::vector<std::vector<int>> h_occs, v_occs;
    struct Term {
        int h_id, v_id;
        Complex weight; // amplitude / sqrt(prod n_in!) with the fermionic input sign
    };
    std::vector<Term> terms;
};

std::vector<int> block_occupation(const FockState& f, Pol pol) {
    std::vector<int> occ(static_cast<std::size_t>(f.num_ports));
    for (int p = 0; p < f.num_ports; ++p) occ[static_cast<std::size_t>(p)] = f.at(p, pol);
    return occ;
}

int intern(std::vector<std::vector<int>>& pool, const std::vector<int>& occ) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i] == occ) return static_cast<int>(i);
    }
    pool.push_back(occ);
    return static_cast<int>(pool.size()) - 1;
}

} // namespace

SignatureSet signature_set(int N, const std::vector<FockAmplitude>& input,
                           Statistics statistics, ZeroTest zero_test) {
    if (input.empty()) throw std::invalid_argument("signature_set: empty input");
    if (zero_test.mode == ZeroTest::Mode::exact) {
        if (input.size() != 1 || std::abs(std::abs(input.front().amplitude) - 1.0) > 1e-10) {
            throw std::invalid_argument(
                "signature_set: exact zero test requires a single Fock basis state");
        }
        return signature_set_exact(N, input.front().state, statistics);
    }

    double norm = 0.0;
    const int total = input.front().state.total();
    for (const auto& term : input) {
        if (term.state.num_ports != N) {
            throw std::invalid_argument("signature_set: port count mismatch");
        }
        if (term.state.total() != total) {
            throw std::invalid_argument("signature_set: inconsistent particle number");
        }
        validate_statistics(term.state, statistics);
        norm += std::norm(term.amplitude);
    }
    if (std::abs(norm - 1.0) > 1e-10) {
        throw std::invalid_argument("signature_set: input state not normalized");
    }

    // Group terms into fixed (n_H, n_V) sectors; the multiport preserves both.
    std::map<int, Sector> sectors;
    for (const auto& term : input) {
        const int nh = term.state.total(Pol::H);
        Sector& sec = sectors[nh];
        sec.n_h = nh;
        sec.n_v = total - nh;
        Sector::Term t;
        t.h_id = intern(sec.h_occs, block_occupation(term.state, Pol::H));
        t.v_id = intern(sec.v_occs, block_occupation(term.state, Pol::V));
        t.weight = term.amplitude /
                   std::sqrt(factorial_product(term.state).convert_to<double>());
        if (statistics == Statistics::fermion) {
            t.weight *= static_cast<double>(block_reorder_sign(term.state));
        }
        sec.terms.push_back(t);
    }

    SignatureSet out;
    out.N = N;
    out.statistics = statistics;
    out.zero_test = zero_test;

    const int cap = statistics == Statistics::fermion ? 1 : -1;
    const double sqrtN_pow = std::pow(std::sqrt(static_cast<double>(N)), total);

    for (auto& [nh, sec] : sectors) {
        const auto outputs_h = enumerate_occupations(N, sec.n_h, cap);
        const auto outputs_v = enumerate_occupations(N, sec.n_v, cap);

        // Block values for every (distinct input occupation, output) pair.
        auto tabulate = [&](const std::vector<std::vector<int>>& in_occs,
                            const std::vector<std::vector<int>>& outs) {
            std::vector<std::vector<Complex>> table(in_occs.size());
            for (std::size_t i = 0; i < in_occs.size(); ++i) {
                std::vector<int> in_ports;
                for (int p = 0; p < N; ++p) {
                    for (int c = 0; c < in_occs[i][static_cast<std::size_t>(p)]; ++c) {
                        in_ports.push_back(p);
                    }
                }
                table[i].reserve(outs.size());
                for (const auto& occ : outs) {
                    std::vector<int> out_ports;
                    for (int p = 0; p < N; ++p) {
                        for (int c = 0; c < occ[static_cast<std::size_t>(p)]; ++c) {
                            out_ports.push_back(p);
                        }
                    }
                    table[i].push_back(block_value(N, in_ports, out_ports, statistics));
                }
            }
            return table;
        };
        const auto table_h = tabulate(sec.h_occs, outputs_h);
        const auto table_v = tabulate(sec.v_occs, outputs_v);

        for (std::size_t oh = 0; oh < outputs_h.size(); ++oh) {
            for (std::size_t ov = 0; ov < outputs_v.size(); ++ov) {
                Complex amp(0, 0);
                for (const auto& t : sec.terms) {
                    amp += t.weight * table_h[static_cast<std::size_t>(t.h_id)][oh] *
                           table_v[static_cast<std::size_t>(t.v_id)][ov];
                }
                FockState out_state(N);
                double out_fact = 1.0;
                for (int p = 0; p < N; ++p) {
                    out_state.at(p, Pol::H) = outputs_h[oh][static_cast<std::size_t>(p)];
                    out_state.at(p, Pol::V) = outputs_v[ov][static_cast<std::size_t>(p)];
                }
                for (int occ : out_state.occupations) {
                    out_fact *= static_cast<double>(factorial_ll(occ));
                }
                amp /= sqrtN_pow * std::sqrt(out_fact);
                if (statistics == Statistics::fermion) {
                    amp *= static_cast<double>(block_reorder_sign(out_state));
                }

                const double mass = std::norm(amp);
                if (std::abs(amp) > zero_test.tolerance) {
                    auto& info = out.members[PortSignature{out_state.port_counts()}];
                    info.probability += mass;
                }
            }
        }
    }
    return out;
}

SignatureSet signature_set_exact(int N, const FockState& input, Statistics statistics) {
    validate_statistics(input, statistics);
    if (input.num_ports != N) throw std::invalid_argument("signature_set_exact: port mismatch");

    SignatureSet out;
    out.N = N;
    out.statistics = statistics;
    out.zero_test = ZeroTest::exact();

    const int cap = statistics == Statistics::fermion ? 1 : -1;
    const auto outputs_h = enumerate_occupations(N, input.total(Pol::H), cap);
    const auto outputs_v = enumerate_occupations(N, input.total(Pol::V), cap);

    for (const auto& oh : outputs_h) {
        for (const auto& ov : outputs_v) {
            FockState out_state(N);
            for (int p = 0; p < N; ++p) {
                out_state.at(p, Pol::H) = oh[static_cast<std::size_t>(p)];
                out_state.at(p, Pol::V) = ov[static_cast<std::size_t>(p)];
            }
            const ExactAmplitude amp = transition_amplitude_exact(N, input, out_state, statistics);
            if (amp.is_zero()) continue;
            const ExactReal mass = amp.squared_magnitude();
            auto [it, fresh] =
                out.members.try_emplace(PortSignature{out_state.port_counts()}, SignatureInfo{});
            it->second.probability += mass.to_double();
            if (fresh || !it->second.exact_mass) {
                it->second.exact_mass = mass;
            } else {
                *it->second.exact_mass += mass;
            }
        }
    }
    return out;
}

SignatureSet signature_set_mixture(
    int N, const std::vector<std::pair<double, std::vector<FockAmplitude>>>& components,
    Statistics statistics, ZeroTest zero_test) {
    if (components.empty()) throw std::invalid_argument("signature_set_mixture: empty mixture");
    double weight_sum = 0.0;
    for (const auto& [w, _] : components) weight_sum += w;
    if (std::abs(weight_sum - 1.0) > 1e-10) {
        throw std::invalid_argument("signature_set_mixture: weights must sum to 1");
    }

    SignatureSet out;
    out.N = N;
    out.statistics = statistics;
    out.zero_test = zero_test;

    const auto k = static_cast<std::int64_t>(components.size());
    const bool equal_weights = std::all_of(components.begin(), components.end(), [&](const auto& c) {
        return std::abs(c.first - 1.0 / static_cast<double>(k)) < 1e-12;
    });

    for (const auto& [w, input] : components) {
        const SignatureSet part = signature_set(N, input, statistics, zero_test);
        for (const auto& [sig, info] : part.members) {
            auto& dst = out.members[sig];
            dst.probability += w * info.probability;
            if (zero_test.mode == ZeroTest::Mode::exact && info.exact_mass && equal_weights) {
                ExactReal scaled(info.exact_mass->numerator(),
                                 info.exact_mass->denominator() * k);
                if (dst.exact_mass) {
                    *dst.exact_mass += scaled;
                } else {
                    dst.exact_mass = scaled;
                }
            }
        }
    }
    return out;
}

namespace {

std::vector<FockAmplitude> product_state_input(int N, const std::vector<std::array<Complex, 2>>& spinors) {
    std::vector<FockAmplitude> terms;
    const std::size_t dim = std::size_t{1} << N;
    for (std::size_t bits = 0; bits < dim; ++bits) {
        Complex amp(1, 0);
        for (int p = 0; p < N; ++p) {
            const bool v = (bits >> (N - 1 - p)) & 1u;
            amp *= spinors[static_cast<std::size_t>(p)][v ? 1 : 0];
        }
        if (std::abs(amp) > 1e-13) {
            terms.push_back({FockState::one_per_port(N, bits), amp});
        }
    }
    return terms;
}

} // namespace

std::vector<FockAmplitude> tau0_input(int N, double phi) {
    const double c = std::cos(phi / 2.0), s = std::sin(phi / 2.0);
    std::vector<std::array<Complex, 2>> spinors(static_cast<std::size_t>(N),
                                                {Complex(c, 0), Complex(s, 0)});
    return product_state_input(N, spinors);
}

std::vector<FockAmplitude> tau1_component_input(int N, int flipped_port, double phi) {
    if (flipped_port < 0 || flipped_port >= N) {
        throw std::invalid_argument("tau1_component_input: bad port");
    }
    const double c = std::cos(phi / 2.0), s = std::sin(phi / 2.0);
    std::vector<std::array<Complex, 2>> spinors(static_cast<std::size_t>(N),
                                                {Complex(c, 0), Complex(s, 0)});
    spinors[static_cast<std::size_t>(flipped_port)] = {Complex(-s, 0), Complex(c, 0)};
    return product_state_input(N, spinors);
}

std::vector<FockAmplitude> qubit_vector_input(int N, const Vector& amplitudes) {
    if (amplitudes.size() != (Eigen::Index{1} << N)) {
        throw std::invalid_argument("qubit_vector_input: dimension mismatch");
    }
    std::vector<FockAmplitude> terms;
    for (Eigen::Index b = 0; b < amplitudes.size(); ++b) {
        if (std::abs(amplitudes(b)) > 1e-13) {
            terms.push_back({FockState::one_per_port(N, static_cast<std::size_t>(b)),
                             amplitudes(b)});
        }
    }
    return terms;
}

namespace {

std::set<PortSignature> member_set(const SignatureSet& s) {
    std::set<PortSignature> out;
    for (const auto& [sig, info] : s.members) out.insert(sig);
    return out;
}

std::string pattern_string(const PortSignature& sig) {
    std::string out = "(";
    const auto pat = sig.pattern();
    for (std::size_t i = 0; i < pat.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(pat[i]);
    }
    out += ")";
    return out;
}

std::string counts_string(const PortSignature& sig) {
    std::string out = "[";
    for (std::size_t i = 0; i < sig.counts.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(sig.counts[i]);
    }
    out += "]";
    return out;
}

} // namespace

ConjectureReport conjecture_check(int N, Statistics statistics, ConjectureOptions options) {
    if (N < 2) throw std::invalid_argument("conjecture_check: N must be >= 2");
    const int budget = options.tau_only ? options.tau_budget : options.full_budget;
    if (N > budget) {
        throw std::invalid_argument("conjecture_check: N exceeds the configured budget");
    }

    ConjectureReport report;
    report.N = N;
    report.statistics = statistics;
    report.tau_only = options.tau_only;
    report.exact = N <= options.exact_budget;

    const ZeroTest zt = report.exact ? ZeroTest::exact() : ZeroTest::floating();

    // Reference state: every port aligned (H); flip states: one port V.
    report.s0 = report.exact
                    ? signature_set_exact(N, FockState::one_per_port(N, 0), statistics)
                    : signature_set(N, tau0_input(N, 0.0), statistics, zt);

    std::vector<SignatureSet> flips;
    flips.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        const std::size_t bits = std::size_t{1} << (N - 1 - i);
        flips.push_back(report.exact
                            ? signature_set_exact(N, FockState::one_per_port(N, bits), statistics)
                            : signature_set(N, tau1_component_input(N, i, 0.0), statistics, zt));
    }

    const auto s1_members = member_set(flips.front());
    for (int i = 1; i < N; ++i) {
        if (member_set(flips[static_cast<std::size_t>(i)]) != s1_members) {
            report.failures.push_back("flip state " + std::to_string(i) +
                                      " has a different signature set than flip state 0");
        }
    }
    report.s1 = flips.front();

    // Each flip state must carry exactly 1/N of its mass inside s0.
    const Rational expected(1, N);
    for (int i = 0; i < N; ++i) {
        const auto& flip = flips[static_cast<std::size_t>(i)];
        double mass = 0.0;
        std::optional<ExactReal> exact_mass;
        for (const auto& [sig, info] : flip.members) {
            if (!report.s0.contains(sig)) continue;
            mass += info.probability;
            if (report.exact && info.exact_mass) {
                if (exact_mass) {
                    *exact_mass += *info.exact_mass;
                } else {
                    exact_mass = info.exact_mass;
                }
            }
        }
        report.overlap_mass.push_back(mass);
        if (report.exact) {
            std::optional<Rational> r =
                exact_mass ? exact_mass->as_rational() : std::optional<Rational>(Rational(0));
            report.overlap_exact.push_back(r);
            if (!r || *r != expected) {
                report.failures.push_back("flip state " + std::to_string(i) +
                                          " overlap with s0 is not exactly 1/N");
            }
        } else {
            report.overlap_exact.push_back(std::nullopt);
            if (std::abs(mass - 1.0 / N) > options.mass_tolerance) {
                report.failures.push_back("flip state " + std::to_string(i) +
                                          " overlap with s0 deviates from 1/N: " +
                                          std::to_string(mass));
            }
        }
    }

    if (!options.tau_only) {
        const auto basis = angular_eigenbasis(N);
        for (const auto& v : basis) {
            if (v.twice_j != N && v.twice_j != N - 2) continue;
            const auto set_v =
                signature_set(N, qubit_vector_input(N, v.vector), statistics, ZeroTest::floating());
            for (const auto& [sig, info] : set_v.members) {
                const bool in_s0 = report.s0.contains(sig);
                const bool in_s1 = report.s1.contains(sig);
                if (v.twice_j == N && !in_s0) {
                    report.failures.push_back(
                        "aligned-subspace ket (m=" + std::to_string(v.m()) +
                        ", g=" + std::to_string(v.g) + ") leaks to signature " +
                        counts_string(sig) + " " + pattern_string(sig));
                }
                if (v.twice_j == N - 2 && (!in_s1 || in_s0)) {
                    report.failures.push_back(
                        "single-flip-subspace ket (m=" + std::to_string(v.m()) +
                        ", g=" + std::to_string(v.g) + ") leaks to signature " +
                        counts_string(sig) + " " + pattern_string(sig));
                }
            }
        }
    }

    report.passed = report.failures.empty();
    return report;
}

std::string ConjectureReport::to_json(int indent) const {
    json j;
    j["N"] = N;
    j["statistics"] = statistics == Statistics::boson ? "boson" : "fermion";
    j["mode"] = tau_only ? "tau-only" : "full-eigenbasis";
    j["exact"] = exact;
    j["passed"] = passed;
    j["s0"] = signature_set_json(s0);
    j["s1"] = signature_set_json(s1);
    j["overlap_mass"] = overlap_mass;
    json overlaps = json::array();
    for (const auto& r : overlap_exact) {
        if (r) {
            overlaps.push_back(r->str());
        } else {
            overlaps.push_back(nullptr);
        }
    }
    j["overlap_exact"] = std::move(overlaps);
    j["failures"] = failures;
    return j.dump(indent);
}

namespace detail {

bool block_permanent_is_zero(int N, const std::vector<int>& in_ports,
                             const std::vector<int>& out_ports, ExactEngine engine) {
    const int n = static_cast<int>(in_ports.size());
    if (in_ports.size() != out_ports.size()) {
        throw std::invalid_argument("block_permanent_is_zero: size mismatch");
    }
    const auto exps = block_exponents(N, in_ports, out_ports);
    if (engine == ExactEngine::cyclotomic) {
        return ryser_permanent_exact(exps, n, N).is_zero();
    }

    // Fast float screen with a rigorous error bound: the Gray-code walk
    // accumulates sum |prod| alongside the permanent, so rounding error is
    // below c * n * eps * sum|prod|. Values above that cannot be exact zeros.
    {
        const auto entries = block_entries(N, exps);
        std::vector<Complex> rowsum(static_cast<std::size_t>(n), Complex(0, 0));
        Complex total(0, 0);
        double magnitude_sum = 0.0;
        std::uint64_t gray = 0;
        const std::uint64_t end = std::uint64_t{1} << n;
        for (std::uint64_t k = 1; k < end; ++k) {
            const std::uint64_t next = k ^ (k >> 1);
            const std::uint64_t diff = next ^ gray;
            const int j = std::countr_zero(diff);
            const bool added = (next & diff) != 0;
            for (int i = 0; i < n; ++i) {
                const Complex& e = entries[static_cast<std::size_t>(i * n + j)];
                if (added) {
                    rowsum[static_cast<std::size_t>(i)] += e;
                } else {
                    rowsum[static_cast<std::size_t>(i)] -= e;
                }
            }
            Complex prod(1, 0);
            for (int i = 0; i < n; ++i) prod *= rowsum[static_cast<std::size_t>(i)];
            magnitude_sum += std::abs(prod.real()) + std::abs(prod.imag());
            if ((n - std::popcount(next)) % 2 == 0) {
                total += prod;
            } else {
                total -= prod;
            }
            gray = next;
        }
        const double error_bound = 16.0 * n * 2.3e-16 * magnitude_sum;
        if (std::abs(total) > error_bound) return false;
    }

    for (const auto& [p, tables] : modular_tables(N)) {
        for (const auto& value_of_exponent : tables) {
            if (ryser_permanent_mod(exps, n, value_of_exponent, p) != 0) return false;
        }
    }
    return true;
}

} // namespace detail

namespace {

struct RatioCheckpoint {
    int N = 0;
    int chunks = 0;
    std::vector<bool> completed;
    std::vector<std::vector<int>> nonzero; // H-block output occupations found nonzero

    json to_json() const {
        json j;
        j["N"] = N;
        j["statistics"] = "boson";
        j["zero_test"] = "exact";
        j["chunks"] = chunks;
        j["completed"] = completed;
        j["nonzero"] = nonzero;
        return j;
    }
};

} // namespace

RatioReport signature_ratio(int N, const RatioOptions& options) {
    if (N < 2 || N > 12) throw std::invalid_argument("signature_ratio: N out of range [2, 12]");
    if (N >= 9 && !options.long_running) {
        throw std::invalid_argument("signature_ratio: N >= 9 requires the long-running flag");
    }
    const auto engine =
        N <= 8 ? detail::ExactEngine::cyclotomic : detail::ExactEngine::modular;

    // One particle per port with the flipped port at 0; different flip
    // positions are cyclic relabelings of the inputs, which only rescale
    // output amplitudes by unit phases, so the signature set is shared.
    std::vector<int> in_ports;
    for (int p = 1; p < N; ++p) in_ports.push_back(p);

    const auto outputs = enumerate_occupations(N, N - 1);
    const int chunk_count = 64;

    RatioCheckpoint ckpt;
    ckpt.N = N;
    ckpt.chunks = chunk_count;
    ckpt.completed.assign(chunk_count, false);

    if (!options.checkpoint_path.empty()) {
        std::ifstream in(options.checkpoint_path);
        if (in) {
            json j;
            in >> j;
            if (j.value("N", -1) == N && j.value("chunks", -1) == chunk_count) {
                ckpt.completed = j["completed"].get<std::vector<bool>>();
                ckpt.nonzero = j["nonzero"].get<std::vector<std::vector<int>>>();
            }
        }
    }

    std::mutex merge_mutex;
    auto process_chunk = [&](int chunk) {
        const std::size_t begin = outputs.size() * static_cast<std::size_t>(chunk) / chunk_count;
        const std::size_t end =
            outputs.size() * static_cast<std::size_t>(chunk + 1) / chunk_count;
        std::vector<std::vector<int>> found;
        for (std::size_t idx = begin; idx < end; ++idx) {
            std::vector<int> out_ports;
            for (int p = 0; p < N; ++p) {
                for (int c = 0; c < outputs[idx][static_cast<std::size_t>(p)]; ++c) {
                    out_ports.push_back(p);
                }
            }
            if (!detail::block_permanent_is_zero(N, in_ports, out_ports, engine)) {
                found.push_back(outputs[idx]);
            }
        }
        std::lock_guard<std::mutex> lock(merge_mutex);
        for (auto& f : found) ckpt.nonzero.push_back(std::move(f));
        ckpt.completed[static_cast<std::size_t>(chunk)] = true;
        if (!options.checkpoint_path.empty()) {
            std::ofstream out(options.checkpoint_path);
            out << ckpt.to_json().dump();
        }
    };

    std::vector<int> pending;
    for (int chunk = 0; chunk < chunk_count; ++chunk) {
        if (!ckpt.completed[static_cast<std::size_t>(chunk)]) pending.push_back(chunk);
    }

    unsigned threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(pending.size()) + 1);
    if (threads <= 1 || pending.size() <= 1) {
        for (int chunk : pending) process_chunk(chunk);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= pending.size()) break;
                    process_chunk(pending[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Every achievable signature is a nonzero (N-1)-particle pattern plus the
    // flipped particle landing at any port (its 1x1 block never vanishes).
    std::set<std::vector<int>> signatures;
    for (const auto& m : ckpt.nonzero) {
        for (int k = 0; k < N; ++k) {
            std::vector<int> sig = m;
            sig[static_cast<std::size_t>(k)] += 1;
            signatures.insert(std::move(sig));
        }
    }
    return RatioReport{signatures.size(), binomial(2 * N - 1, N)};
}

std::pair<double, double> signature_probabilities(int N, double epsilon) {
    if (N < 2) throw std::invalid_argument("signature_probabilities: N must be >= 2");
    const double p1 = (N - 1) * epsilon * epsilon / 16.0;
    return {1.0 - p1, p1};
}

} // namespace qmetro
