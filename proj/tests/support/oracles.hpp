#pragma once

#include "qmetro/bloch_state.hpp"
#include "qmetro/fock.hpp"
#include "qmetro/multiport.hpp"
#include "qmetro/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace qmetro::test {

// ---------------------------------------------------------------------------
// Brute-force multi-particle interferometer oracle: symmetrize/antisymmetrize
// explicit first-quantized tensors and apply the single-particle transform
// slot by slot. Independent of the permanent/determinant code path.

inline std::vector<int> expanded_modes(const FockState& f) {
    std::vector<int> modes;
    for (int m = 0; m < 2 * f.num_ports; ++m) {
        for (int c = 0; c < f.occupations[static_cast<std::size_t>(m)]; ++c) {
            modes.push_back(m);
        }
    }
    return modes;
}

// Normalized (anti)symmetrized n-particle vector for the given Fock state,
// in the M^n product space.
inline Vector fock_vector(const FockState& f, Statistics st) {
    const int M = 2 * f.num_ports;
    auto modes = expanded_modes(f);
    const int n = static_cast<int>(modes.size());
    std::size_t dim = 1;
    for (int i = 0; i < n; ++i) dim *= static_cast<std::size_t>(M);

    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    std::vector<int> perm(modes.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        int parity = 0;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            for (std::size_t j = i + 1; j < perm.size(); ++j) {
                if (perm[i] > perm[j]) ++parity;
            }
        }
        std::size_t index = 0;
        for (std::size_t slot = 0; slot < perm.size(); ++slot) {
            index = index * static_cast<std::size_t>(M) +
                    static_cast<std::size_t>(modes[static_cast<std::size_t>(perm[slot])]);
        }
        const double sign = (st == Statistics::fermion && parity % 2 == 1) ? -1.0 : 1.0;
        v(static_cast<Eigen::Index>(index)) += sign;
    } while (std::next_permutation(perm.begin(), perm.end()));
    // All n! slot permutations contribute; repeated modes pile up on the same
    // index, which is exactly the bosonic occupation enhancement.
    v.normalize();
    return v;
}

// Single-particle transform of the multiport on modes (2*port + pol): an
// input particle at (l, pol) spreads to sum_k conj(U_{kl}) |k, pol>.
inline DenseOperator single_particle_transform(int N) {
    const DenseOperator u = dft_matrix(N);
    DenseOperator w = DenseOperator::Zero(2 * N, 2 * N);
    for (int k = 0; k < N; ++k) {
        for (int l = 0; l < N; ++l) {
            for (int pol = 0; pol < 2; ++pol) {
                w(2 * k + pol, 2 * l + pol) = std::conj(u(k, l));
            }
        }
    }
    return w;
}

inline Vector apply_per_slot(const DenseOperator& w, Vector v, int n, int M) {
    for (int slot = 0; slot < n; ++slot) {
        Vector out = Vector::Zero(v.size());
        std::size_t stride = 1;
        for (int s = slot + 1; s < n; ++s) stride *= static_cast<std::size_t>(M);
        const std::size_t outer = static_cast<std::size_t>(v.size()) / (stride * M);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < stride; ++i) {
                for (int a = 0; a < M; ++a) {
                    Complex sum = 0;
                    for (int b = 0; b < M; ++b) {
                        const std::size_t src = (o * M + static_cast<std::size_t>(b)) * stride + i;
                        sum += w(a, b) * v(static_cast<Eigen::Index>(src));
                    }
                    const std::size_t dst = (o * M + static_cast<std::size_t>(a)) * stride + i;
                    out(static_cast<Eigen::Index>(dst)) = sum;
                }
            }
        }
        v = std::move(out);
    }
    return v;
}

inline Complex brute_force_amplitude(int N, const FockState& in, const FockState& out,
                                     Statistics st) {
    const int n = in.total();
    const int M = 2 * N;
    const Vector v_in = fock_vector(in, st);
    const Vector v_out = fock_vector(out, st);
    const Vector transformed = apply_per_slot(single_particle_transform(N), v_in, n, M);
    return v_out.dot(transformed);
}

// ---------------------------------------------------------------------------

inline BlochState random_state(std::mt19937_64& rng, double s_min = 0.0,
                               double s_max = 0.95) {
    std::uniform_real_distribution<double> s_dist(s_min, s_max);
    std::uniform_real_distribution<double> phi_dist(0.0, 2.0 * 3.14159265358979);
    return BlochState::from_s(s_dist(rng), phi_dist(rng));
}

} // namespace qmetro::test
