#pragma once

#include "qmetro/bloch_state.hpp"
#include "qmetro/operators.hpp"

#include <vector>

namespace qmetro {

inline constexpr int kMaxDenseQubits = 12;
inline constexpr int kMaxDiagonalizationQubits = 8;

/// The four collective spin operators for N spin-1/2s, J_k = (1/2) sum_i sigma_k^(i).
struct CollectiveSpin {
    int N = 0;
    DenseOperator Jx, Jy, Jz, Jsq;
};

enum class Which { epsilon, phi };

/// Single-qubit density matrix (1/2)(I + s * e_s . sigma) with
/// e_s = sin(phi) e_x + cos(phi) e_z.
DenseOperator single_qubit_density(const BlochState& state);

/// rho_N = rho^{tensor N}, built by Kronecker powers. Valid for all s in [0,1].
DenseOperator build_density(const BlochState& state, int N);

/// The same state written as exp(-i Jy phi) exp(2 beta Jz) exp(i Jy phi) / (2 cosh beta)^N.
/// Requires s < 1; kept as an independent construction route.
DenseOperator rotated_thermal_density(const BlochState& state, int N);

CollectiveSpin collective_spin(int N);

/// Closed-form symmetric logarithmic derivative for the chosen parameter.
DenseOperator sld_closed_form(const BlochState& state, int N, Which which);

/// Solves (1/2)(L rho + rho L) = drho in the eigenbasis of rho. Eigenvalue
/// pairs below a relative kernel threshold are dropped (L set to zero there).
DenseOperator sld_numeric(const DenseOperator& rho, const DenseOperator& drho,
                          double kernel_threshold = 1e-12);

/// Simultaneous eigenvector of (Jsq, Jz): Jsq v = j(j+1) v, Jz v = m v,
/// with g indexing the multiplicity copies of a given j.
struct AngularEigenvector {
    int twice_j = 0;
    int twice_m = 0;
    int g = 1;
    Vector vector;

    double j() const { return twice_j / 2.0; }
    double m() const { return twice_m / 2.0; }
};

/// Complete orthonormal (Jsq, Jz) eigenbasis of the N-qubit space.
/// Multiplicity labels g are assigned deterministically: within each (j, m)
/// block, vectors are ordered by the index of their largest-magnitude
/// computational-basis component (ties broken by the next indices).
std::vector<AngularEigenvector> angular_eigenbasis(int N);

/// Projector onto the total-angular-momentum-j subspace, assembled from the
/// eigenbasis (N <= 8).
DenseOperator angular_projector(int N, int twice_j);

/// Symmetric-subspace (j = N/2) basis vector with k spins flipped to V:
/// the normalized sum over all placements of the k flips. Cheap for any N <= 12.
Vector dicke_state(int N, int k);

/// Projector onto the j = N/2 subspace, built from Dicke states (any N <= 12).
DenseOperator symmetric_projector(int N);

} // namespace qmetro
