#include "qmetro/states.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qmetro {

namespace {

void check_qubit_count(int N, int max) {
    if (N < 1 || N > max) {
        throw std::invalid_argument("qubit count N out of range [1, " +
                                    std::to_string(max) + "]");
    }
}

int popcount(std::size_t x) { return std::popcount(x); }

} // namespace

DenseOperator single_qubit_density(const BlochState& state) {
    const double s = state.s();
    const double phi = state.phi();
    DenseOperator rho(2, 2);
    rho << 0.5 * (1.0 + s * std::cos(phi)), 0.5 * s * std::sin(phi),
           0.5 * s * std::sin(phi), 0.5 * (1.0 - s * std::cos(phi));
    return rho;
}

DenseOperator build_density(const BlochState& state, int N) {
    check_qubit_count(N, kMaxDenseQubits);
    return kron_power(single_qubit_density(state), N);
}

DenseOperator rotated_thermal_density(const BlochState& state, int N) {
    check_qubit_count(N, kMaxDenseQubits);
    const double beta = state.beta();
    const std::size_t dim = std::size_t{1} << N;

    // exp(2 beta Jz) is diagonal: basis state b has Jz eigenvalue (N - 2 popcount)/2.
    Eigen::VectorXd diag(dim);
    for (std::size_t b = 0; b < dim; ++b) {
        diag(static_cast<Eigen::Index>(b)) = std::exp(beta * (N - 2 * popcount(b)));
    }
    const double norm = std::pow(2.0 * std::cosh(beta), N);

    const DenseOperator rot = kron_power(qubit_rotation_y(state.phi()), N);
    return rot * (diag / norm).asDiagonal() * rot.adjoint();
}

CollectiveSpin collective_spin(int N) {
    check_qubit_count(N, kMaxDenseQubits);
    const std::size_t dim = std::size_t{1} << N;
    const Eigen::Index d = static_cast<Eigen::Index>(dim);

    CollectiveSpin spin;
    spin.N = N;
    spin.Jx = DenseOperator::Zero(d, d);
    spin.Jy = DenseOperator::Zero(d, d);
    spin.Jz = DenseOperator::Zero(d, d);

    // Qubit 0 is the most significant bit; bit value 0 means spin-up (H).
    for (std::size_t b = 0; b < dim; ++b) {
        const auto col = static_cast<Eigen::Index>(b);
        spin.Jz(col, col) = 0.5 * (N - 2 * popcount(b));
        for (int q = 0; q < N; ++q) {
            const std::size_t mask = std::size_t{1} << (N - 1 - q);
            const std::size_t flipped = b ^ mask;
            const auto row = static_cast<Eigen::Index>(flipped);
            spin.Jx(row, col) += 0.5;
            // sigma_y |0> = i|1>, sigma_y |1> = -i|0>.
            spin.Jy(row, col) += (b & mask) ? Complex(0, -0.5) : Complex(0, 0.5);
        }
    }
    spin.Jsq = spin.Jx * spin.Jx + spin.Jy * spin.Jy + spin.Jz * spin.Jz;
    return spin;
}

DenseOperator sld_closed_form(const BlochState& state, int N, Which which) {
    check_qubit_count(N, kMaxDenseQubits);
    const double s = state.s();
    const CollectiveSpin spin = collective_spin(N);
    const DenseOperator rot = kron_power(qubit_rotation_y(state.phi()), N);

    if (which == Which::epsilon) {
        if (s >= 1.0 - 1e-12) {
            throw std::domain_error("sld_closed_form: singular at s = 1 for epsilon");
        }
        const double ds = state.ds();
        const DenseOperator rotated_Jz = rot * spin.Jz * rot.adjoint();
        return (ds / (1.0 - s * s)) *
               (2.0 * rotated_Jz - N * s * identity_op(rotated_Jz.rows()));
    }
    return 2.0 * s * (rot * spin.Jx * rot.adjoint());
}

DenseOperator sld_numeric(const DenseOperator& rho, const DenseOperator& drho,
                          double kernel_threshold) {
    if (rho.rows() != rho.cols() || drho.rows() != drho.cols() ||
        rho.rows() != drho.rows()) {
        throw std::invalid_argument("sld_numeric: dimension mismatch");
    }
    if (!is_hermitian(rho, 1e-10) || !is_hermitian(drho, 1e-10)) {
        throw std::invalid_argument("sld_numeric: inputs must be Hermitian");
    }

    Eigen::SelfAdjointEigenSolver<DenseOperator> es(rho);
    const Eigen::VectorXd lambda = es.eigenvalues();
    const DenseOperator& U = es.eigenvectors();

    const double cutoff = kernel_threshold * std::max(lambda.maxCoeff(), 0.0);
    const DenseOperator d_in_basis = U.adjoint() * drho * U;

    DenseOperator L = DenseOperator::Zero(rho.rows(), rho.cols());
    for (Eigen::Index a = 0; a < L.rows(); ++a) {
        for (Eigen::Index b = 0; b < L.cols(); ++b) {
            const double denom = lambda(a) + lambda(b);
            if (denom > cutoff) {
                L(a, b) = 2.0 * d_in_basis(a, b) / denom;
            }
        }
    }
    return U * L * U.adjoint();
}

namespace {

// Deterministic ordering inside a degenerate (j, m) block: compare vectors by
// the index of the largest-magnitude component, breaking ties lexicographically
// on subsequent component magnitudes.
bool basis_stable_less(const Vector& a, const Vector& b) {
    auto dominant = [](const Vector& v) {
        Eigen::Index best = 0;
        double mag = -1.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double m = std::abs(v(i));
            if (m > mag + 1e-12) {
                mag = m;
                best = i;
            }
        }
        return best;
    };
    const Eigen::Index da = dominant(a), db = dominant(b);
    if (da != db) return da < db;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double ma = std::abs(a(i)), mb = std::abs(b(i));
        if (std::abs(ma - mb) > 1e-9) return ma > mb;
    }
    return false;
}

} // namespace

std::vector<AngularEigenvector> angular_eigenbasis(int N) {
    check_qubit_count(N, kMaxDiagonalizationQubits);
    const std::size_t dim = std::size_t{1} << N;
    const CollectiveSpin spin = collective_spin(N);

    // Jz is diagonal in the computational basis, so Jsq block-diagonalizes over
    // fixed-popcount sectors; diagonalize each sector separately.
    std::vector<AngularEigenvector> basis;
    basis.reserve(dim);

    for (int k = 0; k <= N; ++k) {
        std::vector<std::size_t> sector;
        for (std::size_t b = 0; b < dim; ++b) {
            if (popcount(b) == k) sector.push_back(b);
        }
        const auto sdim = static_cast<Eigen::Index>(sector.size());
        DenseOperator block(sdim, sdim);
        for (Eigen::Index r = 0; r < sdim; ++r) {
            for (Eigen::Index c = 0; c < sdim; ++c) {
                block(r, c) = spin.Jsq(static_cast<Eigen::Index>(sector[r]),
                                       static_cast<Eigen::Index>(sector[c]));
            }
        }
        Eigen::SelfAdjointEigenSolver<DenseOperator> es(block);

        // Group eigenvectors by the j value recovered from j(j+1).
        std::map<int, std::vector<Vector>> by_twice_j;
        for (Eigen::Index i = 0; i < sdim; ++i) {
            const double ev = es.eigenvalues()(i);
            // j = (-1 + sqrt(1 + 4 ev)) / 2, rounded to the half-integer grid.
            const double j = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * std::max(ev, 0.0)));
            const int twice_j = static_cast<int>(std::lround(2.0 * j));
            Vector full = Vector::Zero(static_cast<Eigen::Index>(dim));
            for (Eigen::Index r = 0; r < sdim; ++r) {
                full(static_cast<Eigen::Index>(sector[r])) = es.eigenvectors()(r, i);
            }
            by_twice_j[twice_j].push_back(std::move(full));
        }

        const int twice_m = N - 2 * k;
        for (auto& [twice_j, vecs] : by_twice_j) {
            // Re-orthonormalize the degenerate block (Gram-Schmidt) before the
            // deterministic ordering.
            for (std::size_t i = 0; i < vecs.size(); ++i) {
                for (std::size_t p = 0; p < i; ++p) {
                    vecs[i] -= vecs[p].dot(vecs[i]) * vecs[p];
                }
                vecs[i].normalize();
            }
            std::sort(vecs.begin(), vecs.end(), basis_stable_less);
            int g = 1;
            for (auto& v : vecs) {
                basis.push_back(AngularEigenvector{twice_j, twice_m, g++, std::move(v)});
            }
        }
    }

    std::stable_sort(basis.begin(), basis.end(),
                     [](const AngularEigenvector& a, const AngularEigenvector& b) {
                         if (a.twice_j != b.twice_j) return a.twice_j > b.twice_j;
                         if (a.g != b.g) return a.g < b.g;
                         return a.twice_m > b.twice_m;
                     });
    return basis;
}

DenseOperator angular_projector(int N, int twice_j) {
    const auto basis = angular_eigenbasis(N);
    const Eigen::Index dim = Eigen::Index{1} << N;
    DenseOperator proj = DenseOperator::Zero(dim, dim);
    bool found = false;
    for (const auto& v : basis) {
        if (v.twice_j == twice_j) {
            proj += v.vector * v.vector.adjoint();
            found = true;
        }
    }
    if (!found) throw std::invalid_argument("angular_projector: invalid j for this N");
    return proj;
}

Vector dicke_state(int N, int k) {
    check_qubit_count(N, kMaxDenseQubits);
    if (k < 0 || k > N) throw std::invalid_argument("dicke_state: k out of range");
    const std::size_t dim = std::size_t{1} << N;
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    std::size_t count = 0;
    for (std::size_t b = 0; b < dim; ++b) {
        if (popcount(b) == k) {
            v(static_cast<Eigen::Index>(b)) = 1.0;
            ++count;
        }
    }
    v /= std::sqrt(static_cast<double>(count));
    return v;
}

DenseOperator symmetric_projector(int N) {
    const Eigen::Index dim = Eigen::Index{1} << N;
    DenseOperator proj = DenseOperator::Zero(dim, dim);
    for (int k = 0; k <= N; ++k) {
        const Vector d = dicke_state(N, k);
        proj += d * d.adjoint();
    }
    return proj;
}

} // namespace qmetro
