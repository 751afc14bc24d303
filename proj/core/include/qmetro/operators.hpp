#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace qmetro {

using DenseOperator = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

DenseOperator pauli_x();
DenseOperator pauli_y();
DenseOperator pauli_z();
DenseOperator identity_op(Eigen::Index dim);

/// exp(-i sigma_y phi / 2): rotation about y taking z toward x.
DenseOperator qubit_rotation_y(double phi);

DenseOperator kron(const DenseOperator& a, const DenseOperator& b);
DenseOperator kron_power(const DenseOperator& a, int n);

/// N-fold tensor product of per-site 2x2 factors (factors[i] acts on qubit i,
/// qubit 0 being the leftmost/most significant factor).
DenseOperator tensor_chain(const std::vector<DenseOperator>& factors);

bool is_hermitian(const DenseOperator& a, double tol = 1e-12);
bool is_density_operator(const DenseOperator& a, double tol = 1e-12,
                         double eigen_tol = 1e-10);

double max_abs(const DenseOperator& a);

} // namespace qmetro
