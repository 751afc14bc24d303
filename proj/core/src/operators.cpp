#include "qmetro/operators.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qmetro {

DenseOperator pauli_x() {
    DenseOperator m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

DenseOperator pauli_y() {
    DenseOperator m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

DenseOperator pauli_z() {
    DenseOperator m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

DenseOperator identity_op(Eigen::Index dim) {
    return DenseOperator::Identity(dim, dim);
}

DenseOperator qubit_rotation_y(double phi) {
    const double c = std::cos(phi / 2.0), s = std::sin(phi / 2.0);
    DenseOperator m(2, 2);
    m << c, -s, s, c;
    return m;
}

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
    DenseOperator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

DenseOperator kron_power(const DenseOperator& a, int n) {
    if (n < 1) throw std::invalid_argument("kron_power: n must be >= 1");
    DenseOperator out = a;
    for (int i = 1; i < n; ++i) out = kron(out, a);
    return out;
}

DenseOperator tensor_chain(const std::vector<DenseOperator>& factors) {
    if (factors.empty()) throw std::invalid_argument("tensor_chain: empty factor list");
    DenseOperator out = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
    return out;
}

bool is_hermitian(const DenseOperator& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return max_abs(a - a.adjoint().eval()) <= tol;
}

bool is_density_operator(const DenseOperator& a, double tol, double eigen_tol) {
    if (!is_hermitian(a, tol)) return false;
    if (std::abs(a.trace() - Complex(1.0, 0.0)) > tol) return false;
    Eigen::SelfAdjointEigenSolver<DenseOperator> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -eigen_tol;
}

double max_abs(const DenseOperator& a) {
    return a.cwiseAbs().maxCoeff();
}

} // namespace qmetro
