// Copyright 2026 The ddsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ddsim/linalg.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ddsim/errors.h"

namespace ddsim {

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

DenseOperator::DenseOperator(Eigen::MatrixXcd matrix, OperatorKind kind)
    : matrix_(std::move(matrix)), kind_(kind) {
    const auto n = matrix_.rows();
    if (n != matrix_.cols() || n == 0 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("dense operator must be square with power-of-two dimension");
    }
    if (kind == OperatorKind::kHermitian) {
        double scale = matrix_.cwiseAbs().maxCoeff();
        double err = max_abs_diff(matrix_, matrix_.adjoint());
        if (err > 1e-12 * scale) {
            throw std::invalid_argument("operator tagged hermitian deviates by " + std::to_string(err));
        }
    } else if (kind == OperatorKind::kUnitary) {
        double err = max_abs_diff(matrix_.adjoint() * matrix_, Eigen::MatrixXcd::Identity(n, n));
        if (err > 1e-10) {
            throw std::invalid_argument("operator tagged unitary deviates by " + std::to_string(err));
        }
    }
}

DenseOperator DenseOperator::identity(std::size_t dim) {
    auto n = static_cast<Eigen::Index>(dim);
    return DenseOperator(Eigen::MatrixXcd::Identity(n, n), OperatorKind::kUnitary);
}

DenseOperator DenseOperator::zero(std::size_t dim) {
    auto n = static_cast<Eigen::Index>(dim);
    return DenseOperator(Eigen::MatrixXcd::Zero(n, n), OperatorKind::kHermitian);
}

HermitianSpectrum hermitian_eig(const DenseOperator& h) {
    if (h.kind() != OperatorKind::kHermitian) {
        throw std::invalid_argument("hermitian_eig requires a hermitian-tagged operator");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix());
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("Hermitian eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

DenseOperator reunitarize(const Eigen::MatrixXcd& u) {
    if (u.rows() != u.cols()) {
        throw std::invalid_argument("reunitarize requires a square matrix");
    }
    Eigen::MatrixXcd gram = u.adjoint() * u;
    gram.diagonal().array() -= 1.0;
    if (gram.cwiseAbs().maxCoeff() > 1e-6) {
        throw std::invalid_argument("matrix too far from unitary to polish");
    }
    Eigen::MatrixXcd polished = u - 0.5 * (u * gram);
    return DenseOperator(std::move(polished), OperatorKind::kUnitary);
}

DenseOperator expm_hermitian(const HermitianSpectrum& spectrum, double t) {
    const auto& v = spectrum.eigenvectors;
    Eigen::VectorXcd phases = (spectrum.eigenvalues.cast<Complex>() * Complex(0, -t)).array().exp();
    return reunitarize(v * phases.asDiagonal() * v.adjoint());
}

DenseOperator expm_hermitian(const DenseOperator& h, double t) {
    return expm_hermitian(hermitian_eig(h), t);
}

DenseOperator unitary_log(const DenseOperator& u, double t) {
    if (u.kind() != OperatorKind::kUnitary) {
        throw std::invalid_argument("unitary_log requires a unitary-tagged operator");
    }
    if (!(t > 0)) {
        throw std::invalid_argument("unitary_log requires a positive time");
    }
    const Eigen::MatrixXcd& m = u.matrix();
    auto to_hamiltonian = [&](const Eigen::MatrixXcd& q, const Eigen::VectorXd& energies) {
        Eigen::MatrixXcd h = q * energies.cast<Complex>().asDiagonal() * q.adjoint();
        Eigen::MatrixXcd hermitian = 0.5 * (h + h.adjoint());
        return DenseOperator(std::move(hermitian), OperatorKind::kHermitian);
    };

    // Near the identity (all eigenphases well inside (-pi/2, pi/2)) the
    // Hermitian matrix i(U - U^dagger)/2 = -sin(phases) has the same
    // eigenvectors and no spurious degeneracies, so a Hermitian solver is
    // enough. Otherwise fall back to the complex Schur form.
    {
        Eigen::MatrixXcd s = Complex(0, 0.5) * (m - m.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(0.5 * (s + s.adjoint()));
        if (solver.info() == Eigen::Success) {
            const auto& q = solver.eigenvectors();
            Eigen::MatrixXcd d = q.adjoint() * m * q;
            Eigen::VectorXd energies(d.rows());
            bool ok = true;
            for (Eigen::Index k = 0; k < d.rows() && ok; ++k) {
                Complex z = d(k, k);
                ok = std::abs(std::abs(z) - 1) < 1e-9 && z.real() > 0.1;
                energies[k] = -std::arg(z) / t;
            }
            if (ok) {
                d.diagonal().setZero();
                ok = d.cwiseAbs().maxCoeff() < 1e-9;
            }
            if (ok) {
                return to_hamiltonian(q, energies);
            }
        }
    }

    // A unitary is normal, so its complex Schur form is diagonal and the Schur
    // vectors are an orthonormal eigenbasis (also for degenerate eigenvalues).
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(m);
    if (schur.info() != Eigen::Success) {
        throw std::runtime_error("Schur decomposition did not converge");
    }
    const auto& q = schur.matrixU();
    Eigen::VectorXcd diag = schur.matrixT().diagonal();
    Eigen::VectorXd energies(diag.size());
    for (Eigen::Index k = 0; k < diag.size(); ++k) {
        double theta = std::arg(diag[k]);
        if (std::numbers::pi - std::abs(theta) < kBranchMargin) {
            throw BranchAmbiguityError("eigenphase " + std::to_string(theta) +
                                       " is within the branch margin of +-pi; use a shorter cycle time");
        }
        energies[k] = -theta / t;
    }
    return to_hamiltonian(q, energies);
}

double spectral_norm(const DenseOperator& h) {
    auto spectrum = hermitian_eig(h);
    return spectrum.eigenvalues.cwiseAbs().maxCoeff();
}

void matvec_in_place(const DenseOperator& a, std::span<Complex> amplitudes, Eigen::VectorXcd& scratch) {
    if (amplitudes.size() != a.dim()) {
        throw std::invalid_argument("matvec dimension mismatch: operator " + std::to_string(a.dim()) +
                                    ", vector " + std::to_string(amplitudes.size()));
    }
    Eigen::Map<Eigen::VectorXcd> v(amplitudes.data(), static_cast<Eigen::Index>(amplitudes.size()));
    scratch.noalias() = a.matrix() * v;
    v = scratch;
}

StateVector matvec(const DenseOperator& a, const StateVector& v) {
    StateVector out = v;
    Eigen::VectorXcd scratch;
    matvec_in_place(a, out.amplitudes(), scratch);
    return out;
}

}  // namespace ddsim
