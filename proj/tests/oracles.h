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

// Independent reference computations for the tests. Nothing here uses the
// symplectic Pauli code: operators are built from explicit 2x2 matrices.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace ddsim::testing {

using Mat = Eigen::MatrixXcd;
using Cx = std::complex<double>;

inline Mat pauli_matrix(char s) {
    Mat m(2, 2);
    switch (s) {
        case 'X':
            m << 0, 1, 1, 0;
            break;
        case 'Y':
            m << 0, Cx(0, -1), Cx(0, 1), 0;
            break;
        case 'Z':
            m << 1, 0, 0, -1;
            break;
        default:
            m << 1, 0, 0, 1;
    }
    return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Dense matrix of a Pauli text string, character k acting on qubit k, where
/// qubit k is bit k of the basis index (so the last character is the most
/// significant Kronecker factor).
inline Mat dense_pauli(const std::string& s) {
    Mat m = Mat::Identity(1, 1);
    for (char c : s) {
        m = kron(pauli_matrix(c), m);
    }
    return m;
}

/// Mean fidelity of i.i.d. uniformly Pauli-twirled steps with step unitary E
/// after each entry of `steps`, from the Pauli-transfer eigenvalues:
///   E f(n) = (1/D) sum_Q <psi|Q|psi>^2 lambda_Q^n,
///   lambda_Q = sum_P p_P (+-1 by commutation), p_P = |Tr(P E)|^2 / D^2.
/// Works directly with dense matrices; O(16^n) and meant for n <= 5.
inline std::vector<double> twirled_mean_fidelity(const Mat& e, const Eigen::VectorXcd& psi, int n_qubits,
                                                 const std::vector<int>& steps) {
    const int n_paulis = 1 << (2 * n_qubits);
    const double dim = static_cast<double>(e.rows());
    std::vector<Mat> paulis;
    std::vector<std::string> names;
    for (int code = 0; code < n_paulis; ++code) {
        std::string s;
        for (int q = 0; q < n_qubits; ++q) {
            s += "IXYZ"[(code >> (2 * q)) & 3];
        }
        names.push_back(s);
        paulis.push_back(dense_pauli(s));
    }
    std::vector<double> p(n_paulis), expect(n_paulis);
    for (int a = 0; a < n_paulis; ++a) {
        p[a] = std::norm((paulis[a] * e).trace()) / (dim * dim);
        expect[a] = std::real(psi.dot(paulis[a] * psi));
    }
    auto commute = [&](int a, int b) {
        // Single-qubit factors commute iff equal or one is the identity.
        int anti = 0;
        for (int q = 0; q < n_qubits; ++q) {
            char x = names[a][q], y = names[b][q];
            anti += (x != 'I' && y != 'I' && x != y);
        }
        return anti % 2 == 0;
    };
    std::vector<double> lambda(n_paulis);
    for (int q = 0; q < n_paulis; ++q) {
        double s = 0;
        for (int a = 0; a < n_paulis; ++a) {
            s += commute(a, q) ? p[a] : -p[a];
        }
        lambda[q] = s;
    }
    std::vector<double> out;
    for (int n : steps) {
        double f = 0;
        for (int q = 0; q < n_paulis; ++q) {
            f += expect[q] * expect[q] * std::pow(lambda[q], n);
        }
        out.push_back(f / dim);
    }
    return out;
}

}  // namespace ddsim::testing
