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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ddsim/errors.h"
#include "ddsim/pauli.h"
#include "oracles.h"

namespace ddsim {
namespace {

using testing::dense_pauli;
using testing::Mat;

DenseOperator herm(const Mat& m) {
    return DenseOperator(m, OperatorKind::kHermitian);
}

Mat heisenberg_pair() {
    return dense_pauli("XX") + dense_pauli("YY") + dense_pauli("ZZ");
}

Mat random_hermitian(Rng& rng, int dim, double scale) {
    Mat a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    return scale * (a + a.adjoint()) / 2.0;
}

TEST(DenseOperator, RejectsWrongTags) {
    EXPECT_THROW(DenseOperator(dense_pauli("X") * Complex(0, 1), OperatorKind::kHermitian), std::invalid_argument);
    EXPECT_THROW(DenseOperator(2.0 * dense_pauli("Z"), OperatorKind::kUnitary), std::invalid_argument);
    EXPECT_THROW(DenseOperator(Mat::Zero(2, 3), OperatorKind::kGeneral), std::invalid_argument);
}

TEST(HermitianEig, ClosedForms) {
    auto z = hermitian_eig(herm(dense_pauli("Z")));
    EXPECT_NEAR(z.eigenvalues(0), -1, 1e-15);
    EXPECT_NEAR(z.eigenvalues(1), 1, 1e-15);
    // Singlet at -3, triplet at +1.
    auto s = hermitian_eig(herm(heisenberg_pair()));
    EXPECT_NEAR(s.eigenvalues(0), -3, 1e-14);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(s.eigenvalues(k), 1, 1e-14);
    auto id = hermitian_eig(herm(Mat::Identity(8, 8)));
    for (int k = 0; k < 8; ++k) EXPECT_EQ(id.eigenvalues(k), 1);
}

TEST(HermitianEig, ReconstructsMatrix) {
    Rng rng(1);
    Mat h = random_hermitian(rng, 16, 1.0);
    auto sp = hermitian_eig(herm(h));
    Mat back = sp.eigenvectors * sp.eigenvalues.cast<Complex>().asDiagonal() * sp.eigenvectors.adjoint();
    EXPECT_LT(max_abs_diff(back, h), 1e-13);
}

TEST(ExpmHermitian, ClosedForms) {
    auto ez = expm_hermitian(herm(dense_pauli("Z")), 0.7);
    EXPECT_LT(std::abs(ez.matrix()(0, 0) - std::exp(Complex(0, -0.7))), 1e-15);
    EXPECT_LT(std::abs(ez.matrix()(1, 1) - std::exp(Complex(0, 0.7))), 1e-15);
    EXPECT_LT(std::abs(ez.matrix()(0, 1)), 1e-16);
    EXPECT_LT(max_abs_diff(expm_hermitian(herm(heisenberg_pair()), 0).matrix(), Mat::Identity(4, 4)), 1e-15);
    Mat expected = std::cos(0.3) * Mat::Identity(2, 2) - Complex(0, std::sin(0.3)) * dense_pauli("X");
    EXPECT_LT(max_abs_diff(expm_hermitian(herm(0.3 * dense_pauli("X")), 1).matrix(), expected), 1e-15);
}

TEST(ExpmHermitian, SemigroupAndUnitarity) {
    Rng rng(2);
    auto h = herm(random_hermitian(rng, 8, 0.5));
    auto sp = hermitian_eig(h);
    Mat a = expm_hermitian(sp, 0.4).matrix(), b = expm_hermitian(sp, 1.1).matrix();
    EXPECT_LT(max_abs_diff(a * b, expm_hermitian(sp, 1.5).matrix()), 1e-13);
    EXPECT_LT(max_abs_diff(a.adjoint() * a, Mat::Identity(8, 8)), 1e-13);
    // Heisenberg pair: exp(-it(XX+YY+ZZ)) = e^{it}(cos 2t - i sin 2t SWAP).
    double t = 0.37;
    Mat swap = (Mat::Identity(4, 4) + heisenberg_pair()) / 2.0;
    Mat closed = std::exp(Complex(0, t)) * (std::cos(2 * t) * Mat::Identity(4, 4) - Complex(0, std::sin(2 * t)) * swap);
    EXPECT_LT(max_abs_diff(expm_hermitian(herm(heisenberg_pair()), t).matrix(), closed), 1e-14);
}

TEST(UnitaryLog, ClosedForms) {
    Mat u = Mat::Zero(2, 2);
    u(0, 0) = std::exp(Complex(0, -0.2));
    u(1, 1) = std::exp(Complex(0, 0.2));
    auto h = unitary_log(DenseOperator(u, OperatorKind::kUnitary), 1);
    EXPECT_LT(max_abs_diff(h.matrix(), 0.2 * dense_pauli("Z")), 1e-15);
    auto zero = unitary_log(DenseOperator::identity(4), 3.0);
    EXPECT_LT(zero.matrix().cwiseAbs().maxCoeff(), 1e-15);
}

TEST(UnitaryLog, RoundTrip) {
    Rng rng(4);
    for (int k = 0; k < 5; ++k) {
        Mat h = random_hermitian(rng, 16, 1.0);
        double t = 2.5 / spectral_norm(herm(h));  // ||H|| t < pi
        auto u = expm_hermitian(herm(h), t);
        EXPECT_LT(max_abs_diff(unitary_log(u, t).matrix(), h), 1e-11);
    }
}

TEST(UnitaryLog, NearIdentityRoundTrip) {
    // Small phases, including an exactly degenerate pair.
    Rng rng(10);
    Mat h = random_hermitian(rng, 32, 1.0);
    h += testing::kron(testing::dense_pauli("Z"), Mat::Identity(16, 16));
    double t = 0.3 / spectral_norm(herm(h));
    auto u = expm_hermitian(herm(h), t);
    EXPECT_LT(max_abs_diff(unitary_log(u, t).matrix(), h), 1e-11);
    auto id_like = unitary_log(expm_hermitian(herm(Mat::Identity(8, 8)), 0.01), 0.01);
    EXPECT_LT(max_abs_diff(id_like.matrix(), Mat::Identity(8, 8)), 1e-11);
}

TEST(Reunitarize, RemovesSmallDefects) {
    Rng rng(12);
    Mat u = expm_hermitian(herm(random_hermitian(rng, 16, 1.0)), 1.0).matrix();
    Mat bumped = u + 1e-9 * random_hermitian(rng, 16, 1.0);
    Mat fixed = reunitarize(bumped).matrix();
    EXPECT_LT(max_abs_diff(fixed.adjoint() * fixed, Mat::Identity(16, 16)), 1e-15);
    EXPECT_LT(max_abs_diff(fixed, bumped), 1e-8);
    EXPECT_THROW(reunitarize(2.0 * u), std::invalid_argument);
}

TEST(UnitaryLog, RejectsBranchCut) {
    Mat u = Mat::Zero(2, 2);
    u(0, 0) = -1;
    u(1, 1) = 1;
    EXPECT_THROW(unitary_log(DenseOperator(u, OperatorKind::kUnitary), 1), BranchAmbiguityError);
}

TEST(SpectralNorm, Values) {
    EXPECT_NEAR(spectral_norm(herm(dense_pauli("Z"))), 1, 1e-15);
    EXPECT_NEAR(spectral_norm(herm(heisenberg_pair())), 3, 1e-14);
    Rng rng(8);
    Mat h = random_hermitian(rng, 16, 1.0);
    EXPECT_NEAR(spectral_norm(herm(-2.5 * h)), 2.5 * spectral_norm(herm(h)), 1e-12);
}

TEST(Matvec, Examples) {
    auto v = StateVector::basis(3, 5);
    EXPECT_EQ(matvec(DenseOperator::identity(8), v), v);
    auto w = matvec(herm(dense_pauli("Z")), StateVector::basis(1, 1));
    EXPECT_EQ(w[1], Complex(-1));
}

TEST(Matvec, AgreesWithPauliApplyOnNineQubits) {
    Rng rng(31);
    Eigen::VectorXcd scratch;
    for (int k = 0; k < 100; ++k) {
        std::string s;
        for (int q = 0; q < 9; ++q) s += "IXYZ"[rng.next_u64() & 3];
        auto p = PauliString::from_str(s);
        std::vector<Complex> a(512);
        for (auto& z : a) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        StateVector v(9, std::move(a));
        DenseOperator op(dense_pauli(s), OperatorKind::kHermitian);
        auto expected = apply(p, v);
        auto got = matvec(op, v);
        double err = 0;
        for (std::size_t m = 0; m < 512; ++m) err = std::max(err, std::abs(got[m] - expected[m]));
        EXPECT_LT(err, 1e-12);
        matvec_in_place(op, v.amplitudes(), scratch);
        EXPECT_EQ(v, got);
    }
}

}  // namespace
}  // namespace ddsim
