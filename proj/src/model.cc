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

#include "ddsim/model.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ddsim {

CouplingGraph::CouplingGraph(int n_qubits, std::vector<std::pair<int, int>> edges)
    : n_qubits_(n_qubits), edges_(std::move(edges)) {
    if (n_qubits < 1) {
        throw std::invalid_argument("coupling graph needs at least one qubit");
    }
    std::set<std::pair<int, int>> seen;
    for (auto& [k, l] : edges_) {
        if (k > l) {
            std::swap(k, l);
        }
        if (k < 0 || l >= n_qubits || k == l) {
            throw std::invalid_argument("invalid edge (" + std::to_string(k) + ", " + std::to_string(l) + ")");
        }
        if (!seen.insert({k, l}).second) {
            throw std::invalid_argument("duplicate edge (" + std::to_string(k) + ", " + std::to_string(l) + ")");
        }
    }
}

CouplingGraph grid_graph(int rows, int cols) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("grid dimensions must be positive");
    }
    std::vector<std::pair<int, int>> edges;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            int q = r * cols + c;
            if (c + 1 < cols) {
                edges.emplace_back(q, q + 1);
            }
            if (r + 1 < rows) {
                edges.emplace_back(q, q + cols);
            }
        }
    }
    return CouplingGraph(rows * cols, std::move(edges));
}

PerturbationParams sample_params(Rng& rng, double bound, const CouplingGraph& graph, DeltaMode delta_mode) {
    if (!(bound >= 0)) {
        throw std::invalid_argument("coupling bound must be non-negative");
    }
    PerturbationParams params;
    params.delta.assign(graph.n_qubits(), 0.0);
    params.j_coupling.assign(graph.edges().size(), 0.0);
    if (bound == 0) {
        return params;
    }
    if (delta_mode == DeltaMode::kSample) {
        for (auto& d : params.delta) {
            d = rng.uniform(-bound, bound);
        }
    }
    for (auto& j : params.j_coupling) {
        j = rng.uniform(-bound, bound);
    }
    return params;
}

void PauliSumHamiltonian::add_term(double coefficient, const PauliString& pauli) {
    if (pauli.n_qubits() != n_qubits_) {
        throw std::invalid_argument("term width does not match Hamiltonian");
    }
    if (pauli.phase_exp() != 0) {
        throw std::invalid_argument("Hamiltonian terms must be phase-free Pauli strings");
    }
    for (auto& t : terms_) {
        if (t.pauli == pauli) {
            t.coefficient += coefficient;
            return;
        }
    }
    terms_.push_back({coefficient, pauli});
}

double PauliSumHamiltonian::l1_norm() const {
    double s = 0;
    for (const auto& t : terms_) {
        s += std::abs(t.coefficient);
    }
    return s;
}

DenseOperator PauliSumHamiltonian::dense() const {
    if (n_qubits_ > kMaxQubits) {
        throw std::invalid_argument("register too large for a dense operator");
    }
    const auto dim = Eigen::Index{1} << n_qubits_;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& t : terms_) {
        // Column j of P is P|j>.
        for (Eigen::Index j = 0; j < dim; ++j) {
            StateVector e = StateVector::basis(n_qubits_, j);
            StateVector col = ddsim::apply(t.pauli, e);
            Eigen::Index row = static_cast<Eigen::Index>(j ^ t.pauli.x_bits());
            m(row, j) += t.coefficient * col[row];
        }
    }
    return DenseOperator(std::move(m), OperatorKind::kHermitian);
}

StateVector PauliSumHamiltonian::apply(const StateVector& v) const {
    std::vector<Complex> acc(v.dim());
    for (const auto& t : terms_) {
        StateVector pv = ddsim::apply(t.pauli, v);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            acc[i] += t.coefficient * pv[i];
        }
    }
    return StateVector(v.n_qubits(), std::move(acc));
}

PauliSumHamiltonian build_hamiltonian(const PerturbationParams& params, const CouplingGraph& graph) {
    const int n = graph.n_qubits();
    if (params.delta.size() != static_cast<std::size_t>(n) ||
        params.j_coupling.size() != graph.edges().size()) {
        throw std::invalid_argument("perturbation parameters do not match the coupling graph");
    }
    PauliSumHamiltonian h(n);
    for (int k = 0; k < n; ++k) {
        if (params.delta[k] != 0) {
            h.add_term(params.delta[k], PauliString::single(n, k, 'Z'));
        }
    }
    for (std::size_t e = 0; e < graph.edges().size(); ++e) {
        double j = params.j_coupling[e];
        if (j == 0) {
            continue;
        }
        auto [k, l] = graph.edges()[e];
        uint32_t pair = (uint32_t{1} << k) | (uint32_t{1} << l);
        h.add_term(j, PauliString(n, pair, 0));
        h.add_term(j, PauliString(n, pair, pair));
        h.add_term(j, PauliString(n, 0, pair));
    }
    return h;
}

PauliSumHamiltonian conjugate_by_pauli(const PauliSumHamiltonian& h, const PauliString& d) {
    PauliSumHamiltonian out(h.n_qubits());
    for (const auto& t : h.terms()) {
        out.add_term(conj_sign(d, t.pauli) * t.coefficient, t.pauli);
    }
    return out;
}

StateVector initial_coherent_state(int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const double d = static_cast<double>(dim);
    const double pi = std::numbers::pi;
    std::vector<Complex> amps(dim);
    for (std::size_t m = 0; m < dim; ++m) {
        double x = static_cast<double>(m);
        // exp(-i pi m) = (-1)^m exactly.
        double sign = (m & 1) ? -1.0 : 1.0;
        amps[m] = sign * std::exp(-pi * (x - d / 2) * (x - d / 2) / d);
    }
    StateVector psi(n_qubits, std::move(amps));
    psi.normalize();
    return psi;
}

namespace {

// ||(H - <H>) psi||; avoids the cancellation in <H^2> - <H>^2.
double spread(const StateVector& psi, const StateVector& hpsi) {
    const Complex mean = inner(psi, hpsi);
    double sum = 0;
    for (std::size_t m = 0; m < psi.dim(); ++m) {
        sum += std::norm(hpsi[m] - mean * psi[m]);
    }
    return std::sqrt(sum);
}

}  // namespace

double energy_uncertainty(const PauliSumHamiltonian& h, const StateVector& psi) {
    StateVector hpsi = h.apply(psi);
    return spread(psi, hpsi);
}

double energy_uncertainty(const DenseOperator& h, const StateVector& psi) {
    StateVector hpsi = matvec(h, psi);
    return spread(psi, hpsi);
}

void write_hamiltonian_text(std::ostream& out, const PauliSumHamiltonian& h) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    for (const auto& t : h.terms()) {
        buf << t.coefficient << ' ' << t.pauli.str() << '\n';
    }
    out << buf.str();
}

PauliSumHamiltonian read_hamiltonian_text(std::istream& in) {
    std::string line;
    std::vector<HamiltonianTerm> terms;
    int n = -1;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        double c;
        std::string s;
        if (!(ls >> c)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            throw std::invalid_argument("bad Hamiltonian line: " + line);
        }
        if (!(ls >> s)) {
            throw std::invalid_argument("missing Pauli string: " + line);
        }
        auto p = PauliString::from_str(s);
        if (n >= 0 && p.n_qubits() != n) {
            throw std::invalid_argument("inconsistent Pauli string widths");
        }
        n = p.n_qubits();
        terms.push_back({c, p});
    }
    if (n < 0) {
        throw std::invalid_argument("empty Hamiltonian text");
    }
    PauliSumHamiltonian h(n);
    for (const auto& t : terms) {
        h.add_term(t.coefficient, t.pauli);
    }
    return h;
}

}  // namespace ddsim
