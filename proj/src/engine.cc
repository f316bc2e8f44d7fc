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

#include "ddsim/engine.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "ddsim/errors.h"

namespace ddsim {

namespace {

int qubits_of_dim(std::size_t dim) {
    if (dim == 0 || (dim & (dim - 1)) != 0) {
        throw std::invalid_argument("dimension is not a power of two");
    }
    return std::countr_zero(dim);
}

void check_run_shape(const PropagatorCache& cache, const SchemeSpec& spec, const StateVector& psi0,
                     int64_t n_steps, int64_t record_stride) {
    validate_scheme(spec, cache.n_qubits());
    if (spec.pulse_interval != cache.tau()) {
        throw std::invalid_argument("scheme pulse interval differs from the propagator step");
    }
    if (psi0.n_qubits() != cache.n_qubits()) {
        throw std::invalid_argument("initial state width does not match the Hamiltonian");
    }
    if (n_steps < 1 || record_stride < 1 || n_steps % record_stride != 0) {
        throw std::invalid_argument("record_stride must be positive and divide n_steps");
    }
}

// Mean and sum of squared deviations per recorded time, merged with the
// pairwise (Chan et al.) update so that merging in a fixed order is
// deterministic and free of cancellation near f = 1.
struct RunningStats {
    int64_t count = 0;
    std::vector<double> mean;
    std::vector<double> m2;

    explicit RunningStats(std::size_t n) : mean(n, 0.0), m2(n, 0.0) {
    }

    void add(const std::vector<double>& f) {
        ++count;
        for (std::size_t i = 0; i < f.size(); ++i) {
            double d = f[i] - mean[i];
            mean[i] += d / static_cast<double>(count);
            m2[i] += d * (f[i] - mean[i]);
        }
    }

    void merge(const RunningStats& o) {
        if (o.count == 0) {
            return;
        }
        if (count == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
        const double n = na + nb;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            double d = o.mean[i] - mean[i];
            mean[i] += d * nb / n;
            m2[i] += o.m2[i] + d * d * na * nb / n;
        }
        count += o.count;
    }
};

std::vector<double> record_times(int64_t n_steps, int64_t stride, double tau) {
    std::vector<double> t;
    for (int64_t s = stride; s <= n_steps; s += stride) {
        t.push_back(static_cast<double>(s) * tau);
    }
    return t;
}

// Applies p to column `col` of a column-major dim x B matrix.
void apply_to_column(const PauliString& p, Eigen::MatrixXcd& m, Eigen::Index col, std::vector<Complex>& scratch) {
    std::span<Complex> c(m.col(col).data(), static_cast<std::size_t>(m.rows()));
    apply_in_place(p, c, scratch);
}

constexpr int kRunBatch = 32;

}  // namespace

void FidelityTrace::check() const {
    if (mean_fidelity.size() != times.size() || std_error.size() != times.size()) {
        throw std::logic_error("trace columns have different lengths");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw std::logic_error("trace times are not strictly increasing");
        }
        if (!(mean_fidelity[i] >= 0 && mean_fidelity[i] <= 1 + 1e-10)) {
            throw std::logic_error("fidelity " + std::to_string(mean_fidelity[i]) + " outside [0, 1]");
        }
    }
}

void write_trace_csv(std::ostream& out, const FidelityTrace& trace) {
    std::string buf = "time_tau,mean_fidelity,std_error,n_runs\n";
    char line[128];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%d\n", trace.times[i], trace.mean_fidelity[i],
                      trace.std_error[i], trace.n_runs);
        buf += line;
    }
    out << buf;
}

FidelityTrace read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "time_tau,mean_fidelity,std_error,n_runs") {
        throw std::invalid_argument("trace CSV header mismatch");
    }
    FidelityTrace t;
    t.n_runs = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        double a, b, c;
        int n;
        char tail;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%d%c", &a, &b, &c, &n, &tail) != 4) {
            throw std::invalid_argument("bad trace CSV row: " + line);
        }
        t.times.push_back(a);
        t.mean_fidelity.push_back(b);
        t.std_error.push_back(c);
        t.n_runs = n;
    }
    return t;
}

PropagatorCache::PropagatorCache(const PauliSumHamiltonian& h0, double tau)
    : PropagatorCache(h0.dense(), tau) {
    pauli_sum_ = h0;
}

PropagatorCache::PropagatorCache(const DenseOperator& h0, double tau)
    : n_qubits_(qubits_of_dim(h0.dim())),
      tau_(tau),
      h0_(h0),
      spectrum_(hermitian_eig(h0)),
      step_(expm_hermitian(spectrum_, tau)) {
    if (!(tau > 0)) {
        throw std::invalid_argument("step duration must be positive");
    }
    if (n_qubits_ > kMaxQubits) {
        throw std::invalid_argument("register too large");
    }
}

void PropagatorCache::attach_cycle(const DecouplingCycle& cycle, bool with_residual) {
    if (cycle.n_qubits() != n_qubits_) {
        throw std::invalid_argument("cycle width does not match the Hamiltonian");
    }
    if (cycle.step() != tau_) {
        throw std::invalid_argument("cycle step differs from the propagator step");
    }
    cycle_ = cycle;
    cycle_unitary_ = cycle_propagator(step_, cycle);
    residual_.reset();
    if (with_residual) {
        residual_ = residual_hamiltonian(*cycle_unitary_, cycle.cycle_time());
    }
}

const DecouplingCycle& PropagatorCache::cycle() const {
    if (!cycle_) {
        throw std::logic_error("no cycle attached");
    }
    return *cycle_;
}

const DenseOperator& PropagatorCache::cycle_unitary() const {
    if (!cycle_unitary_) {
        throw std::logic_error("no cycle attached");
    }
    return *cycle_unitary_;
}

const DenseOperator& PropagatorCache::residual() const {
    if (!residual_) {
        throw std::logic_error("residual Hamiltonian not computed");
    }
    return *residual_;
}

Eigen::MatrixXcd conjugate_dense(const Eigen::MatrixXcd& a, const PauliString& d) {
    const auto dim = a.rows();
    if (dim != (Eigen::Index{1} << d.n_qubits()) || a.cols() != dim) {
        throw std::invalid_argument("conjugation dimension mismatch");
    }
    // (d^dag A d)[r][c] = (-1)^{z.r + z.c} A[r^x][c^x]; the global phase cancels.
    const uint32_t x = d.x_bits(), z = d.z_bits();
    Eigen::MatrixXcd out(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        int sc = std::popcount(static_cast<uint32_t>(c) & z) & 1;
        for (Eigen::Index r = 0; r < dim; ++r) {
            int sr = std::popcount(static_cast<uint32_t>(r) & z) & 1;
            Complex v = a(r ^ x, c ^ x);
            out(r, c) = (sr ^ sc) ? -v : v;
        }
    }
    return out;
}

DenseOperator cycle_propagator(const DenseOperator& step_unitary, const DecouplingCycle& cycle) {
    const auto dim = static_cast<Eigen::Index>(step_unitary.dim());
    if (dim != (Eigen::Index{1} << cycle.n_qubits())) {
        throw std::invalid_argument("cycle width does not match the step unitary");
    }
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd next(dim, dim);
    for (const auto& d : cycle.frames()) {
        next.noalias() = conjugate_dense(step_unitary.matrix(), d) * u;
        u.swap(next);
    }
    return reunitarize(u);
}

DenseOperator cycle_propagator(const PauliSumHamiltonian& h0, const DecouplingCycle& cycle) {
    return cycle_propagator(expm_hermitian(h0.dense(), cycle.step()), cycle);
}

DenseOperator residual_hamiltonian(const DenseOperator& u_c, double t_c) {
    return unitary_log(u_c, t_c);
}

FidelityTrace evolve(const PropagatorCache& cache, const SchemeSpec& spec, const StateVector& psi0,
                     int64_t n_steps, int64_t record_stride, Rng& rng) {
    check_run_shape(cache, spec, psi0, n_steps, record_stride);
    FidelityTrace trace;
    trace.times = record_times(n_steps, record_stride, cache.tau());
    FrameGenerator frames(spec, cache.n_qubits(), rng);
    StateVector psi = psi0;
    std::vector<Complex> scratch;
    Eigen::VectorXcd mv_scratch;
    for (int64_t j = 0; j < n_steps; ++j) {
        PauliString g = frames.next();
        bool trivial = g.is_identity() && g.phase_exp() == 0;
        if (!trivial) {
            apply_in_place(g, psi.amplitudes(), scratch);
        }
        matvec_in_place(cache.step_unitary(), psi.amplitudes(), mv_scratch);
        if (!trivial) {
            apply_in_place(g.adjoint(), psi.amplitudes(), scratch);
        }
        if ((j + 1) % record_stride == 0) {
            trace.mean_fidelity.push_back(fidelity(psi0, psi));
        }
    }
    trace.std_error.assign(trace.times.size(), 0.0);
    return trace;
}

FidelityTrace evolve(const PauliSumHamiltonian& h0, const SchemeSpec& spec, const StateVector& psi0,
                     int64_t n_steps, int64_t record_stride, Rng& rng) {
    PropagatorCache cache(h0, spec.pulse_interval);
    return evolve(cache, spec, psi0, n_steps, record_stride, rng);
}

FidelityTrace evolve_embedded_fast(const PropagatorCache& cache, const StateVector& psi0, int64_t n_cycles,
                                   Rng& rng) {
    if (n_cycles < 1) {
        throw std::invalid_argument("n_cycles must be positive");
    }
    if (psi0.n_qubits() != cache.n_qubits()) {
        throw std::invalid_argument("initial state width does not match the Hamiltonian");
    }
    const DenseOperator& u_c = cache.cycle_unitary();
    const double t_c = cache.cycle().cycle_time();
    FidelityTrace trace;
    StateVector psi = psi0;
    std::vector<Complex> scratch;
    Eigen::VectorXcd mv_scratch;
    for (int64_t m = 0; m < n_cycles; ++m) {
        PauliString r = sample_uniform(rng, cache.n_qubits());
        apply_in_place(r, psi.amplitudes(), scratch);
        matvec_in_place(u_c, psi.amplitudes(), mv_scratch);
        apply_in_place(r.adjoint(), psi.amplitudes(), scratch);
        trace.times.push_back(static_cast<double>(m + 1) * t_c);
        trace.mean_fidelity.push_back(fidelity(psi0, psi));
    }
    trace.std_error.assign(trace.times.size(), 0.0);
    return trace;
}

FidelityTrace free_evolution_trace(const PropagatorCache& cache, const StateVector& psi0, int64_t n_steps,
                                   int64_t record_stride) {
    if (n_steps < 1 || record_stride < 1 || n_steps % record_stride != 0) {
        throw std::invalid_argument("record_stride must be positive and divide n_steps");
    }
    const auto& spec = cache.spectrum();
    Eigen::Map<const Eigen::VectorXcd> v(psi0.amplitudes().data(), static_cast<Eigen::Index>(psi0.dim()));
    Eigen::VectorXd w = (spec.eigenvectors.adjoint() * v).cwiseAbs2();
    FidelityTrace trace;
    trace.times = record_times(n_steps, record_stride, cache.tau());
    for (double t : trace.times) {
        double re = 0, im = 0;
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            double ph = spec.eigenvalues[k] * t;
            re += w[k] * std::cos(ph);
            im -= w[k] * std::sin(ph);
        }
        trace.mean_fidelity.push_back(re * re + im * im);
    }
    trace.std_error.assign(trace.times.size(), 0.0);
    return trace;
}

// ---------------------------------------------------------------------------
// PauliSumStepper

namespace {

constexpr double kTaylorTolerance = 0x1.0p-53;
constexpr int kMaxTaylorOrder = 40;

int taylor_order(double x) {
    // Smallest K with x^(K+1)/(K+1)! * e^x <= tolerance.
    double term = 1;
    for (int k = 1; k <= kMaxTaylorOrder; ++k) {
        term *= x / k;
        if (term * std::exp(x) <= kTaylorTolerance) {
            return k - 1;
        }
    }
    return -1;
}

}  // namespace

bool PauliSumStepper::applicable(const PauliSumHamiltonian& h, double tau) {
    double x = tau * h.l1_norm();
    return x <= 1.0 && taylor_order(x) >= 0 && h.n_qubits() <= kMaxQubits;
}

namespace {

// One LaneBlock as a SIMD value; GCC/Clang vector extension.
typedef double Lanes __attribute__((vector_size(sizeof(double) * PauliSumStepper::kLanes), may_alias));

Lanes* as_lanes(std::vector<PauliSumStepper::LaneBlock>& v) {
    return reinterpret_cast<Lanes*>(v.data());
}

// Groups with at most this many terms take their coefficient from a table
// of 2^terms sign combinations; larger ones get a full per-row table.
constexpr std::size_t kMaxComboTerms = 3;

// In-place Walsh-Hadamard transform: a[u] <- sum_v (-1)^{u.v} a[v].
void walsh_hadamard(Lanes* a, std::size_t n) {
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const Lanes x = a[j], y = a[j + h];
                a[j] = x + y;
                a[j + h] = x - y;
            }
        }
    }
}

}  // namespace

PauliSumStepper::PauliSumStepper(const PauliSumHamiltonian& h, double tau)
    : n_qubits_(h.n_qubits()), dim_(std::size_t{1} << h.n_qubits()), tau_(tau), complex_(false) {
    if (!applicable(h, tau)) {
        throw std::invalid_argument("Hamiltonian norm too large for the truncated-series stepper");
    }
    order_ = std::max(1, taylor_order(tau * h.l1_norm()));

    // Group terms by X mask; terms_ lists them group by group.
    std::vector<uint32_t> flips;
    for (const auto& t : h.terms()) {
        if (std::find(flips.begin(), flips.end(), t.pauli.x_bits()) == flips.end()) {
            flips.push_back(t.pauli.x_bits());
        }
    }
    static constexpr Complex kIPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (uint32_t flip : flips) {
        Group g{flip, terms_.size(), 0, false, 0};
        for (const auto& t : h.terms()) {
            if (t.pauli.x_bits() == flip) {
                terms_.push_back(t.pauli);
                base_.push_back(t.coefficient * kIPowers[t.pauli.y_count() % 4]);
                complex_ = complex_ || t.pauli.y_count() % 2 != 0;
            }
        }
        g.end = terms_.size();
        g.combo = g.end - g.begin <= kMaxComboTerms;
        if (g.combo) {
            g.slot = n_combo_entries_;
            n_combo_entries_ += std::size_t{1} << (g.end - g.begin);
            combo_groups_.push_back(g);
        } else {
            g.slot = table_groups_.size();
            table_groups_.push_back(g);
        }
    }
    // Row m of a combo group uses entry slot + sum_k bit_k 2^k, bit_k being
    // the parity of z . (m ^ flip) for the group's k-th term.
    combo_index_.resize(dim_ * combo_groups_.size());
    for (std::size_t m = 0; m < dim_; ++m) {
        for (std::size_t c = 0; c < combo_groups_.size(); ++c) {
            const Group& g = combo_groups_[c];
            uint32_t bits = 0;
            for (std::size_t t = g.begin; t < g.end; ++t) {
                bits |= static_cast<uint32_t>(std::popcount((m ^ g.flip) & terms_[t].z_bits()) & 1)
                        << (t - g.begin);
            }
            combo_index_[m * combo_groups_.size() + c] = static_cast<uint32_t>(g.slot + bits);
        }
    }
    combo_re_.resize(n_combo_entries_);
    combo_im_.resize(n_combo_entries_);
    table_re_.resize(dim_ * table_groups_.size());
    table_im_.resize(dim_ * table_groups_.size());
    scratch_re_.resize(dim_);
    scratch_im_.resize(dim_);
    for (int k = 0; k < 2; ++k) {
        work_re_[k].resize(dim_);
        work_im_[k].resize(dim_);
    }
}

PauliSumStepper::Batch PauliSumStepper::make_batch(const StateVector& psi) const {
    if (psi.dim() != dim_) {
        throw std::invalid_argument("state dimension does not match the stepper");
    }
    Batch b;
    b.re.resize(dim_);
    b.im.resize(dim_);
    for (std::size_t m = 0; m < dim_; ++m) {
        for (int l = 0; l < kLanes; ++l) {
            b.re[m].lane[l] = psi[m].real();
            b.im[m].lane[l] = psi[m].imag();
        }
    }
    return b;
}

StateVector PauliSumStepper::lane_state(const Batch& batch, int lane) const {
    std::vector<Complex> a(dim_);
    for (std::size_t m = 0; m < dim_; ++m) {
        a[m] = {batch.re[m].lane[lane], batch.im[m].lane[lane]};
    }
    return StateVector(n_qubits_, std::move(a));
}

void PauliSumStepper::fidelities(const Batch& batch, const StateVector& psi0, double (&out)[kLanes]) const {
    double re[kLanes] = {}, im[kLanes] = {};
    for (std::size_t m = 0; m < dim_; ++m) {
        const double ar = psi0[m].real(), ai = psi0[m].imag();
        for (int l = 0; l < kLanes; ++l) {
            const double br = batch.re[m].lane[l], bi = batch.im[m].lane[l];
            re[l] += ar * br + ai * bi;
            im[l] += ar * bi - ai * br;
        }
    }
    for (int l = 0; l < kLanes; ++l) {
        out[l] = re[l] * re[l] + im[l] * im[l];
    }
}

void PauliSumStepper::step(Batch& batch, const PauliString (&frames)[kLanes]) {
    if (batch.re.size() != dim_ || batch.im.size() != dim_) {
        throw std::invalid_argument("batch does not match the stepper");
    }
    for (const auto& f : frames) {
        if (f.n_qubits() != n_qubits_) {
            throw std::invalid_argument("frame width does not match the stepper");
        }
    }
    // Per-lane coefficient of each term in the lane's frame.
    std::vector<LaneBlock> coef_re(terms_.size()), coef_im(terms_.size());
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        for (int l = 0; l < kLanes; ++l) {
            const int s = conj_sign(frames[l], terms_[t]);
            coef_re[t].lane[l] = s * base_[t].real();
            coef_im[t].lane[l] = s * base_[t].imag();
        }
    }
    const Lanes* cr = as_lanes(coef_re);
    const Lanes* ci = as_lanes(coef_im);

    Lanes* kre = as_lanes(combo_re_);
    Lanes* kim = as_lanes(combo_im_);
    for (const Group& g : combo_groups_) {
        const std::size_t n = g.end - g.begin;
        for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
            Lanes r = {}, i = {};
            for (std::size_t k = 0; k < n; ++k) {
                if ((bits >> k) & 1) {
                    r -= cr[g.begin + k];
                    i -= ci[g.begin + k];
                } else {
                    r += cr[g.begin + k];
                    i += ci[g.begin + k];
                }
            }
            kre[g.slot + bits] = r;
            kim[g.slot + bits] = i;
        }
    }

    const std::size_t n_table = table_groups_.size();
    Lanes* tre = as_lanes(table_re_);
    Lanes* tim = as_lanes(table_im_);
    Lanes* sre = as_lanes(scratch_re_);
    Lanes* sim = as_lanes(scratch_im_);
    for (std::size_t j = 0; j < n_table; ++j) {
        const Group& g = table_groups_[j];
        std::fill(scratch_re_.begin(), scratch_re_.end(), LaneBlock{});
        std::fill(scratch_im_.begin(), scratch_im_.end(), LaneBlock{});
        for (std::size_t t = g.begin; t < g.end; ++t) {
            sre[terms_[t].z_bits()] += cr[t];
            sim[terms_[t].z_bits()] += ci[t];
        }
        walsh_hadamard(sre, dim_);
        if (complex_) {
            walsh_hadamard(sim, dim_);
        }
        for (std::size_t m = 0; m < dim_; ++m) {
            tre[m * n_table + j] = sre[m ^ g.flip];
            tim[m * n_table + j] = sim[m ^ g.flip];
        }
    }

    if (complex_) {
        step_impl<true>(batch);
    } else {
        step_impl<false>(batch);
    }
}

template <bool kComplex>
void PauliSumStepper::step_impl(Batch& batch) {
    const std::size_t n_table = table_groups_.size();
    const std::size_t n_combo = combo_groups_.size();
    uint32_t table_flips[64], combo_flips[64];
    if (n_table > 64 || n_combo > 64) {
        throw std::invalid_argument("too many distinct X masks for the stepper");
    }
    for (std::size_t j = 0; j < n_table; ++j) {
        table_flips[j] = table_groups_[j].flip;
    }
    for (std::size_t j = 0; j < n_combo; ++j) {
        combo_flips[j] = combo_groups_[j].flip;
    }
    const Lanes* tre = as_lanes(table_re_);
    const Lanes* tim = as_lanes(table_im_);
    const Lanes* kre = as_lanes(combo_re_);
    const Lanes* kim = as_lanes(combo_im_);
    const uint32_t* kidx = combo_index_.data();
    Lanes* pr = as_lanes(batch.re);
    Lanes* pi = as_lanes(batch.im);

    // w_0 = psi; w_k = (-i tau / k) H w_{k-1}; psi <- sum_k w_k.
    std::copy(batch.re.begin(), batch.re.end(), work_re_[0].begin());
    std::copy(batch.im.begin(), batch.im.end(), work_im_[0].begin());
    for (int k = 1; k <= order_; ++k) {
        const Lanes* wr = as_lanes(work_re_[(k - 1) & 1]);
        const Lanes* wi = as_lanes(work_im_[(k - 1) & 1]);
        Lanes* nr = as_lanes(work_re_[k & 1]);
        Lanes* ni = as_lanes(work_im_[k & 1]);
        const double s = tau_ / k;
        for (std::size_t m = 0; m < dim_; ++m) {
            Lanes hr = {}, hi = {};
            for (std::size_t j = 0; j < n_table; ++j) {
                const std::size_t src = m ^ table_flips[j];
                const Lanes c = tre[m * n_table + j];
                hr += c * wr[src];
                hi += c * wi[src];
                if constexpr (kComplex) {
                    const Lanes d = tim[m * n_table + j];
                    hr -= d * wi[src];
                    hi += d * wr[src];
                }
            }
            for (std::size_t j = 0; j < n_combo; ++j) {
                const std::size_t src = m ^ combo_flips[j];
                const uint32_t e = kidx[m * n_combo + j];
                const Lanes c = kre[e];
                hr += c * wr[src];
                hi += c * wi[src];
                if constexpr (kComplex) {
                    const Lanes d = kim[e];
                    hr -= d * wi[src];
                    hi += d * wr[src];
                }
            }
            // -i s (hr + i hi) = s hi - i s hr
            const Lanes vr = s * hi;
            const Lanes vi = -s * hr;
            nr[m] = vr;
            ni[m] = vi;
            pr[m] += vr;
            pi[m] += vi;
        }
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo

int resolve_workers(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("DDSIM_NUM_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<int>(v);
        }
        throw std::invalid_argument(std::string("DDSIM_NUM_THREADS must be a positive integer, got '") + env +
                                    "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs [first, first + count) of a stochastic scheme; returns their statistics
// accumulated in run order.
using BatchRunner = RunningStats (*)(const PropagatorCache&, const SchemeSpec&, const StateVector&, int64_t,
                                     int64_t, int, int, uint64_t);

RunningStats run_batch_stepwise(const PropagatorCache& cache, const SchemeSpec& spec, const StateVector& psi0,
                                int64_t n_steps, int64_t stride, int first, int count, uint64_t seed) {
    RunningStats stats(static_cast<std::size_t>(n_steps / stride));
    for (int r = first; r < first + count; ++r) {
        Rng rng = Rng::derive(seed, static_cast<uint64_t>(r));
        stats.add(evolve(cache, spec, psi0, n_steps, stride, rng).mean_fidelity);
    }
    return stats;
}

RunningStats run_batch_parec_fast(const PropagatorCache& cache, const SchemeSpec& spec, const StateVector& psi0,
                                  int64_t n_steps, int64_t stride, int first, int count, uint64_t seed) {
    constexpr int L = PauliSumStepper::kLanes;
    const std::size_t n_records = static_cast<std::size_t>(n_steps / stride);
    PauliSumStepper stepper(*cache.pauli_sum(), cache.tau());
    RunningStats stats(n_records);
    for (int base = first; base < first + count; base += L) {
        const int lanes = std::min(L, first + count - base);
        std::vector<Rng> rngs;
        for (int l = 0; l < lanes; ++l) {
            rngs.push_back(Rng::derive(seed, static_cast<uint64_t>(base + l)));
        }
        std::vector<std::vector<double>> fid(lanes, std::vector<double>(n_records));
        auto batch = stepper.make_batch(psi0);
        PauliString frames[L];
        for (int l = 0; l < L; ++l) {
            frames[l] = PauliString(cache.n_qubits());
        }
        double f[L];
        for (int64_t j = 0; j < n_steps; ++j) {
            for (int l = 0; l < lanes; ++l) {
                frames[l] = sample_uniform(rngs[l], cache.n_qubits());
            }
            stepper.step(batch, frames);
            if ((j + 1) % stride == 0) {
                stepper.fidelities(batch, psi0, f);
                for (int l = 0; l < lanes; ++l) {
                    fid[l][static_cast<std::size_t>((j + 1) / stride - 1)] = f[l];
                }
            }
        }
        for (int l = 0; l < lanes; ++l) {
            stats.add(fid[l]);
        }
    }
    (void)spec;
    return stats;
}

RunningStats run_batch_embedded_fast(const PropagatorCache& cache, const SchemeSpec& spec,
                                     const StateVector& psi0, int64_t n_steps, int64_t stride, int first,
                                     int count, uint64_t seed) {
    const int period = spec.period();
    const int64_t n_cycles = n_steps / period;
    const int64_t cycle_stride = stride / period;
    const std::size_t n_records = static_cast<std::size_t>(n_steps / stride);
    const int n = cache.n_qubits();
    const auto dim = static_cast<Eigen::Index>(psi0.dim());
    const Eigen::MatrixXcd& u = cache.cycle_unitary().matrix();
    Eigen::Map<const Eigen::VectorXcd> ref(psi0.amplitudes().data(), dim);

    std::vector<Rng> rngs;
    for (int r = first; r < first + count; ++r) {
        rngs.push_back(Rng::derive(seed, static_cast<uint64_t>(r)));
    }
    Eigen::MatrixXcd psi(dim, count), next(dim, count);
    for (int c = 0; c < count; ++c) {
        psi.col(c) = ref;
    }
    std::vector<std::vector<double>> fid(count, std::vector<double>(n_records));
    std::vector<PauliString> r(count);
    std::vector<Complex> scratch;
    for (int64_t m = 0; m < n_cycles; ++m) {
        for (int c = 0; c < count; ++c) {
            r[c] = sample_uniform(rngs[c], n);
            apply_to_column(r[c], psi, c, scratch);
        }
        next.noalias() = u * psi;
        psi.swap(next);
        for (int c = 0; c < count; ++c) {
            apply_to_column(r[c].adjoint(), psi, c, scratch);
        }
        if ((m + 1) % cycle_stride == 0) {
            auto k = static_cast<std::size_t>((m + 1) / cycle_stride - 1);
            Eigen::VectorXcd overlaps = psi.adjoint() * ref;
            for (int c = 0; c < count; ++c) {
                fid[c][k] = std::norm(overlaps[c]);
            }
        }
    }
    RunningStats stats(n_records);
    for (int c = 0; c < count; ++c) {
        stats.add(fid[c]);
    }
    return stats;
}

FidelityTrace bang_bang_by_cycles(const PropagatorCache& cache, const StateVector& psi0, int64_t n_steps,
                                  int64_t stride) {
    const int period = cache.cycle().size();
    FidelityTrace trace;
    trace.times = record_times(n_steps, stride, cache.tau());
    StateVector psi = psi0;
    Eigen::VectorXcd scratch;
    for (int64_t m = 0; m < n_steps / period; ++m) {
        matvec_in_place(cache.cycle_unitary(), psi.amplitudes(), scratch);
        if (((m + 1) * period) % stride == 0) {
            trace.mean_fidelity.push_back(fidelity(psi0, psi));
        }
    }
    trace.std_error.assign(trace.times.size(), 0.0);
    return trace;
}

}  // namespace

FidelityTrace monte_carlo(const PropagatorCache& cache, const SchemeSpec& spec, const StateVector& psi0,
                          int64_t n_steps, int64_t record_stride, int n_runs, uint64_t master_seed,
                          const MonteCarloOptions& options) {
    check_run_shape(cache, spec, psi0, n_steps, record_stride);
    if (n_runs < 1) {
        throw std::invalid_argument("n_runs must be at least 1");
    }
    const bool fast = options.fast_paths;

    if (!spec.is_stochastic()) {
        FidelityTrace t;
        const bool cycles_align = spec.kind == SchemeKind::kBangBang && cache.has_cycle() &&
                                  cache.cycle().frames() == spec.cycle->frames() &&
                                  record_stride % spec.period() == 0;
        if (fast && spec.kind == SchemeKind::kFree) {
            t = free_evolution_trace(cache, psi0, n_steps, record_stride);
        } else if (fast && cycles_align) {
            t = bang_bang_by_cycles(cache, psi0, n_steps, record_stride);
        } else {
            Rng rng = Rng::derive(master_seed, 0);
            t = evolve(cache, spec, psi0, n_steps, record_stride, rng);
        }
        t.n_runs = n_runs;
        return t;
    }

    BatchRunner runner = run_batch_stepwise;
    if (fast && spec.kind == SchemeKind::kParec && cache.pauli_sum() &&
        PauliSumStepper::applicable(*cache.pauli_sum(), cache.tau())) {
        runner = run_batch_parec_fast;
    } else if (fast && spec.kind == SchemeKind::kEmbedded && cache.has_cycle() &&
               cache.cycle().frames() == spec.cycle->frames() && record_stride % spec.period() == 0) {
        runner = run_batch_embedded_fast;
    }

    const int n_batches = (n_runs + kRunBatch - 1) / kRunBatch;
    const std::size_t n_records = static_cast<std::size_t>(n_steps / record_stride);
    std::vector<RunningStats> results(n_batches, RunningStats(n_records));
    std::atomic<int> next_batch{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        while (true) {
            int b = next_batch.fetch_add(1);
            if (b >= n_batches) {
                return;
            }
            try {
                int first = b * kRunBatch;
                int count = std::min(kRunBatch, n_runs - first);
                results[b] = runner(cache, spec, psi0, n_steps, record_stride, first, count, master_seed);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next_batch.store(n_batches);
            }
        }
    };
    const int workers = std::min(resolve_workers(options.workers), n_batches);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    RunningStats total(n_records);
    for (const auto& r : results) {
        total.merge(r);
    }
    FidelityTrace trace;
    trace.times = record_times(n_steps, record_stride, cache.tau());
    trace.mean_fidelity = total.mean;
    trace.std_error.resize(n_records);
    for (std::size_t i = 0; i < n_records; ++i) {
        trace.std_error[i] =
            n_runs > 1 ? std::sqrt(total.m2[i] / (n_runs - 1)) / std::sqrt(static_cast<double>(n_runs)) : 0.0;
    }
    trace.n_runs = n_runs;
    return trace;
}

}  // namespace ddsim
