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

#include "ddsim/schemes.h"

#include <algorithm>
#include <array>
#include <bit>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ddsim {

namespace {

int parity(uint32_t v) {
    return std::popcount(v) & 1;
}

// Lines of PG(4, 2), i.e. 2-dim subspaces of GF(2)^5, as {a, c, a ^ c} with
// a < c < a ^ c, listed in increasing order of (a, c).
std::vector<std::array<uint32_t, 3>> projective_lines() {
    std::vector<std::array<uint32_t, 3>> lines;
    for (uint32_t a = 1; a < 32; ++a) {
        for (uint32_t c = a + 1; c < 32; ++c) {
            uint32_t s = a ^ c;
            if (s > c) {
                lines.push_back({a, c, s});
            }
        }
    }
    return lines;
}

bool disjoint(const std::array<uint32_t, 3>& l, const std::array<uint32_t, 3>& m) {
    for (uint32_t p : l) {
        for (uint32_t r : m) {
            if (p == r) {
                return false;
            }
        }
    }
    return true;
}

bool extend_spread(const std::vector<std::array<uint32_t, 3>>& lines, std::size_t start, std::size_t want,
                   std::vector<std::size_t>& chosen) {
    if (chosen.size() == want) {
        return true;
    }
    for (std::size_t i = start; i < lines.size(); ++i) {
        bool ok = std::all_of(chosen.begin(), chosen.end(),
                              [&](std::size_t j) { return disjoint(lines[i], lines[j]); });
        if (!ok) {
            continue;
        }
        chosen.push_back(i);
        if (extend_spread(lines, i + 1, want, chosen)) {
            return true;
        }
        chosen.pop_back();
    }
    return false;
}

// (a.u, b.u) -> symbol, so that (0,0), (1,0), (1,1), (0,1) read as I, X, Y, Z.
int pair_symbol(int first, int second) {
    static constexpr int kSymbol[2][2] = {{0, 3}, {1, 2}};
    return kSymbol[first][second];
}

SymbolArray sorted_rows(int rows, int cols, int q, std::vector<std::vector<int>> table) {
    std::sort(table.begin(), table.end());
    std::vector<int> flat;
    for (const auto& r : table) {
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return SymbolArray(rows, cols, q, std::move(flat));
}

}  // namespace

SymbolArray::SymbolArray(int rows, int cols, int q, std::vector<int> entries)
    : rows_(rows), cols_(cols), q_(q), entries_(std::move(entries)) {
    if (rows < 0 || cols < 0 || q < 1) {
        throw std::invalid_argument("invalid symbol array shape");
    }
    if (entries_.size() != static_cast<std::size_t>(rows) * cols) {
        throw std::invalid_argument("symbol array entry count does not match its shape");
    }
    for (int e : entries_) {
        if (e < 0 || e >= q) {
            throw std::invalid_argument("symbol " + std::to_string(e) + " outside alphabet");
        }
    }
}

void SymbolArray::set(int row, int col, int symbol) {
    if (symbol < 0 || symbol >= q_) {
        throw std::invalid_argument("symbol outside alphabet");
    }
    entries_[static_cast<std::size_t>(row) * cols_ + col] = symbol;
}

SymbolArray construct_oa(int q, int runs, int cols) {
    if (runs != 2 * q * q || cols != 2 * q + 1) {
        throw std::invalid_argument("construct_oa builds OA(2q^2, 2q+1, q, 2) only");
    }
    std::vector<std::vector<int>> table;
    if (q == 2) {
        // Rows u in GF(2)^3; columns are the functionals v.u for v = 1..5,
        // pairwise independent because they are distinct and nonzero.
        for (uint32_t u = 0; u < 8; ++u) {
            std::vector<int> row;
            for (uint32_t v = 1; v <= 5; ++v) {
                row.push_back(parity(u & v));
            }
            table.push_back(row);
        }
        return sorted_rows(runs, cols, q, std::move(table));
    }
    if (q != 4) {
        throw std::invalid_argument("construct_oa supports q = 2 and q = 4");
    }
    auto lines = projective_lines();
    std::vector<std::size_t> chosen;
    if (!extend_spread(lines, 0, static_cast<std::size_t>(cols), chosen)) {
        throw std::runtime_error("no partial line spread of the required size found");
    }
    for (uint32_t u = 0; u < 32; ++u) {
        std::vector<int> row;
        for (std::size_t i : chosen) {
            row.push_back(pair_symbol(parity(lines[i][0] & u), parity(lines[i][1] & u)));
        }
        table.push_back(row);
    }
    return sorted_rows(runs, cols, q, std::move(table));
}

OaCheck verify_orthogonal_array(const SymbolArray& a, int strength) {
    if (strength < 1 || strength > a.cols()) {
        throw std::invalid_argument("strength must lie in 1..cols");
    }
    int64_t tuples = 1;
    for (int k = 0; k < strength; ++k) {
        tuples *= a.q();
    }
    OaCheck result;
    const int expected = a.rows() % tuples == 0 ? static_cast<int>(a.rows() / tuples) : -1;

    std::vector<int> cols(strength);
    for (int k = 0; k < strength; ++k) {
        cols[k] = k;
    }
    std::vector<int> counts(static_cast<std::size_t>(tuples));
    while (true) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int r = 0; r < a.rows(); ++r) {
            int64_t idx = 0;
            for (int c : cols) {
                idx = idx * a.q() + a.at(r, c);
            }
            ++counts[idx];
        }
        for (int64_t idx = 0; idx < tuples; ++idx) {
            if (counts[idx] != expected) {
                result.passed = false;
                result.columns = cols;
                result.symbols.assign(strength, 0);
                int64_t rest = idx;
                for (int k = strength - 1; k >= 0; --k) {
                    result.symbols[k] = static_cast<int>(rest % a.q());
                    rest /= a.q();
                }
                result.count = counts[idx];
                result.expected = expected;
                return result;
            }
        }
        // Next column combination in lexicographic order.
        int k = strength - 1;
        while (k >= 0 && cols[k] == a.cols() - strength + k) {
            --k;
        }
        if (k < 0) {
            break;
        }
        ++cols[k];
        for (int j = k + 1; j < strength; ++j) {
            cols[j] = cols[j - 1] + 1;
        }
    }
    result.expected = expected;
    return result;
}

DecouplingCycle::DecouplingCycle(int n_qubits, std::vector<PauliString> frames, double step)
    : n_qubits_(n_qubits), frames_(std::move(frames)), step_(step) {
    if (frames_.empty()) {
        throw std::invalid_argument("a decoupling cycle needs at least one frame");
    }
    if (!(step > 0)) {
        throw std::invalid_argument("cycle step must be positive");
    }
    for (const auto& f : frames_) {
        if (f.n_qubits() != n_qubits) {
            throw std::invalid_argument("cycle frame " + f.str() + " has the wrong width");
        }
    }
}

DecouplingCycle cycle_from_array(const SymbolArray& a, double step) {
    if (a.q() > 4) {
        throw std::invalid_argument("Pauli frames need an alphabet of at most 4 symbols");
    }
    static constexpr char kPauli[4] = {'I', 'X', 'Y', 'Z'};
    std::vector<PauliString> frames;
    for (int r = 0; r < a.rows(); ++r) {
        std::string s(a.cols(), 'I');
        for (int c = 0; c < a.cols(); ++c) {
            s[c] = kPauli[a.at(r, c)];
        }
        frames.push_back(PauliString::from_str(s));
    }
    return DecouplingCycle(a.cols(), std::move(frames), step);
}

int decoupling_sign_sum(const DecouplingCycle& cycle, const PauliString& p) {
    int sum = 0;
    for (const auto& d : cycle.frames()) {
        sum += conj_sign(d, p);
    }
    return sum;
}

PauliSumHamiltonian verify_decoupling(const DecouplingCycle& cycle, const PauliSumHamiltonian& h) {
    if (h.n_qubits() != cycle.n_qubits()) {
        throw std::invalid_argument("cycle and Hamiltonian widths differ");
    }
    PauliSumHamiltonian residual(h.n_qubits());
    for (const auto& t : h.terms()) {
        int s = decoupling_sign_sum(cycle, t.pauli);
        if (s != 0 && t.coefficient != 0) {
            residual.add_term(s * t.coefficient * cycle.step(), t.pauli);
        }
    }
    return residual;
}

std::optional<PauliString> first_undecoupled_term(const DecouplingCycle& cycle, int locality) {
    const int n = cycle.n_qubits();
    if (locality < 1) {
        throw std::invalid_argument("locality must be at least 1");
    }
    static constexpr uint32_t kX[3] = {1, 1, 0};
    static constexpr uint32_t kZ[3] = {0, 1, 1};
    for (int w = 1; w <= std::min(locality, n); ++w) {
        std::vector<int> support(w);
        for (int k = 0; k < w; ++k) {
            support[k] = k;
        }
        while (true) {
            int64_t combos = 1;
            for (int k = 0; k < w; ++k) {
                combos *= 3;
            }
            for (int64_t c = 0; c < combos; ++c) {
                uint32_t x = 0, z = 0;
                int64_t rest = c;
                for (int k = w - 1; k >= 0; --k) {
                    int s = static_cast<int>(rest % 3);
                    rest /= 3;
                    x |= kX[s] << support[k];
                    z |= kZ[s] << support[k];
                }
                PauliString p(n, x, z);
                if (decoupling_sign_sum(cycle, p) != 0) {
                    return p;
                }
            }
            int k = w - 1;
            while (k >= 0 && support[k] == n - w + k) {
                --k;
            }
            if (k < 0) {
                break;
            }
            ++support[k];
            for (int j = k + 1; j < w; ++j) {
                support[j] = support[j - 1] + 1;
            }
        }
    }
    return std::nullopt;
}

void write_cycle(std::ostream& out, const DecouplingCycle& cycle) {
    out << cycle.size() << ' ' << cycle.n_qubits() << '\n';
    for (const auto& f : cycle.frames()) {
        out << f.str() << '\n';
    }
}

DecouplingCycle read_cycle(std::istream& in, double step) {
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                return true;
            }
        }
        return false;
    };
    if (!next_line()) {
        throw std::invalid_argument("empty cycle file");
    }
    std::istringstream header(line);
    int n_frames = 0, n_qubits = 0;
    std::string extra;
    if (!(header >> n_frames >> n_qubits) || (header >> extra) || n_frames < 1 || n_qubits < 1 ||
        n_qubits > kMaxPauliQubits) {
        throw std::invalid_argument("bad cycle header: " + line);
    }
    std::vector<PauliString> frames;
    for (int j = 0; j < n_frames; ++j) {
        if (!next_line()) {
            throw std::invalid_argument("cycle file ends after " + std::to_string(j) + " of " +
                                        std::to_string(n_frames) + " frames");
        }
        std::istringstream ls(line);
        std::string s;
        ls >> s;
        if (ls >> extra) {
            throw std::invalid_argument("bad cycle line: " + line);
        }
        PauliString p = PauliString::from_str(s);
        if (p.n_qubits() != n_qubits || p.phase_exp() != 0) {
            throw std::invalid_argument("cycle frame '" + s + "' does not match the header");
        }
        frames.push_back(p);
    }
    if (next_line()) {
        throw std::invalid_argument("trailing content after the last frame: " + line);
    }
    return DecouplingCycle(n_qubits, std::move(frames), step);
}

std::string_view scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::kFree:
            return "free";
        case SchemeKind::kBangBang:
            return "bang_bang";
        case SchemeKind::kParec:
            return "parec";
        case SchemeKind::kEmbedded:
            return "embedded";
    }
    return "?";
}

SchemeKind parse_scheme(std::string_view name) {
    for (auto k : {SchemeKind::kFree, SchemeKind::kBangBang, SchemeKind::kParec, SchemeKind::kEmbedded}) {
        if (scheme_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

void validate_scheme(const SchemeSpec& spec, int n_qubits) {
    if (!(spec.pulse_interval > 0)) {
        throw std::invalid_argument("pulse interval must be positive");
    }
    bool needs_cycle = spec.kind == SchemeKind::kBangBang || spec.kind == SchemeKind::kEmbedded;
    if (needs_cycle && !spec.cycle) {
        throw std::invalid_argument(std::string(scheme_name(spec.kind)) + " requires a decoupling cycle");
    }
    if (!needs_cycle && spec.cycle) {
        throw std::invalid_argument(std::string(scheme_name(spec.kind)) + " does not take a cycle");
    }
    if (spec.cycle) {
        if (spec.cycle->n_qubits() != n_qubits) {
            throw std::invalid_argument("cycle width does not match the register");
        }
        if (spec.cycle->step() != spec.pulse_interval) {
            throw std::invalid_argument("cycle step differs from the pulse interval");
        }
    }
}

FrameGenerator::FrameGenerator(const SchemeSpec& spec, int n_qubits, Rng& rng)
    : spec_(spec), n_qubits_(n_qubits), rng_(rng), random_frame_(n_qubits) {
    validate_scheme(spec, n_qubits);
}

PauliString FrameGenerator::next() {
    const int64_t j = step_++;
    switch (spec_.kind) {
        case SchemeKind::kFree:
            return PauliString(n_qubits_);
        case SchemeKind::kBangBang:
            return spec_.cycle->frames()[j % spec_.cycle->size()];
        case SchemeKind::kParec:
            return sample_uniform(rng_, n_qubits_);
        case SchemeKind::kEmbedded: {
            const int n = spec_.cycle->size();
            if (j % n == 0) {
                random_frame_ = sample_uniform(rng_, n_qubits_);
            }
            return compose(spec_.cycle->frames()[j % n], random_frame_);
        }
    }
    throw std::logic_error("unhandled scheme kind");
}

std::vector<PauliString> frame_sequence(const SchemeSpec& spec, int n_qubits, int64_t n_steps, Rng& rng) {
    if (n_steps < 0) {
        throw std::invalid_argument("n_steps must be non-negative");
    }
    FrameGenerator gen(spec, n_qubits, rng);
    std::vector<PauliString> frames;
    frames.reserve(static_cast<std::size_t>(n_steps));
    for (int64_t j = 0; j < n_steps; ++j) {
        frames.push_back(gen.next());
    }
    return frames;
}

std::vector<PauliString> pulse_sequence(const std::vector<PauliString>& frames) {
    std::vector<PauliString> pulses;
    if (frames.empty()) {
        return pulses;
    }
    pulses.push_back(frames[0]);
    for (std::size_t j = 1; j < frames.size(); ++j) {
        pulses.push_back(compose(frames[j], frames[j - 1].adjoint()));
    }
    return pulses;
}

}  // namespace ddsim
