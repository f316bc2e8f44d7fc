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

#include "ddsim/experiment.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ddsim/errors.h"
#include "json.hpp"

namespace ddsim {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

template <class T>
T get_number(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number()) {
        config_error(std::string(key) + " must be a number");
    }
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {
            config_error(std::string(key) + " must be an integer");
        }
        if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_integer() && !v.is_number_unsigned()) {
                config_error(std::string(key) + " must be non-negative");
            }
        }
    }
    return v.get<T>();
}

constexpr uint64_t kDisorderStream = ~uint64_t{0};

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        config_error("top level must be an object");
    }
    static const char* kKnown[] = {"n_qubits",   "rows",        "cols",          "edges",         "coupling_bound",
                                   "delta_mode", "hamiltonian", "initial_state", "cycle",         "schemes",
                                   "n_steps",    "record_stride", "n_runs",      "master_seed",   "disorder_seed",
                                   "output_dir", "workers",     "description"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
            config_error("unknown key '" + key + "'");
        }
    }
    ExperimentConfig c;
    try {
        if (!j.contains("n_qubits") || !j.contains("n_steps") || !j.contains("master_seed")) {
            config_error("n_qubits, n_steps and master_seed are required");
        }
        c.n_qubits = get_number<int>(j, "n_qubits");
        if (c.n_qubits < 1 || c.n_qubits > kMaxQubits) {
            config_error("n_qubits must lie in 1.." + std::to_string(kMaxQubits));
        }
        if (j.contains("rows") || j.contains("cols")) {
            if (j.contains("edges")) {
                config_error("give either rows/cols or edges, not both");
            }
            int rows = get_number<int>(j, "rows");
            int cols = get_number<int>(j, "cols");
            if (rows < 1 || cols < 1 || rows * cols != c.n_qubits) {
                config_error("rows * cols must equal n_qubits");
            }
            c.grid = std::make_pair(rows, cols);
        } else if (j.contains("edges")) {
            for (const auto& e : j.at("edges")) {
                if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
                    config_error("edges must be [k, l] integer pairs");
                }
                c.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
            }
        } else {
            config_error("either rows/cols or edges is required");
        }
        if (j.contains("coupling_bound")) {
            c.coupling_bound = get_number<double>(j, "coupling_bound");
            if (!(c.coupling_bound >= 0)) {
                config_error("coupling_bound must be non-negative");
            }
        }
        if (j.contains("delta_mode")) {
            std::string m = j.at("delta_mode").get<std::string>();
            if (m == "sample") {
                c.delta_mode = DeltaMode::kSample;
            } else if (m == "zero") {
                c.delta_mode = DeltaMode::kZero;
            } else {
                config_error("delta_mode must be \"sample\" or \"zero\"");
            }
        }
        if (j.contains("hamiltonian")) {
            std::vector<std::pair<double, std::string>> terms;
            for (const auto& t : j.at("hamiltonian")) {
                if (!t.is_array() || t.size() != 2 || !t[0].is_number() || !t[1].is_string()) {
                    config_error("hamiltonian entries must be [coefficient, \"pauli\"]");
                }
                std::string text = t[1].get<std::string>();
                PauliString p;
                try {
                    p = PauliString::from_str(text);
                } catch (const std::invalid_argument& e) {
                    config_error("hamiltonian term '" + text + "': " + e.what());
                }
                if (p.n_qubits() != c.n_qubits || p.phase_exp() != 0) {
                    config_error("hamiltonian term '" + text + "' does not fit the register");
                }
                terms.emplace_back(t[0].get<double>(), std::move(text));
            }
            c.hamiltonian = std::move(terms);
        }
        if (j.contains("initial_state")) {
            c.initial_state = j.at("initial_state").get<std::string>();
            if (c.initial_state != "coherent" && c.initial_state != "plus") {
                config_error("initial_state must be \"coherent\" or \"plus\"");
            }
        }
        if (j.contains("cycle")) {
            const json& cy = j.at("cycle");
            if (cy.is_string()) {
                std::string s = cy.get<std::string>();
                c.cycle = s == "oa" ? s : (base_dir / s).string();
            } else if (!cy.is_null()) {
                config_error("cycle must be \"oa\", a file path or null");
            }
        } else if (c.n_qubits == 9) {
            c.cycle = "oa";
        }
        if (j.contains("schemes")) {
            for (const auto& s : j.at("schemes")) {
                c.schemes.push_back(parse_scheme(s.get<std::string>()));
            }
        } else {
            c.schemes = {SchemeKind::kFree, SchemeKind::kBangBang, SchemeKind::kParec, SchemeKind::kEmbedded};
        }
        if (c.schemes.empty()) {
            config_error("schemes must not be empty");
        }
        c.n_steps = get_number<int64_t>(j, "n_steps");
        if (c.n_steps < 1) {
            config_error("n_steps must be positive");
        }
        if (j.contains("record_stride")) {
            const json& rs = j.at("record_stride");
            if (rs.is_number_integer()) {
                for (auto k : c.schemes) {
                    c.record_stride[k] = rs.get<int64_t>();
                }
            } else if (rs.is_object()) {
                for (const auto& [name, v] : rs.items()) {
                    if (!v.is_number_integer()) {
                        config_error("record_stride values must be integers");
                    }
                    c.record_stride[parse_scheme(name)] = v.get<int64_t>();
                }
            } else {
                config_error("record_stride must be an integer or an object");
            }
            for (const auto& [k, v] : c.record_stride) {
                if (v < 1 || c.n_steps % v != 0) {
                    config_error("record_stride for " + std::string(scheme_name(k)) + " must divide n_steps");
                }
            }
        }
        if (j.contains("n_runs")) {
            c.n_runs = get_number<int>(j, "n_runs");
            if (c.n_runs < 1) {
                config_error("n_runs must be at least 1");
            }
        }
        c.master_seed = get_number<uint64_t>(j, "master_seed");
        if (j.contains("disorder_seed")) {
            c.disorder_seed = get_number<uint64_t>(j, "disorder_seed");
        }
        if (j.contains("output_dir")) {
            c.output_dir = j.at("output_dir").get<std::string>();
        }
        if (j.contains("workers")) {
            c.workers = get_number<int>(j, "workers");
            if (c.workers < 0) {
                config_error("workers must be non-negative");
            }
        }
    } catch (const json::exception& e) {
        config_error(e.what());
    }
    for (auto k : c.schemes) {
        if ((k == SchemeKind::kBangBang || k == SchemeKind::kEmbedded) && !c.cycle) {
            config_error(std::string(scheme_name(k)) + " needs a cycle");
        }
    }
    if (c.cycle == "oa" && c.n_qubits != 9) {
        config_error("the built-in OA(32,9,4,2) cycle needs 9 qubits");
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw std::invalid_argument("cannot open config file " + file.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), file.parent_path());
}

CouplingGraph ExperimentConfig::graph() const {
    if (grid) {
        return grid_graph(grid->first, grid->second);
    }
    return CouplingGraph(n_qubits, edges);
}

int64_t ExperimentConfig::stride_for(SchemeKind kind, int cycle_length) const {
    auto it = record_stride.find(kind);
    if (it != record_stride.end()) {
        return it->second;
    }
    bool per_cycle = kind == SchemeKind::kBangBang || kind == SchemeKind::kEmbedded;
    return per_cycle && n_steps % cycle_length == 0 ? cycle_length : 1;
}

Instance build_instance(const ExperimentConfig& config) {
    CouplingGraph graph = config.graph();
    PauliSumHamiltonian h0(config.n_qubits);
    if (config.hamiltonian) {
        for (const auto& [c, s] : *config.hamiltonian) {
            PauliString p = PauliString::from_str(s);
            if (p.n_qubits() != config.n_qubits || p.phase_exp() != 0) {
                throw std::invalid_argument("config: Hamiltonian term '" + s + "' does not fit the register");
            }
            h0.add_term(c, p);
        }
    } else {
        Rng rng = config.disorder_seed ? Rng(*config.disorder_seed) : Rng::derive(config.master_seed, kDisorderStream);
        h0 = build_hamiltonian(sample_params(rng, config.coupling_bound, graph, config.delta_mode), graph);
    }

    StateVector psi0 = initial_coherent_state(config.n_qubits);
    if (config.initial_state == "plus") {
        const std::size_t dim = std::size_t{1} << config.n_qubits;
        psi0 = StateVector(config.n_qubits, std::vector<Complex>(dim, 1.0 / std::sqrt(static_cast<double>(dim))));
    }

    Instance inst{std::move(h0), std::move(psi0), std::nullopt, std::nullopt};
    if (config.cycle) {
        if (*config.cycle == "oa") {
            inst.cycle = cycle_from_array(construct_oa(4, 32, 9));
        } else {
            std::ifstream in(*config.cycle);
            if (!in) {
                throw std::invalid_argument("config: cannot open cycle file " + *config.cycle);
            }
            inst.cycle = read_cycle(in);
        }
        if (inst.cycle->n_qubits() != config.n_qubits) {
            throw std::invalid_argument("config: cycle width does not match n_qubits");
        }
    }
    inst.cache.emplace(inst.h0, 1.0);
    if (inst.cycle) {
        inst.cache->attach_cycle(*inst.cycle);
    }
    return inst;
}

BoundInputs bound_inputs(const Instance& inst) {
    const PropagatorCache& cache = *inst.cache;
    BoundInputs b;
    b.h0_norm = spectral_norm(cache.hamiltonian());
    b.delta_h0 = energy_uncertainty(inst.h0, inst.psi0);
    b.dt = cache.tau();
    if (cache.has_residual()) {
        b.hbar_norm = spectral_norm(cache.residual());
        b.delta_hbar = energy_uncertainty(cache.residual(), inst.psi0);
        b.t_c = cache.cycle().cycle_time();
    } else {
        b.hbar_norm = b.delta_hbar = std::numeric_limits<double>::quiet_NaN();
        b.t_c = cache.tau();
    }
    return b;
}

std::vector<std::pair<std::string, double>> instance_scalars(const Instance& inst) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    BoundInputs b = bound_inputs(inst);
    const bool cyc = inst.cycle.has_value();
    const double x = b.h0_norm * b.t_c;
    double bound = nan;
    if (cyc && x < critical_x()) {
        bound = residual_norm_bound(b.h0_norm, b.t_c);
    }
    const double small_x = residual_norm_bound_small_x(b.h0_norm, b.t_c);
    return {
        {"n_qubits", inst.h0.n_qubits()},
        {"n_terms", static_cast<double>(inst.h0.terms().size())},
        {"tau", b.dt},
        {"cycle_length", cyc ? inst.cycle->size() : nan},
        {"t_c", cyc ? b.t_c : nan},
        {"h0_norm", b.h0_norm},
        {"h0_l1_norm", inst.h0.l1_norm()},
        {"delta_h0", b.delta_h0},
        {"hbar_norm", b.hbar_norm},
        {"delta_hbar", b.delta_hbar},
        {"hbar_over_h0", cyc ? b.hbar_norm / b.h0_norm : nan},
        {"parec_rate", parec_rate(b.delta_h0, b.dt)},
        {"embedded_rate", cyc ? embedded_rate(b.delta_hbar, b.t_c) : nan},
        {"x", cyc ? x : nan},
        {"x_star", critical_x()},
        {"residual_norm_bound", bound},
        {"residual_norm_bound_small_x", cyc ? small_x : nan},
        {"eq5_quadratic_coefficient", cyc ? small_x * small_x : nan},
        {"eq6_linear_coefficient", b.h0_norm * b.h0_norm * b.dt},
        {"eq7_linear_coefficient", cyc ? small_x * small_x * b.t_c : nan},
    };
}

uint64_t scheme_seed(uint64_t master_seed, SchemeKind kind) {
    return Rng::derive(master_seed, (uint64_t{1} << 32) + static_cast<uint64_t>(kind)).next_u64();
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Instance& inst) {
    ExperimentResult result;
    MonteCarloOptions opts;
    opts.workers = config.workers;
    for (SchemeKind kind : config.schemes) {
        SchemeSpec spec;
        spec.kind = kind;
        spec.pulse_interval = inst.cache->tau();
        if (kind == SchemeKind::kBangBang || kind == SchemeKind::kEmbedded) {
            spec.cycle = inst.cycle;
        }
        const int64_t stride = config.stride_for(kind, spec.period());
        result.traces.emplace_back(kind, monte_carlo(*inst.cache, spec, inst.psi0, config.n_steps, stride,
                                                     config.n_runs, scheme_seed(config.master_seed, kind), opts));
    }
    result.scalars = instance_scalars(inst);
    return result;
}

std::vector<double> bounds_times(const ExperimentConfig& config, const Instance& inst) {
    const int64_t step = inst.cycle ? inst.cycle->size() : 1;
    std::vector<double> t;
    for (int64_t s = 0; s <= config.n_steps; s += step) {
        t.push_back(static_cast<double>(s) * inst.cache->tau());
    }
    return t;
}

void write_scalars_csv(std::ostream& out, const std::vector<std::pair<std::string, double>>& scalars) {
    std::string buf = "name,value\n";
    char line[160];
    for (const auto& [name, v] : scalars) {
        std::snprintf(line, sizeof line, "%s,%.17g\n", name.c_str(), v);
        buf += line;
    }
    out << buf;
}

void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& config, const Instance& inst,
                      const ExperimentResult& result) {
    std::filesystem::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot write " + (dir / name).string());
        }
        return f;
    };
    for (const auto& [kind, trace] : result.traces) {
        auto f = open("trace_" + std::string(scheme_name(kind)) + ".csv");
        write_trace_csv(f, trace);
    }
    {
        auto f = open("scalars.csv");
        write_scalars_csv(f, result.scalars);
    }
    {
        auto f = open("hamiltonian.txt");
        write_hamiltonian_text(f, inst.h0);
    }
    if (inst.cycle) {
        auto f = open("cycle.txt");
        write_cycle(f, *inst.cycle);
        BoundInputs b = bound_inputs(inst);
        auto g = open("bounds.csv");
        write_bounds_csv(g, bounds_times(config, inst), b);
    }
}

int verify_cycle_file(const std::filesystem::path& file, int locality, std::ostream& out, std::ostream& err) {
    std::optional<DecouplingCycle> cycle;
    try {
        std::ifstream in(file);
        if (!in) {
            err << "cannot open " << file.string() << "\n";
            return 2;
        }
        cycle = read_cycle(in);
    } catch (const std::invalid_argument& e) {
        err << file.string() << ": " << e.what() << "\n";
        return 2;
    }
    if (locality < 1) {
        err << "locality must be at least 1\n";
        return 2;
    }
    auto bad = first_undecoupled_term(*cycle, locality);
    if (bad) {
        out << "not decoupled: " << bad->str() << " (sign sum " << decoupling_sign_sum(*cycle, *bad) << ")\n";
        return 1;
    }
    out << "ok: all Pauli terms of weight <= " << locality << " average to zero over " << cycle->size()
        << " frames\n";
    return 0;
}

}  // namespace ddsim
