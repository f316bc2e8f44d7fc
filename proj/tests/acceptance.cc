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


// End-to-end acceptance run on the 9-qubit configuration. Prints one
// PASS/FAIL line per criterion (details indented below it) and exits nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ddsim/analysis.h"
#include "ddsim/engine.h"
#include "ddsim/errors.h"
#include "ddsim/experiment.h"
#include "ddsim/schemes.h"

namespace {

using namespace ddsim;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int g_failures = 0;

void report(int id, bool ok, const std::string& summary) {
    std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", summary.c_str());
    std::fflush(stdout);
    if (!ok) {
        ++g_failures;
    }
}

void detail(const char* fmt, auto... args) {
    std::printf("    ");
    std::printf(fmt, args...);
    std::printf("\n");
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Series {
    std::map<double, std::size_t> index;
    const FidelityTrace* trace = nullptr;
    bool has(double t) const {
        return index.count(t) != 0;
    }
    double f(double t) const {
        return trace->mean_fidelity[index.at(t)];
    }
    double se(double t) const {
        return trace->std_error[index.at(t)];
    }
};

Series series(const FidelityTrace& t) {
    Series s;
    s.trace = &t;
    for (std::size_t k = 0; k < t.size(); ++k) {
        s.index[t.times[k]] = k;
    }
    return s;
}

// Exact twirled ensemble mean on a log-spaced grid of step counts, as a
// noise-free reference for the Monte Carlo means and their decay rates.
struct TwirlCheck {
    double fitted_rate = 0;   // fit on the exact curve, same window
    double initial_rate = 0;  // (1 - f(1)) / duration of one application
    double max_z = 0;         // max |MC - exact| / SE over the grid
    int n_compared = 0;
};

TwirlCheck twirl_check(const DenseOperator& u, const StateVector& psi, double duration, const Series& mc,
                       int64_t max_count, const FitWindow& window) {
    std::vector<int64_t> counts;
    for (double c = 1; c <= static_cast<double>(max_count); c *= 1.03) {
        auto n = static_cast<int64_t>(std::llround(c));
        if (counts.empty() || n > counts.back()) {
            counts.push_back(n);
        }
    }
    auto exact = pauli_twirl_mean_fidelity(u, psi, counts);
    FidelityTrace tr;
    TwirlCheck out;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        double t = static_cast<double>(counts[k]) * duration;
        tr.times.push_back(t);
        tr.mean_fidelity.push_back(exact[k]);
        tr.std_error.push_back(0);
        if (mc.has(t) && mc.se(t) > 0) {
            out.max_z = std::max(out.max_z, std::abs(mc.f(t) - exact[k]) / mc.se(t));
            ++out.n_compared;
        }
    }
    out.initial_rate = (1 - exact[0]) / duration;
    try {
        out.fitted_rate = fit_decay_rate(tr, window).value;
    } catch (const InsufficientDataError&) {
        out.fitted_rate = NAN;
    }
    return out;
}

// --- criterion 1 -----------------------------------------------------------

void certificate() {
    auto start = Clock::now();
    SymbolArray oa = construct_oa(4, 32, 9);
    OaCheck check = verify_orthogonal_array(oa, 2);
    bool lambda2 = true;
    int pairs = 0;
    for (int c1 = 0; c1 < 9; ++c1) {
        for (int c2 = c1 + 1; c2 < 9; ++c2, ++pairs) {
            int counts[4][4] = {};
            for (int r = 0; r < 32; ++r) {
                counts[oa.at(r, c1)][oa.at(r, c2)]++;
            }
            for (auto& row : counts) {
                for (int n : row) {
                    lambda2 = lambda2 && n == 2;
                }
            }
        }
    }
    DecouplingCycle cycle = cycle_from_array(oa);
    int terms = 0, nonzero = 0;
    PauliSumHamiltonian all(9);
    for (int k = 0; k < 9; ++k) {
        for (char a : {'X', 'Y', 'Z'}) {
            PauliString p = PauliString::single(9, k, a);
            all.add_term(1.0, p);
            nonzero += decoupling_sign_sum(cycle, p) != 0;
            ++terms;
            for (int l = k + 1; l < 9; ++l) {
                for (char b : {'X', 'Y', 'Z'}) {
                    PauliString q = compose(p, PauliString::single(9, l, b));
                    all.add_term(1.0, q);
                    nonzero += decoupling_sign_sum(cycle, q) != 0;
                    ++terms;
                }
            }
        }
    }
    bool averaged_empty = verify_decoupling(cycle, all).empty();
    double elapsed = seconds_since(start);
    bool ok = check.passed && lambda2 && pairs == 36 && terms == 351 && nonzero == 0 && averaged_empty &&
              elapsed < 1.0;
    report(1, ok, fmt("%d terms with nonzero sign sum out of %d; strength-2 lambda=2 on %d column pairs; %.3f s",
                      nonzero, terms, pairs, elapsed));
}

// --- criterion 9 -----------------------------------------------------------

// Worst deviations of the stepwise free, spectral free and bang-bang paths.
// Stepwise rounding grows by ~6e-17 per step, so those run 1e3 steps.
struct ClosedForms {
    double stepwise = 0, spectral = 0, bang_bang = 0;
    double worst() const {
        return std::max({stepwise, spectral, bang_bang});
    }
};

ClosedForms single_qubit_closed_forms() {
    const double delta = 0.0123;
    PauliSumHamiltonian h(1);
    h.add_term(delta, PauliString::from_str("Z"));
    StateVector plus(1, {Complex(M_SQRT1_2), Complex(M_SQRT1_2)});
    PropagatorCache cache(h, 1.0);
    Rng rng(1);
    ClosedForms out;
    auto dev = [&](const FidelityTrace& t) {
        double w = 0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            double c = std::cos(delta * t.times[k]);
            w = std::max(w, std::abs(t.mean_fidelity[k] - c * c));
        }
        return w;
    };
    SchemeSpec free{SchemeKind::kFree, std::nullopt};
    out.stepwise = dev(evolve(cache, free, plus, 1000, 1, rng));
    out.spectral = dev(free_evolution_trace(cache, plus, 10000, 1));
    DecouplingCycle ix(1, {PauliString::from_str("I"), PauliString::from_str("X")});
    SchemeSpec bb{SchemeKind::kBangBang, ix};
    for (double f : evolve(cache, bb, plus, 1000, 2, rng).mean_fidelity) {
        out.bang_bang = std::max(out.bang_bang, std::abs(f - 1));
    }
    return out;
}

double run_norm_drift_stepper(const PauliSumHamiltonian& h, const StateVector& psi) {
    PauliSumStepper stepper(h, 1.0);
    auto batch = stepper.make_batch(psi);
    Rng rng(91);
    for (int j = 0; j < 100000; ++j) {
        PauliString frames[PauliSumStepper::kLanes];
        for (auto& g : frames) {
            g = sample_uniform(rng, h.n_qubits());
        }
        stepper.step(batch, frames);
    }
    double worst = 0;
    for (int l = 0; l < PauliSumStepper::kLanes; ++l) {
        worst = std::max(worst, std::abs(stepper.lane_state(batch, l).norm() - 1));
    }
    return worst;
}

double run_norm_drift_dense(const DenseOperator& u, int n_qubits, StateVector psi, int64_t n_applications) {
    Rng rng(92);
    std::vector<Complex> scratch;
    Eigen::VectorXcd mv;
    for (int64_t j = 0; j < n_applications; ++j) {
        PauliString g = sample_uniform(rng, n_qubits);
        apply_in_place(g, psi.amplitudes(), scratch);
        matvec_in_place(u, psi.amplitudes(), mv);
        apply_in_place(g, psi.amplitudes(), scratch);
    }
    return std::abs(psi.norm() - 1);
}

std::string experiment_bytes(const ExperimentConfig& config, const Instance& inst) {
    auto result = run_experiment(config, inst);
    std::ostringstream out;
    for (const auto& [kind, trace] : result.traces) {
        write_trace_csv(out, trace);
    }
    write_scalars_csv(out, result.scalars);
    return out.str();
}

void oracle_suite(const Instance& inst, const ExperimentConfig& paper) {
    auto start = Clock::now();
    ClosedForms closed = single_qubit_closed_forms();
    bool ok_closed = closed.worst() < 1e-12;

    // Fast embedded path against stepwise evolution, 50 cycles.
    SchemeSpec emb{SchemeKind::kEmbedded, inst.cycle};
    Rng a(17), b(17);
    auto fast = evolve_embedded_fast(*inst.cache, inst.psi0, 50, a);
    auto step = evolve(*inst.cache, emb, inst.psi0, 50 * 32, 32, b);
    double emb_diff = 0;
    for (std::size_t k = 0; k < fast.size(); ++k) {
        emb_diff = std::max(emb_diff, std::abs(fast.mean_fidelity[k] - step.mean_fidelity[k]));
    }
    bool ok_emb = fast.size() == 50 && emb_diff < 1e-10;

    // Norm drift over 1e5 steps for each propagation kernel.
    double drift_stepper = run_norm_drift_stepper(inst.h0, inst.psi0);
    double drift_cycle = run_norm_drift_dense(inst.cache->cycle_unitary(), 9, inst.psi0, 100000 / 32);
    Rng rng6(5);
    auto g6 = grid_graph(2, 3);
    PropagatorCache small(build_hamiltonian(sample_params(rng6, std::sqrt(3.0) * 1e-3, g6), g6), 1.0);
    double drift_dense = run_norm_drift_dense(small.step_unitary(), 6, initial_coherent_state(6), 100000);
    double drift = std::max({drift_stepper, drift_cycle, drift_dense});
    bool ok_drift = drift < 1e-10;

    // Reruns with a fixed seed, different worker counts: identical bytes.
    ExperimentConfig small_cfg = paper;
    small_cfg.schemes = {SchemeKind::kFree, SchemeKind::kBangBang, SchemeKind::kParec, SchemeKind::kEmbedded};
    small_cfg.n_steps = 640;
    small_cfg.n_runs = 40;
    small_cfg.workers = 1;
    std::string first = experiment_bytes(small_cfg, inst);
    std::string second = experiment_bytes(small_cfg, inst);
    small_cfg.workers = 3;
    std::string third = experiment_bytes(small_cfg, inst);
    bool ok_bytes = first == second && first == third && !first.empty();

    double elapsed = seconds_since(start);
    bool ok = ok_closed && ok_emb && ok_drift && ok_bytes && elapsed < 60;
    report(9, ok, fmt("oracle/invariant suite in %.1f s", elapsed));
    detail("single-qubit closed forms (limit 1e-12): free stepwise %.1e (1e3 steps), free spectral %.1e "
           "(1e4 steps), bang-bang {I,X} %.1e (1e3 steps)",
           closed.stepwise, closed.spectral, closed.bang_bang);
    detail("embedded fast path vs stepwise, 50 cycles: max |df| %.2e (limit 1e-10)", emb_diff);
    detail("norm drift over 1e5 steps: stepper %.2e, cycle path %.2e, dense 6-qubit %.2e (limit 1e-10)",
           drift_stepper, drift_cycle, drift_dense);
    detail("reruns byte-identical (1, 1, 3 workers): %s", ok_bytes ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance run"};
    std::string config_path = std::string(DDSIM_SOURCE_DIR) + "/configs/paper_fig3.json";
    std::string out_dir = "acceptance_out";
    app.add_option("--config", config_path, "experiment JSON")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "directory for the traces of the full run");
    CLI11_PARSE(app, argc, argv);

    try {
        certificate();

        auto start = Clock::now();
        ExperimentConfig config = ExperimentConfig::load(config_path);
        Instance inst = build_instance(config);
        BoundInputs b = bound_inputs(inst);
        const double t_c = b.t_c;
        const double x = b.h0_norm * t_c;
        double bound = x < critical_x() ? residual_norm_bound(b.h0_norm, t_c) : INFINITY;
        bool ok2 = b.hbar_norm <= bound && b.delta_hbar <= b.hbar_norm && b.hbar_norm / b.h0_norm < 0.1;
        report(2, ok2, fmt("||Hbar|| = %.4e <= bound %.4e, dHbar = %.4e, ||Hbar||/||H0|| = %.3e; %.1f s",
                           b.hbar_norm, bound, b.delta_hbar, b.hbar_norm / b.h0_norm, seconds_since(start)));
        detail("||H0|| = %.5e, dH0 = %.5e, x = ||H0|| T_c = %.4f (x* = %.4f)", b.h0_norm, b.delta_h0, x,
               critical_x());

        start = Clock::now();
        ExperimentResult result = run_experiment(config, inst);
        const double run_time = seconds_since(start);
        write_experiment(out_dir, config, inst, result);
        std::printf("full run (%d runs, %lld steps, 4 schemes): %.1f s; traces in %s\n", config.n_runs,
                    static_cast<long long>(config.n_steps), run_time, out_dir.c_str());

        std::map<SchemeKind, const FidelityTrace*> tr;
        for (const auto& [kind, trace] : result.traces) {
            tr[kind] = &trace;
        }
        Series sf = series(*tr.at(SchemeKind::kFree)), sb = series(*tr.at(SchemeKind::kBangBang)),
               sp = series(*tr.at(SchemeKind::kParec)), se = series(*tr.at(SchemeKind::kEmbedded));

        // 3: ordering where the bang-bang deficit is in [1e-4, 1e-1].
        {
            int n = 0, bad = 0;
            double min_gap_eb = INFINITY, min_gap_bp = INFINITY;
            for (double t : sb.trace->times) {
                double d = 1 - sb.f(t);
                if (d < 1e-4 || d > 1e-1 || !se.has(t) || !sp.has(t) || !sf.has(t)) {
                    continue;
                }
                ++n;
                double ge = (se.f(t) - sb.f(t)) / std::hypot(se.se(t), sb.se(t));
                double gp = (sb.f(t) - sp.f(t)) / std::hypot(sb.se(t), sp.se(t));
                min_gap_eb = std::min(min_gap_eb, ge);
                min_gap_bp = std::min(min_gap_bp, gp);
                bool ordered = se.f(t) > sb.f(t) && sb.f(t) > sp.f(t) && sp.f(t) > sf.f(t);
                bad += !(ordered && ge > 3 && gp > 3);
            }
            bool ok = n > 0 && bad == 0 && run_time <= 600;
            report(3, ok, fmt("%d/%d times ordered embedded > bang-bang > PAREC > free with gaps > 3 SE; run %.0f s",
                              n - bad, n, run_time));
            detail("smallest gaps in combined SE: embedded-bang_bang %.1f, bang_bang-PAREC %.1f", min_gap_eb,
                   min_gap_bp);
        }

        // 4: PAREC decay rate in the window 1e-3 <= 1-f <= 1e-1.
        {
            const double gamma = parec_rate(b.delta_h0, b.dt);
            FitResult fit = fit_decay_rate(*sp.trace, FitWindow{1e-3, 1e-1, 10});
            double rel = fit.value / gamma - 1;
            report(4, std::abs(rel) <= 0.15,
                   fmt("fitted %.4e vs tau dH0^2 = %.4e (%+.1f%%, %d points)", fit.value, gamma, 100 * rel,
                       fit.n_points));
            auto tw = twirl_check(inst.cache->step_unitary(), inst.psi0, b.dt, sp, config.n_steps,
                                  FitWindow{1e-3, 1e-1, 10});
            double twirled_gr = 0;
            for (const auto& term : inst.h0.terms()) {
                double e = inner(inst.psi0, apply(term.pauli, inst.psi0)).real();
                twirled_gr += term.coefficient * term.coefficient * (1 - e * e) * b.dt;
            }
            detail("frame-averaged golden rule tau sum_P c_P^2 (1 - <P>^2) = %.4e", twirled_gr);
            detail("exact twirled ensemble: rate %.4e in the same window, initial rate %.4e; "
                   "Monte Carlo vs exact max |z| = %.2f over %d times",
                   tw.fitted_rate, tw.initial_rate, tw.max_z, tw.n_compared);
        }

        // 5: embedded decay rate.
        {
            const double gamma = embedded_rate(b.delta_hbar, t_c);
            auto tw = twirl_check(inst.cache->cycle_unitary(), inst.psi0, t_c, se, config.n_steps / inst.cycle->size(),
                                  FitWindow{});
            try {
                FitResult fit = fit_decay_rate(*se.trace);
                double rel = fit.value / gamma - 1;
                report(5, std::abs(rel) <= 0.25,
                       fmt("fitted %.4e +- %.1e vs T_c dHbar^2 = %.4e (%+.1f%%, %d points)", fit.value, fit.std_error,
                           gamma, 100 * rel, fit.n_points));
            } catch (const InsufficientDataError& e) {
                report(5, false, e.what());
            }
            detail("exact twirled ensemble: rate %.4e, initial rate %.4e; Monte Carlo vs exact max |z| = %.2f "
                   "over %d times",
                   tw.fitted_rate, tw.initial_rate, tw.max_z, tw.n_compared);
        }

        // 6: short-time quadratic laws while 1-f <= 0.05.
        {
            auto worst_rel = [](const Series& s, double dh, int& n) {
                double worst = 0;
                n = 0;
                for (double t : s.trace->times) {
                    double d = 1 - s.f(t);
                    if (d > 0.05) {
                        continue;
                    }
                    double pred = (t * dh) * (t * dh);
                    worst = std::max(worst, std::abs(d - pred) / pred);
                    ++n;
                }
                return worst;
            };
            int nb = 0, nf = 0;
            double rb = worst_rel(sb, b.delta_hbar, nb), rf = worst_rel(sf, b.delta_h0, nf);
            report(6, nb > 0 && nf > 0 && rb <= 0.1 && rf <= 0.1,
                   fmt("max relative deviation: bang-bang %.2f%% (%d points), free %.2f%% (%d points)", 100 * rb, nb,
                       100 * rf, nf));
        }

        // 7: log-log slopes of the deficit.
        {
            bool ok = true;
            std::string line;
            for (auto [kind, s, target] :
                 {std::tuple{SchemeKind::kBangBang, &sb, 2.0}, std::tuple{SchemeKind::kFree, &sf, 2.0},
                  std::tuple{SchemeKind::kParec, &sp, 1.0}, std::tuple{SchemeKind::kEmbedded, &se, 1.0}}) {
                try {
                    FitResult fit = fit_loglog_slope(*s->trace);
                    ok = ok && std::abs(fit.value - target) <= 0.3;
                    line += fmt("%s %.3f (%d pts)  ", std::string(scheme_name(kind)).c_str(), fit.value,
                                fit.n_points);
                } catch (const InsufficientDataError&) {
                    ok = false;
                    line += std::string(scheme_name(kind)) + " no fit  ";
                }
            }
            report(7, ok, line);
        }

        // 8: bounds inside their validity regimes. The deterministic bound
        // needs x < x*; the stochastic ones are first-order statements, used
        // while the mean deficit is at most 0.1.
        {
            auto check = [](const Series& s, const std::vector<double>& bound, const std::vector<double>& times,
                            bool stochastic, bool all_times, int& n) {
                int bad = 0;
                n = 0;
                for (std::size_t k = 0; k < times.size(); ++k) {
                    double t = times[k];
                    if (!s.has(t)) {
                        continue;
                    }
                    if (!all_times && stochastic && 1 - s.f(t) > 0.1) {
                        continue;
                    }
                    ++n;
                    double slack = stochastic ? 3 * s.se(t) : 0;
                    bad += s.f(t) < bound[k] - slack;
                }
                return bad;
            };
            std::vector<double> all_b = sb.trace->times, all_p = sp.trace->times, all_e = se.trace->times;
            auto eq5 = det_bound(b.h0_norm, t_c, all_b);
            auto eq6 = parec_bound(b.h0_norm, b.dt, all_p);
            auto eq7 = embedded_bound(b.h0_norm, t_c, all_e);
            int n5 = 0, n6 = 0, n7 = 0, m = 0;
            int bad5 = x < critical_x() ? check(sb, eq5, all_b, false, false, n5) : 1;
            int bad6 = check(sp, eq6, all_p, true, false, n6);
            int bad7 = check(se, eq7, all_e, true, false, n7);
            int outside = check(sp, eq6, all_p, true, true, m) + check(se, eq7, all_e, true, true, m);
            report(8, bad5 + bad6 + bad7 == 0,
                   fmt("violations: det %d/%d, PAREC %d/%d, embedded %d/%d", bad5, n5, bad6, n6, bad7, n7));
            detail("stochastic bounds at all recorded times, regime ignored: %d violations", outside);
        }

        oracle_suite(inst, config);
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%s: %d criteria failed\n", g_failures ? "FAIL" : "PASS", g_failures);
    return g_failures ? 1 : 0;
}
