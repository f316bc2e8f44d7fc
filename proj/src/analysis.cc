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

#include "ddsim/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddsim/errors.h"

namespace ddsim {

namespace {

template <class F>
std::vector<double> map_times(const std::vector<double>& times, F f) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        out.push_back(f(t));
    }
    return out;
}

struct Selected {
    std::vector<double> t;
    std::vector<double> deficit;
    std::vector<double> fidelity;
};

Selected select_points(const FidelityTrace& trace, const FitWindow& w) {
    Selected s;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        double d = 1 - trace.mean_fidelity[i];
        if (d >= w.min_deficit && d <= w.max_deficit && d > 3 * trace.std_error[i] && trace.times[i] > 0) {
            s.t.push_back(trace.times[i]);
            s.deficit.push_back(d);
            s.fidelity.push_back(trace.mean_fidelity[i]);
        }
    }
    if (static_cast<int>(s.t.size()) < std::max(w.min_points, 2)) {
        throw InsufficientDataError("only " + std::to_string(s.t.size()) + " points in the deficit window [" +
                                    std::to_string(w.min_deficit) + ", " + std::to_string(w.max_deficit) +
                                    "]");
    }
    return s;
}

}  // namespace

void BoundInputs::check() const {
    for (double v : {h0_norm, delta_h0, delta_hbar, hbar_norm, t_c, dt}) {
        if (!(v >= 0)) {
            throw std::invalid_argument("bound inputs must be non-negative");
        }
    }
    constexpr double kSlack = 1e-9;
    if (delta_h0 > h0_norm * (1 + kSlack) || delta_hbar > hbar_norm * (1 + kSlack)) {
        throw std::invalid_argument("energy uncertainty exceeds the operator norm");
    }
}

std::vector<double> free_decay_approx(double delta_h0, const std::vector<double>& times) {
    return map_times(times, [&](double t) { return std::max(0.0, 1 - (t * delta_h0) * (t * delta_h0)); });
}

std::vector<double> det_decay_approx(double delta_hbar, const std::vector<double>& times) {
    return free_decay_approx(delta_hbar, times);
}

std::vector<double> linear_decay_approx(double rate, const std::vector<double>& times) {
    return map_times(times, [&](double t) { return std::max(0.0, 1 - rate * t); });
}

std::vector<double> gaussian_decay(double delta_h, const std::vector<double>& times) {
    return map_times(times, [&](double t) { return std::exp(-(t * delta_h) * (t * delta_h)); });
}

std::vector<double> exponential_decay(double rate, const std::vector<double>& times) {
    return map_times(times, [&](double t) { return std::exp(-rate * t); });
}

double parec_rate(double delta_h0, double dt) {
    return dt * delta_h0 * delta_h0;
}

double embedded_rate(double delta_hbar, double t_c) {
    return t_c * delta_hbar * delta_hbar;
}

double critical_x() {
    // g(x) = e^x - x - 2 is increasing on x > 0, g(1) < 0 < g(2).
    double lo = 1, hi = 2;
    for (int i = 0; i < 200 && hi - lo > 0; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        (std::exp(mid) - mid - 2 < 0 ? lo : hi) = mid;
    }
    return lo;
}

double residual_norm_bound(double h0_norm, double t_c) {
    if (!(h0_norm >= 0) || !(t_c > 0)) {
        throw std::invalid_argument("residual_norm_bound needs ||H0|| >= 0 and t_c > 0");
    }
    const double x = h0_norm * t_c;
    if (x >= critical_x()) {
        throw std::domain_error("x = ||H0|| t_c = " + std::to_string(x) + " is not below x* = " +
                                std::to_string(critical_x()) + "; the residual norm bound is vacuous");
    }
    // 2 - e^x + x = 1 - (expm1(x) - x); log1p keeps precision for small x.
    return -std::log1p(-(std::expm1(x) - x)) / t_c;
}

double residual_norm_bound_small_x(double h0_norm, double t_c) {
    return h0_norm * h0_norm * t_c / 2;
}

std::vector<double> det_bound(double h0_norm, double t_c, const std::vector<double>& times) {
    const double b = residual_norm_bound_small_x(h0_norm, t_c);
    return map_times(times, [&](double t) { return 1 - (b * t) * (b * t); });
}

std::vector<double> parec_bound(double h0_norm, double dt, const std::vector<double>& times) {
    return map_times(times, [&](double t) { return 1 - h0_norm * h0_norm * t * dt; });
}

std::vector<double> embedded_bound(double h0_norm, double t_c, const std::vector<double>& times) {
    const double b = residual_norm_bound_small_x(h0_norm, t_c);
    return map_times(times, [&](double t) { return 1 - b * b * t * t_c; });
}

void write_bounds_csv(std::ostream& out, const std::vector<double>& times, const BoundInputs& in) {
    in.check();
    auto eq5 = det_bound(in.h0_norm, in.t_c, times);
    auto eq6 = parec_bound(in.h0_norm, in.dt, times);
    auto eq7 = embedded_bound(in.h0_norm, in.t_c, times);
    auto eq3 = det_decay_approx(in.delta_hbar, times);
    auto eq8 = free_decay_approx(in.delta_h0, times);
    auto pp = linear_decay_approx(parec_rate(in.delta_h0, in.dt), times);
    auto ep = linear_decay_approx(embedded_rate(in.delta_hbar, in.t_c), times);
    std::string buf =
        "time_tau,eq5_bound,eq6_bound,eq7_bound,eq3_approx,eq8_approx,parec_rate_pred,embedded_rate_pred\n";
    char line[256];
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", times[i], eq5[i],
                      eq6[i], eq7[i], eq3[i], eq8[i], pp[i], ep[i]);
        buf += line;
    }
    out << buf;
}

FitResult fit_loglog_slope(const FidelityTrace& trace, const FitWindow& window) {
    Selected s = select_points(trace, window);
    const std::size_t n = s.t.size();
    double mx = 0, my = 0;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log(s.t[i]);
        y[i] = std::log(s.deficit[i]);
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) {
        throw InsufficientDataError("all fit points share one time");
    }
    const double slope = sxy / sxx;
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - my - slope * (x[i] - mx);
        ssr += r * r;
    }
    FitResult f;
    f.value = slope;
    f.std_error = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
    f.n_points = static_cast<int>(n);
    return f;
}

FitResult fit_decay_rate(const FidelityTrace& trace, const FitWindow& window) {
    Selected s = select_points(trace, window);
    const std::size_t n = s.t.size();
    double stt = 0, sty = 0;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = -std::log(s.fidelity[i]);
        stt += s.t[i] * s.t[i];
        sty += s.t[i] * y[i];
    }
    const double rate = sty / stt;
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - rate * s.t[i];
        ssr += r * r;
    }
    FitResult f;
    f.value = rate;
    f.std_error = n > 1 ? std::sqrt(ssr / (n - 1) / stt) : 0.0;
    f.n_points = static_cast<int>(n);
    return f;
}

namespace {

template <typename T>
void walsh_hadamard(std::vector<T>& a) {
    for (std::size_t h = 1; h < a.size(); h <<= 1) {
        for (std::size_t i = 0; i < a.size(); i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                T u = a[j], v = a[j + h];
                a[j] = u + v;
                a[j + h] = u - v;
            }
        }
    }
}

}  // namespace

std::vector<double> pauli_twirl_mean_fidelity(const DenseOperator& u, const StateVector& psi,
                                              const std::vector<int64_t>& counts) {
    const std::size_t dim = u.dim();
    if (psi.dim() != dim) {
        throw std::invalid_argument("pauli_twirl_mean_fidelity: dimension mismatch");
    }
    // Index (x, z) -> x * dim + z for the Pauli X^x Z^z.
    //   Tr(X^x Z^z U) = sum_m (-1)^{z.(m^x)} U[m^x, m]
    //   <psi|X^x Z^z|psi> = sum_k conj(psi[k^x]) (-1)^{z.k} psi[k]
    // Signs (-1)^{z.x} and i^{x.z} drop out of the squared magnitudes.
    const Eigen::MatrixXcd& m = u.matrix();
    std::vector<double> prob(dim * dim), expect2(dim * dim);
    std::vector<Complex> row(dim);
    const double d2 = static_cast<double>(dim) * static_cast<double>(dim);
    for (std::size_t x = 0; x < dim; ++x) {
        for (std::size_t k = 0; k < dim; ++k) {
            row[k] = m(static_cast<Eigen::Index>(k ^ x), static_cast<Eigen::Index>(k));
        }
        walsh_hadamard(row);
        for (std::size_t z = 0; z < dim; ++z) {
            prob[x * dim + z] = std::norm(row[z]) / d2;
        }
        for (std::size_t k = 0; k < dim; ++k) {
            row[k] = std::conj(psi[k ^ x]) * psi[k];
        }
        walsh_hadamard(row);
        for (std::size_t z = 0; z < dim; ++z) {
            expect2[x * dim + z] = std::norm(row[z]);
        }
    }
    // W(a, b) = sum_{x,z} p(x, z) (-1)^{x.a + z.b}; lambda(x', z') = W(z', x').
    walsh_hadamard(prob);
    std::vector<double> out;
    out.reserve(counts.size());
    for (int64_t n : counts) {
        double f = 0;
        for (std::size_t x = 0; x < dim; ++x) {
            for (std::size_t z = 0; z < dim; ++z) {
                double e = expect2[x * dim + z];
                if (e != 0) {
                    f += e * std::pow(prob[z * dim + x], static_cast<double>(n));
                }
            }
        }
        out.push_back(f / static_cast<double>(dim));
    }
    return out;
}

}  // namespace ddsim
