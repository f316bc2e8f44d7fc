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

// Command-line front end: run experiments, verify cycles, evaluate bounds.

#include <cmath>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ddsim/analysis.h"
#include "ddsim/errors.h"
#include "ddsim/experiment.h"

namespace {

using namespace ddsim;

void warn_small_x(const Instance& inst) {
    if (!inst.cycle) {
        return;
    }
    BoundInputs b = bound_inputs(inst);
    double x = b.h0_norm * b.t_c;
    if (x > 0.1) {
        std::cerr << "warning: x = ||H0|| T_c = " << x
                  << " is not small; the deterministic and embedded bounds use the small-x form\n";
    }
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    ExperimentConfig config = ExperimentConfig::load(config_path);
    if (!out_dir.empty()) {
        config.output_dir = out_dir;
    }
    Instance inst = build_instance(config);
    warn_small_x(inst);
    ExperimentResult result = run_experiment(config, inst);
    write_experiment(config.output_dir, config, inst, result);
    return 0;
}

int cmd_bounds(const std::string& config_path, const std::string& out_file) {
    ExperimentConfig config = ExperimentConfig::load(config_path);
    Instance inst = build_instance(config);
    if (!inst.cycle) {
        throw std::invalid_argument("bounds need a decoupling cycle in the config");
    }
    BoundInputs b = bound_inputs(inst);
    residual_norm_bound(b.h0_norm, b.t_c);  // domain check
    warn_small_x(inst);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + out_file);
    }
    write_bounds_csv(out, bounds_times(config, inst), b);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact simulation of dynamical decoupling schemes"};
    app.require_subcommand(1);

    std::string config_path, out;
    auto* run = app.add_subcommand("run", "Run all configured schemes and write traces and scalars");
    run->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory (overrides output_dir)");

    std::string cycle_path;
    int locality = 2;
    auto* verify = app.add_subcommand("verify-cycle", "Check first-order decoupling of a cycle file");
    verify->add_option("--cycle", cycle_path, "cycle file")->required();
    verify->add_option("--locality", locality, "largest Pauli weight to check")->default_val(2);

    std::string bounds_config, bounds_out;
    auto* bounds = app.add_subcommand("bounds", "Evaluate the analytic bounds on the cycle time grid");
    bounds->add_option("--config", bounds_config, "experiment JSON")->required()->check(CLI::ExistingFile);
    bounds->add_option("--out", bounds_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) {
            return cmd_run(config_path, out);
        }
        if (*verify) {
            return verify_cycle_file(cycle_path, locality, std::cout, std::cerr);
        }
        if (*bounds) {
            return cmd_bounds(bounds_config, bounds_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
