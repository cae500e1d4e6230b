#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cutflow/config.hpp"
#include "cutflow/solver.hpp"

namespace cutflow {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_numerical = 3 };

// runs a resolved configuration, writing CSV files and the config echo into out_dir.
// Config problems surface as ConfigError before any computation starts.
int run_experiment(const RunConfig& cfg, std::ostream& log);

// whole command line: config path followed by --override key=value pairs
int cli_main(int argc, char** argv, std::ostream& log, std::ostream& err);

// dof coefficients with dof coordinates, one row per unknown
void write_snapshot(const FieldSolution& sol, std::ostream& out);

} // namespace cutflow
