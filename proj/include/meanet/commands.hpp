#pragma once

#include <iosfwd>

#include "meanet/config.hpp"

namespace meanet {

// Command bodies behind the CLI, callable directly from tests. Each writes
// its outputs plus manifest.json / replay.cfg under the config's out dir and
// prints a short summary to `log`. Errors surface as the exception types in
// errors.hpp; the CLI maps them to exit codes.
void cmd_generate(const RunConfig& rc, std::ostream& log);
void cmd_infer(const RunConfig& rc, std::ostream& log);
void cmd_split_infer(const RunConfig& rc, std::ostream& log);
void cmd_metrics(const RunConfig& rc, std::ostream& log);
void cmd_compare(const RunConfig& rc, std::ostream& log);
void cmd_bench(const RunConfig& rc, std::ostream& log);

} // namespace meanet
