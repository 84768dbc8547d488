// tools/cli.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FDT_TOOLS_CLI_H_
#define FDT_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace fdt::cli {

enum ExitCode {
  kExitOk = 0,
  kExitFailure = 1,  // a check ran and did not pass
  kExitUnknownCommand = 2,
  kExitConfig = 3,
  kExitData = 4,
  kExitDivergence = 5,
};

// Runs one subcommand. `args` excludes the program name. Reports go to
// `out`; on failure a one-line JSON error record goes to `err`.
int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace fdt::cli

#endif  // FDT_TOOLS_CLI_H_
