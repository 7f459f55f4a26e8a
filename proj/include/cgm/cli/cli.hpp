/* Copyright 2026 The CGM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef CGM_CLI_CLI_HPP_
#define CGM_CLI_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace cgm {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // verification or quality failure
  kExitUsage = 2,    // bad flags, invalid configuration or data
  kExitIo = 3,
};

// Entry point of the cgm tool. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cgm

#endif  // CGM_CLI_CLI_HPP_
