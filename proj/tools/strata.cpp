// Copyright 2026 The Strata Authors. All Rights Reserved.
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


#include <iostream>
#include <string>
#include <vector>

#include "strata/errors.hpp"
#include "strata/experiment.hpp"

int main(int argc, char** argv) {
  using strata::CliResult;
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    CliResult cli = strata::parse_args(args, std::cout, std::cerr);
    switch (cli.action) {
      case CliResult::Action::kExit:
        return cli.exit_code;
      case CliResult::Action::kVerify:
        return strata::verify_report(cli.target, std::cout);
      case CliResult::Action::kExportStream: {
        strata::StreamConfig stream = cli.plan.stream;
        stream.seed = cli.plan.seeds.front();
        strata::write_csv_stream(cli.target, strata::build_stream(stream));
        std::cout << "wrote " << cli.target.string() << '\n';
        return 0;
      }
      case CliResult::Action::kRun:
        return strata::run_plan(cli.plan, std::cerr);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
