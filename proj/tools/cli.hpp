/*
 * Copyright 2026 The detnet5g Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Subcommands of the detnet5g tool. Each returns a process exit code:
// 0 success, 1 usage or input error, 2 a critical flow was rejected,
// 3 a bound was violated in simulation.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>

namespace detnet5g::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRejected = 2, kViolation = 3 };

// Output directory when --out is absent: $DETNET5G_OUT_DIR or ./detnet5g-out.
std::filesystem::path default_out_dir();

struct TreesArgs {
    std::filesystem::path topology;
    bool json = false;
};
int cmd_trees(const TreesArgs& args, std::ostream& out, std::ostream& err);

struct AdmitArgs {
    std::filesystem::path topology;
    std::filesystem::path flows;
    bool json = false;
};
int cmd_admit(const AdmitArgs& args, std::ostream& out, std::ostream& err);

enum class DejitterMode { Scenario, On, Off, Both };

struct RunArgs {
    std::filesystem::path scenario;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    // Inclusive seed range; each seed runs isolated on its own thread.
    std::optional<std::pair<std::uint64_t, std::uint64_t>> seeds;
    DejitterMode dejitter = DejitterMode::Scenario;
    std::optional<bool> background;
};
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);

struct ReportArgs {
    std::filesystem::path trace;
};
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

// Argument parsing and dispatch.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace detnet5g::cli
