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

#include "cli.hpp"

#include "detnet5g/codec.hpp"
#include "detnet5g/scenario.hpp"
#include "detnet5g/sim.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cstdlib>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace detnet5g::cli {

namespace {

int exit_for(const Error& e)
{
    return e.code() == ErrorCode::AdmissionMissing ? kRejected : kUsage;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error(ErrorCode::ParseError, "cannot write " + path.string());
    f << text;
}

std::string on_off(bool v)
{
    return v ? "on" : "off";
}

std::string us(double v)
{
    return fmt::format("{:.3f}us", v);
}

void print_run(std::ostream& out, const RunReport& r)
{
    fmt::print(out, "run seed={} dejitter={} background={}: {} violation(s)\n", r.seed,
               on_off(r.dejitter), on_off(r.background), r.violations());
    for (const auto& f : r.flows) {
        fmt::print(out, "  {} [{}] sent={} lost={} min={} max={} jitter={}", f.flow_id, f.role,
                   f.emitted, f.lost, us(f.min_latency_us), us(f.max_latency_us), us(f.jitter_us));
        if (f.bound_us)
            fmt::print(out, " bound={}us", *f.bound_us);
        out << "\n";
    }
    for (const auto& w : r.warnings)
        fmt::print(out, "  warning: {}\n", w);
}

std::string hop_list(const FlowAssignment& a)
{
    std::string s;
    for (std::size_t i = 0; i < a.hop_ports.size(); ++i) {
        if (i != 0)
            s += ",";
        s += fmt::format("{}({}us)", a.hop_ports[i].str(), a.per_hop_bounds[i].count());
    }
    return s;
}

struct SeedRun {
    std::uint64_t seed = 0;
    std::string suffix;
    DejitterMode mode = DejitterMode::Scenario;
};

// One isolated run (or paired run) and its files. Returns the violation count.
std::uint64_t execute(const Scenario& s, const RunArgs& args, const SeedRun& job, std::string& log)
{
    RunOptions opts;
    opts.seed = job.seed;
    opts.background = args.background;
    std::uint64_t violations = 0;
    std::string text;
    auto emit = [&](const RunResult& r, const std::string& tag) {
        write_file(args.out_dir / ("trace" + tag + job.suffix + ".csv"), trace_csv(r.trace));
        write_file(args.out_dir / ("report" + tag + job.suffix + ".json"), report_json(r.report));
        std::ostringstream ss;
        print_run(ss, r.report);
        text += ss.str();
        violations += r.report.violations();
    };
    if (job.mode == DejitterMode::Both) {
        const auto cmp = compare_dejitter(s, opts);
        emit(cmp.off, "_dejitter_off");
        emit(cmp.on, "_dejitter_on");
        write_file(args.out_dir / ("dejitter_summary" + job.suffix + ".json"), comparison_json(cmp));
        for (const auto& e : cmp.flows)
            text += fmt::format("  {}: jitter {} -> {}, min latency {} -> {}\n", e.flow_id,
                                us(e.jitter_off_us), us(e.jitter_on_us), us(e.min_off_us),
                                us(e.min_on_us));
    } else {
        if (job.mode != DejitterMode::Scenario)
            opts.dejitter = job.mode == DejitterMode::On;
        emit(run_scenario(s, opts), "");
    }
    log = std::move(text);
    return violations;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> parse_range(const std::string& text)
{
    const auto dots = text.find("..");
    if (dots == std::string::npos)
        return std::nullopt;
    try {
        std::size_t used = 0;
        const auto a = std::stoull(text.substr(0, dots), &used);
        if (used != dots)
            return std::nullopt;
        const auto rest = text.substr(dots + 2);
        const auto b = std::stoull(rest, &used);
        if (used != rest.size() || b < a)
            return std::nullopt;
        return std::pair<std::uint64_t, std::uint64_t>{a, b};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace

std::filesystem::path default_out_dir()
{
    if (const char* env = std::getenv("DETNET5G_OUT_DIR"); env != nullptr && *env != '\0')
        return env;
    return "detnet5g-out";
}

int cmd_trees(const TreesArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        const auto topo = load_topology_file(args.topology);
        topo.validate();
        const auto trees = enumerate_spanning_trees(topo);
        if (args.json) {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& t : trees.trees)
                list.push_back(codec::to_json(t));
            const nlohmann::json doc = {{"schema_version", codec::kSchemaVersion},
                                        {"truncated", trees.truncated},
                                        {"trees", list}};
            out << doc.dump(2) << "\n";
            return kOk;
        }
        fmt::print(out, "{} spanning tree(s){}\n", trees.trees.size(),
                   trees.truncated ? " (truncated)" : "");
        for (const auto& t : trees.trees) {
            fmt::print(out, "tree {} vlan {}:", t.tree_index, t.vlan_id);
            for (const auto& e : t.edges)
                fmt::print(out, " {}", e.str());
            out << "\n";
        }
        return kOk;
    } catch (const Error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kUsage;
    }
}

int cmd_admit(const AdmitArgs& args, std::ostream& out, std::ostream& err)
{
    std::vector<ScenarioFlow> flows;
    std::optional<NetworkManager> mgr;
    try {
        flows = load_flows_file(args.flows);
        mgr.emplace(load_topology_file(args.topology));
    } catch (const Error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kUsage;
    }

    int code = kOk;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& f : flows) {
        const auto& s = f.spec;
        const auto d = mgr->register_flow(s);
        if (!d.accepted && f.critical)
            code = kRejected;
        if (args.json) {
            entries.push_back({{"request", codec::to_json(s)},
                               {"critical", f.critical},
                               {"response", codec::decision_to_json(d)}});
            continue;
        }
        fmt::print(out, "request {} {}->{} rate={}B/s burst={}B max_pkt={}B deadline={}us dejitter={}{}\n",
                   s.flow_id, s.src, s.dst, s.rate_Bps, s.burst_B, s.max_pkt_B, s.deadline.count(),
                   on_off(s.dejitter), f.critical ? " critical" : "");
        if (d.accepted) {
            const auto& a = *d.assignment;
            fmt::print(out, "  accept vlan={} tree={} pcp={} e2e_bound={}us hops={} transit={}us regulator={}us\n",
                       a.vlan_id, a.tree_index, a.priority_class, a.e2e_bound.count(), hop_list(a),
                       a.transit_bound.count(), a.regulator_bound.count());
        } else {
            fmt::print(out, "  reject {}: {}\n", to_string(d.reason), d.detail);
        }
        if (!d.reconfigured.empty()) {
            out << "  reconfigured:";
            for (const auto& id : d.reconfigured)
                out << " " << id;
            out << "\n";
        }
    }
    if (args.json) {
        const nlohmann::json doc = {{"schema_version", codec::kSchemaVersion}, {"entries", entries}};
        out << doc.dump(2) << "\n";
    }
    return code;
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err)
{
    Scenario s;
    try {
        s = load_scenario_file(args.scenario);
        validate_scenario(s);
    } catch (const Error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kUsage;
    }

    std::vector<SeedRun> jobs;
    if (args.seeds) {
        for (auto seed = args.seeds->first; seed <= args.seeds->second; ++seed)
            jobs.push_back(SeedRun{seed, "_seed" + std::to_string(seed), args.dejitter});
    } else {
        jobs.push_back(SeedRun{args.seed.value_or(s.sim.seed), "", args.dejitter});
    }

    std::vector<std::future<std::uint64_t>> futures;
    std::vector<std::string> logs(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i)
        futures.push_back(std::async(std::launch::async, [&, i] { return execute(s, args, jobs[i], logs[i]); }));

    std::uint64_t violations = 0;
    int code = kOk;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            violations += futures[i].get();
            out << logs[i];
        } catch (const Error& e) {
            fmt::print(err, "error: {}\n", e.what());
            code = std::max(code, exit_for(e));
        }
    }
    if (code != kOk)
        return code;
    fmt::print(out, "outputs in {}\n", args.out_dir.string());
    return violations == 0 ? kOk : kViolation;
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        out << summary_json(summarize_trace(read_text_file(args.trace)));
        return kOk;
    } catch (const Error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kUsage;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Deterministic 5G-DetNet control plane model"};
    app.require_subcommand(1);

    TreesArgs trees;
    auto* t = app.add_subcommand("trees", "List the VLAN spanning trees of a topology");
    t->add_option("topology", trees.topology, "Topology JSON file")->required();
    t->add_flag("--json", trees.json, "Emit JSON");

    AdmitArgs admit;
    auto* a = app.add_subcommand("admit", "Run admission for each flow in order");
    a->add_option("topology", admit.topology, "Topology JSON file")->required();
    a->add_option("flows", admit.flows, "Flows JSON file")->required();
    a->add_flag("--json", admit.json, "Emit JSON");

    RunArgs run;
    std::string out_dir;
    std::string seeds;
    std::string dejitter = "scenario";
    std::string background = "scenario";
    std::uint64_t seed = 0;
    auto* r = app.add_subcommand("run", "Admit and simulate a scenario");
    r->add_option("scenario", run.scenario, "Scenario JSON file")->required();
    r->add_option("--out", out_dir, "Output directory (default $DETNET5G_OUT_DIR or ./detnet5g-out)");
    auto* seed_opt = r->add_option("--seed", seed, "Random seed");
    r->add_option("--seeds", seeds, "Seed range a..b, one isolated run per seed")->excludes(seed_opt);
    r->add_option("--dejitter", dejitter, "on, off or both")
        ->check(CLI::IsMember({"on", "off", "both", "scenario"}));
    r->add_option("--background", background, "on or off")
        ->check(CLI::IsMember({"on", "off", "scenario"}));

    ReportArgs report;
    auto* p = app.add_subcommand("report", "Summarize an existing trace CSV");
    p->add_option("trace", report.trace, "Trace CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kUsage;
    }

    if (t->parsed())
        return cmd_trees(trees, out, err);
    if (a->parsed())
        return cmd_admit(admit, out, err);
    if (p->parsed())
        return cmd_report(report, out, err);

    run.out_dir = out_dir.empty() ? default_out_dir() : std::filesystem::path(out_dir);
    if (seed_opt->count() != 0)
        run.seed = seed;
    if (!seeds.empty()) {
        run.seeds = parse_range(seeds);
        if (!run.seeds) {
            fmt::print(err, "error: --seeds expects a..b with a <= b\n");
            return kUsage;
        }
    }
    if (dejitter == "on")
        run.dejitter = DejitterMode::On;
    else if (dejitter == "off")
        run.dejitter = DejitterMode::Off;
    else if (dejitter == "both")
        run.dejitter = DejitterMode::Both;
    if (background != "scenario")
        run.background = background == "on";
    try {
        return cmd_run(run, out, err);
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kUsage;
    }
}

} // namespace detnet5g::cli
