#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ktwin/city.hpp"
#include "ktwin/dtdl.hpp"
#include "ktwin/engine.hpp"
#include "ktwin/model.hpp"
#include "ktwin/report.hpp"
#include "ktwin/resources.hpp"
#include "ktwin/scenario.hpp"
#include "ktwin/topology.hpp"
#include "vendor/CLI11.hpp"

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

ktwin::TwinGraph load_graph(const std::vector<std::string>& files) {
    ktwin::ResourceSet set = ktwin::load_resource_files(files);
    return ktwin::resolve_graph(set.interfaces, set.instances);
}

void cmd_validate(const std::vector<std::string>& files) {
    ktwin::ResourceSet set = ktwin::load_resource_files(files);
    ktwin::TwinGraph graph = ktwin::resolve_graph(set.interfaces, set.instances);
    std::cout << set.total() << " resources (" << graph.interfaces.size() << " interfaces, "
              << graph.instances.size() << " instances)\n";
}

void cmd_import(const std::vector<std::string>& files, const std::string& out_path,
                bool permissive) {
    ktwin::DtdlImport import = ktwin::import_dtdl_files(files, permissive);
    for (const auto& w : import.warnings) std::cerr << "warning: " << w << "\n";
    std::string text = ktwin::emit_resources(import.resources);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text);
    }
    std::cerr << "imported " << import.resources.interfaces.size() << " interfaces\n";
}

void cmd_plan(const std::vector<std::string>& files, bool as_json) {
    ktwin::TwinGraph graph = load_graph(files);
    ktwin::TopologyPlan plan = ktwin::derive_topology(graph);
    if (as_json) {
        std::cout << ktwin::plan_to_json(plan);
    } else {
        std::cout << ktwin::plan_summary(plan) << "\n";
    }
}

void cmd_emit_city(int neighborhoods, const std::string& out_path) {
    ktwin::ResourceSet set = ktwin::build_city(neighborhoods);
    std::string text = ktwin::emit_resources(set);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text);
        std::cerr << "wrote " << set.total() << " resources to " << out_path << "\n";
    }
}

struct SimulateOptions {
    std::string scenario_path;
    std::string out_dir;
    int64_t seed = -1;
    int neighborhoods = 0;
    int fixed = 0;
    int fixed_store = 0;
};

void cmd_simulate(const SimulateOptions& opt) {
    ktwin::ScenarioConfig cfg =
        opt.scenario_path.empty() ? ktwin::default_scenario() : ktwin::load_scenario(opt.scenario_path);
    if (opt.seed >= 0) cfg.seed = static_cast<uint64_t>(opt.seed);
    if (opt.neighborhoods > 0) cfg.neighborhoods = opt.neighborhoods;
    if (opt.fixed > 0) {
        cfg.provisioning.kind = ktwin::ProvisioningMode::Kind::Fixed;
        cfg.provisioning.fixed_per_service = opt.fixed;
        cfg.provisioning.fixed_store = opt.fixed_store > 0 ? opt.fixed_store : opt.fixed;
    }
    std::string store_dir;
    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        store_dir = (std::filesystem::path(opt.out_dir) / "store").string();
    }
    ktwin::RunResult result = ktwin::run_scenario(cfg, store_dir);
    nlohmann::json summary = ktwin::summarize(result);
    if (!opt.out_dir.empty()) {
        ktwin::write_run_dir(result, opt.out_dir);
        std::cerr << "run written to " << opt.out_dir << "\n";
    }
    std::cout << ktwin::render_report(summary);
}

void cmd_report(const std::string& run_dir, bool as_csv, bool as_json) {
    nlohmann::json summary = ktwin::load_summary(run_dir);
    if (as_json) {
        std::cout << summary.dump(2) << "\n";
    } else if (as_csv) {
        std::cout << ktwin::render_report_csv(summary);
    } else {
        std::cout << ktwin::render_report(summary);
    }
}

void cmd_compare(const std::string& run_a, const std::string& run_b) {
    nlohmann::json a = ktwin::load_summary(run_a);
    nlohmann::json b = ktwin::load_summary(run_b);
    std::cout << ktwin::render_compare(a, b);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"digital twin platform and workload simulator"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "parse and cross-check resource files");
    std::vector<std::string> validate_files;
    validate->add_option("files", validate_files, "resource YAML files");
    validate->callback([&] { cmd_validate(validate_files); });

    auto* import = app.add_subcommand("import-dtdl", "convert DTDL interfaces to resource YAML");
    std::vector<std::string> import_files;
    std::string import_out;
    bool import_permissive = false;
    import->add_option("files", import_files, "DTDL JSON files")->required();
    import->add_option("--out", import_out, "output YAML path (stdout when omitted)");
    import->add_flag("--permissive", import_permissive, "skip unsupported content with warnings");
    import->callback([&] { cmd_import(import_files, import_out, import_permissive); });

    auto* plan = app.add_subcommand("plan", "derive the broker topology for resource files");
    std::vector<std::string> plan_files;
    bool plan_json = false;
    plan->add_option("files", plan_files, "resource YAML files")->required();
    plan->add_flag("--json", plan_json, "print the full plan as JSON");
    plan->callback([&] { cmd_plan(plan_files, plan_json); });

    auto* emit = app.add_subcommand("emit-city", "generate the smart-city resource set");
    int emit_n = 1;
    std::string emit_out;
    emit->add_option("--neighborhoods", emit_n, "number of neighborhoods")
        ->check(CLI::PositiveNumber);
    emit->add_option("--out", emit_out, "output YAML path (stdout when omitted)");
    emit->callback([&] { cmd_emit_city(emit_n, emit_out); });

    auto* simulate = app.add_subcommand("simulate", "run a scenario");
    SimulateOptions sim;
    simulate->add_option("--scenario", sim.scenario_path, "scenario YAML (defaults when omitted)");
    simulate->add_option("--seed", sim.seed, "override the scenario seed");
    simulate->add_option("--neighborhoods", sim.neighborhoods, "override the city size");
    simulate->add_option("--fixed", sim.fixed, "fixed replicas per twin service");
    simulate->add_option("--fixed-store", sim.fixed_store, "fixed event-store replicas");
    simulate->add_option("--out", sim.out_dir, "write the run directory here");
    simulate->callback([&] { cmd_simulate(sim); });

    auto* report = app.add_subcommand("report", "summarize a saved run directory");
    std::string report_dir;
    bool report_csv = false, report_json = false;
    report->add_option("run", report_dir, "run directory")->required();
    report->add_flag("--csv", report_csv, "headline metrics as CSV");
    report->add_flag("--json", report_json, "raw summary JSON");
    report->callback([&] { cmd_report(report_dir, report_csv, report_json); });

    auto* compare = app.add_subcommand("compare", "compare two saved runs");
    std::string cmp_a, cmp_b;
    compare->add_option("runA", cmp_a, "first run directory")->required();
    compare->add_option("runB", cmp_b, "second run directory")->required();
    compare->callback([&] { cmd_compare(cmp_a, cmp_b); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
