#include <deque>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conrad/commands.hpp"
#include "conrad/error.hpp"

namespace {

using conrad::cli::Command;

struct Subcommand {
    Command command;
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> text;  // keyed by field key
    std::map<std::string, bool> flags;
    std::vector<std::pair<std::string, CLI::Option*>> options;
};

void add_field_options(Subcommand& sub) {
    for (const auto& f : conrad::cli::config_fields()) {
        const std::string key(f.key);
        const std::string flag = "--" + std::string(f.flag);
        CLI::Option* opt = nullptr;
        if (f.type == conrad::cli::FieldType::Boolean) {
            opt = sub.app->add_flag(flag + ",!--no-" + std::string(f.flag), sub.flags[key], std::string(f.help));
        } else {
            opt = sub.app->add_option(flag, sub.text[key], std::string(f.help) + " [" + key + "]");
        }
        sub.options.emplace_back(key, opt);
    }
}

conrad::cli::ExperimentConfig resolve(const Subcommand& sub) {
    conrad::cli::ExperimentConfig config;
    if (!sub.config_path.empty()) config = conrad::cli::load_config(sub.config_path);
    for (const auto& [key, opt] : sub.options) {
        if (opt->count() == 0) continue;
        if (auto it = sub.flags.find(key); it != sub.flags.end()) conrad::cli::set_field(config, key, it->second ? "true" : "false");
        else conrad::cli::set_field(config, key, sub.text.at(key));
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interpretable lung-nodule malignancy pipeline: ingest, radiomics extraction, fusion and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "conrad 1.0.0");

    const std::vector<std::pair<Command, std::string>> descriptions = {
        {Command::Fixtures, "generate a synthetic phantom cohort with biomarker and CNN feature CSVs"},
        {Command::Ingest, "preprocess annotated volumes into consensus records"},
        {Command::Extract, "compute the radiomics feature CSV for ingested records"},
        {Command::Fuse, "join feature sources into one table for a feature set"},
        {Command::Evaluate, "grid-select, cross-validate and report one classifier on one feature set"},
        {Command::Matrix, "run every classifier on every feature set"},
    };
    std::deque<Subcommand> subs;
    for (const auto& [cmd, help] : descriptions) {
        auto& sub = subs.emplace_back();
        sub.command = cmd;
        sub.app = app.add_subcommand(std::string(conrad::cli::to_string(cmd)), help);
        sub.app->add_option("--config", sub.config_path, "TOML configuration file; flags override its values")
            ->check(CLI::ExistingFile);
        add_field_options(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? conrad::cli::kExitOk : conrad::cli::kExitError;
    }

    for (const auto& sub : subs) {
        if (!sub.app->parsed()) continue;
        try {
            return conrad::cli::run_command(sub.command, resolve(sub), std::cerr);
        } catch (const std::exception& e) {
            std::cerr << "conrad " << conrad::cli::to_string(sub.command) << ": " << e.what() << "\n";
            return conrad::cli::kExitError;
        }
    }
    return conrad::cli::kExitError;
}
