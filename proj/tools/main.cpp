#include <CLI11.hpp>

#include "ouest/cli.hpp"
#include "ouest/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "ouest - simulation, filtering and recurrent parameter estimation "
        "for a hidden Ornstein-Uhlenbeck state observed through noisy "
        "integration"};
    app.require_subcommand(1);

    ouest::CliInvocation inv;
    for (const std::string& name : ouest::config::subcommand_names()) {
        CLI::App* sub = app.add_subcommand(name, ouest::config::help_text(name));
        sub->add_option("-c,--config", inv.config_path, "JSON config file");
        sub->add_option("-s,--set", inv.overrides,
                        "config override, dotted.key=value (repeatable)");
        sub->add_option("-o,--outdir", inv.outdir,
                        "output directory (default: $OUEST_OUT_DIR or .)");
        sub->add_flag("-v,--verbose", inv.verbosity, "verbose progress output");
        sub->callback([&inv, name] { inv.subcommand = name; });
    }
    CLI11_PARSE(app, argc, argv);
    return ouest::dispatch(inv);
}
