#include <cstdio>

#include <CLI11.hpp>

#include "varik/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"varik: parameterization-invariant Lagrangian mechanics and field theory"};
    app.require_subcommand(1);

    std::string problem;
    std::vector<std::string> overrides;
    auto* run_cmd = app.add_subcommand("run", "run a problem file or bundled problem");
    run_cmd->add_option("problem", problem, "path to a problem file, or a bundled name")
        ->required();
    run_cmd->add_option("--set", overrides, "override a key, e.g. --set numerics.seed=7");

    auto* list_cmd = app.add_subcommand("list", "list the bundled problems");
    auto* schema_cmd = app.add_subcommand("schema", "print the problem-file format");

    CLI11_PARSE(app, argc, argv);

    if (list_cmd->parsed()) {
        for (const auto& name : varik::cli::list_builtins()) std::printf("%s\n", name.c_str());
        return 0;
    }
    if (schema_cmd->parsed()) {
        std::fputs(varik::cli::schema_text().c_str(), stdout);
        return 0;
    }
    auto result = varik::cli::run(problem, overrides);
    if (!result.error.empty()) std::fprintf(stderr, "error: %s\n", result.error.c_str());
    std::fputs(result.report.c_str(), stdout);
    std::fputc('\n', stdout);
    return result.exit_code;
}
