#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cantorspec/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cantorspec: spectra of quasi-periodic Schrodinger operators "
                 "with Gevrey potentials"};
    app.require_subcommand(1);

    std::string config_path, out_dir, artifact, kind;
    int threads = 0;
    std::uint64_t seed = 0;
    bool toy = false, exact = false, have_seed = false;

    app.add_option("--config", config_path, "job config file (key=value or JSON)");
    app.add_option("--threads", threads, "worker threads (never changes results)");
    app.add_option("--seed", seed, "random seed override")
        ->each([&](const std::string&) { have_seed = true; });
    app.add_option("--out", out_dir, "artifact directory");
    app.add_flag("--toy", toy, "toy scale schedule");
    app.add_flag("--exact", exact, "exact (log-space) scale schedule");

    for (const char* name :
         {"cf", "kset", "scan-ids", "gaps", "kam-run", "verify"})
        app.add_subcommand(name);
    CLI::App* exp = app.add_subcommand("export", "derive plot columns");
    exp->add_option("--artifact", artifact, "artifact file")->required();
    exp->add_option("--kind", kind, "gap-widths | step-trace | ids")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (exp->parsed()) {
            std::cout << cantorspec::export_plot_data(artifact, kind);
            return 0;
        }
        cantorspec::JobConfig cfg;
        if (!config_path.empty()) cfg = cantorspec::load_config(config_path);
        if (threads > 0)
            cfg.threads = threads;
        else if (const char* env = std::getenv("CANTORSPEC_THREADS"))
            cfg.threads = std::max(1, std::atoi(env));
        if (have_seed) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (toy) cfg.scale_mode = cantorspec::ScaleMode::Toy;
        if (exact) cfg.scale_mode = cantorspec::ScaleMode::Exact;

        const std::string command = app.get_subcommands().front()->get_name();
        return cantorspec::run(cfg, command, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
