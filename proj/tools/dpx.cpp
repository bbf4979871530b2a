#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "darkpool/capi.h"

namespace {

struct CommonOpts {
    std::string preset = "table1";
    std::string config_path;
    std::string out_dir = "out";
    long long seed = -1;
    long long paths = -1;
    long long epochs = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--preset", o.preset, "model preset (table1 | table2)");
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "override sim and train seeds");
    cmd->add_option("--paths", o.paths, "override sim.n_paths");
    cmd->add_option("--epochs", o.epochs, "override train.epochs");
}

int die(const std::string& context) {
    std::fprintf(stderr, "dpx: %s: %s\n", context.c_str(), dp_last_error());
    return 1;
}

// Build the config handle from --preset/--config plus flag overrides.
int make_config(const CommonOpts& o, dp_config** out) {
    int rc;
    if (!o.config_path.empty()) {
        std::ifstream is(o.config_path);
        if (!is) {
            std::fprintf(stderr, "dpx: cannot read %s\n", o.config_path.c_str());
            return 1;
        }
        std::ostringstream ss;
        ss << is.rdbuf();
        rc = dp_config_parse(ss.str().c_str(), out);
    } else {
        rc = dp_config_create(o.preset.c_str(), out);
    }
    if (rc != DP_OK) return die("config");

    std::ostringstream ov;
    ov << "{";
    bool first = true;
    const auto field = [&](const std::string& text) {
        ov << (first ? "" : ",") << text;
        first = false;
    };
    if (o.seed >= 0)
        field("\"sim\":{\"seed\":" + std::to_string(o.seed) +
              (o.paths >= 0 ? ",\"n_paths\":" + std::to_string(o.paths) : "") +
              "},\"train\":{\"seed\":" + std::to_string(o.seed) +
              (o.epochs >= 0 ? ",\"epochs\":" + std::to_string(o.epochs) : "") + "}");
    else {
        if (o.paths >= 0)
            field("\"sim\":{\"n_paths\":" + std::to_string(o.paths) + "}");
        if (o.epochs >= 0)
            field("\"train\":{\"epochs\":" + std::to_string(o.epochs) + "}");
    }
    ov << "}";
    if (ov.str() != "{}" && dp_config_apply(*out, ov.str().c_str()) != DP_OK)
        return die("overrides");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal-liquidation solver and market simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", dp_version());

    CommonOpts opts;
    struct Cmd {
        const char* name;
        const char* help;
        int (*run)(const dp_config*, const char*);
    };
    const Cmd cmds[] = {
        {"solve-trader", "trader best responses on an inventory grid", dp_solve_trader},
        {"solve-mfg", "competitive mean-field equilibrium", dp_solve_mfg},
        {"train-fees", "actor-critic fee training", dp_train_fees},
        {"simulate", "Monte-Carlo market simulation", dp_simulate},
        {"benchmark-ac", "Almgren-Chriss lit-only benchmark", dp_benchmark_ac},
    };
    for (const Cmd& c : cmds) add_common(app.add_subcommand(c.name, c.help), opts);

    CLI11_PARSE(app, argc, argv);

    dp_config* cfg = nullptr;
    if (int rc = make_config(opts, &cfg)) return rc;

    int rc = 0;
    for (const Cmd& c : cmds)
        if (app.get_subcommand(c.name)->parsed()) {
            if (c.run(cfg, opts.out_dir.c_str()) != DP_OK) rc = die(c.name);
            break;
        }
    dp_config_free(cfg);
    if (rc == 0) std::printf("wrote %s\n", opts.out_dir.c_str());
    return rc;
}
