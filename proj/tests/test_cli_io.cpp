#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "darkpool/config.hpp"

using namespace darkpool;

namespace {
bool fails_with(const std::string& text, const std::string& needle) {
    try {
        parse_config(text);
    } catch (const std::invalid_argument& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}
}  // namespace

TEST_CASE("preset defaults") {
    auto t1 = default_config("table1");
    CHECK(t1.pools.size() == 2);
    CHECK(t1.params.rho == 300.0);
    CHECK(t1.lit_fee == t1.params.fee_cap);
    CHECK(t1.dark_fees == std::vector<double>{0.01, 0.01});
    CHECK(t1.market == MarketKind::Regulated);

    auto t2 = default_config("table2");
    CHECK(t2.pools.size() == 1);
    CHECK(t2.market == MarketKind::Competitive);

    CHECK_THROWS_AS(default_config("table3"), std::invalid_argument);
}

TEST_CASE("full document parse with overrides") {
    auto cfg = parse_config(R"({
        "preset": "table1",
        "params": {"sigma": 0.03, "phi": 0.1},
        "fees": {"lit": 0.004, "dark": [0.001, 0.002]},
        "sim": {"n_paths": 77, "seed": 9, "record_trajectories": true},
        "train": {"epochs": 12, "lr": 0.0005},
        "mfg": {"n_time": 600, "snapshot_times": [0.25, 0.75]}
    })");
    CHECK(cfg.params.sigma == 0.03);
    CHECK(cfg.params.phi == 0.1);
    CHECK(cfg.params.rho == 300.0);  // untouched preset value
    CHECK(cfg.lit_fee == 0.004);
    CHECK(cfg.dark_fees == std::vector<double>{0.001, 0.002});
    CHECK(cfg.sim.n_paths == 77);
    CHECK(cfg.sim.seed == 9);
    CHECK(cfg.sim.record_trajectories);
    CHECK(cfg.train.epochs == 12);
    CHECK(cfg.train.lr == 0.0005);
    CHECK(cfg.mfg.n_time == 600);
    CHECK(cfg.mfg.snapshot_times == std::vector<double>{0.25, 0.75});
}

TEST_CASE("unknown keys are rejected with their path") {
    CHECK(fails_with(R"({"params": {"sigmaa": 1}})", "params.sigmaa"));
    CHECK(fails_with(R"({"sim": {"foo": 1}})", "sim.foo"));
    CHECK(fails_with(R"({"pools": [{"theta": 1, "bar": 2}]})", "pools[0].bar"));
    CHECK(fails_with(R"({"mystery": 1})", "mystery"));
}

TEST_CASE("type and range errors") {
    CHECK(fails_with(R"({"params": {"sigma": "high"}})", "params.sigma"));
    CHECK(fails_with(R"({"sim": {"n_paths": 1.5}})", "sim.n_paths"));
    CHECK(fails_with(R"({"market": "wild"})", "market"));
    CHECK(fails_with(R"({"liquidity": "median"})", "liquidity"));
    CHECK(fails_with("{not json", "invalid JSON"));
    // fee above the cap
    CHECK_THROWS_AS(parse_config(R"({"fees": {"lit": 0.5}})"), std::invalid_argument);
    // dark fee count must match the pools
    CHECK_THROWS_AS(parse_config(R"({"fees": {"dark": [0.001]}})"),
                    std::invalid_argument);
}

TEST_CASE("pool edits resize the dark fee vector") {
    auto cfg = parse_config(
        R"({"pools": [{"theta": 10, "size_mean": 0.05, "support_eps": 0.0}]})");
    CHECK(cfg.pools.size() == 1);
    CHECK(cfg.dark_fees == std::vector<double>{cfg.params.fee_cap});
}

TEST_CASE("override layering") {
    auto cfg = default_config("table1");
    apply_overrides(cfg, R"({"sim": {"seed": 42}})");
    apply_overrides(cfg, R"({"params": {"eta": 0.05}})");
    CHECK(cfg.sim.seed == 42);  // earlier override survives
    CHECK(cfg.params.eta == 0.05);

    // re-selecting the preset resets params and pools
    apply_overrides(cfg, R"({"preset": "table2"})");
    CHECK(cfg.pools.size() == 1);
    CHECK(cfg.params.eta == default_config("table2").params.eta);
}

TEST_CASE("canonical echo and hash") {
    auto a = default_config("table1");
    auto b = default_config("table1");
    CHECK(config_json(a) == config_json(b));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);

    apply_overrides(b, R"({"sim": {"seed": 2}})");
    CHECK(config_hash(a) != config_hash(b));

    // echo round-trips through the parser
    auto c = parse_config(config_json(b));
    CHECK(config_json(c) == config_json(b));
}

TEST_CASE("manifest carries version, hash, and seeds") {
    auto cfg = default_config("table1");
    cfg.sim.seed = 123;
    const std::string m = manifest_json(cfg, "simulate");
    CHECK(m.find(kVersion) != std::string::npos);
    CHECK(m.find(config_hash(cfg)) != std::string::npos);
    CHECK(m.find("123") != std::string::npos);
    CHECK(m.find("simulate") != std::string::npos);
}
