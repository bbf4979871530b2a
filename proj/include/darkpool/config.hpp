#pragma once

#include <string>
#include <vector>

#include "darkpool/fee_train.hpp"
#include "darkpool/mfg.hpp"
#include "darkpool/params.hpp"
#include "darkpool/sim.hpp"

namespace darkpool {

// Which market the `simulate` entry point runs.
enum class MarketKind { Regulated, Competitive };

// One run's worth of settings: model constants, pools, constant fee levels,
// and per-module knobs. Built from a preset and then overridden by JSON
// fragments; unknown keys are rejected with their full path.
struct AppConfig {
    std::string preset = "table1";
    LiquidityParam liquidity = LiquidityParam::Rate;
    MarketParams params;
    std::vector<DarkPoolSpec> pools;
    double lit_fee = 0.01;
    std::vector<double> dark_fees;  // sized to pools
    MarketKind market = MarketKind::Regulated;
    SimConfig sim;
    TrainConfig train;
    MFGConfig mfg;

    void validate() const;
};

// Preset defaults ("table1" or "table2") with fees at the cap.
AppConfig default_config(const std::string& preset,
                         LiquidityParam liquidity = LiquidityParam::Rate);

// Parse a full config document. A "preset" key (default "table1") selects the
// base; every other key overrides it. Throws std::invalid_argument with the
// offending key path on unknown keys, wrong types, or out-of-range values.
AppConfig parse_config(const std::string& json_text);

// Apply a JSON override fragment (same schema, no "preset" re-selection
// unless given) on top of an existing config.
void apply_overrides(AppConfig& cfg, const std::string& json_text);

// Canonical (sorted-key, stable-format) JSON echo of a config.
std::string config_json(const AppConfig& cfg);

// FNV-1a hash of the canonical echo, as fixed-width hex.
std::string config_hash(const AppConfig& cfg);

// Run manifest: tool version, canonical config, its hash, and the seeds in
// effect. Written next to every CSV artifact.
std::string manifest_json(const AppConfig& cfg, const std::string& command);

extern const char* const kVersion;

}  // namespace darkpool
