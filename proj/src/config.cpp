#include "darkpool/config.hpp"

#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace darkpool {

const char* const kVersion = "0.1.0";

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + what + " at '" + path + "'");
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

bool boolean(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

void apply_params(MarketParams& p, const json& j, const std::string& base) {
    if (!j.is_object()) fail(base, "expected an object");
    for (const auto& [key, val] : j.items()) {
        const std::string path = base + "." + key;
        if (key == "T") p.T = num(val, path);
        else if (key == "sigma") p.sigma = num(val, path);
        else if (key == "gamma") p.gamma = num(val, path);
        else if (key == "epsilon") p.epsilon = num(val, path);
        else if (key == "eta") p.eta = num(val, path);
        else if (key == "alpha") p.alpha = num(val, path);
        else if (key == "phi") p.phi = num(val, path);
        else if (key == "rho") p.rho = num(val, path);
        else if (key == "kappa") p.kappa = num(val, path);
        else if (key == "lambda") p.lambda_rate = num(val, path);
        else if (key == "k_theta") p.k_theta = num(val, path);
        else if (key == "k_c") p.k_c = num(val, path);
        else if (key == "fee_cap") p.fee_cap = num(val, path);
        else if (key == "Q0") p.Q0 = num(val, path);
        else if (key == "S0") p.S0 = num(val, path);
        else if (key == "X0") p.X0 = num(val, path);
        else if (key == "gamma0") p.gamma0 = num(val, path);
        else if (key == "eta0") p.eta0 = num(val, path);
        else if (key == "alpha0") p.alpha0 = num(val, path);
        else if (key == "E0") p.E0 = num(val, path);
        else fail(path, "unknown key");
    }
}

void apply_pools(std::vector<DarkPoolSpec>& pools, const json& j,
                 const std::string& base) {
    if (!j.is_array()) fail(base, "expected an array");
    pools.clear();
    int idx = 0;
    for (const auto& entry : j) {
        const std::string epath = base + "[" + std::to_string(idx++) + "]";
        if (!entry.is_object()) fail(epath, "expected an object");
        DarkPoolSpec pool;
        for (const auto& [key, val] : entry.items()) {
            const std::string path = epath + "." + key;
            if (key == "theta") pool.theta = num(val, path);
            else if (key == "size_mean") pool.size_mean = num(val, path);
            else if (key == "support_eps") pool.support_eps = num(val, path);
            else fail(path, "unknown key");
        }
        pools.push_back(pool);
    }
}

void apply_fees(AppConfig& cfg, const json& j, const std::string& base) {
    if (!j.is_object()) fail(base, "expected an object");
    for (const auto& [key, val] : j.items()) {
        const std::string path = base + "." + key;
        if (key == "lit") cfg.lit_fee = num(val, path);
        else if (key == "dark") {
            if (!val.is_array()) fail(path, "expected an array");
            cfg.dark_fees.clear();
            int idx = 0;
            for (const auto& f : val)
                cfg.dark_fees.push_back(num(f, path + "[" + std::to_string(idx++) + "]"));
        } else fail(path, "unknown key");
    }
}

void apply_sim(SimConfig& s, const json& j, const std::string& base) {
    if (!j.is_object()) fail(base, "expected an object");
    for (const auto& [key, val] : j.items()) {
        const std::string path = base + "." + key;
        if (key == "n_paths") s.n_paths = integer(val, path);
        else if (key == "n_steps") s.n_steps = integer(val, path);
        else if (key == "seed") s.seed = static_cast<std::uint64_t>(integer(val, path));
        else if (key == "y0") s.y0 = num(val, path);
        else if (key == "record_trajectories") s.record_trajectories = boolean(val, path);
        else if (key == "table_points") s.table_points = integer(val, path);
        else fail(path, "unknown key");
    }
}

void apply_train(TrainConfig& t, const json& j, const std::string& base) {
    if (!j.is_object()) fail(base, "expected an object");
    for (const auto& [key, val] : j.items()) {
        const std::string path = base + "." + key;
        if (key == "batch_size") t.batch_size = integer(val, path);
        else if (key == "lr") t.lr = num(val, path);
        else if (key == "lr_final") t.lr_final = num(val, path);
        else if (key == "dt") t.dt = num(val, path);
        else if (key == "fd_step") t.fd_step = num(val, path);
        else if (key == "epochs") t.epochs = integer(val, path);
        else if (key == "k_critic") t.k_critic = integer(val, path);
        else if (key == "k_actor") t.k_actor = integer(val, path);
        else if (key == "critic_inner") t.critic_inner = integer(val, path);
        else if (key == "actor_inner") t.actor_inner = integer(val, path);
        else if (key == "z_scale") t.z_scale = num(val, path);
        else if (key == "k_target") t.k_target = integer(val, path);
        else if (key == "tau") t.tau = num(val, path);
        else if (key == "q_bound") t.q_bound = num(val, path);
        else if (key == "s_bound") t.s_bound = num(val, path);
        else if (key == "x_bound") t.x_bound = num(val, path);
        else if (key == "iota_bound") t.iota_bound = num(val, path);
        else if (key == "terminal_frac") t.terminal_frac = num(val, path);
        else if (key == "jump_quad_nodes") t.jump_quad_nodes = integer(val, path);
        else if (key == "fee_step") t.fee_step = num(val, path);
        else if (key == "z_step") t.z_step = num(val, path);
        else if (key == "u_step") t.u_step = num(val, path);
        else if (key == "seed") t.seed = static_cast<std::uint64_t>(integer(val, path));
        else fail(path, "unknown key");
    }
}

void apply_mfg(MFGConfig& m, const json& j, const std::string& base) {
    if (!j.is_object()) fail(base, "expected an object");
    for (const auto& [key, val] : j.items()) {
        const std::string path = base + "." + key;
        if (key == "n_time") m.n_time = integer(val, path);
        else if (key == "n_q") m.n_q = integer(val, path);
        else if (key == "q_max") m.q_max = num(val, path);
        else if (key == "omega") m.omega = num(val, path);
        else if (key == "tol") m.tol = num(val, path);
        else if (key == "max_iters") m.max_iters = integer(val, path);
        else if (key == "snapshot_times") {
            if (!val.is_array()) fail(path, "expected an array");
            m.snapshot_times.clear();
            int idx = 0;
            for (const auto& t : val)
                m.snapshot_times.push_back(num(t, path + "[" + std::to_string(idx++) + "]"));
        } else fail(path, "unknown key");
    }
}

LiquidityParam parse_liquidity(const std::string& s, const std::string& path) {
    if (s == "rate") return LiquidityParam::Rate;
    if (s == "mean") return LiquidityParam::Mean;
    fail(path, "expected \"rate\" or \"mean\"");
}

void apply_json(AppConfig& cfg, const json& doc, bool allow_preset) {
    if (!doc.is_object()) fail("", "expected a JSON object");
    // preset/liquidity first: they reset params and pools
    if (allow_preset && (doc.contains("preset") || doc.contains("liquidity"))) {
        std::string preset = cfg.preset;
        LiquidityParam liq = cfg.liquidity;
        if (doc.contains("preset")) preset = text(doc.at("preset"), "preset");
        if (doc.contains("liquidity"))
            liq = parse_liquidity(text(doc.at("liquidity"), "liquidity"), "liquidity");
        cfg = default_config(preset, liq);
    }
    for (const auto& [key, val] : doc.items()) {
        if (key == "preset" || key == "liquidity") {
            if (!allow_preset) fail(key, "preset selection not allowed here");
            continue;
        }
        if (key == "params") apply_params(cfg.params, val, "params");
        else if (key == "pools") apply_pools(cfg.pools, val, "pools");
        else if (key == "fees") apply_fees(cfg, val, "fees");
        else if (key == "market") {
            const std::string m = text(val, "market");
            if (m == "regulated") cfg.market = MarketKind::Regulated;
            else if (m == "competitive") cfg.market = MarketKind::Competitive;
            else fail("market", "expected \"regulated\" or \"competitive\"");
        }
        else if (key == "sim") apply_sim(cfg.sim, val, "sim");
        else if (key == "train") apply_train(cfg.train, val, "train");
        else if (key == "mfg") apply_mfg(cfg.mfg, val, "mfg");
        else fail(key, "unknown key");
    }
    // pool edits may change M; keep the dark fee vector in step
    if (cfg.dark_fees.size() != cfg.pools.size() && !doc.contains("fees"))
        cfg.dark_fees.assign(cfg.pools.size(), cfg.params.fee_cap);
    cfg.validate();
}

json to_json(const AppConfig& c) {
    json pools = json::array();
    for (const auto& p : c.pools)
        pools.push_back({{"theta", p.theta},
                         {"size_mean", p.size_mean},
                         {"support_eps", p.support_eps}});
    const MarketParams& p = c.params;
    return json{
        {"preset", c.preset},
        {"liquidity", c.liquidity == LiquidityParam::Rate ? "rate" : "mean"},
        {"market", c.market == MarketKind::Regulated ? "regulated" : "competitive"},
        {"params",
         {{"T", p.T}, {"sigma", p.sigma}, {"gamma", p.gamma}, {"epsilon", p.epsilon},
          {"eta", p.eta}, {"alpha", p.alpha}, {"phi", p.phi}, {"rho", p.rho},
          {"kappa", p.kappa}, {"lambda", p.lambda_rate}, {"k_theta", p.k_theta},
          {"k_c", p.k_c}, {"fee_cap", p.fee_cap}, {"Q0", p.Q0}, {"S0", p.S0},
          {"X0", p.X0}, {"gamma0", p.gamma0}, {"eta0", p.eta0},
          {"alpha0", p.alpha0}, {"E0", p.E0}}},
        {"pools", pools},
        {"fees", {{"lit", c.lit_fee}, {"dark", c.dark_fees}}},
        {"sim",
         {{"n_paths", c.sim.n_paths}, {"n_steps", c.sim.n_steps},
          {"seed", c.sim.seed}, {"y0", c.sim.y0},
          {"record_trajectories", c.sim.record_trajectories},
          {"table_points", c.sim.table_points}}},
        {"train",
         {{"batch_size", c.train.batch_size}, {"lr", c.train.lr},
          {"lr_final", c.train.lr_final}, {"dt", c.train.dt},
          {"fd_step", c.train.fd_step}, {"epochs", c.train.epochs},
          {"k_critic", c.train.k_critic}, {"k_actor", c.train.k_actor},
          {"critic_inner", c.train.critic_inner}, {"actor_inner", c.train.actor_inner},
          {"z_scale", c.train.z_scale},
          {"k_target", c.train.k_target}, {"tau", c.train.tau},
          {"q_bound", c.train.q_bound}, {"s_bound", c.train.s_bound},
          {"x_bound", c.train.x_bound}, {"iota_bound", c.train.iota_bound},
          {"terminal_frac", c.train.terminal_frac},
          {"jump_quad_nodes", c.train.jump_quad_nodes},
          {"fee_step", c.train.fee_step}, {"z_step", c.train.z_step},
          {"u_step", c.train.u_step}, {"seed", c.train.seed}}},
        {"mfg",
         {{"n_time", c.mfg.n_time}, {"n_q", c.mfg.n_q}, {"q_max", c.mfg.q_max},
          {"omega", c.mfg.omega}, {"tol", c.mfg.tol},
          {"max_iters", c.mfg.max_iters},
          {"snapshot_times", c.mfg.snapshot_times}}}};
}

}  // namespace

void AppConfig::validate() const {
    params.validate();
    for (const auto& pool : pools) pool.validate();
    if (dark_fees.size() != pools.size())
        throw std::invalid_argument("config: fees.dark size must match pools");
    if (lit_fee < 0.0 || lit_fee > params.fee_cap)
        throw std::invalid_argument("config: fees.lit outside [0, fee_cap]");
    for (double f : dark_fees)
        if (f < 0.0 || f > params.fee_cap)
            throw std::invalid_argument("config: fees.dark outside [0, fee_cap]");
    sim.validate();
    train.validate();
}

AppConfig default_config(const std::string& preset, LiquidityParam liquidity) {
    const ModelPreset base = load_preset(preset, liquidity);
    AppConfig cfg;
    cfg.preset = preset;
    cfg.liquidity = liquidity;
    cfg.params = base.params;
    cfg.pools = base.pools;
    cfg.lit_fee = base.params.fee_cap;
    cfg.dark_fees.assign(base.pools.size(), base.params.fee_cap);
    cfg.market =
        preset == "table2" ? MarketKind::Competitive : MarketKind::Regulated;
    return cfg;
}

AppConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    AppConfig cfg = default_config("table1");
    apply_json(cfg, doc, true);
    return cfg;
}

void apply_overrides(AppConfig& cfg, const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    apply_json(cfg, doc, true);
}

std::string config_json(const AppConfig& cfg) {
    // nlohmann::json object keys are stored sorted, so dump() is canonical
    return to_json(cfg).dump(2);
}

std::string config_hash(const AppConfig& cfg) {
    const std::string s = config_json(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

std::string manifest_json(const AppConfig& cfg, const std::string& command) {
    json m{{"tool", "dpx"},
           {"version", kVersion},
           {"command", command},
           {"config_hash", config_hash(cfg)},
           {"sim_seed", cfg.sim.seed},
           {"train_seed", cfg.train.seed},
           {"config", to_json(cfg)}};
    return m.dump(2);
}

}  // namespace darkpool
