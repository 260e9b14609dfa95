#include "qmarket/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qmarket/kolmogorov.hpp"
#include "qmarket/random.hpp"
#include "qmarket/sphere_model.hpp"

namespace qmarket::cli {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string join_key(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string yaml_type(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Map: return "a mapping";
        case YAML::NodeType::Sequence: return "a sequence";
        case YAML::NodeType::Scalar: return "a scalar";
        case YAML::NodeType::Null: return "null";
        default: return "undefined";
    }
}

// A mapping being read. Every key must be consumed; finish() reports
// leftovers as unknown keys.
class Block {
public:
    Block(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (!node_.IsMap()) {
            throw ParseError(path_.empty() ? "<root>" : path_, "'" + (path_.empty() ? "<root>" : path_) +
                                                                   "' must be a mapping, got " + yaml_type(node_));
        }
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
    std::string key(const std::string& k) const { return join_key(path_, k); }

    YAML::Node raw(const std::string& k) {
        used_.insert(k);
        return node_[k];
    }

    template <typename T>
    T get(const std::string& k, T fallback) {
        if (!has(k)) {
            used_.insert(k);
            return fallback;
        }
        return convert<T>(raw(k), key(k));
    }

    template <typename T>
    T require(const std::string& k) {
        if (!has(k)) throw ParseError(key(k), "missing required key '" + key(k) + "'");
        return convert<T>(raw(k), key(k));
    }

    Block child(const std::string& k) {
        if (!has(k)) throw ParseError(key(k), "missing required block '" + key(k) + "'");
        return Block(raw(k), key(k));
    }

    // Rejects unknown keys before any value is read, so a misspelled key is
    // reported as itself rather than as a missing one.
    void expect(std::initializer_list<std::string_view> keys) const {
        for (const auto& entry : node_) {
            const auto name = entry.first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), name) == keys.end()) {
                throw ParseError(key(name), "unknown key '" + key(name) + "'");
            }
        }
    }

    void finish() const {
        for (const auto& entry : node_) {
            const auto name = entry.first.as<std::string>();
            if (!used_.count(name)) throw ParseError(key(name), "unknown key '" + key(name) + "'");
        }
    }

    template <typename T>
    static T convert(const YAML::Node& n, const std::string& key) {
        if (!n.IsScalar()) throw ParseError(key, "'" + key + "' must be a scalar, got " + yaml_type(n));
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw ParseError(key, "'" + key + "' has invalid value '" + n.Scalar() + "'");
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

template <typename T>
std::vector<T> read_list(const YAML::Node& n, const std::string& key) {
    if (!n.IsSequence()) throw ParseError(key, "'" + key + "' must be a sequence, got " + yaml_type(n));
    std::vector<T> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(Block::convert<T>(n[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

// Library preconditions surface as std::invalid_argument / domain_error;
// map them onto a config key.
template <typename F>
auto validated(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(key, "'" + key + "': " + e.what());
    } catch (const std::domain_error& e) {
        throw ValidationError(key, "'" + key + "': " + e.what());
    }
}

void require_range(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ValidationError(key, "'" + key + "' " + what);
}

UnitVector3 read_vector(const YAML::Node& n, const std::string& key) {
    if (n.IsSequence()) {
        const auto xs = read_list<double>(n, key);
        if (xs.size() != 3) throw ParseError(key, "'" + key + "' must have three components");
        return validated(key, [&] { return UnitVector3::normalized(xs[0], xs[1], xs[2]); });
    }
    Block b(n, key);
    b.expect({"theta_deg", "phi_deg"});
    const double theta = b.require<double>("theta_deg");
    const double phi = b.get<double>("phi_deg", 0.0);
    b.finish();
    return UnitVector3::from_polar(theta * kDeg, phi * kDeg);
}

RhoDistribution read_rho(const YAML::Node& n, const std::string& key) {
    if (n.IsScalar()) {
        const auto type = n.as<std::string>();
        if (type == "uniform") return RhoDistribution::uniform();
        throw ParseError(key, "'" + key + "': only 'uniform' can be given without parameters");
    }
    Block b(n, key);
    b.expect({"type", "x0", "breakpoints", "densities", "center", "width"});
    const auto type = b.require<std::string>("type");
    RhoDistribution rho;
    if (type == "uniform") {
        rho = RhoDistribution::uniform();
    } else if (type == "delta") {
        const double x0 = b.require<double>("x0");
        rho = validated(b.key("x0"), [&] { return RhoDistribution::delta(x0); });
    } else if (type == "piecewise") {
        auto bp = read_list<double>(b.raw("breakpoints"), b.key("breakpoints"));
        auto dens = read_list<double>(b.raw("densities"), b.key("densities"));
        rho = validated(key, [&] { return RhoDistribution::piecewise(bp, dens); });
    } else if (type == "truncated_gaussian") {
        const double center = b.require<double>("center");
        const double width = b.require<double>("width");
        rho = validated(key, [&] { return RhoDistribution::truncated_gaussian(center, width); });
    } else {
        throw ParseError(b.key("type"), "'" + b.key("type") + "' must be uniform, delta, piecewise or truncated_gaussian");
    }
    b.finish();
    return rho;
}

OptionSpec read_option(Block& b) {
    OptionSpec o;
    o.spot = b.require<double>("spot");
    o.strike = b.require<double>("strike");
    o.rate = b.get<double>("rate", 0.0);
    o.volatility = b.require<double>("volatility");
    o.tau = b.require<double>("tau");
    const auto kind = b.get<std::string>("kind", "call");
    if (kind == "call") {
        o.kind = OptionKind::Call;
    } else if (kind == "put") {
        o.kind = OptionKind::Put;
    } else {
        throw ParseError(b.key("kind"), "'" + b.key("kind") + "' must be call or put");
    }
    const auto style = b.get<std::string>("style", "european");
    if (style == "european") {
        o.style = ExerciseStyle::European;
    } else if (style == "american") {
        o.style = ExerciseStyle::American;
    } else {
        throw ParseError(b.key("style"), "'" + b.key("style") + "' must be european or american");
    }
    require_range(std::isfinite(o.spot) && o.spot > 0.0, b.key("spot"), "must be positive");
    require_range(std::isfinite(o.strike) && o.strike > 0.0, b.key("strike"), "must be positive");
    require_range(std::isfinite(o.rate), b.key("rate"), "must be finite");
    require_range(std::isfinite(o.volatility) && o.volatility >= 0.0, b.key("volatility"), "must be nonnegative");
    require_range(std::isfinite(o.tau) && o.tau >= 0.0, b.key("tau"), "must be nonnegative");
    require_range(o.style == ExerciseStyle::European, b.key("style"),
                  "must be european: early exercise is not supported");
    return o;
}

PriceExperiment read_price(Block b) {
    b.expect({"spot", "strike", "rate", "volatility", "tau", "kind", "style", "binomial_steps", "mc_paths", "pde_h_s",
              "pde_h_t", "dump_paths", "dump_steps"});
    PriceExperiment p;
    p.option = read_option(b);
    p.binomial_steps = b.get<std::uint32_t>("binomial_steps", p.binomial_steps);
    p.mc_paths = b.get<std::uint64_t>("mc_paths", p.mc_paths);
    p.pde_h_s = b.get<double>("pde_h_s", p.pde_h_s);
    p.pde_h_t = b.get<double>("pde_h_t", p.pde_h_t);
    p.dump_paths = b.get<std::uint64_t>("dump_paths", p.dump_paths);
    p.dump_steps = b.get<std::uint32_t>("dump_steps", p.dump_steps);
    b.finish();
    require_range(p.mc_paths == 0 || p.mc_paths >= 2, b.key("mc_paths"), "must be 0 or at least 2");
    if (p.binomial_steps > 0) {
        require_range(p.option.volatility > 0.0, b.key("volatility"), "must be positive for the binomial lattice");
    }
    if (p.pde_h_s > 0.0) {
        require_range(p.option.volatility > 0.0, b.key("volatility"), "must be positive for the PDE residual");
        require_range(p.pde_h_t > 0.0 && p.option.tau > p.pde_h_t, b.key("pde_h_t"), "must satisfy 0 < pde_h_t < tau");
        require_range(p.pde_h_s >= 1e-4 * p.option.spot && p.pde_h_s < p.option.spot, b.key("pde_h_s"),
                      "must lie in [1e-4 * spot, spot)");
    }
    require_range(p.pde_h_s >= 0.0, b.key("pde_h_s"), "must be nonnegative");
    if (p.dump_paths > 0) {
        require_range(p.dump_steps >= 1, b.key("dump_steps"), "must be at least 1");
        require_range(p.option.tau > 0.0, b.key("tau"), "must be positive to dump paths");
    }
    return p;
}

SphereExperiment read_sphere(Block b) {
    b.expect({"rho", "state", "direction", "trials"});
    SphereExperiment s;
    s.rho = read_rho(b.raw("rho"), b.key("rho"));
    if (!b.has("state")) throw ParseError(b.key("state"), "missing required key '" + b.key("state") + "'");
    s.state = read_vector(b.raw("state"), b.key("state"));
    if (!b.has("direction")) throw ParseError(b.key("direction"), "missing required key '" + b.key("direction") + "'");
    s.direction = read_vector(b.raw("direction"), b.key("direction"));
    s.trials = b.get<std::uint64_t>("trials", s.trials);
    b.finish();
    return s;
}

BellScanExperiment read_bell(Block b) {
    b.expect({"rho", "theta_deg", "samples"});
    BellScanExperiment s;
    s.rho = b.has("rho") ? read_rho(b.raw("rho"), b.key("rho")) : RhoDistribution::uniform();
    if (!b.has("rho")) b.raw("rho");
    s.theta_deg = b.require<double>("theta_deg");
    s.samples = b.get<std::uint64_t>("samples", s.samples);
    b.finish();
    require_range(s.theta_deg > 0.0 && s.theta_deg < 180.0, b.key("theta_deg"), "must lie in (0, 180)");
    require_range(s.samples >= 1, b.key("samples"), "must be at least 1");
    return s;
}

MarketRegime read_regime(const YAML::Node& n, const std::string& key) {
    Block b(n, key);
    b.expect({"type", "noise_angle_deg", "news"});
    const auto type = b.require<std::string>("type");
    const double noise = b.get<double>("noise_angle_deg", 0.0);
    require_range(noise >= 0.0 && noise <= 180.0, b.key("noise_angle_deg"), "must lie in [0, 180]");
    MarketRegime regime;
    if (type == "local") {
        regime = LocalRegime{noise * kDeg};
    } else if (type == "global") {
        GlobalRegime g;
        g.noise_angle = noise * kDeg;
        Block news = b.child("news");
        news.expect({"initial", "step_angle_deg", "jump_probability"});
        g.news.initial = news.has("initial") ? read_vector(news.raw("initial"), news.key("initial")) : UnitVector3{};
        if (!news.has("initial")) news.raw("initial");
        const double step = news.get<double>("step_angle_deg", 0.0);
        g.news.jump_probability = news.get<double>("jump_probability", 0.0);
        news.finish();
        require_range(step >= 0.0 && step <= 180.0, news.key("step_angle_deg"), "must lie in [0, 180]");
        require_range(g.news.jump_probability >= 0.0 && g.news.jump_probability <= 1.0,
                      news.key("jump_probability"), "must lie in [0, 1]");
        g.news.step_angle = step * kDeg;
        regime = g;
    } else {
        throw ParseError(b.key("type"), "'" + b.key("type") + "' must be local or global");
    }
    b.finish();
    return regime;
}

MarketExperiment read_market(Block b) {
    b.expect({"rho", "steps", "regime", "price_axis", "price_min", "price_max", "runs", "compare_gbm"});
    MarketExperiment m;
    m.market.rho = b.has("rho") ? read_rho(b.raw("rho"), b.key("rho")) : RhoDistribution::uniform();
    if (!b.has("rho")) b.raw("rho");
    m.market.n_steps = b.require<std::uint32_t>("steps");
    if (!b.has("regime")) throw ParseError(b.key("regime"), "missing required block '" + b.key("regime") + "'");
    m.market.regime = read_regime(b.raw("regime"), b.key("regime"));
    m.market.price_axis = b.has("price_axis") ? read_vector(b.raw("price_axis"), b.key("price_axis")) : UnitVector3{};
    if (!b.has("price_axis")) b.raw("price_axis");
    m.market.price_min = b.get<double>("price_min", m.market.price_min);
    m.market.price_max = b.get<double>("price_max", m.market.price_max);
    m.runs = b.get<std::size_t>("runs", m.runs);
    if (b.has("compare_gbm")) {
        Block g = b.child("compare_gbm");
        g.expect({"drift", "volatility", "horizon", "s0"});
        GbmCompareBlock c;
        c.drift = g.get<double>("drift", c.drift);
        c.volatility = g.get<double>("volatility", c.volatility);
        c.horizon = g.get<double>("horizon", c.horizon);
        c.s0 = g.get<double>("s0", c.s0);
        g.finish();
        require_range(std::isfinite(c.drift), g.key("drift"), "must be finite");
        require_range(std::isfinite(c.volatility) && c.volatility >= 0.0, g.key("volatility"), "must be nonnegative");
        require_range(std::isfinite(c.horizon) && c.horizon > 0.0, g.key("horizon"), "must be positive");
        require_range(std::isfinite(c.s0) && c.s0 > 0.0, g.key("s0"), "must be positive");
        m.compare_gbm = c;
    } else {
        b.raw("compare_gbm");
    }
    b.finish();
    require_range(m.market.n_steps >= 1, b.key("steps"), "must be at least 1");
    require_range(std::isfinite(m.market.price_min) && m.market.price_min > 0.0, b.key("price_min"),
                  "must be positive");
    require_range(std::isfinite(m.market.price_max) && m.market.price_max > m.market.price_min, b.key("price_max"),
                  "must exceed price_min");
    require_range(m.runs >= 1, b.key("runs"), "must be at least 1");
    if (m.compare_gbm) {
        require_range(m.market.n_steps >= kMinSummaryPrices, b.key("steps"),
                      "must be at least " + std::to_string(kMinSummaryPrices) + " to compare with GBM");
    }
    return m;
}

ConvergenceExperiment read_convergence(Block b) {
    b.expect({"option", "steps"});
    ConvergenceExperiment c;
    Block opt = b.child("option");
    opt.expect({"spot", "strike", "rate", "volatility", "tau", "kind", "style"});
    c.option = read_option(opt);
    opt.finish();
    if (b.has("steps")) {
        c.steps = read_list<std::uint32_t>(b.raw("steps"), b.key("steps"));
    } else {
        b.raw("steps");
    }
    b.finish();
    require_range(c.option.volatility > 0.0, opt.key("volatility"), "must be positive for the binomial lattice");
    require_range(c.option.tau > 0.0, opt.key("tau"), "must be positive");
    require_range(c.steps.size() >= 2, b.key("steps"), "needs at least two step counts");
    for (auto s : c.steps) require_range(s >= 1, b.key("steps"), "entries must be at least 1");
    return c;
}

json vector_json(const UnitVector3& v) { return json::array({v.x(), v.y(), v.z()}); }

json option_json(const OptionSpec& o) {
    return {{"spot", o.spot},   {"strike", o.strike},           {"rate", o.rate},
            {"volatility", o.volatility}, {"tau", o.tau}, {"kind", to_string(o.kind)},
            {"style", to_string(o.style)}};
}

// Config angles are stored in radians; twelve significant digits undo the
// round trip so 30 echoes as 30 rather than 29.999999999999996.
double echo_degrees(double rad) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", rad / kDeg);
    return std::strtod(buf, nullptr);
}

json regime_json(const MarketRegime& r) {
    if (const auto* l = std::get_if<LocalRegime>(&r)) {
        return {{"type", "local"}, {"noise_angle_deg", echo_degrees(l->noise_angle)}};
    }
    const auto& g = std::get<GlobalRegime>(r);
    return {{"type", "global"},
            {"noise_angle_deg", echo_degrees(g.noise_angle)},
            {"news",
             {{"initial", vector_json(g.news.initial)},
              {"step_angle_deg", echo_degrees(g.news.step_angle)},
              {"jump_probability", g.news.jump_probability}}}};
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json facet_json(const FacetEvaluation& f) {
    return {{"name", f.name}, {"inequality", f.inequality.describe(3)}, {"slack", f.slack}, {"violated", f.violated()}};
}

ExperimentOutput run_price(const ExperimentConfig& cfg, const PriceExperiment& p) {
    ExperimentOutput out;
    json results = json::array();
    const double closed = bs_price(p.option);
    results.push_back({{"method", "closed_form"}, {"value", closed}, {"error_estimate", 0.0}});
    if (p.binomial_steps > 0) {
        const double v = binomial_price(p.option, p.binomial_steps);
        results.push_back({{"method", "binomial"},
                           {"steps", p.binomial_steps},
                           {"value", v},
                           {"error_estimate", std::abs(v - closed)}});
    }
    if (p.mc_paths > 0) {
        const auto mc = mc_price(p.option, p.mc_paths, derive_seed(cfg.seed, 0), cfg.workers);
        results.push_back({{"method", "monte_carlo"},
                           {"paths", mc.paths},
                           {"value", mc.value},
                           {"error_estimate", mc.std_error}});
    }
    json report;
    report["value"] = closed;
    report["method"] = "closed_form";
    report["intrinsic_value"] = intrinsic_value(p.option);
    report["time_value"] = time_value(p.option, closed);
    if (p.option.volatility > 0.0 && p.option.tau > 0.0) {
        const auto d = d1_d2(p.option);
        report["d1"] = d.d1;
        report["d2"] = d.d2;
    }
    report["results"] = results;
    if (p.pde_h_s > 0.0) {
        report["pde_residual"] = {{"h_s", p.pde_h_s},
                                  {"h_t", p.pde_h_t},
                                  {"residual", pde_residual(p.option, p.pde_h_s, p.pde_h_t)}};
    }
    if (p.dump_paths > 0) {
        GbmParams g{p.option.spot, p.option.rate, p.option.volatility, p.option.tau, p.dump_steps};
        out.series_csv = paths_csv(gbm_paths(g, p.dump_paths, derive_seed(cfg.seed, 1), cfg.workers));
    }
    out.report = std::move(report);
    return out;
}

ExperimentOutput run_sphere(const ExperimentConfig& cfg, const SphereExperiment& s) {
    const auto probs = transition_probabilities(s.rho, s.state, s.direction);
    json report;
    report["dot"] = dot(s.state, s.direction);
    report["angle_deg"] = angle_between(s.state, s.direction) / kDeg;
    report["analytic"] = {{"p1", probs.p1}, {"p2", probs.p2}};
    if (s.trials > 0) {
        const auto est = estimate_o1_frequency(s.rho, s.state, s.direction, s.trials, cfg.seed, cfg.workers);
        const double n = static_cast<double>(est.trials);
        const double se = std::sqrt(probs.p1 * probs.p2 / n);
        json mc = {{"trials", est.trials}, {"o1_count", est.o1_count}, {"frequency", est.frequency()},
                   {"std_error", se}};
        mc["z_score"] = se > 0.0 ? json((est.frequency() - probs.p1) / se) : json(nullptr);
        report["monte_carlo"] = mc;
    }
    return {report, std::nullopt};
}

ExperimentOutput run_bell(const ExperimentConfig& cfg, const BellScanExperiment& b) {
    BellScanOptions options;
    options.samples = b.samples;
    options.seed = cfg.seed;
    options.workers = cfg.workers;
    const auto scan = sphere_bell_scan(b.rho, b.theta_deg * kDeg, options);
    return {to_json(scan), std::nullopt};
}

ExperimentOutput run_market_experiment(const ExperimentConfig& cfg, const MarketExperiment& m) {
    ExperimentOutput out;
    MarketConfig market = m.market;
    market.seed = cfg.seed;
    json report;
    const auto runs = run_ensemble(market, m.runs, cfg.workers);
    json run_reports = json::array();
    for (std::size_t k = 0; k < runs.size(); ++k) {
        json r = {{"member", k}, {"seed", derive_seed(market.seed, k)}, {"trades", runs[k].size()}};
        std::vector<double> prices;
        for (const auto& t : runs[k]) prices.push_back(t.realized_price);
        r["first_price"] = prices.front();
        r["last_price"] = prices.back();
        r["min_price"] = *std::min_element(prices.begin(), prices.end());
        r["max_price"] = *std::max_element(prices.begin(), prices.end());
        std::size_t o1 = 0;
        for (const auto& t : runs[k]) o1 += t.outcome.label == Outcome::O1;
        r["o1_fraction"] = static_cast<double>(o1) / static_cast<double>(runs[k].size());
        r["summary"] = prices.size() >= kMinSummaryPrices ? to_json(summary_stats(runs[k])) : json(nullptr);
        run_reports.push_back(std::move(r));
    }
    report["runs"] = run_reports;
    const std::vector<TradeRecord>* log = &runs.front();
    GbmComparison comparison;
    if (m.compare_gbm) {
        const auto& c = *m.compare_gbm;
        GbmParams gbm{c.s0, c.drift, c.volatility, c.horizon, market.n_steps};
        comparison = compare_with_gbm(market, gbm);
        json triple = json::array();
        for (const auto& d : comparison.triple) triple.push_back(vector_json(d));
        report["comparison"] = {{"sphere_seed", comparison.sphere_seed},
                                {"gbm_seed", comparison.gbm_seed},
                                {"sphere", to_json(comparison.sphere)},
                                {"gbm", to_json(comparison.gbm)},
                                {"representative_directions", triple},
                                {"kolmogorov", to_json(comparison.kolmogorov)}};
        log = &comparison.trades;
    }
    out.report = std::move(report);
    out.series_csv = trades_csv(*log);
    return out;
}

ExperimentOutput run_convergence(const ExperimentConfig&, const ConvergenceExperiment& c) {
    const double closed = bs_price(c.option);
    json rows = json::array();
    std::vector<double> xs, ys;
    for (auto n : c.steps) {
        const double v = binomial_price(c.option, n);
        const double err = std::abs(v - closed);
        rows.push_back({{"steps", n}, {"value", v}, {"abs_error", err}});
        if (err > 0.0) {
            xs.push_back(std::log(static_cast<double>(n)));
            ys.push_back(std::log(err));
        }
    }
    json report;
    report["closed_form"] = closed;
    report["binomial"] = rows;
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        report["log_log_slope"] = sxx > 0 ? json(sxy / sxx) : json(nullptr);
    } else {
        report["log_log_slope"] = nullptr;
    }
    return {report, std::nullopt};
}

}  // namespace

json to_json(const RhoDistribution& rho) {
    json j = {{"type", rho.kind()}};
    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, rho::Delta>) {
                j["x0"] = r.x0;
            } else if constexpr (std::is_same_v<R, rho::PiecewiseConstant>) {
                j["breakpoints"] = r.breakpoints;
                j["densities"] = r.densities;
            } else if constexpr (std::is_same_v<R, rho::TruncatedGaussian>) {
                j["center"] = r.center;
                j["width"] = r.width;
            }
        },
        rho.variant());
    return j;
}

json to_json(const SummaryStats& st) {
    json acf = json::array(), abs_acf = json::array();
    for (const auto& v : st.return_autocorrelation) acf.push_back(optional_json(v));
    for (const auto& v : st.abs_return_autocorrelation) abs_acf.push_back(optional_json(v));
    return {{"n_prices", st.n_prices},
            {"n_returns", st.n_returns},
            {"mean", st.mean},
            {"variance", st.variance},
            {"excess_kurtosis", optional_json(st.excess_kurtosis)},
            {"kurtosis_undefined", st.kurtosis_undefined()},
            {"return_autocorrelation", acf},
            {"abs_return_autocorrelation", abs_acf}};
}

json to_json(const BellScan& scan) {
    json j;
    j["theta_deg"] = scan.theta / kDeg;
    json dirs = json::array();
    for (const auto& d : scan.directions) dirs.push_back(vector_json(d));
    j["directions"] = dirs;
    j["table_source"] = scan.table_source;
    j["table"] = scan.table.rows();
    j["verdict"] = scan.lp.feasible ? "feasible" : "infeasible";
    j["phase_one_objective"] = scan.lp.phase_one_objective;
    if (scan.lp.feasible) {
        j["atom_weights"] = scan.lp.atom_weights;
        j["max_residual"] = scan.lp.max_residual;
    }
    if (scan.lp.certificate) {
        const auto& c = *scan.lp.certificate;
        j["certificate"] = {{"inequality", c.inequality.describe(scan.table.size())},
                            {"constant", c.inequality.constant},
                            {"pair_coefficients", c.inequality.pair_coefficients},
                            {"slack", c.slack}};
    }
    json facets = json::array();
    for (const auto& f : scan.facets) facets.push_back(facet_json(f));
    j["facets"] = facets;
    j["facets_violated"] = scan.facets_violated;
    j["verdicts_agree"] = scan.verdicts_agree;
    return j;
}

std::string trades_csv(const std::vector<TradeRecord>& trades) {
    std::string s = "step,ux,uy,uz,outcome,price\r\n";
    for (const auto& t : trades) {
        s += std::to_string(t.step) + "," + format_double(t.direction.x()) + "," + format_double(t.direction.y()) +
             "," + format_double(t.direction.z()) + "," + to_string(t.outcome.label) + "," +
             format_double(t.realized_price) + "\r\n";
    }
    return s;
}

std::string paths_csv(const std::vector<PriceSeries>& paths) {
    std::string s = "path,time,value\r\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (std::size_t k = 0; k < paths[p].times.size(); ++k) {
            s += std::to_string(p) + "," + format_double(paths[p].times[k]) + "," + format_double(paths[p].values[k]) +
                 "\r\n";
        }
    }
    return s;
}

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError("<root>", std::string("malformed config: ") + e.what());
    }
    Block b(root, "");
    ExperimentConfig cfg;
    cfg.kind = b.require<std::string>("experiment");
    static const std::set<std::string> kinds{"price", "sphere", "bell-scan", "market", "convergence"};
    if (!kinds.count(cfg.kind)) {
        throw ParseError("experiment", "'experiment' must be one of price, sphere, bell-scan, market, convergence");
    }
    b.expect({"experiment", "seed", "workers", "output", cfg.kind});
    cfg.seed = b.get<std::uint64_t>("seed", 0);
    cfg.workers = b.get<unsigned>("workers", 1);
    if (b.has("output")) {
        Block o = b.child("output");
        o.expect({"dir", "report", "series"});
        cfg.output.dir = o.get<std::string>("dir", cfg.output.dir);
        cfg.output.report = o.get<std::string>("report", "");
        cfg.output.series = o.get<std::string>("series", "");
        o.finish();
    } else {
        b.raw("output");
    }
    if (cfg.kind == "price") {
        cfg.params = read_price(b.child("price"));
    } else if (cfg.kind == "sphere") {
        cfg.params = read_sphere(b.child("sphere"));
    } else if (cfg.kind == "bell-scan") {
        cfg.params = read_bell(b.child("bell-scan"));
    } else if (cfg.kind == "market") {
        cfg.params = read_market(b.child("market"));
    } else if (cfg.kind == "convergence") {
        cfg.params = read_convergence(b.child("convergence"));
    } else {
        throw ParseError("experiment", "'experiment' must be one of price, sphere, bell-scan, market, convergence");
    }
    b.finish();
    require_range(cfg.workers >= 1, "workers", "must be at least 1");
    if (cfg.output.report.empty()) cfg.output.report = cfg.kind + "_report.json";
    const bool has_series = cfg.kind == "price" || cfg.kind == "market";
    require_range(cfg.output.series.empty() || has_series, "output.series",
                  "is not supported for experiment '" + cfg.kind + "'");
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.kind;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["output"] = {{"dir", cfg.output.dir}, {"report", cfg.output.report}, {"series", cfg.output.series}};
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, PriceExperiment>) {
                json b = option_json(p.option);
                b["binomial_steps"] = p.binomial_steps;
                b["mc_paths"] = p.mc_paths;
                b["pde_h_s"] = p.pde_h_s;
                b["pde_h_t"] = p.pde_h_t;
                b["dump_paths"] = p.dump_paths;
                b["dump_steps"] = p.dump_steps;
                j["price"] = b;
            } else if constexpr (std::is_same_v<P, SphereExperiment>) {
                j["sphere"] = {{"rho", to_json(p.rho)},
                               {"state", vector_json(p.state)},
                               {"direction", vector_json(p.direction)},
                               {"trials", p.trials}};
            } else if constexpr (std::is_same_v<P, BellScanExperiment>) {
                j["bell-scan"] = {{"rho", to_json(p.rho)}, {"theta_deg", p.theta_deg}, {"samples", p.samples}};
            } else if constexpr (std::is_same_v<P, MarketExperiment>) {
                json b = {{"rho", to_json(p.market.rho)},
                          {"steps", p.market.n_steps},
                          {"regime", regime_json(p.market.regime)},
                          {"price_axis", vector_json(p.market.price_axis)},
                          {"price_min", p.market.price_min},
                          {"price_max", p.market.price_max},
                          {"runs", p.runs}};
                if (p.compare_gbm) {
                    b["compare_gbm"] = {{"drift", p.compare_gbm->drift},
                                        {"volatility", p.compare_gbm->volatility},
                                        {"horizon", p.compare_gbm->horizon},
                                        {"s0", p.compare_gbm->s0}};
                }
                j["market"] = b;
            } else {
                j["convergence"] = {{"option", option_json(p.option)}, {"steps", p.steps}};
            }
        },
        cfg.params);
    return j;
}

ExperimentOutput execute(const ExperimentConfig& cfg) {
    ExperimentOutput out = std::visit(
        [&](const auto& p) -> ExperimentOutput {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, PriceExperiment>) return run_price(cfg, p);
            else if constexpr (std::is_same_v<P, SphereExperiment>) return run_sphere(cfg, p);
            else if constexpr (std::is_same_v<P, BellScanExperiment>) return run_bell(cfg, p);
            else if constexpr (std::is_same_v<P, MarketExperiment>) return run_market_experiment(cfg, p);
            else return run_convergence(cfg, p);
        },
        cfg.params);
    json report;
    report["experiment"] = cfg.kind;
    report["config"] = config_to_json(cfg);
    // Worker count never changes results; keep it out of the report so
    // reports from different worker counts compare byte for byte.
    report["config"].erase("workers");
    report["results"] = std::move(out.report);
    out.report = std::move(report);
    return out;
}

void write_atomically(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f << content;
        if (!f.flush()) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

int fail(std::ostream& err, ExitCode code, const std::string& kind, const std::string& key, const std::string& message) {
    json e = {{"code", static_cast<int>(code)}, {"kind", kind}, {"message", message}};
    if (!key.empty()) e["key"] = key;
    err << json{{"error", e}}.dump(2) << "\n";
    return code;
}

}  // namespace

int run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out, std::ostream& err) {
    std::string text;
    {
        std::ifstream f(config_path, std::ios::binary);
        if (!f) return fail(err, kExitParse, "parse", "", "cannot read config file '" + config_path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    ExperimentConfig cfg;
    try {
        cfg = parse_config(text);
    } catch (const ParseError& e) {
        return fail(err, kExitParse, "parse", e.key(), e.what());
    } catch (const ValidationError& e) {
        return fail(err, kExitValidation, "validation", e.key(), e.what());
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.out_dir) cfg.output.dir = *overrides.out_dir;
    if (overrides.workers) {
        if (*overrides.workers < 1) return fail(err, kExitValidation, "validation", "workers", "'workers' must be at least 1");
        cfg.workers = *overrides.workers;
    }

    try {
        const auto result = execute(cfg);
        namespace fs = std::filesystem;
        const std::string report_path = (fs::path(cfg.output.dir) / cfg.output.report).string();
        std::string series_path;
        if (!cfg.output.series.empty() && result.series_csv) {
            series_path = (fs::path(cfg.output.dir) / cfg.output.series).string();
            write_atomically(series_path, *result.series_csv);
        }
        write_atomically(report_path, result.report.dump(2) + "\n");
        out << "report: " << report_path << "\n";
        if (!series_path.empty()) out << "series: " << series_path << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return fail(err, kExitRuntime, "runtime", "", e.what());
    }
}

}  // namespace qmarket::cli
