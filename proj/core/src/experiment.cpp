#include "zngauge/experiment.hpp"

#include "zngauge/gauge_basis.hpp"
#include "zngauge/observables.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace zngauge {

using json = nlohmann::json;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr int max_pairs = 32;  // occupations live in 64 bits

std::string at_index(const std::string &key, std::size_t i) { return key + "[" + std::to_string(i) + "]"; }

// Walks one JSON object, remembering which keys were read so leftovers can be
// reported as typos.
class Reader {
public:
    Reader(const json &node, std::string path) : node_(node), path_(std::move(path)) {
        if(!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key(const std::string &k) const { return path_.empty() ? k : path_ + "." + k; }
    bool has(const std::string &k) const { return node_.contains(k) && !node_.at(k).is_null(); }
    void mark(const std::string &k) { seen_.insert(k); }
    const json &raw(const std::string &k) {
        seen_.insert(k);
        return node_.at(k);
    }

    double number(const std::string &k, double fallback) {
        seen_.insert(k);
        return has(k) ? as_number(node_.at(k), key(k)) : fallback;
    }
    long integer(const std::string &k, long fallback) {
        seen_.insert(k);
        return has(k) ? as_integer(node_.at(k), key(k)) : fallback;
    }
    bool boolean(const std::string &k, bool fallback) {
        seen_.insert(k);
        if(!has(k)) return fallback;
        if(!node_.at(k).is_boolean()) throw ConfigError(key(k), "expected true or false");
        return node_.at(k).get<bool>();
    }
    std::string string(const std::string &k, const std::string &fallback) {
        seen_.insert(k);
        if(!has(k)) return fallback;
        if(!node_.at(k).is_string()) throw ConfigError(key(k), "expected a string");
        return node_.at(k).get<std::string>();
    }

    void finish() const {
        for(const auto &[k, v] : node_.items())
            if(!seen_.count(k)) throw ConfigError(key(k), "unknown key");
    }

    static double as_number(const json &v, const std::string &path) {
        if(!v.is_number()) throw ConfigError(path, "expected a number");
        const double x = v.get<double>();
        if(!std::isfinite(x)) throw ConfigError(path, "must be finite");
        return x;
    }
    static long as_integer(const json &v, const std::string &path) {
        if(!v.is_number_integer()) throw ConfigError(path, "expected an integer");
        return v.get<long>();
    }

private:
    const json &node_;
    std::string path_;
    std::set<std::string> seen_;
};

// Scalar or list, as a list.
std::vector<double> number_list(const json &v, const std::string &path) {
    std::vector<double> out;
    if(v.is_array()) {
        for(std::size_t i = 0; i < v.size(); ++i) out.push_back(Reader::as_number(v[i], at_index(path, i)));
    } else {
        out.push_back(Reader::as_number(v, path));
    }
    return out;
}

std::vector<int> int_list(const json &v, const std::string &path) {
    std::vector<int> out;
    if(v.is_array()) {
        for(std::size_t i = 0; i < v.size(); ++i) out.push_back(static_cast<int>(Reader::as_integer(v[i], at_index(path, i))));
    } else {
        out.push_back(static_cast<int>(Reader::as_integer(v, path)));
    }
    return out;
}

std::optional<int> parse_k0(const json &v, const std::string &path) {
    if(v.is_string()) {
        if(v.get<std::string>() != "auto") throw ConfigError(path, "expected \"auto\" or an integer label");
        return std::nullopt;
    }
    return static_cast<int>(Reader::as_integer(v, path));
}

ModelCase parse_case(const json &node, const std::string &path) {
    Reader r(node, path);
    ModelCase c;
    c.n   = static_cast<int>(r.integer("n", 3));
    c.t   = r.number("t", 0.0);
    c.phi = r.number("phi", 0.0);
    if(r.has("k0")) c.k0 = parse_k0(r.raw("k0"), r.key("k0"));
    else r.mark("k0");
    if(r.has("m_center")) c.m_center = r.number("m_center", 0.0);
    else r.mark("m_center");
    r.finish();
    return c;
}

std::vector<ModelCase> parse_model(const json &node) {
    Reader r(node, "model");
    std::vector<ModelCase> cases;
    if(r.has("cases")) {
        const json &list = r.raw("cases");
        if(!list.is_array()) throw ConfigError("model.cases", "expected a list of models");
        for(std::size_t i = 0; i < list.size(); ++i) cases.push_back(parse_case(list[i], at_index("model.cases", i)));
        r.finish();
        return cases;
    }
    // n, t and phi may be lists; the cases are their product
    const auto ns   = r.has("n") ? int_list(r.raw("n"), "model.n") : std::vector<int>{3};
    const auto ts   = r.has("t") ? number_list(r.raw("t"), "model.t") : std::vector<double>{0.0};
    const auto phis = r.has("phi") ? number_list(r.raw("phi"), "model.phi") : std::vector<double>{0.0};
    std::optional<int> k0;
    if(r.has("k0")) k0 = parse_k0(r.raw("k0"), "model.k0");
    std::optional<double> center;
    if(r.has("m_center")) center = r.number("m_center", 0.0);
    r.mark("k0");
    r.mark("m_center");
    r.finish();
    if(ns.empty()) throw ConfigError("model.n", "empty list");
    if(ts.empty()) throw ConfigError("model.t", "empty list");
    if(phis.empty()) throw ConfigError("model.phi", "empty list");
    for(int n : ns)
        for(double t : ts)
            for(double phi : phis) cases.push_back({n, t, phi, k0, center});
    return cases;
}

GridBlock parse_grid(const json &node) {
    Reader r(node, "grid");
    GridBlock g;
    if(r.has("m")) {
        const json &m = r.raw("m");
        if(m.is_object()) {
            Reader rr(m, "grid.m");
            MassGrid::Range range;
            range.from  = rr.number("from", 0.0);
            range.to    = rr.number("to", 0.0);
            range.count = static_cast<int>(rr.integer("count", 0));
            if(!rr.has("from")) throw ConfigError("grid.m.from", "missing");
            if(!rr.has("count")) throw ConfigError("grid.m.count", "missing");
            rr.finish();
            g.m.range = range;
        } else {
            g.m.values = number_list(m, "grid.m");
        }
    }
    g.m.relative = r.boolean("relative", false);
    if(r.has("L")) g.L = int_list(r.raw("L"), "grid.L");
    r.finish();
    return g;
}

EngineChoice parse_engine(const std::string &s, const std::string &path) {
    if(s == "ed") return EngineChoice::ed;
    if(s == "dmrg") return EngineChoice::dmrg;
    if(s == "auto") return EngineChoice::automatic;
    throw ConfigError(path, "engine must be ed, dmrg or auto");
}

const char *engine_name(EngineChoice e) {
    switch(e) {
    case EngineChoice::ed: return "ed";
    case EngineChoice::dmrg: return "dmrg";
    default: return "auto";
    }
}

SolverBlock parse_solver(const json &node) {
    Reader r(node, "solver");
    SolverBlock s;
    s.engine = parse_engine(r.string("engine", "auto"), "solver.engine");
    if(r.has("chi")) s.chi = int_list(r.raw("chi"), "solver.chi");
    s.levels             = static_cast<int>(r.integer("levels", s.levels));
    s.cutoff             = r.number("cutoff", s.cutoff);
    s.max_sweeps         = static_cast<int>(r.integer("max_sweeps", s.max_sweeps));
    s.min_sweeps         = static_cast<int>(r.integer("min_sweeps", s.min_sweeps));
    s.energy_tol         = r.number("energy_tol", s.energy_tol);
    s.truncation_ceiling = r.number("truncation_ceiling", s.truncation_ceiling);
    s.krylov_size        = static_cast<int>(r.integer("krylov_size", s.krylov_size));
    s.local_matvecs      = r.integer("local_matvecs", s.local_matvecs);
    s.ed_tol             = r.number("ed_tol", s.ed_tol);
    const long threshold = r.integer("ed_threshold", static_cast<long>(s.ed_threshold));
    if(threshold < 1) throw ConfigError("solver.ed_threshold", "must be positive");
    s.ed_threshold = static_cast<std::size_t>(threshold);
    if(r.has("seed")) {
        const json &v = r.raw("seed");
        if(!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long>() >= 0)) throw ConfigError("solver.seed", "expected a non-negative integer");
        s.seed = v.get<std::uint64_t>();
    } else {
        r.mark("seed");
    }
    s.both_seeds = r.boolean("both_seeds", false);
    r.finish();
    return s;
}

// A step is either `true`/`false` or an object with "enabled" and options.
std::optional<Reader> step(Reader &parent, const std::string &k, bool &enabled) {
    enabled = false;
    if(!parent.has(k)) {
        parent.mark(k);
        return std::nullopt;
    }
    const json &v = parent.raw(k);
    if(v.is_boolean()) {
        enabled = v.get<bool>();
        return std::nullopt;
    }
    Reader r(v, parent.key(k));
    enabled = r.boolean("enabled", true);
    return r;
}

AnalysisBlock parse_analysis(const json &node) {
    Reader r(node, "analysis");
    AnalysisBlock a;
    if(auto c = step(r, "collapse", a.collapse)) {
        a.beta              = c->number("beta", a.beta);
        a.nu                = c->number("nu", a.nu);
        a.window            = c->number("window", a.window);
        a.min_window_points = static_cast<int>(c->integer("min_window_points", a.min_window_points));
        c->finish();
    }
    if(auto c = step(r, "critical_followup", a.critical_followup)) {
        if(c->has("L")) a.followup_L = int_list(c->raw("L"), "analysis.critical_followup.L");
        c->finish();
    }
    if(auto c = step(r, "crossover", a.crossover)) {
        a.edge_margin = static_cast<int>(c->integer("edge_margin", a.edge_margin));
        c->finish();
    }
    if(auto c = step(r, "critical_line", a.critical_line)) {
        a.include_t0     = c->boolean("include_t0", a.include_t0);
        a.critical_sigma = c->number("sigma", a.critical_sigma);
        a.reference_table = c->string("reference_table", "");
        if(c->has("inputs")) {
            const json &list = c->raw("inputs");
            if(!list.is_array()) throw ConfigError("analysis.critical_line.inputs", "expected a list of {n, file}");
            for(std::size_t i = 0; i < list.size(); ++i) {
                const std::string path = at_index("analysis.critical_line.inputs", i);
                Reader in(list[i], path);
                AnalysisBlock::LineInput li;
                if(!in.has("n")) throw ConfigError(path + ".n", "missing");
                if(!in.has("file")) throw ConfigError(path + ".file", "missing");
                li.n    = static_cast<int>(in.integer("n", 0));
                li.file = in.string("file", "");
                in.finish();
                a.critical_line_inputs.push_back(li);
            }
        }
        c->finish();
    }
    if(auto c = step(r, "extrapolate", a.extrapolate)) {
        a.extrapolate_input = c->string("input", "");
        if(c->has("fixed_b")) a.fixed_b = c->number("fixed_b", 0.0);
        else c->mark("fixed_b");
        a.include_n2 = c->boolean("include_n2", false);
        c->finish();
    }
    r.finish();
    return a;
}

OutputBlock parse_output(const json &node) {
    Reader r(node, "output");
    OutputBlock o;
    o.directory = r.string("directory", o.directory);
    o.profiles  = r.boolean("profiles", o.profiles);
    r.finish();
    return o;
}

json case_json(const ModelCase &c) {
    json j;
    j["n"]        = c.n;
    j["t"]        = c.t;
    j["phi"]      = c.phi;
    j["k0"]       = c.k0 ? json(*c.k0) : json("auto");
    j["m_center"] = c.m_center ? json(*c.m_center) : json(nullptr);
    return j;
}

json solver_json(const SolverBlock &s) {
    json j;
    j["engine"]             = engine_name(s.engine);
    j["chi"]                = s.chi;
    j["levels"]             = s.levels;
    j["cutoff"]             = s.cutoff;
    j["max_sweeps"]         = s.max_sweeps;
    j["min_sweeps"]         = s.min_sweeps;
    j["energy_tol"]         = s.energy_tol;
    j["truncation_ceiling"] = s.truncation_ceiling;
    j["krylov_size"]        = s.krylov_size;
    j["local_matvecs"]      = s.local_matvecs;
    j["ed_tol"]             = s.ed_tol;
    j["ed_threshold"]       = s.ed_threshold;
    j["seed"]               = s.seed;
    j["both_seeds"]         = s.both_seeds;
    return j;
}

json config_json(const ExperimentConfig &c) {
    json j;
    json cases = json::array();
    for(const auto &mc : c.cases) cases.push_back(case_json(mc));
    j["model"]["cases"] = cases;

    if(c.grid.m.range) j["grid"]["m"] = {{"from", c.grid.m.range->from}, {"to", c.grid.m.range->to}, {"count", c.grid.m.range->count}};
    else j["grid"]["m"] = c.grid.m.values;
    j["grid"]["relative"] = c.grid.m.relative;
    j["grid"]["L"]        = c.grid.L;

    j["solver"] = solver_json(c.solver);

    const auto &a = c.analysis;
    j["analysis"]["collapse"] = {{"enabled", a.collapse}, {"beta", a.beta}, {"nu", a.nu}, {"window", a.window}, {"min_window_points", a.min_window_points}};
    j["analysis"]["critical_followup"] = {{"enabled", a.critical_followup}, {"L", a.followup_L}};
    j["analysis"]["crossover"]         = {{"enabled", a.crossover}, {"edge_margin", a.edge_margin}};
    json inputs                        = json::array();
    for(const auto &li : a.critical_line_inputs) inputs.push_back({{"n", li.n}, {"file", li.file}});
    j["analysis"]["critical_line"] = {{"enabled", a.critical_line},
                                      {"include_t0", a.include_t0},
                                      {"sigma", a.critical_sigma},
                                      {"inputs", inputs},
                                      {"reference_table", a.reference_table}};
    j["analysis"]["extrapolate"]   = {{"enabled", a.extrapolate},
                                      {"input", a.extrapolate_input},
                                      {"fixed_b", a.fixed_b ? json(*a.fixed_b) : json(nullptr)},
                                      {"include_n2", a.include_n2}};

    j["output"]  = {{"directory", c.output.directory}, {"profiles", c.output.profiles}};
    j["workers"] = c.workers;
    return j;
}

std::string read_file(const std::filesystem::path &file) {
    std::ifstream in(file, std::ios::binary);
    if(!in) throw std::runtime_error("cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write to a sibling and rename, so an interrupted run never leaves half a file.
void write_file_atomic(const std::filesystem::path &file, const std::string &content) {
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if(!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if(!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, file);
}

std::string format_g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string key_text(const ScanRow &r) {
    std::ostringstream ss;
    ss << "n=" << r.n << " t=" << format_g(r.t) << " phi=" << format_g(r.phi) << " L=" << r.L << " chi=" << r.chi << " m=" << format_g(r.m);
    return ss.str();
}

json row_key_json(const ScanRow &r) { return {{"n", r.n}, {"t", r.t}, {"phi", r.phi}, {"L", r.L}, {"chi", r.chi}, {"m", r.m}}; }

ScanRow row_key_from_json(const json &j) {
    ScanRow r;
    r.n   = j.at("n").get<int>();
    r.t   = j.at("t").get<double>();
    r.phi = j.at("phi").get<double>();
    r.L   = j.at("L").get<int>();
    r.chi = j.at("chi").get<int>();
    r.m   = j.at("m").get<double>();
    return r;
}

bool key_less(const ScanRow &a, const ScanRow &b) {
    return std::tie(a.n, a.t, a.phi, a.L, a.chi, a.m) < std::tie(b.n, b.t, b.phi, b.L, b.chi, b.m);
}

ScanRow key_of(const ScanPoint &p) {
    ScanRow r;
    r.n   = p.model.n;
    r.t   = p.model.t;
    r.phi = p.model.phi;
    r.L   = p.L;
    r.chi = p.chi;
    r.m   = p.m;
    return r;
}

// Persistent, resumable store of one family of rows: <stem>.csv, its manifest
// and one profile file per case.
class RowStore {
public:
    RowStore(const ExperimentConfig &config, std::string stem, std::string manifest_name)
        : config_(config), dir_(config.resolve(config.output.directory)), stem_(std::move(stem)), manifest_name_(std::move(manifest_name)) {
        std::filesystem::create_directories(dir_);
        const auto csv = dir_ / (stem_ + ".csv");
        if(std::filesystem::exists(csv)) {
            std::istringstream in(read_file(csv));
            table_ = ScanTable::read_csv(in);
        }
        const auto man = dir_ / manifest_name_;
        if(std::filesystem::exists(man)) {
            const auto previous = RunManifest::from_json_text(read_file(man));
            for(const auto &rec : previous.records) records_[key_text(rec.key)] = rec;
        }
        manifest_.config_hash  = config.hash();
        manifest_.code_version = code_version();
        manifest_.config_json  = config.to_json_text();
    }

    // Points still to solve; throws on a provenance clash.
    std::vector<ScanPoint> pending(const std::vector<ScanPoint> &plan) const {
        std::vector<ScanPoint> todo;
        for(const auto &p : plan) {
            const ScanRow key = key_of(p);
            if(const ScanRow *row = table_.find(key)) {
                if(row->provenance == p.provenance) continue;
                throw std::runtime_error((dir_ / (stem_ + ".csv")).string() + ": row " + key_text(key) + " has provenance " + row->provenance +
                                         " but this configuration produces " + p.provenance +
                                         "; refusing to mix results, choose another output.directory");
            }
            todo.push_back(p);
        }
        return todo;
    }

    void add(const ScanPoint &p, const PointResult &res, std::uint64_t seed) {
        std::lock_guard lock(mutex_);
        table_.upsert(res.row);
        RunRecord rec;
        rec.key            = res.row;
        rec.engine         = res.row.engine;
        rec.converged      = res.row.converged;
        rec.iterations     = res.iterations;
        rec.max_truncation = res.max_truncation;
        rec.leakage        = res.leakage;
        rec.seconds        = res.seconds;
        rec.seed           = seed;
        rec.error          = res.error;
        records_[key_text(res.row)] = rec;
        ++manifest_.solver_invocations;
        if(config_.output.profiles && !res.profile.entropy.empty()) {
            auto &list = profiles(p.model);
            std::erase_if(list, [&](const EntropyProfile &e) { return e.L == res.profile.L && e.m == res.profile.m; });
            list.push_back(res.profile);
            std::sort(list.begin(), list.end(), [](const auto &a, const auto &b) { return std::tie(a.L, a.m) < std::tie(b.L, b.m); });
            std::ostringstream os;
            write_profiles_csv(os, list);
            write_file_atomic(dir_ / (stem_ == "scan" ? profile_file_name(p.model) : stem_ + "-" + profile_file_name(p.model)), os.str());
        }
        persist_locked();
    }

    void finish(double wall_seconds) {
        std::lock_guard lock(mutex_);
        manifest_.wall_seconds = wall_seconds;
        persist_locked();
    }

    const ScanTable &table() const { return table_; }
    const RunManifest &manifest() const { return manifest_; }

private:
    std::vector<EntropyProfile> &profiles(const ModelCase &model) {
        const std::string name = profile_file_name(model);
        auto it                = profiles_.find(name);
        if(it != profiles_.end()) return it->second;
        std::vector<EntropyProfile> list;
        const auto file = dir_ / (stem_ == "scan" ? name : stem_ + "-" + name);
        if(std::filesystem::exists(file)) {
            std::istringstream in(read_file(file));
            list = read_profiles_csv(in);
        }
        return profiles_[name] = std::move(list);
    }

    void persist_locked() {
        ScanTable sorted;
        auto rows = table_.rows();
        std::sort(rows.begin(), rows.end(), key_less);
        for(auto &r : rows) sorted.upsert(std::move(r));
        table_ = std::move(sorted);
        std::ostringstream os;
        table_.write_csv(os);
        write_file_atomic(dir_ / (stem_ + ".csv"), os.str());
        manifest_.records.clear();
        for(const auto &[k, rec] : records_) manifest_.records.push_back(rec);
        write_file_atomic(dir_ / manifest_name_, manifest_.to_json_text());
    }

    const ExperimentConfig &config_;
    std::filesystem::path dir_;
    std::string stem_;
    std::string manifest_name_;
    ScanTable table_;
    RunManifest manifest_;
    std::map<std::string, RunRecord> records_;
    std::map<std::string, std::vector<EntropyProfile>> profiles_;
    std::mutex mutex_;
};

// Solves `todo` with up to `workers` threads, larger chains first.
void execute(std::vector<ScanPoint> todo, const SolverBlock &solver, int workers, RowStore &store, const ProgressFn &progress) {
    std::stable_sort(todo.begin(), todo.end(), [](const ScanPoint &a, const ScanPoint &b) { return a.L > b.L; });
    std::atomic<std::size_t> next{0}, done{0};
    std::mutex error_mutex;
    std::exception_ptr failure;
    auto work = [&] {
        for(;;) {
            const std::size_t i = next++;
            if(i >= todo.size()) return;
            try {
                const PointResult res = solve_point(todo[i], solver);
                store.add(todo[i], res, solver.seed);
                const std::size_t d = ++done;
                if(progress) progress(res, d, todo.size());
            } catch(...) {
                std::lock_guard lock(error_mutex);
                if(!failure) failure = std::current_exception();
                next = todo.size();
            }
        }
    };
    const int count = std::max(1, std::min<int>(workers, static_cast<int>(todo.size())));
    {
        std::vector<std::jthread> pool;
        for(int w = 1; w < count; ++w) pool.emplace_back(work);
        work();
    }
    if(failure) std::rethrow_exception(failure);
}

std::vector<AlphaPoint> parity_alphas(std::span<const LineCoefficients> rows, Parity parity, bool include_n2) {
    std::vector<AlphaPoint> out;
    for(const auto &r : rows) {
        const bool odd = r.n % 2 == 1;
        if(odd != (parity == Parity::odd)) continue;
        if(r.n == 2 && !include_n2) continue;
        out.push_back({r.n, r.alpha, r.alpha_err});
    }
    return out;
}

json fit_json(const FitResult &f) {
    json j;
    for(std::size_t i = 0; i < f.names.size(); ++i) j["coefficients"][f.names[i]] = {{"value", f.value(f.names[i])}, {"error", f.error(f.names[i])}};
    j["chi2"]  = f.chi2;
    j["dof"]   = f.dof;
    j["pulls"] = f.pulls;
    return j;
}

std::string tag_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

ConfigError::ConfigError(std::string key, const std::string &message) : std::runtime_error(key + ": " + message), key_(std::move(key)) {}

int ModelCase::resolved_k0() const { return k0 ? *k0 : zero_charge_sector_candidates(n, phi).front(); }

std::vector<double> MassGrid::masses(const ModelCase &model) const {
    std::vector<double> out = values;
    if(range) {
        out.clear();
        if(range->count == 1) out.push_back(range->from);
        for(int i = 0; range->count > 1 && i < range->count; ++i)
            out.push_back(range->from + (range->to - range->from) * static_cast<double>(i) / (range->count - 1));
    }
    if(relative)
        for(double &m : out) m += model.m_center.value_or(0.0);
    return out;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string &text, std::filesystem::path base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch(const json::parse_error &e) {
        throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
    }
    Reader r(root, "");
    ExperimentConfig c;
    c.base_dir = std::move(base_dir);
    if(r.has("model")) c.cases = parse_model(r.raw("model"));
    else r.mark("model");
    if(r.has("grid")) c.grid = parse_grid(r.raw("grid"));
    else r.mark("grid");
    if(r.has("solver")) c.solver = parse_solver(r.raw("solver"));
    else r.mark("solver");
    if(r.has("analysis")) c.analysis = parse_analysis(r.raw("analysis"));
    else r.mark("analysis");
    if(r.has("output")) c.output = parse_output(r.raw("output"));
    else r.mark("output");
    c.workers = static_cast<int>(r.integer("workers", 1));
    r.finish();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path &file) {
    return from_json_text(read_file(file), std::filesystem::absolute(file).parent_path());
}

std::string ExperimentConfig::to_json_text() const { return config_json(*this).dump(2) + "\n"; }

std::string ExperimentConfig::hash() const { return fnv1a_hex(config_json(*this).dump()); }

std::filesystem::path ExperimentConfig::resolve(const std::string &path) const {
    std::filesystem::path p(path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void ExperimentConfig::validate() const {
    for(std::size_t i = 0; i < cases.size(); ++i) {
        const auto &c         = cases[i];
        const std::string key = at_index("model.cases", i);
        if(c.n < 2) throw ConfigError(key + ".n", "need n >= 2");
        if(c.t < 0.0 || !std::isfinite(c.t)) throw ConfigError(key + ".t", "need a finite t >= 0");
        if(!std::isfinite(c.phi)) throw ConfigError(key + ".phi", "must be finite");
        if(c.k0 && (*c.k0 < 0 || *c.k0 >= c.n)) throw ConfigError(key + ".k0", "label outside [0, n)");
        if(grid.m.relative && !c.m_center) throw ConfigError(key + ".m_center", "required by grid.relative");
    }
    if(!cases.empty()) {
        if(grid.m.range) {
            if(grid.m.range->count < 1) throw ConfigError("grid.m.count", "empty mass grid");
        } else if(grid.m.values.empty()) {
            throw ConfigError("grid.m", "empty mass grid");
        }
        if(grid.L.empty()) throw ConfigError("grid.L", "no chain sizes");
    }
    for(std::size_t i = 0; i < grid.L.size(); ++i)
        if(grid.L[i] < 2 || grid.L[i] > max_pairs) throw ConfigError(at_index("grid.L", i), "need 2 <= L <= 32 physical sites");
    for(std::size_t i = 0; i < grid.m.values.size(); ++i)
        if(!std::isfinite(grid.m.values[i])) throw ConfigError(at_index("grid.m", i), "must be finite");

    if(solver.chi.empty()) throw ConfigError("solver.chi", "no bond dimension");
    for(std::size_t i = 0; i < solver.chi.size(); ++i)
        if(solver.chi[i] < 8) throw ConfigError(at_index("solver.chi", i), "need chi >= 8");
    if(solver.levels < 1 || solver.levels > 3) throw ConfigError("solver.levels", "need 1, 2 or 3 levels");
    if(solver.cutoff < 0.0) throw ConfigError("solver.cutoff", "must be >= 0");
    if(solver.max_sweeps < 1) throw ConfigError("solver.max_sweeps", "need at least one sweep");
    if(solver.min_sweeps < 1 || solver.min_sweeps > solver.max_sweeps) throw ConfigError("solver.min_sweeps", "need 1 <= min_sweeps <= max_sweeps");
    if(solver.energy_tol <= 0.0) throw ConfigError("solver.energy_tol", "must be positive");
    if(solver.truncation_ceiling <= 0.0) throw ConfigError("solver.truncation_ceiling", "must be positive");
    if(solver.krylov_size < 4) throw ConfigError("solver.krylov_size", "need at least 4");
    if(solver.local_matvecs < 1) throw ConfigError("solver.local_matvecs", "must be positive");
    if(solver.ed_tol <= 0.0) throw ConfigError("solver.ed_tol", "must be positive");
    if(solver.ed_threshold < 1) throw ConfigError("solver.ed_threshold", "must be positive");

    const auto &a = analysis;
    if(a.beta <= 0.0) throw ConfigError("analysis.collapse.beta", "must be positive");
    if(a.nu <= 0.0) throw ConfigError("analysis.collapse.nu", "must be positive");
    if(a.window < 0.0) throw ConfigError("analysis.collapse.window", "must be >= 0");
    if(a.min_window_points < 2) throw ConfigError("analysis.collapse.min_window_points", "need at least 2");
    if((a.collapse || a.crossover || a.critical_followup) && cases.empty())
        throw ConfigError("model", "the requested analysis needs scanned models");
    if(a.critical_followup) {
        if(!a.collapse) throw ConfigError("analysis.critical_followup", "needs analysis.collapse");
        if(a.followup_L.size() < 3) throw ConfigError("analysis.critical_followup.L", "need at least three sizes");
        for(std::size_t i = 0; i < a.followup_L.size(); ++i)
            if(a.followup_L[i] < 2 || a.followup_L[i] > max_pairs)
                throw ConfigError(at_index("analysis.critical_followup.L", i), "need 2 <= L <= 32 physical sites");
    }
    if(a.edge_margin < 0) throw ConfigError("analysis.crossover.edge_margin", "must be >= 0");
    if(a.critical_sigma <= 0.0) throw ConfigError("analysis.critical_line.sigma", "must be positive");
    for(std::size_t i = 0; i < a.critical_line_inputs.size(); ++i) {
        if(a.critical_line_inputs[i].n < 2) throw ConfigError(at_index("analysis.critical_line.inputs", i) + ".n", "need n >= 2");
        if(a.critical_line_inputs[i].file.empty()) throw ConfigError(at_index("analysis.critical_line.inputs", i) + ".file", "empty path");
    }
    if(a.critical_line && a.critical_line_inputs.empty() && !a.collapse)
        throw ConfigError("analysis.critical_line", "no points: enable analysis.collapse or list analysis.critical_line.inputs");
    if(a.extrapolate && a.extrapolate_input.empty() && !a.critical_line)
        throw ConfigError("analysis.extrapolate.input", "no Table-I-like input: set it or enable analysis.critical_line");
    if(output.directory.empty()) throw ConfigError("output.directory", "empty path");
    if(workers < 1) throw ConfigError("workers", "need at least one worker");
}

std::string code_version() {
#ifdef ZNGAUGE_VERSION
    return ZNGAUGE_VERSION;
#else
    return "unknown";
#endif
}

std::string fnv1a_hex(const std::string &text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for(unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::size_t sector_dimension(int L) {
    // binomial(2L, L), exact in 64 bits for L <= 32
    unsigned long long b = 1;
    for(int i = 1; i <= L; ++i) b = b * static_cast<unsigned long long>(L + i) / static_cast<unsigned long long>(i);
    return static_cast<std::size_t>(b);
}

std::string choose_engine(const SolverBlock &solver, int L) {
    switch(solver.engine) {
    case EngineChoice::ed: return "ed";
    case EngineChoice::dmrg: return "dmrg";
    default: return sector_dimension(L) <= solver.ed_threshold ? "ed" : "dmrg";
    }
}

std::string point_provenance(const ModelCase &model, const SolverBlock &solver, const std::string &engine) {
    json j;
    j["model"]   = {{"n", model.n}, {"t", model.t}, {"phi", model.phi}, {"k0", model.resolved_k0()}};
    j["engine"]  = engine;
    j["version"] = code_version();
    if(engine == "ed") {
        j["solver"] = {{"levels", solver.levels}, {"ed_tol", solver.ed_tol}, {"seed", solver.seed}};
    } else {
        auto s = solver_json(solver);
        s.erase("engine");
        s.erase("chi");  // chi is part of the row key
        s.erase("ed_tol");
        s.erase("ed_threshold");
        j["solver"] = s;
    }
    return fnv1a_hex(j.dump());
}

std::vector<ScanPoint> plan_scan(const ExperimentConfig &config) {
    std::vector<ScanPoint> plan;
    for(std::size_t ci = 0; ci < config.cases.size(); ++ci) {
        const auto &model = config.cases[ci];
        const auto masses = config.grid.m.masses(model);
        for(int L : config.grid.L) {
            const std::string engine = choose_engine(config.solver, L);
            const std::string prov   = point_provenance(model, config.solver, engine);
            const std::vector<int> chis = engine == "ed" ? std::vector<int>{0} : config.solver.chi;
            for(int chi : chis)
                for(double m : masses) plan.push_back({ci, model, L, chi, m, engine, prov});
        }
    }
    return plan;
}

PointResult solve_point(const ScanPoint &point, const SolverBlock &solver) {
    const auto start = std::chrono::steady_clock::now();
    PointResult res;
    ScanRow &row   = res.row;
    row            = key_of(point);
    row.engine     = point.engine;
    row.provenance = point.provenance;
    row.sigma = row.delta = row.gamma = row.entropy_half = row.energy = nan;
    row.truncation_error = 0.0;
    res.profile.L = point.L;
    res.profile.m = point.m;

    ModelParams params;
    params.n        = point.model.n;
    params.t        = point.model.t;
    params.m        = point.m;
    params.phi      = point.model.phi;
    params.geometry = ChainGeometry{point.L};
    params.k0       = point.model.resolved_k0();
    const int N     = params.geometry.sites();

    try {
        SpectrumResult spectrum;
        ObservableSet obs;
        if(point.engine == "ed") {
            const auto basis = build_basis(params.geometry, params.n, params.k0, true);
            const auto H     = build_sparse(params, basis);
            EdOptions opt;
            opt.tol  = solver.ed_tol;
            opt.seed = solver.seed;
            spectrum = lowest_eigenpairs(H, std::min<int>(solver.levels, static_cast<int>(basis.size())), opt);
            obs      = measure_ed(spectrum.eigenvectors.at(0), basis, params);
        } else {
            SweepPolicy policy;
            policy.chi                = point.chi;
            policy.cutoff             = solver.cutoff;
            policy.max_sweeps         = solver.max_sweeps;
            policy.min_sweeps         = solver.min_sweeps;
            policy.energy_tol         = solver.energy_tol;
            policy.truncation_ceiling = solver.truncation_ceiling;
            policy.krylov_size        = solver.krylov_size;
            policy.local_matvecs      = solver.local_matvecs;
            policy.seed               = solver.seed;
            DmrgResult ground;
            if(solver.both_seeds) {
                auto a = ground_state(params, policy, SeedPattern::dirac_sea);
                auto b = ground_state(params, policy, SeedPattern::meson);
                const bool a_ok = a.spectrum.converged, b_ok = b.spectrum.converged;
                ground = (a_ok && (!b_ok || a.spectrum.eigenvalues[0] <= b.spectrum.eigenvalues[0])) || (!a_ok && !b_ok) ? std::move(a) : std::move(b);
            } else {
                ground = ground_state(params, policy);
            }
            const auto dmrg      = excited_states(params, ground, solver.levels - 1, policy);
            spectrum             = dmrg.spectrum;
            spectrum.converged   = spectrum.converged && !dmrg.chi_exhausted;
            res.max_truncation   = dmrg.max_truncation;
            res.leakage          = dmrg.leakage;
            row.truncation_error = dmrg.max_truncation;
            obs                  = measure_mps(dmrg.states.at(0), params);
        }
        for(long it : spectrum.iterations) res.iterations += it;
        res.energies          = spectrum.eigenvalues;
        row.energy            = spectrum.eigenvalues.at(0);
        row.sigma             = obs.sigma;
        row.entropy_half      = obs.entropy_profile.at(static_cast<std::size_t>(half_chain_cut(N)));
        res.profile.entropy   = obs.entropy_profile;
        row.converged         = spectrum.converged;
        auto e                = spectrum.eigenvalues;
        std::sort(e.begin(), e.end());
        if(e.size() >= 2) row.delta = (e[1] - e[0]) / N;
        if(e.size() >= 3) row.gamma = (e[2] - e[0]) / N;
    } catch(const std::exception &ex) {
        row.converged = false;
        res.error     = ex.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

std::string RunManifest::to_json_text() const {
    json j;
    j["config_hash"]        = config_hash;
    j["code_version"]       = code_version;
    j["config"]             = config_json.empty() ? json(nullptr) : json::parse(config_json);
    j["wall_seconds"]       = wall_seconds;
    j["solver_invocations"] = solver_invocations;
    json recs               = json::array();
    for(const auto &r : records) {
        json x = row_key_json(r.key);
        x["engine"]         = r.engine;
        x["converged"]      = r.converged;
        x["iterations"]     = r.iterations;
        x["max_truncation"] = r.max_truncation;
        x["leakage"]        = r.leakage;
        x["seconds"]        = r.seconds;
        x["seed"]           = r.seed;
        x["provenance"]     = r.key.provenance;
        if(!r.error.empty()) x["error"] = r.error;
        recs.push_back(x);
    }
    j["records"] = recs;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json_text(const std::string &text) {
    RunManifest m;
    try {
        const json j         = json::parse(text);
        m.config_hash        = j.at("config_hash").get<std::string>();
        m.code_version       = j.at("code_version").get<std::string>();
        m.config_json        = j.at("config").is_null() ? "" : j.at("config").dump();
        m.wall_seconds       = j.at("wall_seconds").get<double>();
        m.solver_invocations = j.at("solver_invocations").get<long>();
        for(const auto &x : j.at("records")) {
            RunRecord r;
            r.key            = row_key_from_json(x);
            r.key.provenance = x.at("provenance").get<std::string>();
            r.engine         = x.at("engine").get<std::string>();
            r.converged      = x.at("converged").get<bool>();
            r.iterations     = x.at("iterations").get<long>();
            r.max_truncation = x.at("max_truncation").get<double>();
            r.leakage        = x.at("leakage").get<double>();
            r.seconds        = x.at("seconds").get<double>();
            r.seed           = x.at("seed").get<std::uint64_t>();
            r.error          = x.value("error", std::string{});
            m.records.push_back(r);
        }
    } catch(const json::exception &e) {
        throw std::runtime_error(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

ScanOutcome run_scan(const ExperimentConfig &config, const ProgressFn &progress) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    RowStore store(config, "scan", "manifest.json");
    const auto plan = plan_scan(config);
    execute(store.pending(plan), config.solver, config.workers, store, progress);
    store.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

    ScanOutcome out;
    out.table         = store.table();
    out.manifest      = store.manifest();
    out.all_converged = true;
    for(const auto &p : plan) {
        const ScanRow *row = out.table.find(key_of(p));
        if(!row || !row->converged) out.all_converged = false;
    }
    return out;
}

ScanTable case_table(const ScanTable &table, const ModelCase &model) {
    std::map<std::pair<int, double>, ScanRow> best;
    const ScanTable selected = table.select(model.n, model.t, model.phi);
    for(const auto &r : selected.rows()) {
        auto [it, inserted] = best.try_emplace({r.L, r.m}, r);
        if(!inserted && r.chi > it->second.chi) it->second = r;
    }
    ScanTable out;
    for(auto &[k, r] : best) out.upsert(r);
    return out;
}

std::string profile_file_name(const ModelCase &model) {
    return "profiles-n" + std::to_string(model.n) + "-t" + tag_number(model.t) + "-phi" + tag_number(model.phi) + "-k" +
           std::to_string(model.resolved_k0()) + ".csv";
}

std::vector<LineCoefficients> read_line_table_csv(std::istream &is) {
    std::vector<LineCoefficients> rows;
    std::string line;
    int number = 0;
    bool header = false;
    while(std::getline(is, line)) {
        ++number;
        if(line.empty() || line[0] == '#') continue;
        if(!header) {
            if(line.rfind("n,m0,m0_err,alpha,alpha_err,beta,beta_err", 0) != 0) throw std::runtime_error("line table: unexpected header on csv line " + std::to_string(number));
            header = true;
            continue;
        }
        std::istringstream ss(line);
        LineCoefficients r;
        char c1, c2, c3, c4, c5, c6;
        if(!(ss >> r.n >> c1 >> r.m0 >> c2 >> r.m0_err >> c3 >> r.alpha >> c4 >> r.alpha_err >> c5 >> r.beta >> c6 >> r.beta_err) ||
           c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',' || c6 != ',')
            throw std::runtime_error("line table: malformed csv line " + std::to_string(number));
        rows.push_back(r);
    }
    if(!header) throw std::runtime_error("line table: missing header");
    return rows;
}

void write_line_table_csv(std::ostream &os, std::span<const LineCoefficients> rows) {
    os << "n,m0,m0_err,alpha,alpha_err,beta,beta_err\n";
    for(const auto &r : rows)
        os << r.n << ',' << format_g(r.m0) << ',' << format_g(r.m0_err) << ',' << format_g(r.alpha) << ',' << format_g(r.alpha_err) << ','
           << format_g(r.beta) << ',' << format_g(r.beta_err) << '\n';
}

AnalysisReport run_analysis(const ExperimentConfig &config, const ProgressFn &progress) {
    config.validate();
    const auto &a  = config.analysis;
    const auto dir = config.resolve(config.output.directory);
    std::filesystem::create_directories(dir);
    AnalysisReport report;
    json out;
    out["config_hash"]  = config.hash();
    out["code_version"] = code_version();

    ScanTable table;
    if(!config.cases.empty()) {
        const auto csv = dir / "scan.csv";
        if(!std::filesystem::exists(csv)) throw ConfigError("grid", "no scan table at " + csv.string() + "; run the scan for this configuration first");
        std::istringstream in(read_file(csv));
        table = ScanTable::read_csv(in);
    }

    // collapse per case, keyed by index
    std::map<std::size_t, CollapseResult> collapses;
    auto collapse_case = [&](std::size_t ci) -> std::optional<CollapseResult> {
        if(auto it = collapses.find(ci); it != collapses.end()) return it->second;
        CollapseOptions opt;
        opt.window            = a.window;
        opt.min_window_points = a.min_window_points;
        try {
            return collapses[ci] = collapse_fit(case_table(table, config.cases[ci]), a.beta, a.nu, opt);
        } catch(const std::invalid_argument &) {
            return std::nullopt;
        }
    };

    std::optional<RowStore> followup;
    json cases = json::array();
    for(std::size_t ci = 0; ci < config.cases.size(); ++ci) {
        const auto &model = config.cases[ci];
        const auto ct     = case_table(table, model);
        json cj           = case_json(model);
        cj["k0"]          = model.resolved_k0();
        std::set<std::string> provenance;
        int converged = 0;
        for(const auto &r : ct.rows()) {
            provenance.insert(r.provenance);
            converged += r.converged ? 1 : 0;
            if(!r.converged) report.all_converged = false;
        }
        cj["rows"]       = ct.size();
        cj["converged"]  = converged;
        cj["provenance"] = provenance;
        cj["sizes"]      = ct.sizes();

        if(a.collapse) {
            CollapseOptions opt;
            opt.window            = a.window;
            opt.min_window_points = a.min_window_points;
            try {
                const auto res = collapse_fit(ct, a.beta, a.nu, opt);
                collapses[ci]  = res;
                const std::string curves = "collapse-" + profile_file_name(model).substr(9);
                std::ostringstream os;
                os << "L,x,y\n";
                for(const auto &c : res.curves)
                    for(std::size_t i = 0; i < c.x.size(); ++i) os << c.L << ',' << format_g(c.x[i]) << ',' << format_g(c.y[i]) << '\n';
                write_file_atomic(dir / curves, os.str());
                cj["collapse"] = {{"m_c", res.m_c},         {"uncertainty", res.uncertainty}, {"grid_floor", res.grid_floor},
                                  {"curvature_error", res.curvature_error}, {"beta", res.beta}, {"nu", res.nu},
                                  {"objective", res.objective}, {"window", res.window}, {"curves", curves}};
            } catch(const std::invalid_argument &e) {
                cj["collapse"] = {{"error", e.what()}};
            }
        }

        if(a.critical_followup && collapses.count(ci)) {
            if(!followup) followup.emplace(config, "critical", "critical-manifest.json");
            SolverBlock solver = config.solver;
            solver.levels      = 3;
            std::vector<ScanPoint> plan;
            for(int L : a.followup_L) {
                const std::string engine = choose_engine(solver, L);
                const int chi            = engine == "ed" ? 0 : *std::max_element(solver.chi.begin(), solver.chi.end());
                plan.push_back({ci, model, L, chi, collapses[ci].m_c, engine, point_provenance(model, solver, engine)});
            }
            execute(followup->pending(plan), solver, config.workers, *followup, progress);
            std::vector<EntropyPoint> ent;
            std::vector<GapPoint> gp;
            json rows = json::array();
            for(const auto &p : plan) {
                const ScanRow *r = followup->table().find(key_of(p));
                if(!r) continue;
                if(!r->converged) report.all_converged = false;
                rows.push_back({{"L", r->L}, {"N", r->sites()}, {"entropy_half", r->entropy_half}, {"delta", r->delta}, {"gamma", r->gamma}, {"converged", r->converged}});
                if(!r->converged) continue;
                ent.push_back({static_cast<double>(r->sites()), r->entropy_half});
                gp.push_back({r->sites(), r->delta, r->gamma});
            }
            json fj;
            fj["m_c"]  = collapses[ci].m_c;
            fj["rows"] = rows;
            try {
                const auto cc = central_charge_fit(ent);
                fj["central_charge"] = {{"c", cc.c}, {"c_err", cc.c_err}, {"s0", cc.s0}, {"s0_err", cc.s0_err}};
            } catch(const std::invalid_argument &e) {
                fj["central_charge"] = {{"error", e.what()}};
            }
            try {
                const auto g = gap_scaling_fit(gp);
                fj["gap_scaling"] = {{"ratio", g.ratio}, {"ratio_err", g.ratio_err}, {"x_s", g.x_s}, {"x_s_err", g.x_s_err}, {"v_s", g.v_s},
                                     {"v_s_err", g.v_s_err}, {"scaled_delta", g.scaled_delta}, {"scaled_spread", g.scaled_spread},
                                     {"ratio_flagged", g.ratio_flagged}};
            } catch(const std::invalid_argument &e) {
                fj["gap_scaling"] = {{"error", e.what()}};
            }
            cj["critical_followup"] = fj;
        }

        if(a.crossover) {
            std::vector<EntropyProfile> profiles;
            const auto pf = dir / profile_file_name(model);
            if(std::filesystem::exists(pf)) {
                std::istringstream in(read_file(pf));
                profiles = read_profiles_csv(in);
            }
            CrossoverOptions opt;
            opt.edge_margin = a.edge_margin;
            for(std::size_t bi = 0; bi < config.cases.size(); ++bi) {
                const auto &b = config.cases[bi];
                if(bi != ci && b.n == model.n && b.t == model.t && b.phi == 0.0)
                    if(auto base = collapse_case(bi)) opt.baseline_objective = base->objective;
            }
            json xj;
            try {
                const auto rep = crossover_diagnostics(ct, profiles, opt);
                if(rep.collapse) xj["collapse"] = {{"m_c", rep.collapse->m_c}, {"objective", rep.collapse->objective}};
                else xj["collapse"] = {{"error", rep.collapse_error}};
                xj["objective_ratio"] = rep.objective_ratio ? json(*rep.objective_ratio) : json(nullptr);
                json gm               = json::array();
                for(const auto &g : rep.gap_minima) gm.push_back({{"L", g.L}, {"m", g.m}, {"raw_gap", g.raw_gap}});
                xj["gap_minima"]       = gm;
                xj["gap_non_closing"]  = rep.gap_non_closing;
                json fl                = json::array();
                for(const auto &f : rep.flatness) fl.push_back({{"L", f.L}, {"m", f.m}, {"spread", f.spread}});
                xj["flatness"]         = fl;
                json cr                = json::array();
                for(const auto &c : rep.crossings) cr.push_back({{"L", c.L}, {"m_star", c.m_star}});
                xj["crossings"]        = cr;
                xj["m_star"]           = rep.m_star ? json(*rep.m_star) : json(nullptr);
                xj["crossover"]        = rep.crossover;
            } catch(const std::invalid_argument &e) {
                xj["error"] = e.what();
            }
            cj["crossover"] = xj;
        }
        cases.push_back(cj);
    }
    out["cases"] = cases;

    std::vector<LineCoefficients> line_rows;
    if(a.critical_line) {
        std::map<int, std::vector<CriticalPoint>> points;
        for(const auto &[ci, res] : collapses)
            points[config.cases[ci].n].push_back({config.cases[ci].t, res.m_c, std::max(a.critical_sigma, res.uncertainty)});
        for(std::size_t i = 0; i < a.critical_line_inputs.size(); ++i) {
            const auto &li  = a.critical_line_inputs[i];
            const auto file = config.resolve(li.file);
            if(!std::filesystem::exists(file))
                throw ConfigError(at_index("analysis.critical_line.inputs", i) + ".file", "no such file " + file.string());
            std::istringstream in(read_file(file));
            for(const auto &p : read_critical_line_csv(in)) points[li.n].push_back(p);
        }
        if(a.include_t0)
            for(auto &[n, pts] : points)
                if(std::none_of(pts.begin(), pts.end(), [](const CriticalPoint &p) { return p.t == 0.0; }))
                    pts.push_back({0.0, analytic_t0_mass(n), a.critical_sigma});

        std::map<int, LineCoefficients> reference;
        if(!a.reference_table.empty()) {
            const auto file = config.resolve(a.reference_table);
            if(!std::filesystem::exists(file)) throw ConfigError("analysis.critical_line.reference_table", "no such file " + file.string());
            std::istringstream in(read_file(file));
            for(const auto &r : read_line_table_csv(in)) reference[r.n] = r;
        }

        json lines = json::array();
        std::ostringstream pts_csv;
        pts_csv << "n,t,m_c,sigma\n";
        for(auto &[n, pts] : points) {
            std::sort(pts.begin(), pts.end(), [](const auto &x, const auto &y) { return x.t < y.t; });
            for(const auto &p : pts) pts_csv << n << ',' << format_g(p.t) << ',' << format_g(p.m_c) << ',' << format_g(p.sigma) << '\n';
            json lj;
            lj["n"]      = n;
            lj["points"] = pts.size();
            try {
                const auto fit = fit_critical_line(pts);
                report.critical_lines.push_back({n, fit, pts});
                LineCoefficients lc{n, fit.value("m0"), fit.error("m0"), fit.value("alpha"), fit.error("alpha"), fit.value("beta"), fit.error("beta")};
                line_rows.push_back(lc);
                lj["fit"]             = fit_json(fit);
                lj["analytic_t0"]     = analytic_t0_mass(n);
                if(auto it = reference.find(n); it != reference.end()) {
                    const auto &ref = it->second;
                    auto z          = [](double x, double ex, double y, double ey) { return std::abs(x - y) / std::hypot(ex, ey); };
                    const double zm = z(lc.m0, lc.m0_err, ref.m0, ref.m0_err);
                    const double za = z(lc.alpha, lc.alpha_err, ref.alpha, ref.alpha_err);
                    const double zb = z(lc.beta, lc.beta_err, ref.beta, ref.beta_err);
                    lj["reference"] = {{"m0", ref.m0}, {"alpha", ref.alpha}, {"beta", ref.beta}, {"z_m0", zm}, {"z_alpha", za}, {"z_beta", zb},
                                       {"within_3_sigma", zm <= 3.0 && za <= 3.0 && zb <= 3.0}};
                }
            } catch(const std::invalid_argument &e) {
                lj["error"] = e.what();
            }
            lines.push_back(lj);
        }
        out["critical_line"] = lines;
        std::ostringstream os;
        write_line_table_csv(os, line_rows);
        write_file_atomic(dir / "critical_line.csv", os.str());
        write_file_atomic(dir / "critical_points.csv", pts_csv.str());
    }

    if(a.extrapolate) {
        std::vector<LineCoefficients> rows = line_rows;
        std::string source                  = (dir / "critical_line.csv").string();
        if(!a.extrapolate_input.empty()) {
            const auto file = config.resolve(a.extrapolate_input);
            if(!std::filesystem::exists(file)) throw ConfigError("analysis.extrapolate.input", "no such file " + file.string() + "; analysis.critical_line produces one");
            std::istringstream in(read_file(file));
            rows   = read_line_table_csv(in);
            source = file.string();
        }
        json ej;
        ej["input"] = source;
        for(const Parity parity : {Parity::odd, Parity::even}) {
            const auto alphas = parity_alphas(rows, parity, a.include_n2);
            json pj;
            json ns = json::array();
            for(const auto &p : alphas) ns.push_back(p.n);
            pj["n"] = ns;
            try {
                const auto fit = extrapolate_large_n(alphas, parity, a.fixed_b);
                pj["b"]       = fit.b;
                pj["b_err"]   = fit.b_err;
                pj["b_fixed"] = fit.b_fixed;
                pj["d"]       = fit.d;
                pj["d_err"]   = fit.d_err;
                pj["m_c"]     = fit.m_c;
                pj["m_c_err"] = fit.m_c_err;
                pj["chi2"]    = fit.fit.chi2;
            } catch(const std::invalid_argument &e) {
                pj["error"] = e.what();
            }
            ej[parity == Parity::odd ? "odd" : "even"] = pj;
        }
        out["extrapolation"] = ej;
    }

    report.json = out.dump(2) + "\n";
    write_file_atomic(dir / "analysis.json", report.json);
    return report;
}

AnalysisReport run_pipeline(const ExperimentConfig &config, const ProgressFn &progress) {
    bool converged = true;
    if(!config.cases.empty()) converged = run_scan(config, progress).all_converged;
    auto report = run_analysis(config, progress);
    report.all_converged = report.all_converged && converged;
    return report;
}

}  // namespace zngauge
