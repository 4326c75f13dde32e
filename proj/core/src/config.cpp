#include "fklab/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace fklab {

namespace {

struct TomlValue {
    std::variant<bool, double, std::string, std::vector<double>, std::vector<std::string>> v;
    int line = 0;
};

using TomlMap = std::map<std::string, TomlValue>;

[[noreturn]] void fail_at(const std::string& origin, int line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw ConfigError(os.str());
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// Strip a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
            return false;
    return true;
}

std::string parse_quoted(const std::string& origin, int line, const std::string& s) {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"')
        fail_at(origin, line, "malformed string literal: " + s);
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '\\') {
            ++i;
            if (i + 1 >= s.size()) fail_at(origin, line, "dangling escape");
            if (s[i] == '"' || s[i] == '\\')
                out.push_back(s[i]);
            else
                fail_at(origin, line, "unsupported escape in string");
        } else if (s[i] == '"') {
            fail_at(origin, line, "unescaped quote inside string");
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

TomlValue parse_value(const std::string& origin, int line, const std::string& raw) {
    TomlValue tv;
    tv.line = line;
    const std::string s = trim(raw);
    if (s.empty()) fail_at(origin, line, "missing value");
    if (s == "true") {
        tv.v = true;
        return tv;
    }
    if (s == "false") {
        tv.v = false;
        return tv;
    }
    if (s.front() == '"') {
        tv.v = parse_quoted(origin, line, s);
        return tv;
    }
    if (s.front() == '[') {
        if (s.back() != ']') fail_at(origin, line, "arrays must close on the same line");
        std::vector<std::string> items;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            const char c = s[i];
            if (c == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
            if (c == ',' && !quoted) {
                items.push_back(trim(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!trim(cur).empty()) items.push_back(trim(cur));
        if (items.empty()) {
            tv.v = std::vector<double>{};
            return tv;
        }
        if (items.front().front() == '"') {
            std::vector<std::string> arr;
            for (const auto& it : items) arr.push_back(parse_quoted(origin, line, it));
            tv.v = std::move(arr);
            return tv;
        }
        std::vector<double> arr;
        for (const auto& it : items) {
            double x;
            if (!parse_number(it, x)) fail_at(origin, line, "not a number in array: " + it);
            arr.push_back(x);
        }
        tv.v = std::move(arr);
        return tv;
    }
    double x;
    if (parse_number(s, x)) {
        tv.v = x;
        return tv;
    }
    fail_at(origin, line, "cannot parse value: " + s + " (bare words need quotes)");
}

struct ParsedToml {
    TomlMap entries;
    std::map<std::string, int> list_counts;  // array-of-tables name -> block count
};

ParsedToml parse_toml(const std::string& text, const std::string& origin) {
    ParsedToml out;
    std::istringstream in(text);
    std::string rawline;
    std::string prefix;
    int line = 0;
    while (std::getline(in, rawline)) {
        ++line;
        const std::string s = trim(strip_comment(rawline));
        if (s.empty()) continue;
        if (s.front() == '[') {
            const bool is_list = s.size() >= 2 && s[1] == '[';
            const std::string closer = is_list ? "]]" : "]";
            if (s.size() < closer.size() + (is_list ? 2 : 1) ||
                s.substr(s.size() - closer.size()) != closer)
                fail_at(origin, line, "malformed table header: " + s);
            const std::string name =
                trim(s.substr(is_list ? 2 : 1, s.size() - 2 * (is_list ? 2 : 1)));
            if (!valid_key(name)) fail_at(origin, line, "invalid table name: " + name);
            if (is_list) {
                const int idx = out.list_counts[name]++;
                prefix = name + "." + std::to_string(idx) + ".";
            } else {
                if (out.list_counts.count(name))
                    fail_at(origin, line, "table " + name + " already used as a list");
                prefix = name + ".";
            }
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail_at(origin, line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (!valid_key(key)) fail_at(origin, line, "invalid key: " + key);
        const std::string full = prefix + key;
        if (out.entries.count(full)) fail_at(origin, line, "duplicate key: " + full);
        out.entries[full] = parse_value(origin, line, s.substr(eq + 1));
    }
    return out;
}

// Typed, consumption-tracked access so unknown keys can be reported.
class Reader {
  public:
    Reader(const ParsedToml& toml, std::string origin)
        : toml_(toml), origin_(std::move(origin)) {}

    bool has(const std::string& key) const { return toml_.entries.count(key) != 0; }

    int block_count(const std::string& name) const {
        auto it = toml_.list_counts.find(name);
        return it == toml_.list_counts.end() ? 0 : it->second;
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return number(key);
    }
    double number(const std::string& key) {
        const TomlValue& tv = need(key);
        if (const double* x = std::get_if<double>(&tv.v)) return *x;
        fail_at(origin_, tv.line, key + ": expected a number");
    }
    std::string str(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        return str(key);
    }
    std::string str(const std::string& key) {
        const TomlValue& tv = need(key);
        if (const std::string* x = std::get_if<std::string>(&tv.v)) return *x;
        fail_at(origin_, tv.line, key + ": expected a string");
    }
    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const TomlValue& tv = need(key);
        if (const bool* x = std::get_if<bool>(&tv.v)) return *x;
        fail_at(origin_, tv.line, key + ": expected true/false");
    }
    std::vector<double> numbers(const std::string& key) {
        const TomlValue& tv = need(key);
        if (const auto* x = std::get_if<std::vector<double>>(&tv.v)) return *x;
        fail_at(origin_, tv.line, key + ": expected an array of numbers");
    }
    std::array<double, 3> vec(const std::string& key, int dim, std::array<double, 3> fallback) {
        if (!has(key)) return fallback;
        const auto arr = numbers(key);
        if (static_cast<int>(arr.size()) != dim)
            fail_field(key, "expected " + std::to_string(dim) + " components");
        std::array<double, 3> out{0, 0, 0};
        for (int d = 0; d < dim; ++d) out[static_cast<std::size_t>(d)] = arr[static_cast<std::size_t>(d)];
        return out;
    }
    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const double x = number(key);
        if (x != std::floor(x)) fail_field(key, "expected an integer");
        return static_cast<int>(x);
    }

    [[noreturn]] void fail_field(const std::string& key, const std::string& msg) {
        int line = 0;
        auto it = toml_.entries.find(key);
        if (it != toml_.entries.end()) line = it->second.line;
        fail_at(origin_, line, key + ": " + msg);
    }

    void finish() const {
        for (const auto& [key, tv] : toml_.entries)
            if (!consumed_.count(key)) fail_at(origin_, tv.line, "unknown key: " + key);
    }

  private:
    const TomlValue& need(const std::string& key) {
        auto it = toml_.entries.find(key);
        if (it == toml_.entries.end())
            throw ConfigError(origin_ + ": missing required key: " + key);
        consumed_.insert(key);
        return it->second;
    }

    const ParsedToml& toml_;
    std::string origin_;
    std::set<std::string> consumed_;
};

DomainSpec read_domain(Reader& r, const std::string& p) {
    const std::string kind = r.str(p + "kind");
    const int dim = r.integer(p + "dim", 0);
    DomainSpec d;
    if (kind == "box") {
        if (dim != 2 && dim != 3) r.fail_field(p + "dim", "box needs dim = 2 or 3");
        const auto sides = r.vec(p + "sides", dim, {1, 1, 1});
        const auto lo = r.vec(p + "lo", dim, {0, 0, 0});
        for (int k = 0; k < dim; ++k)
            if (!(sides[static_cast<std::size_t>(k)] > 0))
                r.fail_field(p + "sides", "side lengths must be > 0");
        d = DomainSpec::make_box(dim, sides, lo);
    } else if (kind == "ball") {
        if (dim != 2 && dim != 3) r.fail_field(p + "dim", "ball needs dim = 2 or 3");
        const double radius = r.number(p + "radius", 1.0);
        if (!(radius > 0)) r.fail_field(p + "radius", "must be > 0");
        d = DomainSpec::make_ball(dim, radius, r.vec(p + "center", dim, {0, 0, 0}));
    } else if (kind == "lshape") {
        d = DomainSpec::make_lshape(r.number(p + "size", 1.0));
    } else if (kind == "snake") {
        d = DomainSpec::make_snake(r.number(p + "length", 4.0), r.number(p + "width", 0.5));
    } else {
        r.fail_field(p + "kind", "unknown domain kind: " + kind +
                                     " (expected box|ball|lshape|snake)");
    }
    d.name = r.str(p + "name", d.name);
    return d;
}

CoefficientSpec read_coefficients(Reader& r) {
    CoefficientSpec a;
    if (!r.has("coefficients.kind")) return a;
    const std::string kind = r.str("coefficients.kind");
    if (kind == "identity") {
        a.kind = CoefficientSpec::Kind::identity;
    } else if (kind == "diagonal") {
        a.kind = CoefficientSpec::Kind::diagonal;
        a.entries = r.vec("coefficients.entries", 3, {1, 1, 1});
        for (double e : a.entries)
            if (!(e > 0)) r.fail_field("coefficients.entries", "entries must be > 0");
    } else if (kind == "checkerboard") {
        a.kind = CoefficientSpec::Kind::checkerboard;
        a.a = r.number("coefficients.a", 1.0);
        a.b = r.number("coefficients.b", 2.0);
        a.period_cells = r.integer("coefficients.period_cells", 4);
        if (!(a.a > 0) || !(a.b > 0))
            r.fail_field("coefficients.kind", "checkerboard phases must be > 0");
        if (a.period_cells < 1) r.fail_field("coefficients.period_cells", "must be >= 1");
    } else {
        r.fail_field("coefficients.kind",
                     "unknown kind: " + kind + " (expected identity|diagonal|checkerboard)");
    }
    return a;
}

PotentialSpec read_potential(Reader& r, int dim) {
    PotentialSpec v;
    if (!r.has("potential.kind")) return v;
    const std::string kind = r.str("potential.kind");
    if (kind == "constant") {
        v.kind = PotentialSpec::Kind::constant;
    } else if (kind == "half_indicator") {
        v.kind = PotentialSpec::Kind::half_indicator;
    } else if (kind == "ball_indicator") {
        v.kind = PotentialSpec::Kind::ball_indicator;
        v.ball.radius = r.number("potential.radius", 0.25);
        v.ball.center = r.vec("potential.center", dim, {0, 0, 0});
        if (!(v.ball.radius > 0)) r.fail_field("potential.radius", "must be > 0");
    } else if (kind == "log_spike") {
        v.kind = PotentialSpec::Kind::log_spike;
        v.epsilon = r.number("potential.epsilon", 0.05);
        if (!(v.epsilon > 0) || !(v.epsilon < 0.5))
            r.fail_field("potential.epsilon", "must lie in (0, 0.5)");
    } else {
        r.fail_field("potential.kind",
                     "unknown kind: " + kind +
                         " (expected constant|half_indicator|ball_indicator|log_spike)");
    }
    v.value = r.number("potential.value", 1.0);
    if (!(v.value >= 0)) r.fail_field("potential.value", "must be >= 0");
    return v;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    const ParsedToml toml = parse_toml(text, origin);
    Reader r(toml, origin);
    ExperimentConfig cfg;

    cfg.schema_version = r.integer("schema_version", 1);
    if (cfg.schema_version != 1)
        throw ConfigError(origin + ": schema_version: expected 1, got " +
                          std::to_string(cfg.schema_version));
    cfg.h = r.number("h", cfg.h);
    if (!(cfg.h > 0)) r.fail_field("h", "must be > 0");
    const double seed = r.number("seed", static_cast<double>(cfg.seed));
    if (seed < 0 || seed != std::floor(seed)) r.fail_field("seed", "must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.paths = r.integer("paths", cfg.paths);
    if (cfg.paths < 1) r.fail_field("paths", "must be >= 1");
    cfg.horizon = r.number("horizon", 0.0);
    if (cfg.horizon < 0) r.fail_field("horizon", "must be >= 0");
    cfg.out_dir = r.str("out_dir", cfg.out_dir);

    const int blocks = r.block_count("domain");
    if (blocks == 0 && !r.has("domain.kind"))
        throw ConfigError(origin + ": domain: at least one [[domain]] block is required");
    if (blocks > 0) {
        for (int i = 0; i < blocks; ++i)
            cfg.domains.push_back(read_domain(r, "domain." + std::to_string(i) + "."));
    } else {
        cfg.domains.push_back(read_domain(r, "domain."));
    }

    cfg.coefficients = read_coefficients(r);
    cfg.potential = read_potential(r, cfg.domains.front().dim);

    PipelineOpts& p = cfg.pipeline;
    p.eta = r.number("pipeline.eta", r.number("eta", p.eta));
    if (!(p.eta > 0) || !(p.eta < 1)) r.fail_field("eta", "must lie in (0, 1)");
    p.threshold_t1 = r.number("pipeline.threshold_t1", p.threshold_t1);
    p.threshold_t2 = r.number("pipeline.threshold_t2", p.threshold_t2);
    p.t2_radius_constant = r.number("pipeline.t2_radius_constant", p.t2_radius_constant);
    if (!(p.t2_radius_constant > 0)) r.fail_field("pipeline.t2_radius_constant", "must be > 0");
    p.t3_threshold = r.number("pipeline.t3_threshold", p.t3_threshold);
    p.r_exponent = r.number("pipeline.r_exponent", p.r_exponent);
    p.with_chain = r.boolean("pipeline.with_chain", p.with_chain);

    Tolerances& t = p.tol;
    t.eig_rel_tol = r.number("tolerances.eig_rel_tol", t.eig_rel_tol);
    t.calib_rel_tol = r.number("tolerances.calib_rel_tol", t.calib_rel_tol);
    t.cg_tol = r.number("tolerances.cg_tol", t.cg_tol);
    t.theta = r.number("tolerances.theta", t.theta);
    t.chain_slack = r.number("tolerances.chain_slack", t.chain_slack);
    for (double* x : {&t.eig_rel_tol, &t.calib_rel_tol, &t.cg_tol})
        if (!(*x > 0)) throw ConfigError(origin + ": tolerances: must be > 0");
    if (!(t.theta >= 0) || !(t.theta <= 1))
        r.fail_field("tolerances.theta", "must lie in [0, 1]");
    p.step.theta = t.theta;
    p.step.cg_tol = t.cg_tol;

    r.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str(), path);
}

}  // namespace fklab
