#include "varik/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "varik/builtin.hpp"

namespace varik::cli {

using nlohmann::json;

// ---- problem text -----------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
    throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_list(const std::string& raw, const std::string& context) {
    std::string s = trim(raw);
    if (s.empty() || s.front() != '[' || s.back() != ']')
        throw std::runtime_error(context + ": expected a [..] list, got '" + raw + "'");
    s = s.substr(1, s.size() - 2);
    std::vector<std::string> out;
    int depth = 0;
    bool quoted = false;
    std::string cur;
    for (char c : s) {
        if (c == '"') quoted = !quoted;
        if (!quoted) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) {
                out.push_back(trim(cur));
                cur.clear();
                continue;
            }
        }
        cur.push_back(c);
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

}  // namespace

bool ProblemFile::has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) return false;
    for (const auto& [k, v] : it->second)
        if (k == key) return true;
    return false;
}

std::string ProblemFile::get(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it != sections.end()) {
        for (auto e = it->second.rbegin(); e != it->second.rend(); ++e)
            if (e->first == key) return e->second;
    }
    throw std::runtime_error("missing key [" + section + "] " + key);
}

std::string ProblemFile::get_or(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double ProblemFile::number(const std::string& section, const std::string& key) const {
    const std::string v = strip_quotes(get(section, key));
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size())
        throw std::runtime_error("[" + section + "] " + key + ": not a number: '" + v + "'");
    return out;
}

double ProblemFile::number_or(const std::string& section, const std::string& key,
                              double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
}

long ProblemFile::integer_or(const std::string& section, const std::string& key,
                             long fallback) const {
    return has(section, key) ? static_cast<long>(number(section, key)) : fallback;
}

std::vector<double> ProblemFile::number_list(const std::string& section,
                                             const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get(section, key), "[" + section + "] " + key))
        out.push_back(std::stod(strip_quotes(item)));
    return out;
}

std::vector<std::string> ProblemFile::string_list(const std::string& section,
                                                  const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& item : split_list(get(section, key), "[" + section + "] " + key))
        out.push_back(strip_quotes(item));
    return out;
}

std::vector<std::vector<double>> ProblemFile::rect(const std::string& section,
                                                   const std::string& key) const {
    std::vector<std::vector<double>> out;
    for (const auto& item : split_list(get(section, key), "[" + section + "] " + key)) {
        std::vector<double> axis;
        for (const auto& inner : split_list(item, "[" + section + "] " + key))
            axis.push_back(std::stod(strip_quotes(inner)));
        out.push_back(std::move(axis));
    }
    return out;
}

ProblemFile parse_problem_text(const std::string& text, const std::string& origin) {
    ProblemFile out;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            // respect # inside quotes
            bool quoted = false;
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (line[i] == '"') quoted = !quoted;
                if (line[i] == '#' && !quoted) {
                    line = line.substr(0, i);
                    break;
                }
            }
        }
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(origin, lineno, "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) fail(origin, lineno, "empty section name");
            if (out.sections.count(section))
                fail(origin, lineno, "section [" + section + "] appears twice");
            out.sections[section];
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        if (section.empty()) fail(origin, lineno, "key outside a [section]");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty()) fail(origin, lineno, "empty key or value");
        out.sections[section].emplace_back(key, value);
    }
    if (out.sections.count("structure") == 0)
        throw std::runtime_error(origin + ": a problem file needs exactly one [structure]");
    return out;
}

// ---- bundled problems -------------------------------------------------------

namespace {

const std::map<std::string, std::string>& builtin_problems() {
    static const std::map<std::string, std::string> problems = {
        {"euclidean", R"VK(# Euclidean arc length as a Finsler structure
[structure]
kind = finsler
n = 3
expression = "sqrt(y0^2 + y1^2 + y2^2)"
exclude = "fiber-norm"
floor = 0.1

[task]
type = check-homogeneity
lambdas = [0.5, 2.0, 3.14159265358979312]
threshold = 1e-10

[numerics]
seed = 2024
samples = 200

[output]
path = "varik_out/euclidean"
format = json
)VK"},
        {"newton", R"VK(# Newtonian oscillator as a homogeneous first-order density
[structure]
kind = finsler
n = 2
expression = "(m/2)*(y1^2)/y0 - (x1^2/2)*y0"
exclude = "y0"

[constants]
m = 1.0

[curve]
components = ["t", "cos(t)"]
interval = [0.0, 6.283185307179586]

[task]
type = el-residual
threshold = 1e-8

[numerics]
seed = 2024

[output]
path = "varik_out/newton"
format = csv
grid = 100
)VK"},
        {"brachistochrone", R"VK(# brachistochrone: shoot the cycloid from a near-cusp start
[structure]
kind = finsler
n = 2
expression = "sqrt((y0^2 + y1^2)/(2*g*x1))"
exclude = "y0"

[constants]
g = 1.0

[task]
type = solve-bvp
gauge_index = 0
start = [1e-4, 0.0035556279625764686]
end = [3.1415926535897931, 2.0]
slope = [23.695749517925819]
compare = "cycloid"
y_pi = 2.0
threshold = 1e-5
travel_time_expected = 3.0572393840096481
travel_time_rtol = 1e-6

[numerics]
rk4_steps = 20000
shoot_tol = 1e-10
max_iters = 60

[output]
path = "varik_out/brachistochrone"
format = csv
grid = 200
)VK"},
        {"oscillator", R"VK(# harmonic oscillator boundary problem from a lifted Lagrangian
[structure]
kind = finsler
lift = 1
config_dim = 1
lagrangian = "(m/2)*qdot1^2 - (m/2)*q1^2"
lagrangian_vars = ["t", "q1", "qdot1", "m"]

[constants]
m = 1.0

[task]
type = solve-bvp
gauge_index = 0
start = [0.0, 0.0]
end = [1.5707963267948966, 1.0]
compare_components = ["sin(t)"]
threshold = 1e-6

[numerics]
rk4_steps = 2000
shoot_tol = 1e-10

[output]
path = "varik_out/oscillator"
format = csv
grid = 100
)VK"},
        {"second-order-qddot", R"VK(# second-order mechanics: the 1/2 qddot^2 density on cubic curves
[structure]
kind = kawamech
lift = 2
config_dim = 1
lagrangian = "(1/2)*qddot1^2"
lagrangian_vars = ["t", "q1", "qdot1", "qddot1"]

[curve]
components = ["t", "1 + t + t^3"]
interval = [0.0, 2.0]

[task]
type = el-residual
threshold = 1e-7

[output]
path = "varik_out/second-order-qddot"
format = csv
grid = 100
)VK"},
        {"debroglie", R"VK(# De Broglie field: Schrodinger equations on a plane wave
[structure]
kind = areal
scalar = complex
lift = 1
k = 2
fields = 2
lagrangian = "(i/2)*(psibar*psi_t - psibar_t*psi) - (1/(2*m))*psibar_x*psi_x + e*psibar*phi0*psi"
lagrangian_vars = ["t", "xs", "psi", "psibar", "psi_t", "psi_x", "psibar_t", "psibar_x", "m", "e", "phi0"]

[constants]
m = 1.0
e = 0.8
phi0 = 0.3
kappa = 1.2
omega = 0.48

[patch]
components = ["t1", "t2", "exp(i*(kappa*t2 - omega*t1))", "exp(0 - i*(kappa*t2 - omega*t1))"]
rect = [[0.0, 1.0], [0.0, 1.0]]

[task]
type = el-residual
threshold = 1e-7
base_threshold = 1e-9

[output]
path = "varik_out/debroglie"
format = csv
grid = 20
)VK"},
        {"areal2-demo", R"VK(# local second-order 2-areal structure on R^3
[structure]
kind = areal2
n = 3
k = 2
expression = "(z12_1*y13 - z13_1*y12)/y23^2 + a*sqrt(y12^2 + y13^2 + y23^2)"
exclude = "y23"
floor = 0.2

[constants]
a = 0.5

[task]
type = check-homogeneity
lambdas = [0.5, 2.0, 3.14159265358979312]
threshold = 1e-9

[numerics]
seed = 2024
samples = 200

[output]
path = "varik_out/areal2-demo"
format = json
)VK"},
    };
    return problems;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- structure assembly -----------------------------------------------------

struct Constants {
    std::vector<std::string> names;
    std::vector<double> values;
};

// constants that a lifted Lagrangian actually names, in its own order
std::vector<double> env_for(const std::vector<std::string>& lvars, std::size_t coord_count,
                            const Constants& consts) {
    std::vector<double> env;
    for (std::size_t i = coord_count; i < lvars.size(); ++i) {
        auto it = std::find(consts.names.begin(), consts.names.end(), lvars[i]);
        if (it == consts.names.end())
            throw std::runtime_error("[constants] is missing '" + lvars[i] +
                                     "' needed by the Lagrangian");
        env.push_back(consts.values[static_cast<std::size_t>(it - consts.names.begin())]);
    }
    return env;
}

Constants read_constants(const ProblemFile& pf) {
    Constants out;
    auto it = pf.sections.find("constants");
    if (it == pf.sections.end()) return out;
    for (const auto& [k, v] : it->second) {
        out.names.push_back(k);
        out.values.push_back(std::stod(strip_quotes(v)));
    }
    return out;
}

SampleSpec admissibility(const ProblemFile& pf, const std::vector<std::string>& chart,
                         int fiber_start, int fiber_count, bool complex_chart) {
    SampleSpec spec;
    spec.seed = static_cast<std::uint64_t>(pf.integer_or("numerics", "seed", 2024));
    spec.count = static_cast<int>(pf.integer_or("numerics", "samples", 200));
    const int dim = static_cast<int>(chart.size());
    const int box_dim = complex_chart ? 2 * dim : dim;
    if (pf.has("structure", "box")) {
        auto raw = pf.rect("structure", "box");
        for (const auto& axis : raw) {
            if (axis.size() != 2) throw std::runtime_error("[structure] box axes need two entries");
            spec.box.emplace_back(axis[0], axis[1]);
        }
        while (static_cast<int>(spec.box.size()) < box_dim)
            spec.box.push_back(spec.box[spec.box.size() % static_cast<std::size_t>(dim)]);
    } else {
        spec.box.assign(static_cast<std::size_t>(box_dim), {-2.0, 2.0});
    }
    const std::string exclude = strip_quotes(pf.get_or("structure", "exclude", "none"));
    const double floor_value = pf.number_or("structure", "floor", 1e-3);
    if (exclude == "none") {
        spec.exclusion_name = "none";
    } else if (exclude == "fiber-norm") {
        spec.exclusion_name = "fiber-norm";
        spec.exclusion = [fiber_start, fiber_count, floor_value](const std::vector<double>& p) {
            double norm = 0.0;
            for (int i = 0; i < fiber_count; ++i)
                norm += p[static_cast<std::size_t>(fiber_start + i)] *
                        p[static_cast<std::size_t>(fiber_start + i)];
            return std::sqrt(norm) >= floor_value;
        };
    } else {
        auto at = std::find(chart.begin(), chart.end(), exclude);
        if (at == chart.end())
            throw std::runtime_error("[structure] exclude: unknown coordinate '" + exclude + "'");
        int idx = static_cast<int>(at - chart.begin());
        spec.exclusion_name = exclude + "_nonzero";
        if (complex_chart) {
            spec.exclusion = [idx, dim, floor_value](const std::vector<double>& p) {
                double re = p[static_cast<std::size_t>(idx)];
                double im = p[static_cast<std::size_t>(dim + idx)];
                return std::sqrt(re * re + im * im) >= floor_value;
            };
        } else {
            spec.exclusion = away_from_zero({idx}, floor_value);
        }
    }
    return spec;
}

std::vector<std::string> tm_names(int n, bool with_z) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) v.push_back("y" + std::to_string(i));
    if (with_z)
        for (int i = 0; i < n; ++i) v.push_back("z" + std::to_string(i));
    return v;
}

}  // namespace

std::vector<std::string> list_builtins() {
    std::vector<std::string> names;
    for (const auto& [name, text] : builtin_problems()) names.push_back(name);
    return names;
}

const std::string* builtin_text(const std::string& name) {
    auto it = builtin_problems().find(name);
    return it == builtin_problems().end() ? nullptr : &it->second;
}

// ---- task machinery ---------------------------------------------------------

namespace {

struct Outputs {
    std::string dir;
    std::string format;  // csv | json
    int grid = 50;
    json artifacts;  // embedded rows when format == json

    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
        if (format == "csv") {
            std::filesystem::create_directories(dir);
            std::ofstream out(dir + "/" + name + ".csv", std::ios::binary);
            for (std::size_t i = 0; i < header.size(); ++i)
                out << (i ? "," : "") << header[i];
            out << "\n";
            for (const auto& row : rows) {
                for (std::size_t i = 0; i < row.size(); ++i)
                    out << (i ? "," : "") << format_g17(row[i]);
                out << "\n";
            }
        } else {
            json j;
            j["header"] = header;
            j["rows"] = rows;
            artifacts[name] = std::move(j);
        }
    }
};

QuadratureSpec quadrature_of(const ProblemFile& pf) {
    QuadratureSpec q;
    q.gauss_order = static_cast<int>(pf.integer_or("numerics", "gauss_order", 8));
    q.subdivisions = static_cast<int>(pf.integer_or("numerics", "subdivisions", 8));
    q.refine_rtol = pf.number_or("numerics", "refine_rtol", 1e-9);
    q.max_levels = static_cast<int>(pf.integer_or("numerics", "max_levels", 6));
    return q;
}

ExprCurve curve_of(const ProblemFile& pf, const Constants& consts) {
    if (!pf.sections.count("curve")) throw std::runtime_error("this task needs a [curve] section");
    auto comps = pf.string_list("curve", "components");
    auto iv = pf.number_list("curve", "interval");
    if (iv.size() != 2) throw std::runtime_error("[curve] interval needs two numbers");
    return make_expr_curve(comps, {iv[0], iv[1]}, consts.names, consts.values);
}

template <typename S>
ExprPatchT<S> patch_of(const ProblemFile& pf, const Constants& consts, ScalarKind kind) {
    if (!pf.sections.count("patch")) throw std::runtime_error("this task needs a [patch] section");
    auto comps = pf.string_list("patch", "components");
    auto raw = pf.rect("patch", "rect");
    std::vector<std::pair<double, double>> rect;
    for (const auto& axis : raw) rect.emplace_back(axis[0], axis[1]);
    const int k = static_cast<int>(rect.size());
    std::vector<std::string> vars;
    for (int a = 1; a <= k; ++a) vars.push_back("t" + std::to_string(a));
    vars.insert(vars.end(), consts.names.begin(), consts.names.end());
    std::vector<LagrangianExpr> parsed;
    for (const auto& c : comps) parsed.push_back(LagrangianExpr::parse(c, vars, kind));
    std::vector<S> env;
    for (double v : consts.values) env.emplace_back(v);
    return ExprPatchT<S>(std::move(parsed), std::move(rect), k, std::move(env));
}

double theta_for_cycloid_x(double x, double y_pi) {
    double lo = 0.0, hi = M_PI;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (builtin::cycloid_x(mid, y_pi) < x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct TaskContext {
    const ProblemFile& pf;
    Constants consts;
    json metrics;
    json thresholds;
    bool pass = true;
    Outputs out;
};

// ---- structure variants ----

struct BuiltStructures {
    std::optional<FinslerStructure> finsler;
    std::optional<KawaMechStructure> kawamech;
    std::optional<ArealStructure> areal;
    std::optional<CArealStructure> careal;
    std::optional<Areal2Structure> areal2;
    std::string kind;
    std::string expression;
};

BuiltStructures build_structure(const ProblemFile& pf, const Constants& consts) {
    BuiltStructures out;
    out.kind = strip_quotes(pf.get("structure", "kind"));
    const bool lifted = pf.has("structure", "lift");

    if (out.kind == "finsler") {
        if (lifted) {
            auto lvars = pf.string_list("structure", "lagrangian_vars");
            auto L = LagrangianExpr::parse(strip_quotes(pf.get("structure", "lagrangian")), lvars);
            int nc = static_cast<int>(pf.integer_or("structure", "config_dim", 1));
            out.finsler = lift_conventional(L, nc, env_for(lvars, 1 + 2 * static_cast<std::size_t>(nc), consts));
        } else {
            int n = static_cast<int>(pf.number("structure", "n"));
            auto names = tm_names(n, false);
            names.insert(names.end(), consts.names.begin(), consts.names.end());
            auto F = LagrangianExpr::parse(strip_quotes(pf.get("structure", "expression")), names);
            auto adm = admissibility(pf, tm_names(n, false), n, n, false);
            out.finsler = FinslerStructure(n, std::move(F), consts.values, std::move(adm));
        }
        if (pf.has("structure", "exclude") && lifted) {
            auto adm = admissibility(pf, tm_names(out.finsler->n(), false), out.finsler->n(),
                                     out.finsler->n(), false);
            out.finsler->set_admissible_samples(std::move(adm));
        }
        out.expression = out.finsler->F().print();
    } else if (out.kind == "kawamech") {
        if (lifted) {
            auto lvars = pf.string_list("structure", "lagrangian_vars");
            auto L = LagrangianExpr::parse(strip_quotes(pf.get("structure", "lagrangian")), lvars);
            int nc = static_cast<int>(pf.integer_or("structure", "config_dim", 1));
            out.kawamech = lift2_conventional(L, nc, env_for(lvars, 1 + 3 * static_cast<std::size_t>(nc), consts));
        } else {
            int n = static_cast<int>(pf.number("structure", "n"));
            auto names = tm_names(n, true);
            names.insert(names.end(), consts.names.begin(), consts.names.end());
            auto K = LagrangianExpr::parse(strip_quotes(pf.get("structure", "expression")), names);
            auto adm = admissibility(pf, tm_names(n, true), n, n, false);
            out.kawamech = KawaMechStructure(n, std::move(K), consts.values, std::move(adm));
        }
        out.expression = out.kawamech->K().print();
    } else if (out.kind == "areal") {
        const bool is_complex = strip_quotes(pf.get_or("structure", "scalar", "real")) == "complex";
        if (lifted) {
            auto lvars = pf.string_list("structure", "lagrangian_vars");
            ScalarKind sk = is_complex ? ScalarKind::Complex : ScalarKind::Real;
            auto L = LagrangianExpr::parse(strip_quotes(pf.get("structure", "lagrangian")), lvars, sk);
            int k = static_cast<int>(pf.number("structure", "k"));
            int fields = static_cast<int>(pf.number("structure", "fields"));
            auto env_values = env_for(
                lvars, static_cast<std::size_t>(k + fields + fields * k), consts);
            if (is_complex) {
                std::vector<std::complex<double>> env;
                for (double v : env_values) env.emplace_back(v);
                out.careal = lift_field_conventional<std::complex<double>>(L, k, fields, env);
                out.expression = out.careal->K().print();
            } else {
                out.areal = lift_field_conventional<double>(L, k, fields, env_values);
                out.expression = out.areal->K().print();
            }
        } else {
            int n = static_cast<int>(pf.number("structure", "n"));
            int k = static_cast<int>(pf.number("structure", "k"));
            auto chart = ArealStructure::chart_names(n, k);
            auto names = chart;
            names.insert(names.end(), consts.names.begin(), consts.names.end());
            ScalarKind sk = is_complex ? ScalarKind::Complex : ScalarKind::Real;
            auto K = LagrangianExpr::parse(strip_quotes(pf.get("structure", "expression")), names, sk);
            auto adm = admissibility(pf, chart, n, static_cast<int>(chart.size()) - n, is_complex);
            if (is_complex) {
                std::vector<std::complex<double>> env;
                for (double v : consts.values) env.emplace_back(v);
                out.careal = CArealStructure(n, k, std::move(K), env, std::move(adm));
                out.expression = out.careal->K().print();
            } else {
                out.areal = ArealStructure(n, k, std::move(K), consts.values, std::move(adm));
                out.expression = out.areal->K().print();
            }
        }
    } else if (out.kind == "areal2") {
        int n = static_cast<int>(pf.number("structure", "n"));
        int k = static_cast<int>(pf.number("structure", "k"));
        auto chart = Areal2Structure::chart_names(n, k);
        auto names = chart;
        names.insert(names.end(), consts.names.begin(), consts.names.end());
        auto K = LagrangianExpr::parse(strip_quotes(pf.get("structure", "expression")), names);
        auto adm = admissibility(pf, chart, n, static_cast<int>(chart.size()) - n, false);
        int gauge_block = 0;
        out.areal2 = Areal2Structure(n, k, std::move(K), consts.values, std::move(adm), gauge_block);
        out.expression = out.areal2->K().print();
    } else {
        throw std::runtime_error("[structure] kind must be finsler|kawamech|areal|areal2");
    }
    return out;
}

// ---- tasks ----

void record(TaskContext& ctx, const std::string& name, double value, double threshold) {
    ctx.metrics[name] = value;
    ctx.thresholds[name] = threshold;
    if (!(value <= threshold)) ctx.pass = false;
}

void task_check_homogeneity(TaskContext& ctx, BuiltStructures& s) {
    auto lambdas = ctx.pf.has("task", "lambdas")
                       ? ctx.pf.number_list("task", "lambdas")
                       : std::vector<double>{0.5, 2.0, M_PI};
    const double thr = ctx.pf.number_or("task", "threshold", 1e-10);
    if (s.finsler) {
        auto spec = s.finsler->admissible_samples();
        spec.seed = static_cast<std::uint64_t>(ctx.pf.integer_or("numerics", "seed", spec.seed));
        spec.count = static_cast<int>(ctx.pf.integer_or("numerics", "samples", spec.count));
        auto rep = check_homogeneity(*s.finsler, spec, lambdas);
        record(ctx, "scaling_residual", rep.max_rel_residual_scaling, thr);
        record(ctx, "euler_residual", rep.max_rel_residual_euler, thr);
    } else if (s.kawamech) {
        auto rhos = ctx.pf.has("task", "rhos") ? ctx.pf.number_list("task", "rhos")
                                               : std::vector<double>{-1.0, 0.0, 3.0};
        auto spec = s.kawamech->admissible_samples();
        spec.seed = static_cast<std::uint64_t>(ctx.pf.integer_or("numerics", "seed", spec.seed));
        spec.count = static_cast<int>(ctx.pf.integer_or("numerics", "samples", spec.count));
        auto rep = check_zermelo(*s.kawamech, spec, lambdas, rhos);
        record(ctx, "scaling_residual", rep.res_scaling, thr);
        record(ctx, "zermelo_A_residual", rep.res_A, thr);
        record(ctx, "zermelo_B_residual", rep.res_B, thr);
    } else if (s.areal || s.careal) {
        FieldHomogeneityReport rep;
        if (s.areal) {
            auto spec = s.areal->admissible_samples();
            spec.seed = static_cast<std::uint64_t>(ctx.pf.integer_or("numerics", "seed", spec.seed));
            spec.count = static_cast<int>(ctx.pf.integer_or("numerics", "samples", spec.count));
            rep = check_homogeneity_field(*s.areal, spec, lambdas);
        } else {
            auto spec = s.careal->admissible_samples();
            spec.seed = static_cast<std::uint64_t>(ctx.pf.integer_or("numerics", "seed", spec.seed));
            spec.count = static_cast<int>(ctx.pf.integer_or("numerics", "samples", spec.count));
            rep = check_homogeneity_field(*s.careal, spec, lambdas);
        }
        record(ctx, "scaling_residual", rep.max_rel_residual_scaling, thr);
        record(ctx, "euler_residual", rep.max_rel_residual_euler, thr);
    } else if (s.areal2) {
        auto spec = s.areal2->admissible_samples();
        spec.seed = static_cast<std::uint64_t>(ctx.pf.integer_or("numerics", "seed", spec.seed));
        spec.count = static_cast<int>(ctx.pf.integer_or("numerics", "samples", spec.count));
        auto rep = check_homogeneity_field2(*s.areal2, spec, lambdas);
        record(ctx, "scaling_residual", rep.res_scaling, thr);
        record(ctx, "euler_residual", rep.res_euler, thr);
        record(ctx, "transversality_residual", rep.res_transversality, thr);
    }
}

void task_length(TaskContext& ctx, BuiltStructures& s) {
    auto q = quadrature_of(ctx.pf);
    auto c = curve_of(ctx.pf, ctx.consts);
    double value = 0.0, via = 0.0;
    if (s.finsler) {
        auto len = finsler_length(*s.finsler, c, q);
        value = len.value;
        via = len.via_form;
    } else if (s.kawamech) {
        auto len = fk_length(*s.kawamech, c, q);
        value = len.value;
        via = len.via_form;
    } else {
        throw std::runtime_error("length needs a finsler or kawamech structure");
    }
    ctx.metrics["value"] = value;
    ctx.metrics["via_form"] = via;
    if (ctx.pf.has("task", "expected")) {
        double expected = ctx.pf.number("task", "expected");
        double rtol = ctx.pf.number_or("task", "rtol", 1e-9);
        record(ctx, "expected_rel_error",
               std::abs(value - expected) / (std::abs(expected) + 1e-300), rtol);
    }
}

void task_area(TaskContext& ctx, BuiltStructures& s) {
    auto q = quadrature_of(ctx.pf);
    double value = 0.0, via = 0.0;
    if (s.areal) {
        auto p = patch_of<double>(ctx.pf, ctx.consts, ScalarKind::Real);
        auto r = kawaguchi_area<double>(*s.areal, p, q);
        value = r.value;
        via = r.via_form;
    } else if (s.careal) {
        auto p = patch_of<std::complex<double>>(ctx.pf, ctx.consts, ScalarKind::Complex);
        auto r = kawaguchi_area<std::complex<double>>(*s.careal, p, q);
        ctx.metrics["value_re"] = r.value.real();
        ctx.metrics["value_im"] = r.value.imag();
        ctx.metrics["via_form_re"] = r.via_form.real();
        ctx.metrics["via_form_im"] = r.via_form.imag();
        return;
    } else if (s.areal2) {
        auto p = patch_of<double>(ctx.pf, ctx.consts, ScalarKind::Real);
        auto r = kawaguchi2_area(*s.areal2, p, q);
        value = r.value;
        via = r.via_form;
    } else {
        throw std::runtime_error("area needs an areal or areal2 structure");
    }
    ctx.metrics["value"] = value;
    ctx.metrics["via_form"] = via;
    if (ctx.pf.has("task", "expected")) {
        double expected = ctx.pf.number("task", "expected");
        double rtol = ctx.pf.number_or("task", "rtol", 1e-9);
        record(ctx, "expected_rel_error",
               std::abs(value - expected) / (std::abs(expected) + 1e-300), rtol);
    }
}

void task_el_residual(TaskContext& ctx, BuiltStructures& s) {
    const double thr = ctx.pf.number_or("task", "threshold", 1e-8);
    const int grid = static_cast<int>(ctx.pf.integer_or("output", "grid", 50));
    if (s.finsler || s.kawamech) {
        auto c = curve_of(ctx.pf, ctx.consts);
        auto [t0, t1] = c.interval();
        double worst = 0.0;
        std::vector<std::vector<double>> rows;
        const int n = s.finsler ? s.finsler->n() : s.kawamech->n();
        for (int i = 0; i <= grid; ++i) {
            double t = t0 + (t1 - t0) * i / grid;
            auto r = s.finsler ? el_residual(*s.finsler, c, t) : el2_residual(*s.kawamech, c, t);
            std::vector<double> row = {t};
            for (double v : r) {
                row.push_back(v);
                worst = std::max(worst, std::abs(v));
            }
            rows.push_back(std::move(row));
        }
        std::vector<std::string> header = {"t"};
        for (int m = 0; m < n; ++m) header.push_back("R" + std::to_string(m));
        ctx.out.write_csv("el_residual", header, rows);
        record(ctx, "max_residual", worst, thr);
    } else if (s.areal || s.careal) {
        const int n = s.areal ? s.areal->n() : s.careal->n();
        const int k = s.areal ? s.areal->k() : s.careal->k();
        auto raw = ctx.pf.rect("patch", "rect");
        double worst = 0.0, worst_base = 0.0;
        std::vector<std::vector<double>> rows;
        for (int i = 0; i <= grid; ++i) {
            for (int j = 0; j <= (k > 1 ? grid : 0); ++j) {
                std::vector<double> t = {raw[0][0] + (raw[0][1] - raw[0][0]) * i / grid};
                if (k > 1) t.push_back(raw[1][0] + (raw[1][1] - raw[1][0]) * j / grid);
                std::vector<double> row = t;
                if (s.areal) {
                    auto p = patch_of<double>(ctx.pf, ctx.consts, ScalarKind::Real);
                    auto r = el_field_residual<double>(*s.areal, p, t);
                    for (int m = 0; m < n; ++m) {
                        row.push_back(r[static_cast<std::size_t>(m)]);
                        double a = std::abs(r[static_cast<std::size_t>(m)]);
                        worst = std::max(worst, a);
                        if (m < k) worst_base = std::max(worst_base, a);
                    }
                } else {
                    auto p = patch_of<std::complex<double>>(ctx.pf, ctx.consts, ScalarKind::Complex);
                    auto r = el_field_residual<std::complex<double>>(*s.careal, p, t);
                    for (int m = 0; m < n; ++m) {
                        double a = std::abs(r[static_cast<std::size_t>(m)]);
                        row.push_back(a);
                        worst = std::max(worst, a);
                        if (m < k) worst_base = std::max(worst_base, a);
                    }
                }
                rows.push_back(std::move(row));
            }
        }
        std::vector<std::string> header;
        for (int a = 1; a <= k; ++a) header.push_back("t" + std::to_string(a));
        for (int m = 1; m <= n; ++m) header.push_back("R" + std::to_string(m));
        ctx.out.write_csv("el_residual", header, rows);
        record(ctx, "max_residual", worst, thr);
        if (ctx.pf.has("task", "base_threshold"))
            record(ctx, "max_base_residual", worst_base, ctx.pf.number("task", "base_threshold"));
    } else {
        throw std::runtime_error("el-residual is not available for areal2 structures");
    }
}

void task_invariance(TaskContext& ctx, BuiltStructures& s) {
    auto q = quadrature_of(ctx.pf);
    const double thr = ctx.pf.number_or("task", "threshold", 1e-8);
    auto reparam = ctx.pf.string_list("task", "reparam");
    if (s.finsler || s.kawamech) {
        auto c = curve_of(ctx.pf, ctx.consts);
        auto iv = ctx.pf.number_list("task", "reparam_interval");
        // compose the curve components with phi by substitution
        auto comps = ctx.pf.string_list("curve", "components");
        std::vector<std::string> warped;
        for (const auto& comp : comps) {
            std::string w = comp;
            // substitute t -> (phi) textually via expression rewrite
            std::vector<std::string> vars = {"t"};
            vars.insert(vars.end(), ctx.consts.names.begin(), ctx.consts.names.end());
            auto e = LagrangianExpr::parse(comp, vars);
            auto sub = e.substitute({{"t", "(" + reparam[0] + ")"}}, vars);
            warped.push_back(sub.print());
        }
        auto c2 = make_expr_curve(warped, {iv[0], iv[1]}, ctx.consts.names, ctx.consts.values);
        double a = 0.0, b = 0.0;
        if (s.finsler) {
            a = finsler_length(*s.finsler, c, q).value;
            b = finsler_length(*s.finsler, c2, q).value;
        } else {
            a = fk_length(*s.kawamech, c, q).value;
            b = fk_length(*s.kawamech, c2, q).value;
        }
        ctx.metrics["value"] = a;
        ctx.metrics["reparam_value"] = b;
        record(ctx, "rel_difference", std::abs(a - b) / (std::abs(a) + 1e-300), thr);
    } else if (s.areal || s.areal2) {
        auto iv = ctx.pf.rect("task", "reparam_rect");
        auto comps = ctx.pf.string_list("patch", "components");
        const int k = s.areal ? s.areal->k() : s.areal2->k();
        std::vector<std::string> vars;
        for (int a = 1; a <= k; ++a) vars.push_back("t" + std::to_string(a));
        vars.insert(vars.end(), ctx.consts.names.begin(), ctx.consts.names.end());
        std::map<std::string, std::string> repl;
        for (int a = 0; a < k; ++a) repl["t" + std::to_string(a + 1)] = "(" + reparam[static_cast<std::size_t>(a)] + ")";
        std::vector<LagrangianExpr> parsed;
        for (const auto& comp : comps)
            parsed.push_back(LagrangianExpr::parse(comp, vars).substitute(repl, vars));
        std::vector<std::pair<double, double>> rect2;
        for (const auto& axis : iv) rect2.emplace_back(axis[0], axis[1]);
        ExprPatchT<double> p2(std::move(parsed), rect2, k, ctx.consts.values);
        auto p = patch_of<double>(ctx.pf, ctx.consts, ScalarKind::Real);
        double a = 0.0, b = 0.0;
        if (s.areal) {
            a = kawaguchi_area<double>(*s.areal, p, q).value;
            b = kawaguchi_area<double>(*s.areal, p2, q).value;
        } else {
            a = kawaguchi2_area(*s.areal2, p, q).value;
            b = kawaguchi2_area(*s.areal2, p2, q).value;
        }
        ctx.metrics["value"] = a;
        ctx.metrics["reparam_value"] = b;
        record(ctx, "rel_difference", std::abs(a - b) / (std::abs(a) + 1e-300), thr);
    } else {
        throw std::runtime_error("invariance-test needs a real structure kind");
    }
}

void task_noether(TaskContext& ctx, BuiltStructures& s) {
    const double thr = ctx.pf.number_or("task", "threshold", 1e-7);
    auto gen_src = ctx.pf.string_list("task", "generator");
    if (s.finsler) {
        std::vector<std::string> base;
        for (int i = 0; i < s.finsler->n(); ++i) base.push_back("x" + std::to_string(i));
        base.insert(base.end(), ctx.consts.names.begin(), ctx.consts.names.end());
        NoetherSpec u;
        std::vector<std::string> base_only(base.begin(), base.begin() + s.finsler->n());
        for (const auto& g : gen_src) u.generator.push_back(LagrangianExpr::parse(g, base_only));
        auto cur = noether_current(*s.finsler, u);
        auto spec = s.finsler->admissible_samples();
        spec.count = static_cast<int>(ctx.pf.integer_or("numerics", "samples", 50));
        record(ctx, "symmetry_residual", cur.symmetry_test(spec),
               ctx.pf.number_or("task", "symmetry_threshold", 1e-9));
        if (ctx.pf.sections.count("curve")) {
            auto c = curve_of(ctx.pf, ctx.consts);
            auto [t0, t1] = c.interval();
            double first = 0.0, drift = 0.0;
            const int grid = static_cast<int>(ctx.pf.integer_or("output", "grid", 100));
            for (int i = 0; i <= grid; ++i) {
                double t = t0 + (t1 - t0) * i / grid;
                std::vector<double> tt = {t};
                auto lift = tangent_lift_map(c)(tt, 0);
                std::vector<double> state;
                for (const auto& j : lift) state.push_back(j.value());
                double v = cur.value(state);
                if (i == 0)
                    first = v;
                else
                    drift = std::max(drift, std::abs(v - first));
            }
            record(ctx, "max_drift", drift, thr);
        }
    } else if (s.kawamech) {
        std::vector<std::string> base;
        for (int i = 0; i < s.kawamech->n(); ++i) base.push_back("x" + std::to_string(i));
        std::vector<LagrangianExpr> u;
        for (const auto& g : gen_src) u.push_back(LagrangianExpr::parse(g, base));
        auto cur = noether2_current(*s.kawamech, u);
        auto c = curve_of(ctx.pf, ctx.consts);
        auto [t0, t1] = c.interval();
        double first = 0.0, drift = 0.0;
        const int grid = static_cast<int>(ctx.pf.integer_or("output", "grid", 100));
        for (int i = 0; i <= grid; ++i) {
            double t = t0 + (t1 - t0) * i / grid;
            double v = cur.along(c, t);
            if (i == 0)
                first = v;
            else
                drift = std::max(drift, std::abs(v - first));
        }
        record(ctx, "max_drift", drift, thr);
    } else if (s.areal || s.careal) {
        auto q = quadrature_of(ctx.pf);
        q.gauss_order = std::min(q.gauss_order, 6);
        q.subdivisions = std::min(q.subdivisions, 2);
        auto raw = ctx.pf.rect("patch", "rect");
        std::vector<std::pair<double, double>> inner;
        for (const auto& axis : raw) {
            double width = axis[1] - axis[0];
            inner.emplace_back(axis[0] + 0.2 * width, axis[1] - 0.2 * width);
        }
        if (s.careal) {
            std::vector<std::string> base;
            for (int i = 1; i <= s.careal->n(); ++i) base.push_back("x" + std::to_string(i));
            std::vector<LagrangianExpr> u;
            for (const auto& g : gen_src)
                u.push_back(LagrangianExpr::parse(g, base, ScalarKind::Complex));
            auto f = noether_field_current(*s.careal, u);
            auto df = f.exterior_derivative();
            auto p = patch_of<std::complex<double>>(ctx.pf, ctx.consts, ScalarKind::Complex);
            auto r = integrate<std::complex<double>>(df, field_lift_map(p), inner, q);
            record(ctx, "conservation_residual", std::abs(r.value), thr);
        } else {
            std::vector<std::string> base;
            for (int i = 1; i <= s.areal->n(); ++i) base.push_back("x" + std::to_string(i));
            std::vector<LagrangianExpr> u;
            for (const auto& g : gen_src) u.push_back(LagrangianExpr::parse(g, base));
            auto f = noether_field_current(*s.areal, u);
            auto df = f.exterior_derivative();
            auto p = patch_of<double>(ctx.pf, ctx.consts, ScalarKind::Real);
            auto r = integrate<double>(df, field_lift_map(p), inner, q);
            record(ctx, "conservation_residual", std::abs(r.value), thr);
        }
    } else {
        throw std::runtime_error("noether is not available for this structure kind");
    }
}

void task_solve_bvp(TaskContext& ctx, BuiltStructures& s) {
    if (!s.finsler) throw std::runtime_error("solve-bvp needs a finsler structure");
    BvpProblem p;
    p.structure = &*s.finsler;
    p.gauge.gauge_index = static_cast<int>(ctx.pf.integer_or("task", "gauge_index", 0));
    p.gauge.admissible_check = ctx.pf.number_or("task", "hessian_threshold", 1e-10);
    p.start = ctx.pf.number_list("task", "start");
    p.end = ctx.pf.number_list("task", "end");
    p.rk4_steps = static_cast<int>(ctx.pf.integer_or("numerics", "rk4_steps", 2000));
    p.shoot_tol = ctx.pf.number_or("numerics", "shoot_tol", 1e-10);
    p.max_iters = static_cast<int>(ctx.pf.integer_or("numerics", "max_iters", 60));
    if (ctx.pf.has("task", "slope")) p.initial_slope = ctx.pf.number_list("task", "slope");
    auto sol = solve_bvp(p);
    ctx.metrics["iterations"] = sol.iterations;
    ctx.metrics["endpoint_miss"] = sol.endpoint_miss;
    record(ctx, "max_el_residual", sol.max_el_residual,
           ctx.pf.number_or("task", "residual_threshold", 1e-6));

    const int grid = static_cast<int>(ctx.pf.integer_or("output", "grid", 100));
    const int n = s.finsler->n();
    auto [t0, t1] = sol.curve->interval();
    std::vector<std::vector<double>> rows;
    for (int i = 0; i <= grid; ++i) {
        double t = t0 + (t1 - t0) * i / grid;
        auto jets = sol.curve->components(t, 1);
        std::vector<double> row = {t};
        for (const auto& j : jets) row.push_back(j.value());
        for (const auto& j : jets) row.push_back(j.coeff(1));
        rows.push_back(std::move(row));
    }
    std::vector<std::string> header = {"t"};
    for (int i = 0; i < n; ++i) header.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) header.push_back("xdot" + std::to_string(i));
    ctx.out.write_csv("curve", header, rows);

    const double thr = ctx.pf.number_or("task", "threshold", 1e-5);
    const std::string compare = strip_quotes(ctx.pf.get_or("task", "compare", ""));
    if (compare == "cycloid") {
        const double y_pi = ctx.pf.number_or("task", "y_pi", 2.0);
        double worst = 0.0;
        for (int i = 1; i <= 200; ++i) {
            double x = t0 + (t1 - t0) * i / 200.0;
            double theta = theta_for_cycloid_x(x, y_pi);
            worst = std::max(worst,
                             std::abs(sol.curve->point(x)[1] - builtin::cycloid_y(theta, y_pi)));
        }
        record(ctx, "compare_sup_norm", worst, thr);
    } else if (ctx.pf.has("task", "compare_components")) {
        auto exprs = ctx.pf.string_list("task", "compare_components");
        std::vector<std::string> vars = {"t"};
        vars.insert(vars.end(), ctx.consts.names.begin(), ctx.consts.names.end());
        double worst = 0.0;
        for (int i = 0; i <= 200; ++i) {
            double t = t0 + (t1 - t0) * i / 200.0;
            auto pt = sol.curve->point(t);
            int slot = 0;
            for (int c = 0; c < n; ++c) {
                if (c == p.gauge.gauge_index) continue;
                std::vector<double> args = {t};
                args.insert(args.end(), ctx.consts.values.begin(), ctx.consts.values.end());
                auto e = LagrangianExpr::parse(exprs[static_cast<std::size_t>(slot)], vars);
                worst = std::max(worst, std::abs(pt[static_cast<std::size_t>(c)] -
                                                 e.evaluate_real(args)));
                ++slot;
            }
        }
        record(ctx, "compare_sup_norm", worst, thr);
    }
    if (ctx.pf.has("task", "travel_time_expected")) {
        auto q = quadrature_of(ctx.pf);
        std::vector<std::string> svar = {"s"};
        auto phi = LagrangianExpr::parse(
            format_g17(t0) + " + " + format_g17(t1 - t0) + "*s^3", svar);
        WarpedCurve warped(sol.curve, phi, {0.0, 1.0});
        double time = finsler_length(*s.finsler, warped, q).value;
        ctx.metrics["travel_time"] = time;
        double expected = ctx.pf.number("task", "travel_time_expected");
        record(ctx, "travel_time_rel_error",
               std::abs(time - expected) / (std::abs(expected) + 1e-300),
               ctx.pf.number_or("task", "travel_time_rtol", 1e-6));
    }
}

void task_lift_conventional(TaskContext& ctx, BuiltStructures& s) {
    // the structure was built via lift already; report residuals
    const double thr = ctx.pf.number_or("task", "threshold", 1e-10);
    double lambdas[] = {0.5, 2.0, M_PI};
    if (s.finsler) {
        auto spec = s.finsler->admissible_samples();
        auto rep = check_homogeneity(*s.finsler, spec, lambdas);
        record(ctx, "scaling_residual", rep.max_rel_residual_scaling, thr);
        record(ctx, "euler_residual", rep.max_rel_residual_euler, thr);
    } else if (s.kawamech) {
        double rhos[] = {-1.0, 0.0, 3.0};
        auto spec = s.kawamech->admissible_samples();
        auto rep = check_zermelo(*s.kawamech, spec, lambdas, rhos);
        record(ctx, "scaling_residual", rep.res_scaling, thr);
        record(ctx, "zermelo_A_residual", rep.res_A, thr);
        record(ctx, "zermelo_B_residual", rep.res_B, thr);
    } else {
        throw std::runtime_error("lift-conventional reports need a lifted structure");
    }
    ctx.metrics["lifted_expression"] = s.expression;
}

void task_chart_test(TaskContext& ctx, BuiltStructures& s) {
    if (!s.finsler) throw std::runtime_error("chart-test needs a finsler structure");
    const double thr = ctx.pf.number_or("task", "threshold", 1e-8);
    auto phi_src = ctx.pf.string_list("task", "phi");
    std::vector<std::string> base;
    for (int i = 0; i < s.finsler->n(); ++i) base.push_back("x" + std::to_string(i));
    std::vector<LagrangianExpr> phi;
    for (const auto& src : phi_src) phi.push_back(LagrangianExpr::parse(src, base));
    auto c = curve_of(ctx.pf, ctx.consts);
    int samples = static_cast<int>(ctx.pf.integer_or("numerics", "samples", 25));
    record(ctx, "max_discrepancy", chart_transition_test(*s.finsler, phi, c, samples), thr);
}

}  // namespace

namespace {

// every section/key the format understands; violations are listed together
const std::map<std::string, std::vector<std::string>>& known_schema() {
    static const std::map<std::string, std::vector<std::string>> schema = {
        {"structure",
         {"kind", "n", "k", "scalar", "expression", "lift", "config_dim", "fields", "lagrangian",
          "lagrangian_vars", "exclude", "floor", "box"}},
        {"constants", {}},  // any names
        {"curve", {"components", "interval"}},
        {"patch", {"components", "rect"}},
        {"task",
         {"type", "threshold", "lambdas", "rhos", "generator", "reparam", "reparam_interval",
          "reparam_rect", "start", "end", "gauge_index", "slope", "compare", "y_pi",
          "compare_components", "travel_time_expected", "travel_time_rtol", "base_threshold",
          "expected", "rtol", "hessian_threshold", "residual_threshold", "symmetry_threshold",
          "phi"}},
        {"numerics",
         {"gauss_order", "subdivisions", "refine_rtol", "max_levels", "seed", "samples",
          "rk4_steps", "shoot_tol", "max_iters"}},
        {"output", {"path", "format", "grid"}},
    };
    return schema;
}

void validate_schema(const ProblemFile& pf) {
    std::vector<std::string> violations;
    for (const auto& [section, entries] : pf.sections) {
        auto it = known_schema().find(section);
        if (it == known_schema().end()) {
            violations.push_back("unknown section [" + section + "]");
            continue;
        }
        if (section == "constants") continue;
        for (const auto& [key, value] : entries) {
            (void)value;
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                violations.push_back("unknown key [" + section + "] " + key);
        }
    }
    if (!violations.empty()) {
        std::string all = "schema violations:";
        for (const auto& v : violations) all += "\n  " + v;
        throw std::runtime_error(all);
    }
}

}  // namespace

RunResult run(const std::string& path_or_name, const std::vector<std::string>& overrides) {
    RunResult result;
    const auto t_begin = std::chrono::steady_clock::now();
    json report;
    try {
        std::string text;
        std::string origin = path_or_name;
        if (const std::string* bundled = builtin_text(path_or_name)) {
            text = *bundled;
        } else {
            std::ifstream in(path_or_name, std::ios::binary);
            if (!in)
                throw std::runtime_error("cannot open problem file or builtin '" + path_or_name +
                                         "'");
            std::ostringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }
        auto pf = parse_problem_text(text, origin);
        for (const auto& ov : overrides) {
            auto eq = ov.find('=');
            auto dot = ov.find('.');
            if (eq == std::string::npos || dot == std::string::npos || dot > eq)
                throw std::runtime_error("override must look like section.key=value: '" + ov + "'");
            std::string section = ov.substr(0, dot);
            std::string key = ov.substr(dot + 1, eq - dot - 1);
            std::string value = ov.substr(eq + 1);
            if (!pf.sections.count(section))
                throw std::runtime_error("override references unknown section '" + section + "'");
            bool known = pf.has(section, key);
            if (!known)
                throw std::runtime_error("override references unknown key '" + section + "." + key +
                                         "'");
            for (auto& [k, v] : pf.sections[section])
                if (k == key) v = value;
        }
        validate_schema(pf);

        TaskContext ctx{pf, read_constants(pf), json::object(), json::object(), true, {}};
        ctx.out.dir = strip_quotes(pf.get_or("output", "path", "varik_out/run"));
        ctx.out.format = strip_quotes(pf.get_or("output", "format", "json"));
        ctx.out.grid = static_cast<int>(pf.integer_or("output", "grid", 50));

        auto s = build_structure(pf, ctx.consts);
        const std::string type = strip_quotes(pf.get("task", "type"));

        if (type == "check-homogeneity")
            task_check_homogeneity(ctx, s);
        else if (type == "length")
            task_length(ctx, s);
        else if (type == "area")
            task_area(ctx, s);
        else if (type == "el-residual")
            task_el_residual(ctx, s);
        else if (type == "invariance-test")
            task_invariance(ctx, s);
        else if (type == "noether")
            task_noether(ctx, s);
        else if (type == "solve-bvp")
            task_solve_bvp(ctx, s);
        else if (type == "lift-conventional")
            task_lift_conventional(ctx, s);
        else if (type == "chart-test")
            task_chart_test(ctx, s);
        else
            throw std::runtime_error("unknown task type '" + type + "'");

        report["task"] = type;
        report["structure"] = json{{"kind", s.kind}, {"expression", s.expression}};
        report["metrics"] = ctx.metrics;
        report["thresholds"] = ctx.thresholds;
        report["pass"] = ctx.pass;
        if (!ctx.out.artifacts.is_null()) report["artifacts"] = ctx.out.artifacts;
        const auto t_end = std::chrono::steady_clock::now();
        report["timing_ms"] = static_cast<long>(
            std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_begin).count());

        std::filesystem::create_directories(ctx.out.dir);
        std::ofstream out(ctx.out.dir + "/report.json", std::ios::binary);
        out << report.dump(2) << "\n";

        result.report = report.dump(2);
        result.exit_code = ctx.pass ? 0 : 2;
    } catch (const std::exception& err) {
        result.exit_code = 1;
        result.error = err.what();
        report["error"] = err.what();
        result.report = report.dump(2);
    }
    return result;
}

std::string schema_text() {
    return R"(varik problem files are structured text with [section] headers and
key = value lines. '#' starts a comment. Values are numbers, "quoted
strings", bare words, or (nested) lists like [0, 1] and [[0,1],[0,2]].

[structure]   required, exactly one
  kind        finsler | kawamech | areal | areal2
  n           chart dimension (finsler/kawamech/areal/areal2)
  k           parameter-space dimension (areal kinds)
  scalar      real | complex (areal only; complex treats fields and their
              conjugates as independent coordinates)
  expression  density over the chart names; finsler charts are x0..,y0..,
              kawamech adds z0.., areal uses x1.. plus ordered multivector
              names y12,y13,.., areal2 adds z-slot names like z12_1, z12_13
  lift        1 | 2: build the density from a conventional Lagrangian
  config_dim  configuration dimension of the lifted Lagrangian
  fields      field count for areal lifts (k + fields chart dimensions)
  lagrangian, lagrangian_vars   the conventional density and its variables
  exclude     admissibility: coordinate name, "fiber-norm", or "none"
  floor       admissibility floor (default 1e-3)
  box         sampling box per chart coordinate (default [-2,2] each)

[constants]   name = value pairs, bound in file order after the chart names

[curve]       components = ["expr of t", ...], interval = [a, b]
[patch]       components = ["expr of t1..tk", ...], rect = [[a,b], ...]

[task]
  type = check-homogeneity | length | area | el-residual | invariance-test
       | noether | solve-bvp | lift-conventional | chart-test
  threshold             pass/fail bound for the task metric
  lambdas, rhos         homogeneity scale grids
  generator             Noether generator expressions over the base names
  reparam, reparam_interval, reparam_rect   invariance-test parameter maps
  start, end, gauge_index, slope            solve-bvp data
  compare = "cycloid" (y_pi = ...) or compare_components = ["expr of t", ...]
  travel_time_expected, travel_time_rtol    solve-bvp length regression
  base_threshold        field el-residual bound for the base components
  expected, rtol        length/area regression values

[numerics]    gauss_order subdivisions refine_rtol max_levels seed samples
              rk4_steps shoot_tol max_iters

[output]
  path        artifact directory (report.json always lands here)
  format      csv | json (grid artifacts as files or embedded arrays)
  grid        sampling resolution for residual grids and curve dumps

Exit codes: 0 pass, 2 a check ran and failed (report still written),
1 error. CSV uses '.' decimals, '\n' line endings, 17 significant digits.
)";
}

}  // namespace varik::cli
