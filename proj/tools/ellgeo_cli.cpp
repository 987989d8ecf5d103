// ellgeo: command-line front end.  Every command writes one output file plus
// a <output>.config.json sidecar holding the fully resolved configuration.
//
// Exit codes: 0 success, 1 selftest failure, 2 bad input, 3 numerical failure.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <ellgeo/actions.hpp>
#include <ellgeo/bifurcation.hpp>
#include <ellgeo/dynamics.hpp>
#include <ellgeo/elliptic.hpp>

#include "acceptance_suite.hpp"
#include "cli_io.hpp"

using namespace ellgeo;
using json = nlohmann::ordered_json;

namespace {

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string alphas;
    double h = 0.5;
    std::uint64_t seed = 0;
    std::string output;
    std::string format;
    std::vector<std::string> tol;

    // simulate
    bool random = false;
    std::string x0, y0;
    double t_end = 10.0;
    double dt = 1e-3;
    int stride = 100;

    // bifurcation
    int samples = 512;

    // actions
    std::string grid = "-1:1:21,-1:2:31";

    // monodromy
    std::string loop = "0.5,0.5,64";
    std::string center = "0,0";

    // revolution
    double alpha0 = 1.0, alpha1 = 2.0, alpha3 = 4.0;
    std::string rev_case = "both";
    int points = 21;
};

std::vector<double> parse_reals(const std::string& text, char sep, size_t expect, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        try {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Usage(std::string(what) + ": '" + item + "' is not a number");
        }
    }
    if (expect && out.size() != expect)
        throw Usage(std::string(what) + " needs " + std::to_string(expect) + " values, got " + std::to_string(out.size()));
    return out;
}

EllipsoidSpec spec_of(const Options& o) {
    if (o.alphas.empty()) throw Usage("--alphas is required");
    auto v = parse_reals(o.alphas, ',', 4, "--alphas");
    return EllipsoidSpec({v[0], v[1], v[2], v[3]});
}

std::map<std::string, double> tolerances(const Options& o, const std::map<std::string, double>& defaults) {
    std::map<std::string, double> t = defaults;
    for (const auto& kv : o.tol) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw Usage("--tol expects name=value, got '" + kv + "'");
        std::string name = kv.substr(0, eq);
        if (!t.count(name)) {
            std::string known;
            for (const auto& [k, _] : defaults) known += (known.empty() ? "" : ", ") + k;
            throw Usage("unknown tolerance '" + name + "' (known: " + (known.empty() ? "none" : known) + ")");
        }
        t[name] = parse_reals(kv.substr(eq + 1), ',', 1, "--tol")[0];
    }
    return t;
}

std::string output_path(const Options& o, const std::string& cmd, const std::string& fmt) {
    return o.output.empty() ? cmd + "." + fmt : o.output;
}

std::string format_of(const Options& o, const std::string& fallback) {
    std::string f = o.format.empty() ? fallback : o.format;
    if (f != "csv" && f != "json") throw Usage("--format must be csv or json");
    return f;
}

json base_config(const std::string& cmd, const EllipsoidSpec& s, const Options& o, const std::string& out,
                 const std::string& fmt, const std::map<std::string, double>& tol) {
    json c;
    c["command"] = cmd;
    c["alphas"] = {s.alpha(0), s.alpha(1), s.alpha(2), s.alpha(3)};
    c["symmetry"] = to_string(s.tag());
    c["h"] = o.h;
    c["seed"] = o.seed;
    c["output"] = out;
    c["format"] = fmt;
    c["tolerances"] = json::object();
    for (const auto& [k, v] : tol) c["tolerances"][k] = v;
    return c;
}

void emit(const std::string& path, const std::string& body, const json& config) {
    cli::write_text(path, body);
    cli::write_text(path + ".config.json", config.dump(2) + "\n");
    std::cout << "wrote " << path << "\n";
}

std::string table_text(const cli::Table& t, const std::string& fmt) {
    if (fmt == "json") return t.to_json().dump(2) + "\n";
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Options& o) {
    EllipsoidSpec s = spec_of(o);
    auto tol = tolerances(o, {{"drift_floor", 1e-3}});
    std::string fmt = format_of(o, "csv");
    std::string out = output_path(o, "simulate", fmt);
    if (o.random == !o.x0.empty()) throw Usage("give either --random or --x0/--y0");

    PhasePoint p0 = [&] {
        if (o.random) {
            std::mt19937_64 rng(o.seed);
            return random_leaf_point(s, rng, o.h);
        }
        if (o.y0.empty()) throw Usage("--x0 needs --y0");
        auto x = parse_reals(o.x0, ',', 4, "--x0"), y = parse_reals(o.y0, ',', 4, "--y0");
        return project_to_leaf(s, Vec4(x[0], x[1], x[2], x[3]), Vec4(y[0], y[1], y[2], y[3]));
    }();

    Trajectory tr = integrate(s, p0, o.t_end, o.dt, 1);
    double h0 = energy(p0);
    double floor = tol["drift_floor"] * 2.0 * h0;
    IntegralValues v0 = integral_values(s, p0);
    auto rel = [&](double now, double then) { return std::abs(now - then) / std::max(std::abs(then), floor); };

    cli::Table t;
    t.columns = {"t", "x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3", "H", "C1", "C2"};
    if (s.tag() == SymmetryTag::generic)
        for (const char* c : {"F0", "F1", "F2", "F3"}) t.columns.push_back(c);
    else if (s.tag() == SymmetryTag::equal_middle)
        for (const char* c : {"J", "G"}) t.columns.push_back(c);
    t.columns.push_back("max_rel_drift");

    double worst = 0.0;
    for (size_t k = 0; k < tr.samples.size(); ++k) {
        const auto& sm = tr.samples[k];
        IntegralValues v = integral_values(s, sm.p);
        double d = rel(v.h, v0.h);
        if (v.symmetric) {
            d = std::max({d, rel(v.j, v0.j), rel(v.g, v0.g)});
        } else if (s.tag() == SymmetryTag::generic) {
            for (int i = 0; i < 4; ++i) d = std::max(d, rel(v.f[i], v0.f[i]));
        }
        worst = std::max(worst, d);
        if (k % static_cast<size_t>(o.stride) != 0 && k + 1 != tr.samples.size()) continue;
        Casimirs c = casimirs(s, sm.p);
        std::vector<cli::Cell> row{sm.t};
        for (int i = 0; i < 4; ++i) row.push_back(sm.p.x()[i]);
        for (int i = 0; i < 4; ++i) row.push_back(sm.p.y()[i]);
        row.insert(row.end(), {v.h, c.c1, c.c2});
        if (s.tag() == SymmetryTag::generic)
            for (int i = 0; i < 4; ++i) row.push_back(v.f[i]);
        else if (v.symmetric)
            row.insert(row.end(), {v.j, v.g});
        row.push_back(worst);
        t.rows.push_back(std::move(row));
    }

    json cfg = base_config("simulate", s, o, out, fmt, tol);
    cfg["initial"] = o.random ? json("random") : json({{"x0", o.x0}, {"y0", o.y0}});
    cfg["t_end"] = o.t_end;
    cfg["dt"] = o.dt;
    cfg["stride"] = o.stride;
    cfg["scheme"] = tr.scheme_id;
    emit(out, table_text(t, fmt), cfg);

    std::cout << "max relative drift of " << (s.tag() == SymmetryTag::generic ? "F_i" : v0.symmetric ? "H, J, G" : "H")
              << ": " << cli::fmt(worst) << "\n";
    if (s.tag() == SymmetryTag::sphere_like) {
        // geodesics are great circles: x stays in span(x0, y0) and closes after 2 pi r/|y|
        Eigen::Matrix<double, 4, 2> basis;
        basis << p0.x(), p0.y();
        Eigen::HouseholderQR<Eigen::Matrix<double, 4, 2>> qr(basis);
        Eigen::Matrix<double, 4, 2> Q = qr.householderQ() * Eigen::Matrix<double, 4, 2>::Identity();
        double plane = 0.0;
        for (const auto& sm : tr.samples) plane = std::max(plane, (sm.p.x() - Q * (Q.transpose() * sm.p.x())).norm());
        double period = 2.0 * std::numbers::pi * std::sqrt(s.alpha(0)) / p0.y().norm();
        Trajectory loop = integrate(s, p0, period, o.dt, 1 << 30);
        double closure = (loop.samples.back().p.x() - p0.x()).norm();
        std::cout << "great circle: max distance from plane " << cli::fmt(plane) << ", closure after one period "
                  << cli::fmt(closure) << "\n";
    }
    return 0;
}

// ------------------------------------------------------------- bifurcation

json eigen_json(const std::vector<std::complex<double>>& ev) {
    json a = json::array();
    for (auto z : ev) a.push_back({z.real(), z.imag()});
    return a;
}

int cmd_bifurcation(const Options& o) {
    EllipsoidSpec s = spec_of(o);
    auto tol = tolerances(o, {});
    std::string fmt = format_of(o, "json");
    std::string out = output_path(o, "bifurcation", fmt);
    BifurcationDiagram d;
    if (s.tag() == SymmetryTag::generic)
        d = generic_diagram(s, o.h, o.samples);
    else if (s.tag() == SymmetryTag::equal_middle)
        d = symmetric_diagram(s, o.h, o.samples);
    else
        fail(ErrorCode::wrong_symmetry, "bifurcation diagrams need four distinct axes or alpha_0 < alpha_1 = alpha_2 < alpha_3");

    const char* uname = d.chart == Chart::generic ? "s1" : "j";
    const char* vname = d.chart == Chart::generic ? "s2" : "g";
    std::string body;
    if (fmt == "json") {
        json j;
        j["chart"] = d.chart == Chart::generic ? "generic" : "symmetric";
        j["h"] = d.h;
        j["axes"] = {uname, vname};
        j["curves"] = json::array();
        for (const auto& c : d.curves) {
            json cj{{"label", c.label}, {"kind", to_string(c.kind)}, {"type", to_string(c.type)},
                    {"param_min", c.param_min}, {"param_max", c.param_max}, {"coefficients", c.coefficients}};
            cj["polyline"] = json::array();
            for (const auto& p : c.polyline) cj["polyline"].push_back({p.param, p.c1, p.c2});
            j["curves"].push_back(std::move(cj));
        }
        j["points"] = json::array();
        for (const auto& p : d.points)
            j["points"].push_back({{"label", p.label},
                                   {"type", to_string(p.type)},
                                   {"corank", p.corank},
                                   {uname, p.location.u},
                                   {vname, p.location.v},
                                   {"eigenvalues", eigen_json(p.eigenvalues)}});
        j["annotations"] = d.annotations;
        body = j.dump(2) + "\n";
    } else {
        cli::Table t;
        t.columns = {"record", "label", "kind", "param", uname, vname};
        for (const auto& c : d.curves)
            for (const auto& p : c.polyline) t.rows.push_back({"curve", c.label, to_string(c.type), p.param, p.c1, p.c2});
        for (const auto& p : d.points)
            t.rows.push_back({"point", p.label, to_string(p.type), std::nan(""), p.location.u, p.location.v});
        body = table_text(t, fmt);
    }
    json cfg = base_config("bifurcation", s, o, out, fmt, tol);
    cfg["samples"] = o.samples;
    emit(out, body, cfg);

    if (d.chart == Chart::generic) {
        std::vector<double> seen;
        int arcs = 0, corank2 = 0, tangency = 0;
        for (const auto& c : d.curves) {
            if (c.kind == CurveKind::double_root_curve) ++arcs;
            if (c.kind == CurveKind::subflow_line && std::find(seen.begin(), seen.end(), c.coefficients[1]) == seen.end())
                seen.push_back(c.coefficients[1]);
        }
        for (const auto& p : d.points) (p.corank == 2 ? corank2 : tangency) += 1;
        std::cout << "lines " << seen.size() << ", arcs " << arcs << ", corank-2 points " << corank2
                  << ", tangency points " << tangency << "\n";
    } else {
        int corners = 0, ff = 0;
        for (const auto& p : d.points) (p.type == PointType::focus_focus ? ff : corners) += 1;
        std::cout << "parabolas " << d.curves.size() << ", corners " << corners << ", focus-focus points " << ff << "\n";
    }
    return 0;
}

// ----------------------------------------------------------------- actions

struct Range {
    double lo, hi;
    int n;
    double at(int k) const { return n == 1 ? lo : lo + (hi - lo) * k / (n - 1); }
};

Range parse_range(const std::string& text) {
    auto v = parse_reals(text, ':', 3, "--grid range");
    if (v[2] < 1 || v[2] != std::floor(v[2])) throw Usage("--grid point counts must be positive integers");
    return {v[0], v[1], static_cast<int>(v[2])};
}

int cmd_actions(const Options& o) {
    EllipsoidSpec s = spec_of(o);
    s.require_equal_middle("action grid");
    auto tol = tolerances(o, {});
    std::string fmt = format_of(o, "csv");
    std::string out = output_path(o, "actions", fmt);
    auto comma = o.grid.find(',');
    if (comma == std::string::npos) throw Usage("--grid expects jmin:jmax:n,gmin:gmax:m");
    Range rj = parse_range(o.grid.substr(0, comma)), rg = parse_range(o.grid.substr(comma + 1));

    struct CellResult {
        std::string status = "ok";
        ActionFrame fr;
    };
    const size_t ncell = static_cast<size_t>(rj.n) * rg.n;
    std::vector<CellResult> res(ncell);
    auto work = [&](size_t k) {
        double j = rj.at(static_cast<int>(k / rg.n)), g = rg.at(static_cast<int>(k % rg.n));
        CellResult& r = res[k];
        r.fr.j = j;
        r.fr.g = g;
        if (g < g_lower(s, o.h, j) || g > g_upper(s, o.h, j)) {
            r.status = "outside_image";
            return;
        }
        try {
            r.fr = action_frame(s, o.h, g, j);
        } catch (const Error& e) {
            r.status = to_string(e.code());
            r.fr.j = j;
            r.fr.g = g;
        }
    };
    // cells are independent; each thread takes a stride of them and results land by index
    unsigned nt = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < nt; ++w)
            pool.emplace_back([&, w] {
                for (size_t k = w; k < ncell; k += nt) work(k);
            });
    }

    cli::Table t;
    t.columns = {"j", "g", "status", "I1", "I2", "I3", "dI2_dj", "dI2_dg", "dI2_dh", "dI3_dj", "dI3_dg", "dI3_dh"};
    size_t ok = 0;
    const double nan = std::nan("");
    for (const auto& r : res) {
        bool good = r.status == "ok";
        ok += good;
        std::vector<cli::Cell> row{r.fr.j, r.fr.g, r.status};
        for (int i = 0; i < 3; ++i) row.push_back(good ? r.fr.I[i] : nan);
        for (int i = 1; i < 3; ++i)
            for (int c = 0; c < 3; ++c) row.push_back(good ? r.fr.dI(i, c) : nan);
        t.rows.push_back(std::move(row));
    }
    json cfg = base_config("actions", s, o, out, fmt, tol);
    cfg["grid"] = {{"j", {rj.lo, rj.hi, rj.n}}, {"g", {rg.lo, rg.hi, rg.n}}};
    emit(out, table_text(t, fmt), cfg);
    std::cout << ok << " of " << ncell << " cells evaluated\n";
    return 0;
}

// --------------------------------------------------------------- monodromy

json matrix_json(const TransitionMatrix& m) { return m.entries(); }

int cmd_monodromy(const Options& o) {
    EllipsoidSpec s = spec_of(o);
    auto tol = tolerances(o, {});
    if (!o.format.empty() && o.format != "json") throw Usage("monodromy output is JSON only");
    std::string out = output_path(o, "monodromy", "json");
    auto lp = parse_reals(o.loop, ',', 3, "--loop");
    auto ct = parse_reals(o.center, ',', 2, "--center");
    if (lp[2] != std::floor(lp[2])) throw Usage("--loop step count must be an integer");
    MonodromyResult r = monodromy(s, o.h, lp[0], lp[1], static_cast<int>(lp[2]), ct[0], ct[1]);

    json j;
    j["h"] = r.h;
    j["loop"] = {{"center_j", r.center_j}, {"center_g", r.center_g}, {"radius_j", r.radius_j},
                 {"radius_g", r.radius_g}, {"n_steps", r.n_steps}};
    j["encloses_singularity"] = r.encloses_singularity;
    j["crossings"] = json::array();
    for (const auto& c : r.crossings)
        j["crossings"].push_back({{"theta", c.theta},
                                  {"g", c.g},
                                  {"from", c.from == Side::j_pos ? "j>0" : "j<0"},
                                  {"T", matrix_json(c.T)}});
    j["M1"] = matrix_json(r.M1);
    j["M2"] = matrix_json(r.M2);
    j["H"] = matrix_json(r.H);
    j["M"] = matrix_json(r.M);
    j["N"] = matrix_json(r.N);
    j["T"] = matrix_json(r.T);
    json cfg = base_config("monodromy", s, o, out, "json", tol);
    cfg["loop"] = {lp[0], lp[1], lp[2]};
    cfg["center"] = {ct[0], ct[1]};
    emit(out, j.dump(2) + "\n", cfg);
    std::cout << "M = " << to_string(r.M.entries()) << "  N = " << to_string(r.N.entries()) << "\n";
    return 0;
}

// -------------------------------------------------------------- revolution

int cmd_revolution(const Options& o) {
    auto tol = tolerances(o, {});
    std::string fmt = format_of(o, "csv");
    std::string out = output_path(o, "revolution", fmt);
    // axes are checked through the same rules as a full ellipsoid spec
    EllipsoidSpec s({o.alpha0, o.alpha1, o.alpha1, o.alpha3});
    if (s.tag() != SymmetryTag::equal_middle)
        fail(ErrorCode::invalid_spec, "revolution needs alpha0 < alpha1 < alpha3");
    if (o.rev_case != "a" && o.rev_case != "b" && o.rev_case != "both") throw Usage("--case must be a, b or both");
    if (o.points < 1) throw Usage("--points must be positive");

    struct Case {
        const char* id;
        double axis;
    };
    std::vector<Case> cases;
    // a: alpha_0 on the symmetry axis; b: alpha_3 on the symmetry axis
    if (o.rev_case != "b") cases.push_back({"a", o.alpha0});
    if (o.rev_case != "a") cases.push_back({"b", o.alpha3});

    cli::Table t;
    t.columns = {"case_id", "jhat", "I_l", "I_l_quadrature", "abs_diff"};
    double worst = 0.0;
    for (const auto& c : cases)
        for (int k = 0; k < o.points; ++k) {
            double jh = -1.0 + 2.0 * (k + 1) / (o.points + 1);
            RevolutionParams p = RevolutionParams::from_jhat(o.h, jh, c.axis, o.alpha1);
            double a = revolution_action(p), q = revolution_action_quadrature(p);
            worst = std::max(worst, std::abs(a - q));
            t.rows.push_back({std::string(c.id), jh, a, q, std::abs(a - q)});
        }
    json cfg;
    cfg["command"] = "revolution";
    cfg["alpha0"] = o.alpha0;
    cfg["alpha1"] = o.alpha1;
    cfg["alpha3"] = o.alpha3;
    cfg["h"] = o.h;
    cfg["case"] = o.rev_case;
    cfg["points"] = o.points;
    cfg["output"] = out;
    cfg["format"] = fmt;
    cfg["tolerances"] = json::object();
    emit(out, table_text(t, fmt), cfg);
    std::cout << "max |closed form - quadrature| = " << cli::fmt(worst) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geodesics on ellipsoids: simulation, bifurcation diagrams, actions and monodromy"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
    // list-valued keys such as alphas=1,2,2,4 are parsed by the commands, not split here
    app.get_config_formatter_base()->arrayDelimiter(';');
    Options o;
    app.add_option("--alphas", o.alphas, "squared semi-axes a0,a1,a2,a3");
    app.add_option("--h", o.h, "energy")->capture_default_str();
    app.add_option("--seed", o.seed, "random seed")->capture_default_str();
    app.add_option("--output,-o", o.output, "output file (default <command>.<format>)");
    app.add_option("--format", o.format, "csv or json");
    app.add_option("--tol", o.tol, "named tolerance override, name=value")->take_all();
    app.add_flag("--random", o.random, "random initial point on the energy shell");
    app.add_option("--x0", o.x0, "initial position x0,x1,x2,x3");
    app.add_option("--y0", o.y0, "initial velocity y0,y1,y2,y3");
    app.add_option("--t-end", o.t_end)->capture_default_str();
    app.add_option("--dt", o.dt)->capture_default_str();
    app.add_option("--stride", o.stride, "write every n-th step")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--samples", o.samples, "points per bifurcation curve")->capture_default_str();
    app.add_option("--grid", o.grid, "jmin:jmax:n,gmin:gmax:m")->capture_default_str();
    app.add_option("--loop", o.loop, "rj,rg,n")->capture_default_str();
    app.add_option("--center", o.center, "cj,cg")->capture_default_str();
    app.add_option("--alpha0", o.alpha0)->capture_default_str();
    app.add_option("--alpha1", o.alpha1)->capture_default_str();
    app.add_option("--alpha3", o.alpha3)->capture_default_str();
    app.add_option("--case", o.rev_case, "a, b or both")->capture_default_str();
    app.add_option("--points", o.points, "jhat samples per case")->capture_default_str();

    auto sub = [&](const char* name, const char* help) { return app.add_subcommand(name, help)->fallthrough(); };
    auto* simulate = sub("simulate", "integrate a geodesic and report conservation");
    auto* bifurcation = sub("bifurcation", "critical values of the energy-momentum map");
    auto* actions = sub("actions", "natural actions on a (j, g) grid");
    auto* mono = sub("monodromy", "monodromy around a loop in the (j, g) image");
    auto* revolution = sub("revolution", "actions on ellipsoids of revolution");
    auto* selftest = sub("selftest", "run the acceptance checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*simulate) return cmd_simulate(o);
        if (*bifurcation) return cmd_bifurcation(o);
        if (*actions) return cmd_actions(o);
        if (*mono) return cmd_monodromy(o);
        if (*revolution) return cmd_revolution(o);
        if (*selftest) return acceptance::run_all(std::cout) ? 0 : 1;
    } catch (const Usage& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_numerical(e.code()) ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
