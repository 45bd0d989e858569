#include "hypereis/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "hypereis/checks.hpp"
#include "hypereis/errors.hpp"

namespace hypereis::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// ---------- parsing helpers ----------

double parse_decimal(const ordered_json& v, const std::string& where) {
    if (v.is_number()) {
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where + ": non-finite number");
        return d;
    }
    if (!v.is_string()) throw ConfigError(where + ": expected a decimal string");
    const std::string s = v.get<std::string>();
    double d = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, d);
    if (ec != std::errc{} || ptr != last || s.empty()) throw ConfigError(where + ": '" + s + "' is not a decimal number");
    if (!std::isfinite(d)) throw ConfigError(where + ": non-finite number");
    return d;
}

long parse_integer(const ordered_json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        long n = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec == std::errc{} && ptr == s.data() + s.size() && !s.empty()) return n;
    }
    throw ConfigError(where + ": expected an integer");
}

bool parse_bool(const ordered_json& v, const std::string& where) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "true") return true;
        if (s == "false") return false;
    }
    throw ConfigError(where + ": expected true or false");
}

// "2.5" or ["2.5", "1"] for 2.5 + i
cplx parse_complex(const ordered_json& v, const std::string& where) {
    if (v.is_array()) {
        if (v.size() != 2) throw ConfigError(where + ": complex values are [re, im]");
        return {parse_decimal(v[0], where + "[0]"), parse_decimal(v[1], where + "[1]")};
    }
    return {parse_decimal(v, where), 0.0};
}

Matrix2 parse_matrix(const ordered_json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 4) throw ConfigError(where + ": a matrix is [a, b, c, d]");
    return {parse_decimal(v[0], where), parse_decimal(v[1], where), parse_decimal(v[2], where),
            parse_decimal(v[3], where)};
}

std::vector<Matrix2> parse_matrices(const ordered_json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty list of matrices");
    std::vector<Matrix2> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_matrix(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

// Object reader that rejects keys it was not asked about.
class Section {
public:
    Section(const ordered_json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
    }
    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    const ordered_json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }
    std::string where(const std::string& key) const { return name_ + "." + key; }

    double number(const std::string& key, double def) { return has(key) ? parse_decimal(at(key), where(key)) : def; }
    int integer(const std::string& key, int def) {
        return has(key) ? static_cast<int>(parse_integer(at(key), where(key))) : def;
    }
    bool boolean(const std::string& key, bool def) { return has(key) ? parse_bool(at(key), where(key)) : def; }
    std::string string(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        if (!at(key).is_string()) throw ConfigError(where(key) + ": expected a string");
        return at(key).get<std::string>();
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        if (!has(key)) return def;
        const auto& v = at(key);
        if (!v.is_array()) throw ConfigError(where(key) + ": expected a list");
        std::vector<double> out;
        for (const auto& e : v) out.push_back(parse_decimal(e, where(key)));
        return out;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(name_ + ": unknown key '" + k + "'");
    }

private:
    const ordered_json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

PointH parse_point(const ordered_json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": a point is [x, y]");
    const double x = parse_decimal(v[0], where), y = parse_decimal(v[1], where);
    if (!(y > 0.0)) throw ConfigError(where + ": point must lie in y > 0");
    return PointH::make(x, y);
}

GroupConfig parse_group(const ordered_json& j) {
    Section s(j, "group");
    GroupConfig g;
    g.preset = s.string("preset", "");
    g.params = s.numbers("params", {});
    if (s.has("generators")) g.generators = parse_matrices(s.at("generators"), "group.generators");
    if (g.preset.empty() == g.generators.empty())
        throw ConfigError("group: give exactly one of 'preset' and 'generators'");
    if (!g.preset.empty() && s.has("assert_discrete"))
        throw ConfigError("group.assert_discrete applies to explicit generators only");
    g.assert_discrete = s.boolean("assert_discrete", false);
    g.delta_radii = s.numbers("delta_radii", {});
    g.counting_q = s.number("counting_q", 2.0);
    if (s.has("base_point")) g.base_point = parse_point(s.at("base_point"), "group.base_point");
    s.finish();
    return g;
}

SeriesConfig parse_series(const ordered_json& j) {
    Section s(j, "series");
    SeriesConfig c;
    c.family = s.string("family", c.family);
    try {
        series::family_from_string(c.family);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("series.family: ") + e.what());
    }
    c.gen = s.integer("gen", 0);
    c.q = s.integer("q", 0);
    if (s.has("s")) {
        const auto& v = s.at("s");
        c.s.clear();
        // a list of values, each a decimal string or an [re, im] pair; a bare value is a one-element list
        if (v.is_array()) {
            for (const auto& e : v) c.s.push_back(parse_complex(e, "series.s"));
        } else {
            c.s.push_back(parse_complex(v, "series.s"));
        }
        if (c.s.empty()) throw ConfigError("series.s: no values");
    }
    if (s.has("b")) {
        const auto& v = s.at("b");
        if (!(v.is_string() && v.get<std::string>() == "inf")) c.b = parse_decimal(v, "series.b");
    }
    s.finish();
    return c;
}

series::GridSpec parse_grid(const ordered_json& j) {
    Section s(j, "grid");
    series::GridSpec g;
    g.x0 = s.number("x0", g.x0);
    g.x1 = s.number("x1", g.x1);
    g.nx = s.integer("nx", g.nx);
    g.y0 = s.number("y0", g.y0);
    g.y1 = s.number("y1", g.y1);
    g.ny = s.integer("ny", g.ny);
    s.finish();
    if (g.nx < 1 || g.ny < 1) throw ConfigError("grid: nx and ny must be positive");
    return g;
}

TruncationPolicy parse_truncation(const ordered_json& j) {
    Section s(j, "truncation");
    TruncationPolicy p;
    const std::string mode = s.string("mode", "syllables");
    if (mode == "syllables")
        p.mode = group::ShellMode::Syllables;
    else if (mode == "letters")
        p.mode = group::ShellMode::Letters;
    else
        throw ConfigError("truncation.mode: expected 'syllables' or 'letters'");
    p.max_shells = s.integer("max_shells", p.max_shells);
    p.abs_tol = s.number("abs_tol", p.abs_tol);
    p.rel_tol = s.number("rel_tol", p.rel_tol);
    p.fixed_depth = s.boolean("fixed_depth", p.fixed_depth);
    p.prune_rel = s.number("prune_rel", p.prune_rel);
    if (s.has("max_terms")) p.max_terms = parse_integer(s.at("max_terms"), "truncation.max_terms");
    p.outer_explicit = s.integer("outer_explicit", p.outer_explicit);
    p.outer_quad = s.integer("outer_quad", p.outer_quad);
    p.inner_explicit = s.integer("inner_explicit", p.inner_explicit);
    p.inner_quad = s.integer("inner_quad", p.inner_quad);
    p.check_region = s.boolean("check_region", p.check_region);
    if (s.has("delta_hint")) p.delta_hint = parse_decimal(s.at("delta_hint"), "truncation.delta_hint");
    p.require_convergence = s.boolean("require_convergence", p.require_convergence);
    s.finish();
    if (p.max_shells < 0 || p.max_terms < 1) throw ConfigError("truncation: shell and term caps must be positive");
    if (p.outer_explicit < 1 || p.outer_quad < 1 || p.inner_explicit < 1 || p.inner_quad < 1)
        throw ConfigError("truncation: exponent rules need at least one term and one node");
    return p;
}

OutputConfig parse_output(const ordered_json& j) {
    Section s(j, "output");
    OutputConfig o;
    o.dir = s.string("dir", o.dir);
    o.format = s.string("format", o.format);
    o.stem = s.string("stem", o.stem);
    s.finish();
    if (o.format != "csv" && o.format != "json" && o.format != "both")
        throw ConfigError("output.format: expected csv, json or both");
    if (o.stem.empty() || o.stem.find('/') != std::string::npos) throw ConfigError("output.stem: not a file stem");
    return o;
}

VerifyConfig parse_verify(const ordered_json& j) {
    Section s(j, "verify");
    VerifyConfig v;
    if (s.has("checks")) {
        const auto& c = s.at("checks");
        if (!c.is_array()) throw ConfigError("verify.checks: expected a list of names");
        for (const auto& n : c) {
            if (!n.is_string()) throw ConfigError("verify.checks: expected a list of names");
            v.checks.push_back(n.get<std::string>());
        }
    }
    if (s.has("tolerance")) v.tolerance = parse_decimal(s.at("tolerance"), "verify.tolerance");
    s.finish();
    return v;
}

DegenerateConfig parse_degenerate(const ordered_json& j) {
    Section s(j, "degenerate");
    DegenerateConfig d;
    d.family = s.string("family", d.family);
    if (d.family != "elementary" && d.family != "custom")
        throw ConfigError("degenerate.family: expected 'elementary' or 'custom'");
    if (s.has("q")) {
        const auto& v = s.at("q");
        d.q.clear();
        if (v.is_array()) {
            for (const auto& e : v) d.q.push_back(static_cast<int>(parse_integer(e, "degenerate.q")));
        } else {
            d.q.push_back(static_cast<int>(parse_integer(v, "degenerate.q")));
        }
        if (d.q.empty()) throw ConfigError("degenerate.q: no values");
    }
    if (s.has("s")) d.s = parse_complex(s.at("s"), "degenerate.s");
    d.l_grid = s.numbers("l_grid", d.l_grid);
    if (s.has("grid")) {
        Section g(s.at("grid"), "degenerate.grid");
        d.grid.u0 = g.number("u0", d.grid.u0);
        d.grid.u1 = g.number("u1", d.grid.u1);
        d.grid.nu = g.integer("nu", d.grid.nu);
        d.grid.v0 = g.number("v0", d.grid.v0);
        d.grid.v1 = g.number("v1", d.grid.v1);
        d.grid.nv = g.integer("nv", d.grid.nv);
        g.finish();
    }
    if (s.has("members")) {
        const auto& m = s.at("members");
        if (!m.is_array()) throw ConfigError("degenerate.members: expected a list");
        for (std::size_t i = 0; i < m.size(); ++i) {
            Section e(m[i], "degenerate.members[" + std::to_string(i) + "]");
            FamilyMember fm;
            fm.l = parse_decimal(e.at("l"), e.where("l"));
            fm.generators = parse_matrices(e.at("generators"), e.where("generators"));
            e.finish();
            d.members.push_back(std::move(fm));
        }
    }
    d.pinched_gen = s.integer("pinched_gen", 0);
    if (s.has("limit_generators"))
        d.limit_generators = parse_matrices(s.at("limit_generators"), "degenerate.limit_generators");
    d.limit_cusp_gen = s.integer("limit_cusp_gen", 0);
    s.finish();
    const bool custom = d.family == "custom";
    if (custom && (d.members.empty() || d.limit_generators.empty()))
        throw ConfigError("degenerate: a custom family needs 'members' and 'limit_generators'");
    if (!custom && (!d.members.empty() || !d.limit_generators.empty()))
        throw ConfigError("degenerate: 'members' and 'limit_generators' apply to custom families only");
    return d;
}

// ---------- serialization helpers ----------

std::string decimal(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

ordered_json decimal_list(const std::vector<double>& v) {
    auto out = ordered_json::array();
    for (double d : v) out.push_back(decimal(d));
    return out;
}

ordered_json complex_decimal(cplx v) {
    if (v.imag() == 0.0) return decimal(v.real());
    return ordered_json::array({decimal(v.real()), decimal(v.imag())});
}

ordered_json matrix_decimal(const Matrix2& m) { return ordered_json::array({decimal(m.a), decimal(m.b), decimal(m.c), decimal(m.d)}); }

ordered_json matrices_decimal(const std::vector<Matrix2>& ms) {
    auto out = ordered_json::array();
    for (const auto& m : ms) out.push_back(matrix_decimal(m));
    return out;
}

// ---------- subcommands ----------

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << content;
    if (!f) throw ConfigError("failed writing " + path.string());
}

std::string kind_name(hypgeom::IsometryKind k) {
    switch (k) {
        case hypgeom::IsometryKind::Hyperbolic: return "hyperbolic";
        case hypgeom::IsometryKind::Parabolic: return "parabolic";
        case hypgeom::IsometryKind::Elliptic: return "elliptic";
    }
    return "unknown";
}

const GroupConfig& require_group(const JobConfig& cfg) {
    if (!cfg.group) throw ConfigError("this command needs a 'group' section");
    return *cfg.group;
}

int cmd_group(const JobConfig& cfg, const fs::path& dir, std::ostream& out) {
    const GroupConfig& gc = require_group(cfg);
    // explicit generators: build without throwing so a failed certificate is reported
    const FuchsianGroup g = gc.preset.empty()
                                ? FuchsianGroup::from_matrices(gc.generators, true, {"custom", {}})
                                : build_group(gc);
    const bool accepted = g.certificate().validated || gc.assert_discrete;

    ordered_json j;
    j["schema"] = kGroupSchema;
    j["preset"] = g.preset().name;
    j["params"] = decimal_list(g.preset().params);
    auto& gens = j["generators"] = ordered_json::array();
    for (const auto& gen : g.generators())
        gens.push_back({{"matrix", matrix_decimal(gen.matrix)},
                        {"kind", kind_name(gen.type.kind)},
                        {"translation_length", gen.type.length}});
    j["certificate"] = {{"validated", g.certificate().validated},
                        {"user_asserted", gc.assert_discrete},
                        {"diagnostics", g.certificate().diagnostics}};
    j["accepted"] = accepted;

    if (accepted) {
        std::vector<double> radii = gc.delta_radii;
        if (radii.empty())
            radii = g.rank() == 1 ? std::vector<double>{6, 8, 10, 12, 14, 16, 18, 20}
                                  : std::vector<double>{4, 5, 6, 7, 8, 9, 10, 11, 12};
        const auto est = group::estimate_delta(g, gc.base_point, radii);
        auto& counts = j["orbital_counts"] = ordered_json::array();
        for (const auto& c : est.counts)
            counts.push_back({{"radius", c.radius}, {"count", c.count}, {"truncation_ok", c.truncation_ok}});
        j["delta_estimate"] = est.delta;
        j["delta_fit_residual"] = est.fit_residual;

        TruncationPolicy pol = cfg.truncation;
        pol.require_convergence = false;
        const auto partials = group::counting_bound_partials(g, gc.base_point, gc.counting_q, pol);
        j["counting_q"] = gc.counting_q;
        j["counting_partials"] = partials;
        out << "group " << g.preset().name << ": certificate " << (g.certificate().validated ? "valid" : "asserted")
            << ", delta estimate " << est.delta << "\n";
    } else {
        out << "group " << g.preset().name << ": discreteness certificate failed\n";
    }
    write_file(dir / "group.json", j.dump(2) + "\n");
    return accepted ? kExitOk : kExitFailure;
}

series::FamilyRequest family_request(const SeriesConfig& sc, cplx s) {
    series::FamilyRequest r;
    r.family = series::family_from_string(sc.family);
    r.gen = sc.gen;
    r.q = sc.q;
    r.s = s;
    r.b = sc.b ? hypgeom::BoundaryPoint::real(*sc.b) : hypgeom::BoundaryPoint::infinity();
    return r;
}

int cmd_eval(const JobConfig& cfg, const fs::path& dir, int threads, std::ostream& out) {
    const FuchsianGroup g = build_group(require_group(cfg));
    const auto points = cfg.grid.points();  // rejects y <= 0 before any evaluation
    const auto& sc = cfg.series;
    const bool multi = sc.s.size() > 1;
    ordered_json manifest;
    manifest["schema"] = kEvalManifestSchema;
    manifest["grid_schema"] = series::kGridSchema;
    manifest["config"] = to_json(cfg);
    auto& files = manifest["files"] = ordered_json::array();
    for (std::size_t k = 0; k < sc.s.size(); ++k) {
        const auto req = family_request(sc, sc.s[k]);
        const auto vals = series::evaluate_points(g, req, points, cfg.truncation, threads);
        const std::string stem = cfg.output.stem + (multi ? "_s" + std::to_string(k) : "");
        if (cfg.output.format != "json") {
            write_file(dir / (stem + ".csv"), series::grid_csv(vals));
            files.push_back({{"s", complex_decimal(sc.s[k])}, {"file", stem + ".csv"}, {"rows", vals.size()}});
        }
        if (cfg.output.format != "csv") {
            write_file(dir / (stem + ".json"), series::grid_json(vals, sc.family));
            files.push_back({{"s", complex_decimal(sc.s[k])}, {"file", stem + ".json"}, {"rows", vals.size()}});
        }
        out << "eval " << sc.family << " s=" << sc.s[k].real()
            << (sc.s[k].imag() != 0.0 ? "+" + decimal(sc.s[k].imag()) + "i" : "") << ": " << vals.size()
            << " points\n";
    }
    write_file(dir / (cfg.output.stem + "_manifest.json"), manifest.dump(2) + "\n");
    return kExitOk;
}

int cmd_verify(const JobConfig& cfg, const fs::path& dir, int threads, const std::vector<std::string>& selected,
               std::ostream& out) {
    const std::vector<std::string> names = selected.empty() ? cfg.verify.checks : selected;
    for (const auto& n : names) checks::find_check(n);
    checks::CheckOptions opt;
    opt.tolerance = cfg.verify.tolerance;
    opt.threads = threads;
    const auto results = checks::run_checks(names, opt);
    bool failed = false;
    for (const auto& r : results) {
        out << r.name << ": " << checks::to_string(r.status) << " (" << r.summary << ")\n";
        failed = failed || r.status == checks::Status::Fail;
    }
    write_file(dir / "verify.json", checks::report_json(results).dump(2) + "\n");
    return failed ? kExitFailure : kExitOk;
}

analysis::DegeneratingFamily custom_family(const DegenerateConfig& d) {
    analysis::DegeneratingFamily fam;
    fam.name = "custom";
    std::map<double, std::vector<Matrix2>> members;
    for (const auto& m : d.members) members[m.l] = m.generators;
    fam.group_at = [members](double l) {
        const auto it = members.find(l);
        if (it == members.end()) throw ConfigError("degenerate: no family member given for l = " + decimal(l));
        return FuchsianGroup::from_matrices(it->second, true, {"custom", {l}});
    };
    fam.pinched_gen = d.pinched_gen;
    fam.limit = FuchsianGroup::from_matrices(d.limit_generators, true, {"custom_limit", {}});
    fam.limit_cusp_gen = d.limit_cusp_gen;
    return fam;
}

int cmd_degenerate(const JobConfig& cfg, const fs::path& dir, std::ostream& out) {
    const auto& d = cfg.degenerate;
    const auto fam = d.family == "elementary" ? analysis::elementary_family() : custom_family(d);
    ordered_json j;
    j["schema"] = kDegenerateSchema;
    j["family"] = fam.name;
    j["s"] = complex_decimal(d.s);
    auto& tables = j["tables"] = ordered_json::array();
    bool failed = false;
    for (int q : d.q) {
        const auto rep = analysis::degeneration_diagnostic(fam, q, d.s, d.l_grid, d.grid, cfg.truncation);
        tables.push_back(analysis::to_json(rep));
        std::string csv = std::string("# schema=") + kDegenerateSchema + "\n";
        csv += rep.closed_form_error.empty() ? "l,sup_error\n" : "l,sup_error,closed_form_error\n";
        for (std::size_t k = 0; k < rep.l_grid.size(); ++k) {
            csv += decimal(rep.l_grid[k]) + ',' + decimal(rep.sup_error[k]);
            if (!rep.closed_form_error.empty()) csv += ',' + decimal(rep.closed_form_error[k]);
            csv += '\n';
        }
        write_file(dir / ("degenerate_q" + std::to_string(q) + ".csv"), csv);
        out << "degenerate " << fam.name << " q=" << q << ": error at l=" << rep.l_grid.back() << " is "
            << rep.sup_error.back() << (rep.monotone ? ", monotone" : ", not monotone")
            << (rep.assertive ? "" : " (trend report)") << "\n";
        failed = failed || (rep.assertive && !rep.monotone);
    }
    write_file(dir / "degenerate.json", j.dump(2) + "\n");
    return failed ? kExitFailure : kExitOk;
}

}  // namespace

JobConfig parse_config(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Section top(j, "config");
    JobConfig c;
    try {
        if (top.has("group")) c.group = parse_group(top.at("group"));
        if (top.has("series")) c.series = parse_series(top.at("series"));
        if (top.has("grid")) c.grid = parse_grid(top.at("grid"));
        if (top.has("truncation")) c.truncation = parse_truncation(top.at("truncation"));
        if (top.has("output")) c.output = parse_output(top.at("output"));
        if (top.has("verify")) c.verify = parse_verify(top.at("verify"));
        if (top.has("degenerate")) c.degenerate = parse_degenerate(top.at("degenerate"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    top.finish();
    return c;
}

JobConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

ordered_json to_json(const JobConfig& c) {
    ordered_json j;
    if (c.group) {
        const auto& g = *c.group;
        ordered_json o;
        if (!g.preset.empty()) {
            o["preset"] = g.preset;
            o["params"] = decimal_list(g.params);
        } else {
            o["generators"] = matrices_decimal(g.generators);
            o["assert_discrete"] = g.assert_discrete;
        }
        o["delta_radii"] = decimal_list(g.delta_radii);
        o["counting_q"] = decimal(g.counting_q);
        o["base_point"] = decimal_list({g.base_point.x, g.base_point.y});
        j["group"] = o;
    }
    {
        const auto& s = c.series;
        ordered_json o;
        o["family"] = s.family;
        o["gen"] = s.gen;
        o["q"] = s.q;
        auto& sv = o["s"] = ordered_json::array();
        for (cplx v : s.s) sv.push_back(complex_decimal(v));
        o["b"] = s.b ? ordered_json(decimal(*s.b)) : ordered_json("inf");
        j["series"] = o;
    }
    j["grid"] = {{"x0", decimal(c.grid.x0)}, {"x1", decimal(c.grid.x1)}, {"nx", c.grid.nx},
                 {"y0", decimal(c.grid.y0)}, {"y1", decimal(c.grid.y1)}, {"ny", c.grid.ny}};
    {
        const auto& p = c.truncation;
        ordered_json o;
        o["mode"] = p.mode == group::ShellMode::Syllables ? "syllables" : "letters";
        o["max_shells"] = p.max_shells;
        o["abs_tol"] = decimal(p.abs_tol);
        o["rel_tol"] = decimal(p.rel_tol);
        o["fixed_depth"] = p.fixed_depth;
        o["prune_rel"] = decimal(p.prune_rel);
        o["max_terms"] = p.max_terms;
        o["outer_explicit"] = p.outer_explicit;
        o["outer_quad"] = p.outer_quad;
        o["inner_explicit"] = p.inner_explicit;
        o["inner_quad"] = p.inner_quad;
        o["check_region"] = p.check_region;
        if (p.delta_hint) o["delta_hint"] = decimal(*p.delta_hint);
        o["require_convergence"] = p.require_convergence;
        j["truncation"] = o;
    }
    j["output"] = {{"dir", c.output.dir}, {"format", c.output.format}, {"stem", c.output.stem}};
    {
        ordered_json o;
        o["checks"] = c.verify.checks;
        if (c.verify.tolerance) o["tolerance"] = decimal(*c.verify.tolerance);
        j["verify"] = o;
    }
    {
        const auto& d = c.degenerate;
        ordered_json o;
        o["family"] = d.family;
        o["q"] = d.q;
        o["s"] = complex_decimal(d.s);
        o["l_grid"] = decimal_list(d.l_grid);
        o["grid"] = {{"u0", decimal(d.grid.u0)}, {"u1", decimal(d.grid.u1)}, {"nu", d.grid.nu},
                     {"v0", decimal(d.grid.v0)}, {"v1", decimal(d.grid.v1)}, {"nv", d.grid.nv}};
        if (d.family == "custom") {
            auto& ms = o["members"] = ordered_json::array();
            for (const auto& m : d.members)
                ms.push_back({{"l", decimal(m.l)}, {"generators", matrices_decimal(m.generators)}});
            o["pinched_gen"] = d.pinched_gen;
            o["limit_generators"] = matrices_decimal(d.limit_generators);
            o["limit_cusp_gen"] = d.limit_cusp_gen;
        }
        j["degenerate"] = o;
    }
    return j;
}

FuchsianGroup build_group(const GroupConfig& g) {
    if (!g.preset.empty()) return group::build_preset(g.preset, g.params);
    return FuchsianGroup::from_matrices(g.generators, g.assert_discrete, {"custom", {}});
}

std::string resolve_output_dir(const RunOptions& opt, const JobConfig& cfg) {
    if (opt.out) return *opt.out;
    if (const char* env = std::getenv("HYPEREIS_OUTPUT_DIR"); env && *env) return env;
    return cfg.output.dir;
}

int run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (opt.threads < 1) throw ConfigError("--threads must be at least 1");
        if (!opt.checks.empty() && opt.command != "verify") throw ConfigError("--check applies to verify only");
        const JobConfig cfg = load_config(opt.config_path);
        const fs::path dir = resolve_output_dir(opt, cfg);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
        if (opt.command == "group") return cmd_group(cfg, dir, out);
        if (opt.command == "eval") return cmd_eval(cfg, dir, opt.threads, out);
        if (opt.command == "verify") return cmd_verify(cfg, dir, opt.threads, opt.checks, out);
        if (opt.command == "degenerate") return cmd_degenerate(cfg, dir, out);
        throw ConfigError("unknown command '" + opt.command + "'");
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int run_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Eisenstein series on Fuchsian groups of the second kind", "hypereis"};
    app.require_subcommand(1);
    RunOptions opt;
    for (const char* name : {"group", "eval", "verify", "degenerate"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "job configuration (JSON)")->required();
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
        if (std::string(name) == "verify") sub->add_option("--check", opt.checks, "run only the named check(s)");
    }
    app.get_subcommand("group")->description("validate a group: certificate, delta estimate, counting partials");
    app.get_subcommand("eval")->description("evaluate a series family on a grid");
    app.get_subcommand("verify")->description("run verification checks");
    app.get_subcommand("degenerate")->description("degeneration error tables");
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitConfig;
    }
    opt.command = app.get_subcommands().front()->get_name();
    return run(opt, out, err);
}

}  // namespace hypereis::cli
