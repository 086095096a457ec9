#include "asi/scenario.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

#include "asi/errors.hpp"

namespace asi {

using Json = nlohmann::ordered_json;

namespace {

std::string fmt17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at '" + where + "': " + what);
}

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) fail(where, "unknown field '" + item.key() + "'");
    }
}

double num(const Json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

int integer(const Json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

Point point(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) fail(where, "expected [x, y]");
    return {num(j[0], where), num(j[1], where)};
}

Rect rect(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) fail(where, "expected [x0, y0, x1, y1]");
    return {num(j[0], where), num(j[1], where), num(j[2], where), num(j[3], where)};
}

Json rect_json(const Rect& r) { return Json::array({r.x0, r.y0, r.x1, r.y1}); }

Polygon star_polygon(Point c, double outer, double inner, int points) {
    Polygon poly;
    for (int k = 0; k < points; ++k) {
        const double a0 = 2.0 * std::numbers::pi * k / points;
        const double a1 = 2.0 * std::numbers::pi * (k + 0.5) / points;
        poly.vertices.push_back({c.x + outer * std::cos(a0), c.y + outer * std::sin(a0)});
        poly.vertices.push_back({c.x + inner * std::cos(a1), c.y + inner * std::sin(a1)});
    }
    return poly;
}

Inclusion parse_inclusion(const Json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    const std::string shape = j.value("shape", "");
    Inclusion inc;
    if (!j.contains("value")) fail(where, "missing 'value'");
    inc.value = num(j.at("value"), where + ".value");
    if (shape == "disk") {
        check_keys(j, where, {"shape", "center", "radius", "value"});
        Disk d;
        d.center = point(j.at("center"), where + ".center");
        d.radius = num(j.at("radius"), where + ".radius");
        inc.shape = d;
    } else if (shape == "polygon" || shape == "triangle") {
        check_keys(j, where, {"shape", "vertices", "value"});
        Polygon p;
        const Json& vs = j.at("vertices");
        if (!vs.is_array() || vs.size() < 3) fail(where + ".vertices", "expected >= 3 points");
        for (std::size_t i = 0; i < vs.size(); ++i)
            p.vertices.push_back(point(vs[i], where + ".vertices"));
        inc.shape = p;
    } else if (shape == "square") {
        check_keys(j, where, {"shape", "center", "size", "value"});
        const Point c = point(j.at("center"), where + ".center");
        const double h = 0.5 * num(j.at("size"), where + ".size");
        inc.shape = Polygon{{{c.x - h, c.y - h}, {c.x + h, c.y - h}, {c.x + h, c.y + h}, {c.x - h, c.y + h}}};
    } else if (shape == "rect") {
        check_keys(j, where, {"shape", "rect", "value"});
        const Rect r = rect(j.at("rect"), where + ".rect");
        inc.shape = Polygon{{{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}}};
    } else if (shape == "star") {
        check_keys(j, where, {"shape", "center", "outer", "inner", "points", "value"});
        inc.shape = star_polygon(point(j.at("center"), where + ".center"),
                                 num(j.at("outer"), where + ".outer"),
                                 num(j.at("inner"), where + ".inner"),
                                 integer(j.at("points"), where + ".points"));
    } else {
        fail(where + ".shape", "expected disk, polygon, triangle, square, rect, or star");
    }
    return inc;
}

Json emit_inclusion(const Inclusion& inc) {
    Json j;
    if (const Disk* d = std::get_if<Disk>(&inc.shape)) {
        j["shape"] = "disk";
        j["center"] = Json::array({d->center.x, d->center.y});
        j["radius"] = d->radius;
    } else {
        const Polygon& p = std::get<Polygon>(inc.shape);
        j["shape"] = "polygon";
        Json vs = Json::array();
        for (const Point& v : p.vertices) vs.push_back(Json::array({v.x, v.y}));
        j["vertices"] = std::move(vs);
    }
    j["value"] = inc.value;
    return j;
}

Side parse_side(const std::string& s, const std::string& where) {
    if (s == "bottom") return Side::Bottom;
    if (s == "right") return Side::Right;
    if (s == "top") return Side::Top;
    if (s == "left") return Side::Left;
    fail(where, "expected bottom, right, top, left, or all");
}

const char* side_name(Side s) {
    switch (s) {
        case Side::Bottom: return "bottom";
        case Side::Right: return "right";
        case Side::Top: return "top";
        case Side::Left: return "left";
    }
    return "?";
}

RasterMedium load_raster(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open raster file: " + path.string());
    RasterMedium r;
    in >> r.nx >> r.ny;
    if (!in || r.nx < 2 || r.ny < 2) throw ConfigError("raster file must start with nx ny >= 2");
    r.values.resize(static_cast<std::size_t>(r.nx) * static_cast<std::size_t>(r.ny));
    for (double& v : r.values)
        if (!(in >> v)) throw ConfigError("raster file ended before nx*ny values");
    return r;
}

}  // namespace

Mesh MeshSpec::build() const { return build_rect_mesh(domain, nx, ny, refine); }
Mesh MeshSpec::build_refined() const { return build_rect_mesh(domain, nx, ny, refine + 1); }

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    check_keys(j, "config",
               {"name", "mesh", "medium", "weight", "sources", "gamma", "frequencies", "asi",
                "noise", "seed", "initial_constant", "output_dir", "observations_dir", "decompose"});

    ScenarioConfig cfg;
    cfg.name = j.value("name", cfg.name);

    {
        if (!j.contains("mesh")) fail("mesh", "missing section");
        const Json& m = j.at("mesh");
        check_keys(m, "mesh", {"domain", "nx", "ny", "refine"});
        cfg.mesh.domain = rect(m.at("domain"), "mesh.domain");
        cfg.mesh.nx = integer(m.at("nx"), "mesh.nx");
        cfg.mesh.ny = integer(m.at("ny"), "mesh.ny");
        cfg.mesh.refine = m.contains("refine") ? integer(m.at("refine"), "mesh.refine") : 0;
        if (cfg.mesh.nx < 1 || cfg.mesh.ny < 1 || cfg.mesh.refine < 0)
            fail("mesh", "nx, ny must be >= 1 and refine >= 0");
    }

    {
        if (!j.contains("medium")) fail("medium", "missing section");
        const Json& m = j.at("medium");
        check_keys(m, "medium", {"background", "pieces", "inclusions", "raster_file"});
        cfg.medium.domain = cfg.mesh.domain;
        if (m.contains("pieces")) {
            for (std::size_t i = 0; i < m.at("pieces").size(); ++i) {
                const Json& p = m.at("pieces")[i];
                const std::string where = "medium.pieces[" + std::to_string(i) + "]";
                check_keys(p, where, {"rect", "value"});
                cfg.medium.pieces.push_back(
                    {rect(p.at("rect"), where + ".rect"), num(p.at("value"), where + ".value")});
            }
        } else if (m.contains("background")) {
            cfg.medium.pieces.push_back(
                {cfg.mesh.domain, num(m.at("background"), "medium.background")});
        }
        if (m.contains("inclusions"))
            for (std::size_t i = 0; i < m.at("inclusions").size(); ++i)
                cfg.medium.inclusions.push_back(parse_inclusion(
                    m.at("inclusions")[i], "medium.inclusions[" + std::to_string(i) + "]"));
        if (m.contains("raster_file")) {
            cfg.raster_file = m.at("raster_file").get<std::string>();
            cfg.medium.raster = load_raster(base_dir / *cfg.raster_file);
        }
        if (cfg.medium.pieces.empty() && !cfg.medium.raster)
            fail("medium", "needs 'background', 'pieces', or 'raster_file'");
    }

    if (j.contains("weight")) {
        const Json& w = j.at("weight");
        check_keys(w, "weight", {"form", "q", "epsilon"});
        const std::string form = w.value("form", "power");
        if (form == "power")
            cfg.weight.form = WeightForm::PowerQ;
        else if (form == "max")
            cfg.weight.form = WeightForm::Max;
        else
            fail("weight.form", "expected 'power' or 'max'");
        if (w.contains("q")) cfg.weight.q = num(w.at("q"), "weight.q");
        if (w.contains("epsilon")) cfg.weight.epsilon = num(w.at("epsilon"), "weight.epsilon");
        if (!(cfg.weight.epsilon > 0.0)) fail("weight.epsilon", "must be positive");
        if (!(cfg.weight.q >= 1.0)) fail("weight.q", "must be >= 1");
    }

    if (j.contains("sources"))
        for (std::size_t i = 0; i < j.at("sources").size(); ++i) {
            const Json& s = j.at("sources")[i];
            const std::string where = "sources[" + std::to_string(i) + "]";
            check_keys(s, where, {"center", "width", "amplitude"});
            SourceSpec spec;
            spec.center = point(s.at("center"), where + ".center");
            if (s.contains("width")) spec.width = num(s.at("width"), where + ".width");
            if (s.contains("amplitude")) spec.amplitude = num(s.at("amplitude"), where + ".amplitude");
            cfg.sources.push_back(spec);
        }

    if (j.contains("gamma")) {
        cfg.gamma.clear();
        for (const Json& g : j.at("gamma")) {
            const std::string s = g.get<std::string>();
            if (s == "all") {
                cfg.gamma = {Side::Bottom, Side::Right, Side::Top, Side::Left};
                break;
            }
            cfg.gamma.push_back(parse_side(s, "gamma"));
        }
        if (cfg.gamma.empty()) fail("gamma", "needs at least one side");
    }

    if (j.contains("frequencies")) {
        for (const Json& f : j.at("frequencies"))
            cfg.asi.frequencies.push_back(num(f, "frequencies"));
        for (std::size_t i = 0; i < cfg.asi.frequencies.size(); ++i) {
            if (!(cfg.asi.frequencies[i] > 0.0)) fail("frequencies", "must be positive");
            if (i > 0 && !(cfg.asi.frequencies[i] > cfg.asi.frequencies[i - 1]))
                fail("frequencies", "must be strictly increasing");
        }
    }

    if (j.contains("asi")) {
        const Json& a = j.at("asi");
        check_keys(a, "asi",
                   {"eps_psi", "eps_nu", "eps_tol", "rho0", "rho1", "initial_modes",
                    "max_outer_iters", "subtract_background", "warm_start_filtered", "bfgs_tol",
                    "bfgs_max_iters", "line_search_max", "eigensolver_tol"});
        if (a.contains("eps_psi")) cfg.asi.eps_psi = num(a.at("eps_psi"), "asi.eps_psi");
        if (a.contains("eps_nu")) cfg.asi.eps_nu = num(a.at("eps_nu"), "asi.eps_nu");
        if (a.contains("eps_tol")) cfg.asi.eps_tol = num(a.at("eps_tol"), "asi.eps_tol");
        if (a.contains("rho0")) cfg.asi.rho0 = num(a.at("rho0"), "asi.rho0");
        if (a.contains("rho1")) cfg.asi.rho1 = num(a.at("rho1"), "asi.rho1");
        if (a.contains("initial_modes"))
            cfg.asi.initial_modes = integer(a.at("initial_modes"), "asi.initial_modes");
        if (a.contains("max_outer_iters"))
            cfg.asi.max_outer_iters = integer(a.at("max_outer_iters"), "asi.max_outer_iters");
        if (a.contains("subtract_background"))
            cfg.asi.subtract_background = a.at("subtract_background").get<bool>();
        if (a.contains("warm_start_filtered"))
            cfg.asi.warm_start_filtered = a.at("warm_start_filtered").get<bool>();
        if (a.contains("bfgs_tol")) cfg.asi.bfgs.grad_tol = num(a.at("bfgs_tol"), "asi.bfgs_tol");
        if (a.contains("bfgs_max_iters"))
            cfg.asi.bfgs.max_iters = integer(a.at("bfgs_max_iters"), "asi.bfgs_max_iters");
        if (a.contains("line_search_max"))
            cfg.asi.bfgs.line_search_max = integer(a.at("line_search_max"), "asi.line_search_max");
        if (a.contains("eigensolver_tol"))
            cfg.asi.eig.tol = num(a.at("eigensolver_tol"), "asi.eigensolver_tol");
        if (!(cfg.asi.eps_psi > 0.0)) fail("asi.eps_psi", "must be positive");
        if (!(cfg.asi.eps_nu > 0.0)) fail("asi.eps_nu", "must be positive");
        if (!(cfg.asi.eps_tol > 0.0)) fail("asi.eps_tol", "must be positive");
        if (!(cfg.asi.rho0 >= 0.0 && cfg.asi.rho0 <= 1.0 && cfg.asi.rho1 >= 1.0))
            fail("asi", "need 0 <= rho0 <= 1 <= rho1");
        if (cfg.asi.initial_modes < 1) fail("asi.initial_modes", "must be >= 1");
    }
    cfg.asi.weight = cfg.weight;

    if (j.contains("noise")) cfg.noise = num(j.at("noise"), "noise");
    if (cfg.noise < 0.0) fail("noise", "must be nonnegative");
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (cfg.noise > 0.0 && !cfg.seed) fail("seed", "required when noise > 0");
    if (j.contains("initial_constant"))
        cfg.initial_constant = num(j.at("initial_constant"), "initial_constant");
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    if (j.contains("observations_dir"))
        cfg.observations_dir = j.at("observations_dir").get<std::string>();

    if (j.contains("decompose")) {
        const Json& d = j.at("decompose");
        check_keys(d, "decompose", {"modes", "extra_modes", "refinements", "delta_factor", "v_rect"});
        if (d.contains("modes")) cfg.decompose.modes = integer(d.at("modes"), "decompose.modes");
        if (d.contains("extra_modes"))
            cfg.decompose.extra_modes = integer(d.at("extra_modes"), "decompose.extra_modes");
        if (d.contains("refinements"))
            cfg.decompose.refinements = integer(d.at("refinements"), "decompose.refinements");
        if (d.contains("delta_factor"))
            cfg.decompose.delta_factor = num(d.at("delta_factor"), "decompose.delta_factor");
        if (d.contains("v_rect")) cfg.decompose.v_rect = rect(d.at("v_rect"), "decompose.v_rect");
        if (cfg.decompose.modes < 1) fail("decompose.modes", "must be >= 1");
        if (cfg.decompose.extra_modes < 0) fail("decompose.extra_modes", "must be >= 0");
        if (cfg.decompose.refinements < 1) fail("decompose.refinements", "must be >= 1");
        if (!(cfg.decompose.delta_factor > 0.0)) fail("decompose.delta_factor", "must be positive");
    }

    if (!cfg.medium.is_raster()) cfg.medium.validate();
    return cfg;
}

std::string emit_config(const ScenarioConfig& cfg) {
    Json j;
    j["name"] = cfg.name;
    j["mesh"] = {{"domain", rect_json(cfg.mesh.domain)},
                 {"nx", cfg.mesh.nx},
                 {"ny", cfg.mesh.ny},
                 {"refine", cfg.mesh.refine}};
    Json medium;
    Json pieces = Json::array();
    for (const BackgroundPiece& p : cfg.medium.pieces)
        pieces.push_back({{"rect", rect_json(p.rect)}, {"value", p.value}});
    medium["pieces"] = std::move(pieces);
    Json incs = Json::array();
    for (const Inclusion& inc : cfg.medium.inclusions) incs.push_back(emit_inclusion(inc));
    medium["inclusions"] = std::move(incs);
    if (cfg.raster_file) medium["raster_file"] = *cfg.raster_file;
    j["medium"] = std::move(medium);
    j["weight"] = {{"form", cfg.weight.form == WeightForm::PowerQ ? "power" : "max"},
                   {"q", cfg.weight.q},
                   {"epsilon", cfg.weight.epsilon}};
    Json sources = Json::array();
    for (const SourceSpec& s : cfg.sources)
        sources.push_back({{"center", Json::array({s.center.x, s.center.y})},
                           {"width", s.width},
                           {"amplitude", s.amplitude}});
    j["sources"] = std::move(sources);
    Json gamma = Json::array();
    for (Side s : cfg.gamma) gamma.push_back(side_name(s));
    j["gamma"] = std::move(gamma);
    j["frequencies"] = cfg.asi.frequencies;
    j["asi"] = {{"eps_psi", cfg.asi.eps_psi},
                {"eps_nu", cfg.asi.eps_nu},
                {"eps_tol", cfg.asi.eps_tol},
                {"rho0", cfg.asi.rho0},
                {"rho1", cfg.asi.rho1},
                {"initial_modes", cfg.asi.initial_modes},
                {"max_outer_iters", cfg.asi.max_outer_iters},
                {"subtract_background", cfg.asi.subtract_background},
                {"warm_start_filtered", cfg.asi.warm_start_filtered},
                {"bfgs_tol", cfg.asi.bfgs.grad_tol},
                {"bfgs_max_iters", cfg.asi.bfgs.max_iters},
                {"line_search_max", cfg.asi.bfgs.line_search_max},
                {"eigensolver_tol", cfg.asi.eig.tol}};
    j["noise"] = cfg.noise;
    if (cfg.seed) j["seed"] = *cfg.seed;
    j["initial_constant"] = cfg.initial_constant;
    j["output_dir"] = cfg.output_dir;
    if (cfg.observations_dir) j["observations_dir"] = *cfg.observations_dir;
    Json dec = {{"modes", cfg.decompose.modes},
                {"extra_modes", cfg.decompose.extra_modes},
                {"refinements", cfg.decompose.refinements},
                {"delta_factor", cfg.decompose.delta_factor}};
    if (cfg.decompose.v_rect) dec["v_rect"] = rect_json(*cfg.decompose.v_rect);
    j["decompose"] = std::move(dec);
    return j.dump(2) + "\n";
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::vector<int> side_edges(const Mesh& mesh, const std::vector<Side>& sides) {
    std::vector<int> out;
    for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i)
        if (std::find(sides.begin(), sides.end(), mesh.boundary_edges[i].side) != sides.end())
            out.push_back(static_cast<int>(i));
    return out;
}

std::vector<GaussianSource> resolve_sources(const ScenarioConfig& cfg, const Mesh& mesh) {
    std::vector<GaussianSource> out;
    out.reserve(cfg.sources.size());
    for (const SourceSpec& s : cfg.sources) {
        GaussianSource g;
        g.center = s.center;
        g.width = s.width > 0.0 ? s.width : 2.0 * mesh.h_max();
        g.amplitude = s.amplitude;
        out.push_back(g);
    }
    return out;
}

namespace {

// Fine-mesh vertex carrying the same coordinates as a coarse vertex under one
// uniform refinement.
int fine_vertex(const Mesh& coarse, const Mesh& fine, int v) {
    const int i = v % (coarse.cells_x + 1);
    const int j = v / (coarse.cells_x + 1);
    const int fv = fine.vertex_at(2 * i, 2 * j);
    if (distance(coarse.vertices[static_cast<std::size_t>(v)],
                 fine.vertices[static_cast<std::size_t>(fv)]) > 1e-12)
        throw NumericalError("observation transfer: vertex mismatch between meshes");
    return fv;
}

double gamma_norm(const SparseReal& R, const std::vector<int>& nodes, const VecC& values,
                  Eigen::Index n) {
    VecC full = VecC::Zero(n);
    for (std::size_t i = 0; i < nodes.size(); ++i) full[nodes[i]] = values[static_cast<Eigen::Index>(i)];
    const VecR a = R * full.real(), b = R * full.imag();
    return std::sqrt(std::max(0.0, full.real().dot(a) + full.imag().dot(b)));
}

}  // namespace

std::vector<ObservationSet> synthesize_observations(const ScenarioConfig& cfg) {
    if (cfg.sources.empty()) throw ConfigError("synthesize_observations: no sources configured");
    if (cfg.asi.frequencies.empty())
        throw ConfigError("synthesize_observations: no frequencies configured");
    if (cfg.noise > 0.0 && !cfg.seed)
        throw ConfigError("synthesize_observations: seed required when noise > 0");

    const Mesh coarse = cfg.mesh.build();
    const Mesh fine = cfg.mesh.build_refined();
    const std::vector<GaussianSource> sources = resolve_sources(cfg, coarse);
    const std::vector<int> gamma_c = side_edges(coarse, cfg.gamma);
    const std::vector<int> nodes = gamma_nodes(coarse, gamma_c);
    const SparseReal R = assemble_boundary_mass(
        coarse, gamma_c, VecR::Ones(static_cast<Eigen::Index>(gamma_c.size())));
    const auto nc = static_cast<Eigen::Index>(coarse.vertices.size());

    std::vector<int> fine_nodes(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        fine_nodes[i] = fine_vertex(coarse, fine, nodes[i]);

    std::vector<VecR> loads;
    loads.reserve(sources.size());
    for (const GaussianSource& s : sources) loads.push_back(source_load(fine, s));

    std::mt19937_64 rng(cfg.seed.value_or(0));
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<ObservationSet> out;
    for (double freq : cfg.asi.frequencies) {
        const HelmholtzOperator op(fine, cfg.medium, 2.0 * std::numbers::pi * freq);
        ObservationSet obs;
        obs.gamma_nodes = nodes;
        obs.frequency = freq;
        obs.noise_level = cfg.noise;
        for (std::size_t l = 0; l < sources.size(); ++l) {
            const VecC y = op.solve(loads[l].cast<Complex>());
            VecC values(static_cast<Eigen::Index>(nodes.size()));
            for (std::size_t i = 0; i < nodes.size(); ++i)
                values[static_cast<Eigen::Index>(i)] = y[fine_nodes[i]];
            if (cfg.noise > 0.0) {
                VecC g(values.size());
                for (Eigen::Index i = 0; i < g.size(); ++i)
                    g[i] = Complex(normal(rng), normal(rng));
                const double ny = gamma_norm(R, nodes, values, nc);
                const double ng = gamma_norm(R, nodes, g, nc);
                if (ng > 0.0) values += (cfg.noise * ny / ng) * g;
            }
            obs.values.push_back(std::move(values));
        }
        out.push_back(std::move(obs));
    }
    return out;
}

void write_observations(const std::filesystem::path& dir, const Mesh& mesh,
                        const std::vector<ObservationSet>& obs) {
    std::filesystem::create_directories(dir);
    Json meta;
    meta["frequencies"] = Json::array();
    meta["sources"] = obs.empty() ? 0 : static_cast<int>(obs.front().values.size());
    meta["noise"] = obs.empty() ? 0.0 : obs.front().noise_level;
    for (std::size_t p = 0; p < obs.size(); ++p) {
        meta["frequencies"].push_back(obs[p].frequency);
        for (std::size_t l = 0; l < obs[p].values.size(); ++l) {
            const std::filesystem::path path =
                dir / ("obs_f" + std::to_string(p) + "_s" + std::to_string(l) + ".csv");
            std::ofstream f(path);
            if (!f) throw NumericalError("cannot write " + path.string());
            f << "node,x,y,re,im\n";
            for (std::size_t i = 0; i < obs[p].gamma_nodes.size(); ++i) {
                const int node = obs[p].gamma_nodes[i];
                const Complex v = obs[p].values[l][static_cast<Eigen::Index>(i)];
                f << node << ',' << fmt17(mesh.vertices[static_cast<std::size_t>(node)].x) << ','
                  << fmt17(mesh.vertices[static_cast<std::size_t>(node)].y) << ','
                  << fmt17(v.real()) << ',' << fmt17(v.imag()) << '\n';
            }
        }
    }
    std::ofstream m(dir / "observations.json");
    m << meta.dump(2) << "\n";
}

std::vector<ObservationSet> read_observations(const std::filesystem::path& dir,
                                              const ScenarioConfig& cfg, const Mesh& mesh) {
    std::ifstream mf(dir / "observations.json");
    if (!mf) throw ConfigError("cannot open " + (dir / "observations.json").string());
    Json meta;
    try {
        mf >> meta;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad observations.json: ") + e.what());
    }
    const auto freqs = meta.at("frequencies").get<std::vector<double>>();
    const auto nsrc = meta.at("sources").get<std::size_t>();
    if (freqs != cfg.asi.frequencies)
        throw ConfigError("observation frequencies do not match the config");
    if (nsrc != cfg.sources.size())
        throw ConfigError("observation source count does not match the config");

    const std::vector<int> nodes = gamma_nodes(mesh, side_edges(mesh, cfg.gamma));
    std::vector<ObservationSet> out;
    for (std::size_t p = 0; p < freqs.size(); ++p) {
        ObservationSet obs;
        obs.gamma_nodes = nodes;
        obs.frequency = freqs[p];
        obs.noise_level = meta.value("noise", 0.0);
        for (std::size_t l = 0; l < nsrc; ++l) {
            const std::filesystem::path path =
                dir / ("obs_f" + std::to_string(p) + "_s" + std::to_string(l) + ".csv");
            std::ifstream f(path);
            if (!f) throw ConfigError("cannot open " + path.string());
            std::string line;
            std::getline(f, line);  // header
            VecC values(static_cast<Eigen::Index>(nodes.size()));
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                if (!std::getline(f, line))
                    throw ConfigError("observation file too short: " + path.string());
                int node = 0;
                double x, y, re, im;
                if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf", &node, &x, &y, &re, &im) != 5)
                    throw ConfigError("bad observation row in " + path.string());
                if (node != nodes[i])
                    throw ConfigError("observation node mismatch in " + path.string());
                values[static_cast<Eigen::Index>(i)] = Complex(re, im);
            }
            obs.values.push_back(std::move(values));
        }
        out.push_back(std::move(obs));
    }
    return out;
}

namespace {

void write_field_impl(const std::filesystem::path& path, const Mesh& mesh,
                      const std::function<Complex(std::size_t)>& at) {
    std::ofstream f(path);
    if (!f) throw NumericalError("cannot write " + path.string());
    f << "x,y,re,im\n";
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const Complex c = at(v);
        f << fmt17(mesh.vertices[v].x) << ',' << fmt17(mesh.vertices[v].y) << ','
          << fmt17(c.real()) << ',' << fmt17(c.imag()) << '\n';
    }
    Json side;
    side["vertices"] = mesh.vertices.size();
    side["cells_x"] = mesh.cells_x;
    side["cells_y"] = mesh.cells_y;
    side["domain"] = rect_json(mesh.domain);
    side["columns"] = "x,y,re,im";
    std::ofstream s(path.string() + ".json");
    s << side.dump(2) << "\n";
}

}  // namespace

void write_field(const std::filesystem::path& path, const Mesh& mesh, const VecC& field) {
    write_field_impl(path, mesh, [&](std::size_t v) { return field[static_cast<Eigen::Index>(v)]; });
}

void write_field(const std::filesystem::path& path, const Mesh& mesh, const VecR& field) {
    write_field_impl(path, mesh,
                     [&](std::size_t v) { return Complex(field[static_cast<Eigen::Index>(v)], 0.0); });
}

void write_history(const std::filesystem::path& path, const std::vector<HistoryRow>& history) {
    std::ofstream f(path);
    if (!f) throw NumericalError("cannot write " + path.string());
    f << "iteration,frequency,J_m,misfit,rel_L2_error\n";
    for (const HistoryRow& r : history)
        f << r.iteration << ',' << fmt17(r.frequency) << ',' << r.dimension << ','
          << fmt17(r.misfit) << ',' << fmt17(r.rel_error) << '\n';
}

namespace {

constexpr char kSnapshotMagic[8] = {'A', 'S', 'I', 'S', 'N', 'P', '0', '1'};

void put_u64(std::ofstream& f, std::uint64_t v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::ifstream& f) {
    std::uint64_t v = 0;
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void put_vec(std::ofstream& f, const VecR& v) {
    put_u64(f, static_cast<std::uint64_t>(v.size()));
    f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

VecR get_vec(std::ifstream& f) {
    const auto n = static_cast<Eigen::Index>(get_u64(f));
    if (n < 0 || n > (1 << 28)) throw ConfigError("snapshot: implausible vector length");
    VecR v(n);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const AsiState& state) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw NumericalError("cannot write " + path.string());
    f.write(kSnapshotMagic, sizeof kSnapshotMagic);
    put_u64(f, static_cast<std::uint64_t>(state.next_iteration));
    put_u64(f, static_cast<std::uint64_t>(state.freq_index));
    put_u64(f, state.have_warm ? 1 : 0);
    f.write(reinterpret_cast<const char*>(&state.eps_psi), sizeof(double));
    put_vec(f, state.u_prev);
    put_vec(f, state.warm_beta);
    put_vec(f, state.space.offset);
    put_u64(f, state.space.basis.size());
    for (const VecR& b : state.space.basis) put_vec(f, b);
    if (!f) throw NumericalError("snapshot write failed: " + path.string());
}

AsiState read_snapshot(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open snapshot: " + path.string());
    char magic[8];
    f.read(magic, sizeof magic);
    if (!f || std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0)
        throw ConfigError("not a snapshot file: " + path.string());
    AsiState s;
    s.next_iteration = static_cast<int>(get_u64(f));
    s.freq_index = static_cast<int>(get_u64(f));
    s.have_warm = get_u64(f) != 0;
    f.read(reinterpret_cast<char*>(&s.eps_psi), sizeof(double));
    s.u_prev = get_vec(f);
    s.warm_beta = get_vec(f);
    s.space.offset = get_vec(f);
    const auto nb = get_u64(f);
    if (nb > (1 << 20)) throw ConfigError("snapshot: implausible basis count");
    for (std::uint64_t i = 0; i < nb; ++i) s.space.basis.push_back(get_vec(f));
    if (!f) throw ConfigError("snapshot truncated: " + path.string());
    return s;
}

std::uint64_t config_hash(const std::string& canonical_text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_manifest(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                    const std::string& command) {
    std::filesystem::create_directories(dir);
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016" PRIx64, config_hash(emit_config(cfg)));
    Json m;
    m["name"] = cfg.name;
    m["command"] = command;
    m["config_hash"] = hex;
    m["seed"] = cfg.seed ? Json(*cfg.seed) : Json(nullptr);
    m["noise"] = cfg.noise;
    m["version"] = "1.0.0";
    std::ofstream f(dir / "manifest.json");
    if (!f) throw NumericalError("cannot write manifest");
    f << m.dump(2) << "\n";
    std::ofstream c(dir / "config.json");
    c << emit_config(cfg);
}

}  // namespace asi
