#include "bloch/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "bloch/diagnostics.hpp"
#include "bloch/io.hpp"

namespace bloch {

namespace {

using nlohmann::json;

struct RunConfig {
    std::string model;
    double lambda_nu = 0.0;
    double lambda_r = 0.0;
    double polar = 1.0471975511965976; // pi/3
    double mass = 4.0;
    std::string windings = "1,-1";
    std::string grid_spec = "96x96";
    std::string method = "columns";
    std::uint64_t seed = 0;
    int t_size = 0; // 0 -> tolerance default
    std::string out_dir;
    std::string loop_path;
    std::string frame_path;
    std::string mmn_path;
    std::string eig_path;
    int band_lo = 0;
    int window = -1; // occupied count for ingested data; mandatory with --mmn
    bool lenient_mmn = false;
    bool hex_geometry = false;
    std::vector<int> sizes{24, 48, 96};
    Tolerances tol;
};

std::vector<int> parse_windings(const std::string& spec) {
    std::vector<int> out;
    std::string token;
    std::istringstream ss(spec);
    while (std::getline(ss, token, ',')) out.push_back(std::atoi(token.c_str()));
    if (out.empty()) throw InvalidParams("bad --windings '" + spec + "'");
    return out;
}

KGrid parse_grid(const std::string& spec) {
    std::vector<int> dims;
    std::string token;
    std::istringstream ss(spec);
    while (std::getline(ss, token, 'x')) {
        int v = std::atoi(token.c_str());
        if (v <= 0) throw InvalidParams("bad --grid '" + spec + "'");
        dims.push_back(v);
    }
    switch (dims.size()) {
        case 1: return KGrid::line(dims[0]);
        case 2: return KGrid::square(dims[0], dims[1]);
        case 3: return KGrid::cube(dims[0], dims[1], dims[2]);
    }
    throw InvalidParams("bad --grid '" + spec + "' (expected N, NxM or NxMxK)");
}

BlochModel make_model(const RunConfig& cfg) {
    if (cfg.model == "kane-mele")
        return kane_mele({1.0, 1.0, cfg.lambda_nu, cfg.lambda_r});
    if (cfg.model == "haldane") return haldane_chern();
    if (cfg.model == "berry-cone") return berry_cone(cfg.polar);
    if (cfg.model == "cubic") return cubic_insulator(cfg.mass);
    throw InvalidParams("unknown --model '" + cfg.model +
                        "' (kane-mele|haldane|berry-cone|cubic|toy-diag)");
}

// Providers may come from a model or from an ingested MMN file; keep both
// alive behind one pointer.
struct ProviderBox {
    std::unique_ptr<OverlapProvider> provider;
    std::vector<Coords> file_offsets; // populated for MMN input
};

ProviderBox make_provider(const RunConfig& cfg, const KGrid& grid) {
    ProviderBox box;
    if (!cfg.mmn_path.empty()) {
        if (cfg.window <= 0)
            throw InvalidParams("--window (occupied count) is mandatory with --mmn");
        std::ifstream in(cfg.mmn_path);
        if (!in) throw IoError("cannot open " + cfg.mmn_path);
        MmnData data = parse_mmn(in);
        auto p = std::make_unique<MmnOverlapProvider>(data, grid, cfg.band_lo, cfg.window,
                                                      !cfg.lenient_mmn);
        box.file_offsets = p->offsets();
        box.provider = std::move(p);
    } else if (!cfg.model.empty()) {
        box.provider = std::make_unique<ModelOverlapProvider>(make_model(cfg), grid, cfg.tol);
    } else {
        throw InvalidParams("exactly one of --model or --mmn is required");
    }
    return box;
}

UnitaryField make_loop(const RunConfig& cfg, const KGrid& grid) {
    if (!cfg.loop_path.empty()) return read_unitary_field(cfg.loop_path);
    if (cfg.model == "toy-diag") return toy_diag_loop(parse_windings(cfg.windings), grid.sizes[0]);
    if (cfg.model.empty() && cfg.mmn_path.empty())
        throw InvalidParams("need --loop, --model or --mmn");
    ProviderBox box = make_provider(cfg, grid);
    if (box.provider->grid().dim != 2)
        throw InvalidParams("model obstruction loops need a 2d grid");
    return obstruction_loop_2d(*box.provider, cfg.tol);
}

MVGeometry make_geometry(const RunConfig& cfg, int dim) {
    if (cfg.hex_geometry) {
        if (dim != 2) throw InvalidParams("--hex geometry is two-dimensional");
        return MVGeometry::hexagonal();
    }
    return MVGeometry::cubic(dim);
}

json tolerances_json(const Tolerances& t) {
    return json{{"hermitian_rel", t.hermitian_rel},
                {"unitarity", t.unitarity},
                {"rank_sigma", t.rank_sigma},
                {"rank_warn_sigma", t.rank_warn_sigma},
                {"branch_cut", t.branch_cut},
                {"gap_closed", t.gap_closed},
                {"collision", t.collision},
                {"aliased_margin", t.aliased_margin},
                {"winding_residual", t.winding_residual},
                {"margin_floor", t.margin_floor},
                {"candidate_budget", t.candidate_budget},
                {"t_grid_default", t.t_grid_default}};
}

json config_json(const RunConfig& cfg) {
    json j{{"grid", cfg.grid_spec},   {"method", cfg.method}, {"seed", cfg.seed},
           {"t_size", cfg.t_size},    {"out", cfg.out_dir}};
    if (!cfg.model.empty()) {
        j["model"] = cfg.model;
        if (cfg.model == "kane-mele") {
            j["lambda_nu"] = cfg.lambda_nu;
            j["lambda_r"] = cfg.lambda_r;
        }
        if (cfg.model == "toy-diag") j["windings"] = cfg.windings;
        if (cfg.model == "berry-cone") j["polar"] = cfg.polar;
        if (cfg.model == "cubic") j["mass"] = cfg.mass;
    }
    if (!cfg.mmn_path.empty()) {
        j["mmn"] = cfg.mmn_path;
        j["band_lo"] = cfg.band_lo;
        j["window"] = cfg.window;
    }
    if (!cfg.loop_path.empty()) j["loop"] = cfg.loop_path;
    if (!cfg.frame_path.empty()) j["frame"] = cfg.frame_path;
    return j;
}

json frame_result_json(const FrameResult& fr) {
    return json{{"periodicity_residual", fr.periodicity_residual},
                {"unitarity_residual", fr.frame.max_unitarity_residual()},
                {"min_sigma", fr.min_sigma},
                {"homotopy_max_step", fr.homotopy_max_step},
                {"branch_retry", fr.branch_retry},
                {"reference_margins", fr.reference_margins},
                {"obstruction_windings", fr.obstruction_windings},
                {"warnings", fr.warnings}};
}

void write_summary(const RunConfig& cfg, const std::string& command, const json& payload) {
    json j{{"command", command},
           {"config", config_json(cfg)},
           {"tolerances", tolerances_json(cfg.tol)}};
    j.update(payload);
    std::filesystem::create_directories(cfg.out_dir);
    std::string path = cfg.out_dir + "/" + command + "_summary.json";
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    std::cout << "summary: " << path << "\n";
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return cfg.out_dir + "/" + name;
}

std::map<std::string, std::string> field_meta(const RunConfig& cfg) {
    return {{"seed", std::to_string(cfg.seed)},
            {"method", cfg.method},
            {"tol.unitarity", format_double(cfg.tol.unitarity)},
            {"tol.rank_sigma", format_double(cfg.tol.rank_sigma)}};
}

int effective_t_size(const RunConfig& cfg) {
    return cfg.t_size > 0 ? cfg.t_size : cfg.tol.t_grid_default;
}

// ---- subcommand handlers ----

int run_wind(RunConfig& cfg) {
    KGrid grid = parse_grid(cfg.grid_spec);
    UnitaryField loop = make_loop(cfg, grid);
    int total = winding_det(loop, cfg.tol);
    json rep{{"winding_det", total}};
    try {
        WindingReport wr = winding_eigenvalues(loop, cfg.tol);
        rep["per_eigenvalue"] = *wr.per_eigenvalue;
        rep["max_phase_step"] = wr.max_phase_step;
    } catch (const Error& e) {
        rep["per_eigenvalue"] = nullptr;
        rep["tracking_error"] = e.code();
    }
    emit_field(loop, out_path(cfg, "loop.field"), field_meta(cfg));
    std::cout << "W(det) = " << total << "\n";
    if (rep.contains("per_eigenvalue") && !rep["per_eigenvalue"].is_null())
        std::cout << "per-eigenvalue windings: " << rep["per_eigenvalue"].dump() << "\n";
    write_summary(cfg, "wind", json{{"status", "ok"}, {"results", rep}});
    return 0;
}

int run_contract(RunConfig& cfg) {
    KGrid grid = parse_grid(cfg.grid_spec);
    UnitaryField loop = make_loop(cfg, grid);
    FrameMethod method = frame_method_from_string(cfg.method);
    int t_size = effective_t_size(cfg);
    ContractionStats stats;
    Homotopy h;
    if (loop.grid.dim == 1) {
        switch (method) {
            case FrameMethod::columns:
                h = contract_columns_1d(loop, t_size, cfg.seed, cfg.tol, &stats);
                break;
            case FrameMethod::log: h = contract_log(loop, t_size, cfg.tol); break;
            case FrameMethod::log_forced: h = contract_log_forced(loop, t_size, cfg.tol); break;
        }
    } else {
        if (method != FrameMethod::columns)
            throw InvalidParams("surfaces contract with method=columns only");
        h = contract_columns_2d(loop, t_size, cfg.seed, cfg.tol, &stats);
    }
    emit_field(h, out_path(cfg, "homotopy.field"), field_meta(cfg));
    json rep{{"max_step", h.max_step},
             {"t_size", h.t_size},
             {"reference_margins", stats.reference_margins},
             {"branch_retry", stats.branch_retry},
             {"endpoint_residual",
              [&] {
                  double r = 0.0;
                  UnitaryField end = h.slice(h.t_size - 1);
                  for (const auto& v : end.values)
                      r = std::max(r, max_abs(v - CMatrix::Identity(h.n, h.n)));
                  return r;
              }()}};
    std::cout << "homotopy max step = " << h.max_step << "\n";
    write_summary(cfg, "contract", json{{"status", "ok"}, {"results", rep}});
    return 0;
}

int run_frame(RunConfig& cfg) {
    KGrid grid = parse_grid(cfg.grid_spec);
    ProviderBox box = make_provider(cfg, grid);
    FrameMethod method = frame_method_from_string(cfg.method);
    FrameResult fr;
    switch (grid.dim) {
        case 1: fr = frame_1d(*box.provider, cfg.tol); break;
        case 2: fr = frame_2d(*box.provider, method, cfg.seed, cfg.tol); break;
        default: fr = frame_3d(*box.provider, method, cfg.seed, cfg.tol); break;
    }
    emit_field(fr.frame, out_path(cfg, "frame.field"), field_meta(cfg));
    emit_field(fr.obstruction, out_path(cfg, "obstruction.field"), field_meta(cfg));
    RegularityField reg = regularity(fr.frame, *box.provider);
    emit_field(reg, out_path(cfg, "regularity.csv"));
    json rep = frame_result_json(fr);
    rep["regularity_max"] = reg.max;
    rep["regularity_mean"] = reg.mean;
    std::cout << "frame built: periodicity residual " << fr.periodicity_residual
              << ", max |grad u| " << reg.max << "\n";
    for (const auto& w : fr.warnings) std::cerr << "warning: " << w << "\n";
    write_summary(cfg, "frame", json{{"status", "ok"}, {"results", rep}});
    return 0;
}

int run_regularity(RunConfig& cfg) {
    KGrid grid = parse_grid(cfg.grid_spec);
    ProviderBox box = make_provider(cfg, grid);
    if (cfg.frame_path.empty()) throw InvalidParams("--frame FILE is required");
    GaugeFrame frame = read_gauge_frame(cfg.frame_path);
    RegularityField reg = regularity(frame, *box.provider);
    emit_field(reg, out_path(cfg, "regularity.csv"));
    std::cout << "max |grad u| = " << reg.max << ", mean = " << reg.mean << "\n";
    write_summary(cfg, "regularity",
                  json{{"status", "ok"},
                       {"results", json{{"max", reg.max}, {"mean", reg.mean}}}});
    return 0;
}

int run_chern(RunConfig& cfg) {
    KGrid grid = parse_grid(cfg.grid_spec);
    ProviderBox box = make_provider(cfg, grid);
    int c = chern_plaquette(*box.provider, cfg.tol);
    std::cout << "chern = " << c << "\n";
    write_summary(cfg, "chern", json{{"status", "ok"}, {"results", json{{"chern", c}}}});
    return 0;
}

int run_spread(RunConfig& cfg) {
    KGrid grid = parse_grid(cfg.grid_spec);
    ProviderBox box = make_provider(cfg, grid);
    if (cfg.frame_path.empty()) throw InvalidParams("--frame FILE is required");
    GaugeFrame frame = read_gauge_frame(cfg.frame_path);
    MVGeometry geometry = make_geometry(cfg, grid.dim);
    if (!box.file_offsets.empty())
        geometry = mv_geometry_from_offsets(geometry.lattice, box.file_offsets);
    SpreadReport rep = spread(frame, *box.provider, geometry, cfg.tol);
    json centers = json::array();
    for (const auto& c : rep.per_band_centers) {
        json row = json::array();
        for (int a = 0; a < c.size(); ++a) row.push_back(c(a));
        centers.push_back(row);
    }
    std::cout << "omega = " << rep.omega_total << "\n";
    write_summary(cfg, "spread",
                  json{{"status", "ok"},
                       {"results", json{{"omega_total", rep.omega_total},
                                        {"per_band_spreads", rep.per_band_spreads},
                                        {"per_band_centers", centers},
                                        {"ill_conditioned_logs", rep.ill_conditioned_logs}}}});
    return 0;
}

int run_converge(RunConfig& cfg) {
    if (cfg.model.empty()) throw InvalidParams("--model is required for converge");
    BlochModel model = make_model(cfg);
    FrameMethod method = frame_method_from_string(cfg.method);
    MVGeometry geometry = make_geometry(cfg, 2);
    auto rows = convergence_study(model, method, cfg.sizes, cfg.seed, geometry, cfg.tol);
    std::string csv = convergence_csv(rows);
    {
        std::ofstream out(out_path(cfg, "converge.csv"));
        out << csv;
    }
    std::cout << csv;
    json jrows = json::array();
    for (const auto& r : rows)
        jrows.push_back(json{{"size", r.size},
                             {"max_regularity", r.max_regularity},
                             {"mean_regularity", r.mean_regularity},
                             {"omega", r.omega},
                             {"status", r.status}});
    write_summary(cfg, "converge", json{{"status", "ok"}, {"results", jrows}});
    return 0;
}

int run_ingest(RunConfig& cfg) {
    if (cfg.mmn_path.empty()) throw InvalidParams("--mmn FILE is required");
    KGrid grid = parse_grid(cfg.grid_spec);
    std::ifstream in(cfg.mmn_path);
    if (!in) throw IoError("cannot open " + cfg.mmn_path);
    MmnData data = parse_mmn(in);
    json rep{{"n_bands", data.n_bands},
             {"n_kpts", data.n_kpts},
             {"n_neighbors", data.n_neighbors},
             {"comment", data.comment}};
    if (cfg.window > 0) {
        MmnOverlapProvider provider(data, grid, cfg.band_lo, cfg.window, !cfg.lenient_mmn);
        json offs = json::array();
        for (const auto& o : provider.offsets()) offs.push_back(json::array({o[0], o[1], o[2]}));
        rep["offsets"] = offs;
    }
    if (!cfg.eig_path.empty()) {
        std::ifstream ein(cfg.eig_path);
        if (!ein) throw IoError("cannot open " + cfg.eig_path);
        EigData eig = parse_eig(ein);
        rep["eig_bands"] = eig.n_bands;
        if (cfg.window > 0 && cfg.band_lo + cfg.window < eig.n_bands) {
            double min_gap = std::numeric_limits<double>::infinity();
            for (int k = 0; k < eig.n_kpts; ++k) {
                double below = eig.energies[size_t(k) * eig.n_bands + cfg.band_lo + cfg.window - 1];
                double above = eig.energies[size_t(k) * eig.n_bands + cfg.band_lo + cfg.window];
                min_gap = std::min(min_gap, above - below);
            }
            rep["min_gap_above_window"] = min_gap;
        }
    }
    {
        std::ofstream out(out_path(cfg, "reemitted.mmn"));
        write_mmn(out, data);
    }
    std::cout << "ingested " << cfg.mmn_path << ": " << data.n_bands << " bands, " << data.n_kpts
              << " k-points, " << data.n_neighbors << " neighbors\n";
    write_summary(cfg, "ingest-w90", json{{"status", "ok"}, {"results", rep}});
    return 0;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"periodic Bloch-frame construction over the Brillouin torus"};
    app.require_subcommand(1);
    // flat key=value entries, prefixed by the subcommand: frame.grid=96x96
    app.set_config("--config", "", "key=value file; keys are <subcommand>.<flag>");

    RunConfig cfg;
    if (const char* env = std::getenv("BLOCHFRAME_OUT")) cfg.out_dir = env;
    if (cfg.out_dir.empty()) cfg.out_dir = ".";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "kane-mele|haldane|berry-cone|cubic|toy-diag");
        sub->add_option("--lambda-nu", cfg.lambda_nu, "Kane-Mele staggered potential");
        sub->add_option("--lambda-r", cfg.lambda_r, "Kane-Mele Rashba coupling");
        sub->add_option("--polar", cfg.polar, "berry-cone polar angle");
        sub->add_option("--mass", cfg.mass, "cubic model mass");
        sub->add_option("--windings", cfg.windings, "toy-diag winding list, e.g. 1,-1");
        sub->add_option("--grid", cfg.grid_spec, "N, NxM or NxMxK");
        sub->add_option("--method", cfg.method, "log|columns|log-forced");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--t-grid", cfg.t_size, "homotopy time resolution");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--mmn", cfg.mmn_path, "Wannier90-style overlap file");
        sub->add_option("--eig", cfg.eig_path, "band energy file");
        sub->add_option("--band-lo", cfg.band_lo, "first band of the occupied window (0-based)");
        sub->add_option("--window", cfg.window, "occupied band count for ingested data");
        sub->add_flag("--lenient-mmn", cfg.lenient_mmn, "skip inconsistent MMN blocks");
        sub->add_flag("--hex", cfg.hex_geometry, "hexagonal spread geometry");
        sub->add_option("--tol-unitarity", cfg.tol.unitarity);
        sub->add_option("--tol-rank-sigma", cfg.tol.rank_sigma);
        sub->add_option("--tol-branch-cut", cfg.tol.branch_cut);
        sub->add_option("--tol-gap", cfg.tol.gap_closed);
        sub->add_option("--margin-floor", cfg.tol.margin_floor);
        sub->add_option("--candidates", cfg.tol.candidate_budget);
    };

    auto* wind = app.add_subcommand("wind", "winding report of a loop");
    wind->add_option("--loop", cfg.loop_path, "unitary field file");
    add_common(wind);
    auto* contract = app.add_subcommand("contract", "contract a loop or surface to the identity");
    contract->add_option("--loop", cfg.loop_path, "unitary field file");
    add_common(contract);
    auto* frame = app.add_subcommand("frame", "construct a periodic frame (d = 1, 2 or 3)");
    add_common(frame);
    auto* reg = app.add_subcommand("regularity", "finite-difference gauge regularity of a frame");
    reg->add_option("--frame", cfg.frame_path, "gauge frame file");
    add_common(reg);
    auto* chern = app.add_subcommand("chern", "plaquette Chern number of the occupied window");
    add_common(chern);
    auto* spr = app.add_subcommand("spread", "localization functional of a frame");
    spr->add_option("--frame", cfg.frame_path, "gauge frame file");
    add_common(spr);
    auto* conv = app.add_subcommand("converge", "grid-refinement study of frame quality");
    conv->add_option("--sizes", cfg.sizes, "grid sizes");
    add_common(conv);
    auto* ingest = app.add_subcommand("ingest-w90", "parse and validate overlap files");
    add_common(ingest);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    std::string command;
    int rc = 0;
    try {
        if (wind->parsed()) command = "wind", rc = run_wind(cfg);
        else if (contract->parsed()) command = "contract", rc = run_contract(cfg);
        else if (frame->parsed()) command = "frame", rc = run_frame(cfg);
        else if (reg->parsed()) command = "regularity", rc = run_regularity(cfg);
        else if (chern->parsed()) command = "chern", rc = run_chern(cfg);
        else if (spr->parsed()) command = "spread", rc = run_spread(cfg);
        else if (conv->parsed()) command = "converge", rc = run_converge(cfg);
        else if (ingest->parsed()) command = "ingest-w90", rc = run_ingest(cfg);
        return rc;
    } catch (const TopologyObstruction& e) {
        std::cerr << "obstruction: " << e.what() << "\n";
        write_summary(cfg, command,
                      json{{"status", "obstruction"},
                           {"error", json{{"code", e.code()}, {"message", e.what()}}}});
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_summary(cfg, command,
                      json{{"status", "error"},
                           {"error", json{{"code", e.code()}, {"message", e.what()}}}});
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_summary(cfg, command,
                      json{{"status", "error"},
                           {"error", json{{"code", "Unexpected"}, {"message", e.what()}}}});
        return 1;
    }
}

} // namespace bloch
