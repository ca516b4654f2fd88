// nmr_cli: batch front end for surfaces, arc-length charts, grid sampling,
// the co-planarity error model and the stub attention pipeline.
//
// Exit codes: 0 success, 2 input or parse error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <nmr/nmr.hpp>

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

struct Common {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out = "-";
    unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "RNG seed (overrides the config file)");
    sub->add_option("--config", c.config, "key = value run configuration");
    sub->add_option("--out", c.out, "output file, '-' for stdout")->capture_default_str();
    sub->add_option("--threads", c.threads, "worker threads for batch rows")->capture_default_str()->check(
        CLI::PositiveNumber);
}

nmr::RunConfig base_config(const Common& c) {
    nmr::RunConfig cfg = c.config.empty() ? nmr::RunConfig{} : nmr::load_run_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nmr::ParseError("cannot open " + path, 0);
    return in;
}

// Buffers the whole output so a failed run never leaves a partial file behind.
void write_output(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw nmr::ParseError("cannot write " + path, 0);
    out << text;
}

std::ostringstream number_stream() {
    std::ostringstream os;
    os << std::setprecision(17);
    return os;
}

std::vector<std::vector<double>> read_table(const std::string& path, std::size_t columns) {
    auto in = open_input(path);
    return nmr::csv::read_numeric(in, columns);
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
    std::string heightmap;
    std::optional<int> rows, cols;
    std::optional<double> x_min, x_max, y_min, y_max;
    double ridge = 0.0;
};

int run_fit(const Common& c, const FitArgs& a) {
    const auto cfg = base_config(c);
    auto in = open_input(a.heightmap);
    const auto grid_rows = nmr::csv::read_rows(in, false);
    if (grid_rows.size() < 2) throw nmr::ParseError("heightmap: need at least 2 rows", 0);
    const std::size_t ncols = grid_rows.front().fields.size();
    if (ncols < 2) throw nmr::ParseError("heightmap: need at least 2 columns", grid_rows.front().line);
    const std::size_t nrows = grid_rows.size();

    const double x0 = a.x_min.value_or(0.0), x1 = a.x_max.value_or(static_cast<double>(nrows - 1));
    const double y0 = a.y_min.value_or(0.0), y1 = a.y_max.value_or(static_cast<double>(ncols - 1));
    std::vector<nmr::FitSample> samples;
    samples.reserve(nrows * ncols);
    for (std::size_t i = 0; i < nrows; ++i) {
        const auto& row = grid_rows[i];
        if (row.fields.size() != ncols)
            throw nmr::ParseError("heightmap: expected " + std::to_string(ncols) + " values, got " +
                                      std::to_string(row.fields.size()),
                                  row.line);
        const double u = static_cast<double>(i) / static_cast<double>(nrows - 1);
        for (std::size_t j = 0; j < ncols; ++j) {
            const double v = static_cast<double>(j) / static_cast<double>(ncols - 1);
            const double z = nmr::csv::parse_double(row.fields[j], row.line);
            samples.push_back({{u, v}, {x0 + u * (x1 - x0), y0 + v * (y1 - y0), z}});
        }
    }
    const int E = a.rows.value_or(cfg.E), F = a.cols.value_or(cfg.F);
    if (E < 2 || F < 2) throw nmr::InvalidArgument("fit: --rows and --cols must be >= 2");
    const auto fit = nmr::fit_control_net(samples, static_cast<std::size_t>(E), static_cast<std::size_t>(F), a.ridge);
    write_output(c.out, nmr::control_net_to_json(fit.net) + "\n");
    std::cerr << std::setprecision(6) << "fit: " << samples.size() << " samples, E=" << E << " F=" << F
              << " rms_residual=" << fit.rms_residual << " max_residual=" << fit.max_residual << '\n';
    return kOk;
}

// ---- eval ------------------------------------------------------------------

int run_eval(const Common& c, const std::string& net_path, const std::string& params_path) {
    const auto net = nmr::load_control_net(net_path);
    const auto params = read_table(params_path, 2);
    std::vector<nmr::SurfacePoint> points(params.size());
    nmr::parallel_for(params.size(), c.threads, [&](std::size_t i) {
        points[i] = nmr::evaluate(net, {params[i][0], params[i][1]});
    });
    auto os = number_stream();
    if (!points.empty()) os << "x,y,z\n";
    for (const auto& p : points) os << p.x() << ',' << p.y() << ',' << p.z() << '\n';
    write_output(c.out, os.str());
    return kOk;
}

// ---- invert ----------------------------------------------------------------

struct InvertArgs {
    std::string net, points;
    std::optional<double> tol;
    std::optional<int> max_iter;
};

int run_invert(const Common& c, const InvertArgs& a) {
    const auto cfg = base_config(c);
    const auto net = nmr::load_control_net(a.net);
    const auto pts = read_table(a.points, 3);
    nmr::InversionOptions opts;
    opts.tol = a.tol.value_or(cfg.inversion_tol);
    opts.max_iter = a.max_iter.value_or(cfg.max_iter);
    std::vector<nmr::InversionResult> results(pts.size());
    nmr::parallel_for(pts.size(), c.threads, [&](std::size_t i) {
        results[i] = nmr::invert_point(net, {pts[i][0], pts[i][1], pts[i][2]}, opts);
    });
    auto os = number_stream();
    if (!results.empty()) os << "u,v,residual,converged\n";
    for (const auto& r : results)
        os << r.p.u << ',' << r.p.v << ',' << r.residual << ',' << (r.converged ? 1 : 0) << '\n';
    write_output(c.out, os.str());
    return kOk;
}

// ---- arclength -------------------------------------------------------------

struct ArcArgs {
    std::string net, input;
    bool inverse = false;
    std::optional<int> order;
    int subintervals = 8;
    double tol = 1e-10;
};

int run_arclength(const Common& c, const ArcArgs& a) {
    const auto cfg = base_config(c);
    const auto net = nmr::load_control_net(a.net);
    const auto rows = read_table(a.input, 2);
    const nmr::QuadratureOptions quad{a.order.value_or(cfg.quad_order), a.subintervals};
    auto os = number_stream();
    if (!a.inverse) {
        std::vector<nmr::ArcPoint> out(rows.size());
        nmr::parallel_for(rows.size(), c.threads, [&](std::size_t i) {
            out[i] = nmr::to_arclength(net, {rows[i][0], rows[i][1]}, quad);
        });
        if (!out.empty()) os << "s_u,s_v\n";
        for (const auto& s : out) os << s.s_u << ',' << s.s_v << '\n';
    } else {
        struct Inv {
            nmr::ParamPoint p;
            bool in_range = false;
        };
        std::vector<Inv> out(rows.size());
        nmr::parallel_for(rows.size(), c.threads, [&](std::size_t i) {
            try {
                out[i] = {nmr::from_arclength(net, {rows[i][0], rows[i][1]}, {0.0, 0.0}, a.tol, quad), true};
            } catch (const nmr::OutOfRangeError&) {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                out[i] = {{nan, nan}, false};
            }
        });
        if (!out.empty()) os << "u,v,in_range\n";
        for (const auto& r : out) os << r.p.u << ',' << r.p.v << ',' << (r.in_range ? 1 : 0) << '\n';
    }
    write_output(c.out, os.str());
    return kOk;
}

// ---- sample ----------------------------------------------------------------

struct SampleArgs {
    std::string sog;
    std::optional<int> K, bins;
    std::optional<std::string> tau;
    double pgm_resolution = 1.0;
    std::optional<double> coverage_threshold;
    int max_attempts = 10;
};

double parse_tau(const std::string& text) {
    if (text == "inf" || text == "+inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    double tau = 0.0;
    if (!nmr::csv::try_parse(text, tau)) throw nmr::InvalidArgument("--tau: not a number: " + text);
    return tau;
}

int run_sample(const Common& c, const SampleArgs& a) {
    const auto cfg = base_config(c);
    const auto sog = nmr::load_sog(a.sog, a.pgm_resolution);
    const int K = a.K.value_or(cfg.K), bins = a.bins.value_or(cfg.bins);
    const double tau = a.tau ? parse_tau(*a.tau) : cfg.tau;
    nmr::SampleSet set;
    double coverage = 1.0;
    if (a.coverage_threshold) {
        auto res = nmr::sample_with_coverage(sog, K, tau, cfg.seed, bins, *a.coverage_threshold, a.max_attempts);
        set = std::move(res.samples);
        coverage = res.coverage;
        if (res.attempts > 1) std::cerr << "sample: " << res.attempts << " draws, final seed " << set.seed << '\n';
    } else {
        set = nmr::sample_queries(sog, K, tau, cfg.seed);
        coverage = nmr::coverage_loss(set, sog, bins);
    }
    std::ostringstream os;
    nmr::write_samples_csv(os, set);
    if (c.out == "-") {
        // comment line keeps the streamed CSV readable by the samples reader
        std::cout << os.str() << std::setprecision(17) << "# coverage," << coverage << '\n';
    } else {
        write_output(c.out, os.str());
        std::cout << std::setprecision(17) << "coverage," << coverage << '\n';
    }
    return kOk;
}

// ---- coplanarity -----------------------------------------------------------

struct CoplanarityArgs {
    double h = 1.0, d = 1.0;
    double theta_min = 0.0, theta_max = 40.0;
    int steps = 100;
    bool radians = false;
};

int run_coplanarity(const Common& c, const CoplanarityArgs& a) {
    const double scale = a.radians ? 1.0 : std::numbers::pi / 180.0;
    const auto table = nmr::sweep(a.h, a.d, a.theta_min * scale, a.theta_max * scale, a.steps);
    if (table.truncated)
        std::cerr << "warning: " << (a.steps - static_cast<int>(table.rows.size()))
                  << " angles beyond atan(h/d) were dropped\n";
    std::ostringstream os;
    nmr::write_sweep_csv(os, table);
    write_output(c.out, os.str());
    return kOk;
}

// ---- pipeline --------------------------------------------------------------

struct PipelineArgs {
    std::string queries;
    std::string sog;
    std::string scorer = "dot";
    std::vector<std::string> overrides;
    std::string net_out, samples_out, debug_pooled;
    std::string targets, target_net;
};

std::vector<nmr::QueryPoint> read_queries(const std::string& path) {
    std::vector<nmr::QueryPoint> out;
    for (const auto& r : read_table(path, 7)) out.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6]});
    return out;
}

nmr::LossTargets read_targets(const std::string& path, const nmr::ControlNet& net) {
    nmr::LossTargets t;
    t.control_points = nmr::control_matrix(net);
    auto in = open_input(path);
    for (const auto& row : nmr::csv::read_rows(in)) {
        if (row.fields.size() != 3) throw nmr::ParseError("targets: expected class,offset_u,offset_v", row.line);
        t.class_ids.push_back(static_cast<int>(nmr::csv::parse_int(row.fields[0], row.line)));
        t.offsets.emplace_back(nmr::csv::parse_double(row.fields[1], row.line),
                               nmr::csv::parse_double(row.fields[2], row.line));
    }
    return t;
}

int run_pipeline_cmd(const Common& c, const PipelineArgs& a) {
    nmr::RunConfig cfg = base_config(c);
    for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw nmr::InvalidArgument("--set expects key=value, got " + kv);
        const std::string key(nmr::csv::trim(std::string_view(kv).substr(0, eq)));
        if (!cfg.set(key, nmr::csv::trim(std::string_view(kv).substr(eq + 1)), 0))
            throw nmr::InvalidArgument("--set: unknown key '" + key + "'");
    }
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    if (!a.sog.empty() && a.samples_out.empty()) throw nmr::InvalidArgument("--sog requires --samples-out");

    const auto queries = read_queries(a.queries);
    const auto kind = a.scorer == "zero" ? nmr::ScorerKind::Zero : nmr::ScorerKind::DotProduct;
    const auto result = nmr::run_pipeline(cfg, queries, kind, c.threads);

    auto os = number_stream();
    os << "query,class,offset_u,offset_v";
    for (int m = 0; m < cfg.M; ++m) os << ",score_" << m;
    os << '\n';
    for (std::size_t k = 0; k < result.queries.size(); ++k) {
        const auto& out = result.queries[k].outputs.back();
        Eigen::Index best = 0;
        out.semantics.maxCoeff(&best);
        os << k << ',' << best << ',' << out.offset[0] << ',' << out.offset[1];
        for (Eigen::Index m = 0; m < out.semantics.size(); ++m) os << ',' << out.semantics[m];
        os << '\n';
    }
    write_output(c.out, os.str());
    if (!a.net_out.empty()) write_output(a.net_out, nmr::control_net_to_json(result.shared_net) + "\n");

    if (!a.debug_pooled.empty()) {
        auto dbg = number_stream();
        dbg << "query,iteration";
        for (int j = 0; j < cfg.C; ++j) dbg << ",p" << j;
        dbg << '\n';
        for (std::size_t k = 0; k < result.queries.size(); ++k)
            for (const auto& s : result.queries[k].states) {
                dbg << k << ',' << s.iteration;
                for (Eigen::Index j = 0; j < s.pooled.size(); ++j) dbg << ',' << s.pooled[j];
                dbg << '\n';
            }
        write_output(a.debug_pooled, dbg.str());
    }

    if (!a.targets.empty()) {
        const auto net = a.target_net.empty() ? result.shared_net : nmr::load_control_net(a.target_net);
        const auto targets = read_targets(a.targets, net);
        const auto terms = nmr::loss_terms(result.by_iteration(), targets);
        const double total = nmr::total_loss(result.by_iteration(), targets, {cfg.eta_pc, cfg.eta_off, cfg.eta_ce});
        std::cout << std::setprecision(17) << "loss,total," << total << "\nloss,control," << terms.control
                  << "\nloss,offset," << terms.offset << "\nloss,cross_entropy," << terms.cross_entropy << '\n';
    }

    if (!a.sog.empty()) {
        const auto sog = nmr::load_sog(a.sog);
        const auto samples = nmr::sample_queries(sog, cfg.K, cfg.tau, cfg.seed);
        const auto mapped = nmr::map_samples_to_surface(result.shared_net, samples,
                                                        {cfg.quad_order, 8}, c.threads);
        auto ms = number_stream();
        ms << "class,row,col,s_u,s_v,in_range,u,v,x,y,z\n";
        std::size_t outside = 0;
        for (const auto& m : mapped) {
            const auto& s = m.sample;
            ms << s.label << ',' << s.row << ',' << s.col << ',' << s.s_u << ',' << s.s_v << ','
               << (m.in_range ? 1 : 0);
            if (m.in_range)
                ms << ',' << m.param.u << ',' << m.param.v << ',' << m.point.x() << ',' << m.point.y() << ','
                   << m.point.z() << '\n';
            else
                ms << ",nan,nan,nan,nan,nan\n";
            outside += m.in_range ? 0 : 1;
        }
        write_output(a.samples_out, ms.str());
        if (outside) std::cerr << "pipeline: " << outside << " samples lie beyond the surface extent\n";
    }
    return kOk;
}

int classify(const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    if (dynamic_cast<const nmr::ParseError*>(&ex) || dynamic_cast<const nmr::InvalidArgument*>(&ex) ||
        dynamic_cast<const nmr::DomainError*>(&ex))
        return kInputError;
    return kNumericalError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bezier road surfaces, arc-length charts, occupancy sampling and attention decoding"};
    app.require_subcommand(1);
    Common common;

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit a control net to a heightmap grid");
    fit_cmd->add_option("heightmap", fit.heightmap, "CSV grid of heights; rows map to u, columns to v")->required();
    fit_cmd->add_option("--rows,-E", fit.rows, "control rows E");
    fit_cmd->add_option("--cols,-F", fit.cols, "control columns F");
    fit_cmd->add_option("--x-min", fit.x_min, "x at the first grid row (default 0)");
    fit_cmd->add_option("--x-max", fit.x_max, "x at the last grid row (default rows-1)");
    fit_cmd->add_option("--y-min", fit.y_min, "y at the first grid column (default 0)");
    fit_cmd->add_option("--y-max", fit.y_max, "y at the last grid column (default cols-1)");
    fit_cmd->add_option("--ridge", fit.ridge, "Tikhonov weight")->check(CLI::NonNegativeNumber);
    add_common(fit_cmd, common);

    std::string eval_net, eval_params;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate S(u,v) for rows of u,v");
    eval_cmd->add_option("net", eval_net, "control net JSON")->required();
    eval_cmd->add_option("params", eval_params, "CSV of u,v")->required();
    add_common(eval_cmd, common);

    InvertArgs inv;
    auto* inv_cmd = app.add_subcommand("invert", "closest (u,v) for rows of x,y,z");
    inv_cmd->add_option("net", inv.net, "control net JSON")->required();
    inv_cmd->add_option("points", inv.points, "CSV of x,y,z")->required();
    inv_cmd->add_option("--tol", inv.tol, "stationarity tolerance");
    inv_cmd->add_option("--max-iter", inv.max_iter, "iteration cap per seed");
    add_common(inv_cmd, common);

    ArcArgs arc;
    auto* arc_cmd = app.add_subcommand("arclength", "map u,v to s_u,s_v (or back with --inverse)");
    arc_cmd->add_option("net", arc.net, "control net JSON")->required();
    arc_cmd->add_option("input", arc.input, "CSV of u,v (or s_u,s_v)")->required();
    arc_cmd->add_flag("--inverse", arc.inverse, "input holds s_u,s_v; output u,v,in_range");
    arc_cmd->add_option("--order", arc.order, "Gauss-Legendre order");
    arc_cmd->add_option("--subintervals", arc.subintervals, "panels over the unit interval")->check(
        CLI::PositiveNumber);
    arc_cmd->add_option("--tol", arc.tol, "inverse tolerance in meters");
    add_common(arc_cmd, common);

    SampleArgs smp;
    auto* smp_cmd = app.add_subcommand("sample", "edge-aware query sampling on an occupancy grid");
    smp_cmd->add_option("sog", smp.sog, "occupancy grid (CSV or 8-bit PGM)")->required();
    smp_cmd->add_option("--K,-K", smp.K, "samples per present class");
    smp_cmd->add_option("--tau", smp.tau, "edge temperature in cells, or 'inf'");
    smp_cmd->add_option("--bins", smp.bins, "coverage bins per axis");
    smp_cmd->add_option("--pgm-resolution", smp.pgm_resolution, "meters per cell for PGM input");
    smp_cmd->add_option("--coverage-threshold", smp.coverage_threshold, "redraw until coverage <= this");
    smp_cmd->add_option("--max-attempts", smp.max_attempts, "redraw cap")->check(CLI::PositiveNumber);
    add_common(smp_cmd, common);

    CoplanarityArgs cop;
    auto* cop_cmd = app.add_subcommand("coplanarity", "flat-ground localization error sweep");
    cop_cmd->add_option("--height", cop.h, "camera height")->capture_default_str();
    cop_cmd->add_option("--distance", cop.d, "horizontal distance to the contact")->capture_default_str();
    cop_cmd->add_option("--theta-min", cop.theta_min, "first inclination")->capture_default_str();
    cop_cmd->add_option("--theta-max", cop.theta_max, "last inclination")->capture_default_str();
    cop_cmd->add_option("--steps", cop.steps, "number of angles")->capture_default_str();
    cop_cmd->add_flag("--radians", cop.radians, "angles are radians instead of degrees");
    add_common(cop_cmd, common);

    PipelineArgs pipe;
    auto* pipe_cmd = app.add_subcommand("pipeline", "encoder, iterative attention and decoder per query");
    pipe_cmd->add_option("queries", pipe.queries, "CSV of x,y,z,t,x',y',z'")->required();
    pipe_cmd->add_option("--sog", pipe.sog, "occupancy grid to sample and lift onto the surface");
    pipe_cmd->add_option("--samples-out", pipe.samples_out, "lifted samples CSV");
    pipe_cmd->add_option("--scorer", pipe.scorer, "attention scorer")->check(CLI::IsMember({"dot", "zero"}));
    pipe_cmd->add_option("--set", pipe.overrides, "override a config key, key=value");
    pipe_cmd->add_option("--net-out", pipe.net_out, "shared control net JSON");
    pipe_cmd->add_option("--debug-pooled", pipe.debug_pooled, "dump pooled features of every state");
    pipe_cmd->add_option("--targets", pipe.targets, "CSV of class,offset_u,offset_v per query");
    pipe_cmd->add_option("--target-net", pipe.target_net, "target control net JSON for the loss");
    add_common(pipe_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*fit_cmd) return run_fit(common, fit);
        if (*eval_cmd) return run_eval(common, eval_net, eval_params);
        if (*inv_cmd) return run_invert(common, inv);
        if (*arc_cmd) return run_arclength(common, arc);
        if (*smp_cmd) return run_sample(common, smp);
        if (*cop_cmd) return run_coplanarity(common, cop);
        if (*pipe_cmd) return run_pipeline_cmd(common, pipe);
    } catch (const std::exception& ex) {
        return classify(ex);
    }
    return kOk;
}
