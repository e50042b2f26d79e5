// srdisc command-line tool: batch reproduction of the power-comparison and
// free-energy-validation figures, KL/zeta reference tables, CSV/JSON output,
// and optional static SVG rendering.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "srdisc/srdisc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    double sigma = 1.0;
    double epsilon = 0.3;
    double theta = 0.1;
    double alpha = 0.05;
    std::uint64_t seed = 12345;
    std::string profile = "ci";
    std::string out_dir;
    long mc_reps = 0;      // 0 = profile default
    long replicates = 0;   // 0 = profile default
    int quad_nodes = 32;
    unsigned threads = 1;

    long effective_mc_reps() const {
        if (mc_reps > 0) return mc_reps;
        return profile == "paper" ? 200000 : 20000;
    }
    long effective_replicates() const {
        if (replicates > 0) return replicates;
        return profile == "paper" ? 4096 : 512;
    }
    fs::path resolved_out_dir() const {
        if (!out_dir.empty()) return out_dir;
        if (const char* env = std::getenv("SRDISC_OUT_DIR")) return env;
        return ".";
    }
    json echo() const {
        return json{{"sigma", sigma},       {"epsilon", epsilon}, {"theta", theta},
                    {"alpha", alpha},       {"seed", seed},       {"profile", profile},
                    {"mc_reps", effective_mc_reps()},
                    {"replicates", effective_replicates()},
                    {"quad_nodes", quad_nodes}};
    }
};

void apply_config_file(const std::string& path, CommonOpts& opt) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open config file: " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
    }
    if (cfg.contains("sigma")) opt.sigma = cfg["sigma"].get<double>();
    if (cfg.contains("epsilon")) opt.epsilon = cfg["epsilon"].get<double>();
    if (cfg.contains("theta")) opt.theta = cfg["theta"].get<double>();
    if (cfg.contains("alpha")) opt.alpha = cfg["alpha"].get<double>();
    if (cfg.contains("seed")) opt.seed = cfg["seed"].get<std::uint64_t>();
    if (cfg.contains("profile")) opt.profile = cfg["profile"].get<std::string>();
    if (cfg.contains("out_dir")) opt.out_dir = cfg["out_dir"].get<std::string>();
    if (cfg.contains("mc_reps")) opt.mc_reps = cfg["mc_reps"].get<long>();
    if (cfg.contains("replicates")) opt.replicates = cfg["replicates"].get<long>();
    if (cfg.contains("quad_nodes")) opt.quad_nodes = cfg["quad_nodes"].get<int>();
    if (cfg.contains("threads")) opt.threads = cfg["threads"].get<unsigned>();
}

void add_common_flags(CLI::App* cmd, CommonOpts& opt) {
    cmd->add_option("--sigma", opt.sigma, "PSF width sigma");
    cmd->add_option("--epsilon", opt.epsilon, "relative brightness of the faint source");
    cmd->add_option("--theta", opt.theta, "detector offset");
    cmd->add_option("--alpha", opt.alpha, "test size");
    cmd->add_option("--seed", opt.seed, "master RNG seed");
    cmd->add_option("--profile", opt.profile, "ci or paper")
        ->check(CLI::IsMember({"ci", "paper"}));
    cmd->add_option("--out-dir", opt.out_dir, "output directory (default $SRDISC_OUT_DIR or .)");
    cmd->add_option("--mc-reps", opt.mc_reps, "Monte Carlo replicates per power point");
    cmd->add_option("--replicates", opt.replicates, "free-energy replicates per (window, n)");
    cmd->add_option("--quad-nodes", opt.quad_nodes, "Gauss-Legendre nodes per axis");
    cmd->add_option("--threads", opt.threads, "worker threads (output is schedule-independent)");
}

std::vector<std::string> power_row(const srdisc::PowerPoint& pt, const CommonOpts& opt) {
    using srdisc::format_double;
    using srdisc::format_int;
    return {pt.scheme,
            format_double(pt.s),
            format_int(pt.n),
            format_double(pt.power),
            format_double(pt.std_err),
            format_double(opt.alpha),
            format_double(opt.theta),
            format_double(opt.epsilon),
            format_double(opt.sigma),
            format_int(static_cast<long long>(opt.seed))};
}

const std::vector<std::string> kPowerHeader = {"scheme", "s",     "n",       "power",
                                               "std_err", "alpha", "theta",  "epsilon",
                                               "sigma",   "seed"};

std::vector<double> make_grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (int k = 0;; ++k) {
        const double v = lo + k * step;
        if (v > hi + 0.5 * step) break;
        g.push_back(v);
    }
    return g;
}

// Minimal static SVG line plot: one polyline per series plus an optional
// dashed vertical marker.
void write_svg_lines(const fs::path& path, const std::string& title,
                     const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
                     std::optional<double> vline_x) {
    const double W = 640, H = 420, L = 60, R = 20, T = 40, B = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = 1.0;
    for (const auto& [name, pts] : series)
        for (const auto& [x, y] : pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, y);
            ymin = std::min(ymin, y);
        }
    if (!(xmax > xmin)) { xmax = xmin + 1.0; }
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};
    std::ofstream out(path, std::ios::binary);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    out << "<rect x='" << L << "' y='" << T << "' width='" << W - L - R << "' height='"
        << H - T - B << "' fill='none' stroke='#000'/>\n";
    out << "<text x='" << W / 2 << "' y='20' text-anchor='middle'>" << title << "</text>\n";
    if (vline_x && *vline_x >= xmin && *vline_x <= xmax)
        out << "<line x1='" << px(*vline_x) << "' y1='" << T << "' x2='" << px(*vline_x)
            << "' y2='" << H - B << "' stroke='#555' stroke-dasharray='6,4'/>\n";
    int ci = 0;
    for (const auto& [name, pts] : series) {
        out << "<polyline fill='none' stroke='" << colors[ci % 6] << "' stroke-width='1.5' points='";
        for (const auto& [x, y] : pts) out << px(x) << "," << py(y) << " ";
        out << "'/>\n";
        out << "<text x='" << W - R - 150 << "' y='" << T + 18 + 16 * ci << "' fill='"
            << colors[ci % 6] << "'>" << name << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

int cmd_zeta(const CommonOpts& opt, int a_eps, int a_s, long n_lo, long n_hi) {
    using namespace srdisc;
    const fs::path dir = opt.resolved_out_dir();
    fs::create_directories(dir);
    json report;
    auto pole_json = [](const PoleStructure& p) {
        return json{{"lambda_num", p.lambda_num},
                    {"lambda_den", p.lambda_den},
                    {"lambda", p.lambda()},
                    {"multiplicity", p.multiplicity}};
    };
    const auto di = zeta_pole_structure(MonomialKl(2, 2));
    const auto spade = zeta_pole_structure(MonomialKl(1, 2));
    report["config"] = opt.echo();
    report["poles"]["DI"] = pole_json(di);
    report["poles"]["SPADE"] = pole_json(spade);
    if (a_eps > 0 && a_s > 0)
        report["poles"]["user"] = pole_json(zeta_pole_structure(MonomialKl(a_eps, a_s)));
    json table = json::array();
    for (long n = n_lo; n <= n_hi; n *= 2) {
        const double fdi = free_energy_asymptote(n, di);
        const double fsp = free_energy_asymptote(n, spade);
        table.push_back(json{{"n", n},
                             {"asymptote_DI", fdi},
                             {"asymptote_SPADE", fsp},
                             {"difference", fsp - fdi}});
    }
    report["asymptotes"] = table;
    std::ofstream out(dir / "zeta.json", std::ios::binary);
    out << report.dump(2) << "\n";
    std::cout << (dir / "zeta.json").string() << "\n";
    return 0;
}

int cmd_kl_table(const CommonOpts& opt) {
    using namespace srdisc;
    const GaussianPsf psf(opt.sigma);
    const fs::path dir = opt.resolved_out_dir();
    fs::create_directories(dir);
    CsvWriter csv((dir / "kl_table.csv").string());
    csv.comment("config=" + opt.echo().dump());
    csv.row({"epsilon", "s", "theta", "di_exact", "di_leading", "di_ratio", "spade_exact",
             "spade_leading", "spade_ratio", "quantum_exact", "quantum_leading", "quantum_ratio",
             "bspade_exact", "bspade_leading", "bspade_ratio"});
    const std::vector<double> eps_grid = {0.0, 0.01, 0.05, 0.1, 0.2, 0.3};
    const std::vector<double> s_grid = {0.01, 0.05, 0.1, 0.2, 0.4};
    auto ratio = [](const KlResult& r) {
        return r.leading > 0.0 ? r.exact / r.leading : 0.0;
    };
    for (double eps : eps_grid) {
        for (double s : s_grid) {
            const SceneParams scene(eps, s, opt.theta);
            const auto di = kl_direct_imaging(scene, psf);
            const auto sp = kl_spade_aligned(scene, psf);
            const auto q = kl_quantum(scene, psf);
            const auto bs = kl_binary_spade_misaligned(scene, psf);
            csv.row({format_double(eps), format_double(s), format_double(opt.theta),
                     format_double(di.exact), format_double(di.leading), format_double(ratio(di)),
                     format_double(sp.exact), format_double(sp.leading), format_double(ratio(sp)),
                     format_double(q.exact), format_double(q.leading), format_double(ratio(q)),
                     format_double(bs.exact), format_double(bs.leading), format_double(ratio(bs))});
        }
    }
    std::cout << (dir / "kl_table.csv").string() << "\n";
    return 0;
}

int run_power_csv(const CommonOpts& opt, const std::string& scheme,
                  const std::vector<double>& s_grid, const std::vector<long>& n_list,
                  const fs::path& file, bool s_major) {
    using namespace srdisc;
    const GaussianPsf psf(opt.sigma);
    fs::create_directories(file.parent_path());
    std::vector<PowerPoint> rows;
    auto run_scheme = [&](const std::string& sch) {
        auto pts = s_major
                       ? power_vs_n(sch, n_list, s_grid, opt.epsilon, opt.theta, psf, opt.alpha,
                                    opt.effective_mc_reps(), opt.seed, opt.threads)
                       : power_grid(sch, s_grid, n_list, opt.epsilon, opt.theta, psf, opt.alpha,
                                    opt.effective_mc_reps(), opt.seed, opt.threads);
        rows.insert(rows.end(), pts.begin(), pts.end());
    };
    if (scheme == "both") {
        run_scheme("DI");
        run_scheme("bSPADE");
    } else {
        run_scheme(scheme);
    }
    CsvWriter csv(file.string());
    csv.comment("config=" + opt.echo().dump());
    csv.row(kPowerHeader);
    for (const auto& pt : rows) csv.row(power_row(pt, opt));
    std::cout << file.string() << "\n";
    return 0;
}

int cmd_fig1(const CommonOpts& opt, bool svg) {
    using namespace srdisc;
    const GaussianPsf psf(opt.sigma);
    const fs::path dir = opt.resolved_out_dir();
    fs::create_directories(dir);
    const std::vector<double> s_grid = make_grid(0.01, 0.40, 0.01);
    const std::vector<long> n_panels = {200, 500, 2000};
    const long reps = opt.effective_mc_reps();

    auto di = power_grid("DI", s_grid, n_panels, opt.epsilon, opt.theta, psf, opt.alpha, reps,
                         opt.seed, opt.threads);
    auto bs = power_grid("bSPADE", s_grid, n_panels, opt.epsilon, opt.theta, psf, opt.alpha, reps,
                         opt.seed, opt.threads);

    const char* names[] = {"fig1_panel_a.csv", "fig1_panel_b.csv", "fig1_panel_c.csv"};
    for (std::size_t k = 0; k < n_panels.size(); ++k) {
        CsvWriter csv((dir / names[k]).string());
        csv.comment("config=" + opt.echo().dump());
        csv.row(kPowerHeader);
        for (std::size_t si = 0; si < s_grid.size(); ++si)
            csv.row(power_row(di[k * s_grid.size() + si], opt));
        for (std::size_t si = 0; si < s_grid.size(); ++si)
            csv.row(power_row(bs[k * s_grid.size() + si], opt));
        if (svg) {
            std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series(2);
            series[0].first = "DI";
            series[1].first = "bSPADE";
            for (std::size_t si = 0; si < s_grid.size(); ++si) {
                series[0].second.emplace_back(s_grid[si], di[k * s_grid.size() + si].power);
                series[1].second.emplace_back(s_grid[si], bs[k * s_grid.size() + si].power);
            }
            fs::path p = dir / names[k];
            p.replace_extension(".svg");
            write_svg_lines(p, "power vs s, n=" + std::to_string(n_panels[k]), series,
                            blind_spot_separation(opt.theta));
        }
    }

    // Panel (d): power versus n at fixed separations.
    const std::vector<double> s_d = {0.05, 0.10, 0.20};
    const std::vector<long> n_grid = {50, 100, 200, 500, 1000, 2000};
    auto di_d = power_vs_n("DI", n_grid, s_d, opt.epsilon, opt.theta, psf, opt.alpha, reps,
                           opt.seed, opt.threads);
    auto bs_d = power_vs_n("bSPADE", n_grid, s_d, opt.epsilon, opt.theta, psf, opt.alpha, reps,
                           opt.seed, opt.threads);
    CsvWriter csv((dir / "fig1_panel_d.csv").string());
    csv.comment("config=" + opt.echo().dump());
    csv.row(kPowerHeader);
    for (const auto& pt : di_d) csv.row(power_row(pt, opt));
    for (const auto& pt : bs_d) csv.row(power_row(pt, opt));
    for (int k = 0; k < 4; ++k) std::cout << (dir / (k < 3 ? names[k] : "fig1_panel_d.csv")).string() << "\n";
    return 0;
}

int cmd_fig2(const CommonOpts& opt) {
    using namespace srdisc;
    const GaussianPsf psf(opt.sigma);
    const fs::path dir = opt.resolved_out_dir();
    fs::create_directories(dir);
    const std::vector<PriorWindow> windows = {{0.10, 0.25}, {0.10, 0.30}, {0.15, 0.40}};
    const std::vector<long> n_grid = {32, 64, 128, 256, 512, 1024, 2048};
    const long reps = opt.effective_replicates();
    const QuadratureSpec quad{opt.quad_nodes, 2, 1e-6};
    int widx = 0;
    for (const auto& window : windows) {
        ++widx;
        const std::string name = "fig2_window" + std::to_string(widx) + ".csv";
        CsvWriter csv((dir / name).string());
        csv.comment("config=" + opt.echo().dump());
        csv.comment("eps_max=" + format_double(window.eps_max) +
                    " s_max=" + format_double(window.s_max) +
                    " d_max_lead=" + format_double(window.d_max_lead(psf)));
        csv.row({"n", "q10_exact", "median_exact", "q90_exact", "q10_local", "median_local",
                 "q90_local", "replicates", "seed"});
        for (long n : n_grid) {
            const auto batch = free_energy_batch(n, window, psf, quad, reps, opt.seed, opt.threads);
            std::vector<double> ce, cl;
            ce.reserve(batch.size());
            cl.reserve(batch.size());
            for (const auto& rec : batch) {
                ce.push_back(rec.centered_exact);
                cl.push_back(rec.centered_local);
            }
            const auto qe = quantile_summary(ce);
            const auto ql = quantile_summary(cl);
            csv.row({format_int(n), format_double(qe.q10), format_double(qe.median),
                     format_double(qe.q90), format_double(ql.q10), format_double(ql.median),
                     format_double(ql.q90), format_int(reps),
                     format_int(static_cast<long long>(opt.seed))});
        }
        std::cout << (dir / name).string() << "\n";
    }
    return 0;
}

int cmd_free_energy(const CommonOpts& opt, double eps_max, double s_max, long n) {
    using namespace srdisc;
    const GaussianPsf psf(opt.sigma);
    const fs::path dir = opt.resolved_out_dir();
    fs::create_directories(dir);
    const PriorWindow window(eps_max, s_max);
    const QuadratureSpec quad{opt.quad_nodes, 2, 1e-6};
    const long reps = opt.effective_replicates();
    const auto batch = free_energy_batch(n, window, psf, quad, reps, opt.seed, opt.threads);
    CsvWriter csv((dir / "free_energy.csv").string());
    csv.comment("config=" + opt.echo().dump());
    csv.comment("eps_max=" + format_double(window.eps_max) + " s_max=" + format_double(window.s_max) +
                " d_max_lead=" + format_double(window.d_max_lead(psf)));
    csv.row({"n", "replicate_id", "f_exact", "f_local", "centered_exact", "centered_local", "seed"});
    for (const auto& rec : batch)
        csv.row({format_int(rec.n), format_int(rec.replicate_id), format_double(rec.f_exact),
                 format_double(rec.f_local), format_double(rec.centered_exact),
                 format_double(rec.centered_local), format_int(static_cast<long long>(rec.seed))});
    std::cout << (dir / "free_energy.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-vs-two-source optical discrimination toolkit"};
    app.require_subcommand(1);

    CommonOpts opt;
    std::string config_path;

    // Config file first, flags win.
    for (int i = 1; i < argc - 1; ++i) {
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    }
    try {
        if (!config_path.empty()) apply_config_file(config_path, opt);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    auto* fig1 = app.add_subcommand("fig1", "power comparison panels (CSV, optional SVG)");
    auto* fig2 = app.add_subcommand("fig2", "centered free-energy validation per prior window");
    auto* kl = app.add_subcommand("kl-table", "exact and leading KL grid for all four schemes");
    auto* zeta = app.add_subcommand("zeta", "pole structures and free-energy asymptote table");
    auto* pcurve = app.add_subcommand("power-curve", "power versus separation at fixed n");
    auto* pvsn = app.add_subcommand("power-vs-n", "power versus sample size at fixed separations");
    auto* fe = app.add_subcommand("free-energy", "per-replicate free-energy records");

    bool fig1_svg = false;
    fig1->add_flag("--svg", fig1_svg, "also render static SVG plots");

    int z_aeps = 0, z_as = 0;
    long z_nlo = 32, z_nhi = 65536;
    zeta->add_option("--a-eps", z_aeps, "extra exponent pair: epsilon exponent");
    zeta->add_option("--a-s", z_as, "extra exponent pair: s exponent");
    zeta->add_option("--n-min", z_nlo, "asymptote table start (doubling grid)");
    zeta->add_option("--n-max", z_nhi, "asymptote table end");

    std::string pc_scheme = "both";
    long pc_n = 500;
    double pc_smin = 0.01, pc_smax = 0.40, pc_sstep = 0.01;
    pcurve->add_option("--scheme", pc_scheme)->check(CLI::IsMember({"DI", "bSPADE", "both"}));
    pcurve->add_option("--n", pc_n, "sample size");
    pcurve->add_option("--s-min", pc_smin);
    pcurve->add_option("--s-max", pc_smax);
    pcurve->add_option("--s-step", pc_sstep);

    std::string pn_scheme = "both";
    std::vector<long> pn_ngrid = {50, 100, 200, 500, 1000, 2000};
    std::vector<double> pn_svals = {0.05, 0.10, 0.20};
    pvsn->add_option("--scheme", pn_scheme)->check(CLI::IsMember({"DI", "bSPADE", "both"}));
    pvsn->add_option("--n-grid", pn_ngrid, "ascending sample sizes");
    pvsn->add_option("--s-values", pn_svals, "fixed separations");

    double fe_eps_max = 0.10, fe_s_max = 0.25;
    long fe_n = 128;
    fe->add_option("--eps-max", fe_eps_max, "prior window epsilon bound");
    fe->add_option("--s-max", fe_s_max, "prior window separation bound");
    fe->add_option("--n", fe_n, "sample size");

    for (auto* cmd : {fig1, fig2, kl, zeta, pcurve, pvsn, fe}) {
        add_common_flags(cmd, opt);
        cmd->add_option("--config", config_path, "JSON config file (flags override)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fig1->parsed()) return cmd_fig1(opt, fig1_svg);
        if (fig2->parsed()) return cmd_fig2(opt);
        if (kl->parsed()) return cmd_kl_table(opt);
        if (zeta->parsed()) return cmd_zeta(opt, z_aeps, z_as, z_nlo, z_nhi);
        if (pcurve->parsed()) {
            const auto s_grid = make_grid(pc_smin, pc_smax, pc_sstep);
            return run_power_csv(opt, pc_scheme, s_grid, {pc_n},
                                 opt.resolved_out_dir() / "power_curve.csv", false);
        }
        if (pvsn->parsed())
            return run_power_csv(opt, pn_scheme, pn_svals, pn_ngrid,
                                 opt.resolved_out_dir() / "power_vs_n.csv", true);
        if (fe->parsed()) return cmd_free_energy(opt, fe_eps_max, fe_s_max, fe_n);
    } catch (const srdisc::IntegrationNotConverged& e) {
        std::cerr << "numeric non-convergence: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
