// Batch front door: reads an experiment config, runs the requested pipeline,
// and writes machine-readable reports (JSON certificates + CSV summaries).
//
// Exit status: 0 all verdicts pass, 1 any FAIL or runtime error, 2 bad config.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fklab/config.hpp"
#include "fklab/io.hpp"
#include "fklab/kernel_bounds.hpp"
#include "fklab/numerics.hpp"
#include "fklab/spectral.hpp"

namespace {

using fklab::ExperimentConfig;
using ordered_json = nlohmann::ordered_json;

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else if (!out.empty() && out.back() != '-')
            out.push_back('-');
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out.empty() ? "domain" : out;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct Ctx {
    std::string config_path;
    std::string out_override;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;

    ExperimentConfig config() const {
        if (config_path.empty())
            throw fklab::ConfigError("this subcommand needs --config PATH");
        ExperimentConfig cfg = fklab::load_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_set) cfg.seed = seed;
        std::filesystem::create_directories(cfg.out_dir);
        return cfg;
    }

    std::string out_dir_only() const {
        std::string dir = out_override;
        if (dir.empty() && !config_path.empty()) dir = fklab::load_config(config_path).out_dir;
        if (dir.empty()) dir = "out";
        std::filesystem::create_directories(dir);
        return dir;
    }
};

int run_eigen(const Ctx& ctx) {
    const ExperimentConfig cfg = ctx.config();
    for (const auto& d : cfg.domains) {
        auto mask = fklab::build_domain(d, cfg.h);
        auto A = fklab::make_coefficients(cfg.coefficients, mask);
        fklab::validate_ellipticity(A);
        const auto op = fklab::assemble_operator(A);
        fklab::EigenOpts eig;
        eig.rel_tol = cfg.pipeline.tol.eig_rel_tol;
        const auto pair = fklab::principal_eigenpair(op, eig);
        ordered_json j;
        j["domain"] = d.name;
        j["dim"] = d.dim;
        j["h"] = cfg.h;
        j["cells"] = mask->cell_count();
        j["lambda1"] = pair.lambda;
        j["residual"] = pair.residual;
        j["iterations"] = pair.iterations;
        const std::string path = cfg.out_dir + "/eigen-" + slug(d.name) + ".json";
        fklab::write_text_file(path, j.dump(2) + "\n");
        std::cout << "eigen " << d.name << " lambda1=" << fmt(pair.lambda) << " -> " << path
                  << "\n";
    }
    return 0;
}

int run_exit_time(const Ctx& ctx) {
    const ExperimentConfig cfg = ctx.config();
    for (const auto& d : cfg.domains) {
        auto mask = fklab::build_domain(d, cfg.h);
        auto A = fklab::make_coefficients(cfg.coefficients, mask);
        const auto op = fklab::assemble_operator(A);
        const auto pair = fklab::principal_eigenpair(op);
        const auto am = fklab::argmax_abs(pair.u);
        const auto res =
            fklab::median_exit_time_at(op, am.x, cfg.pipeline.eta, cfg.horizon, cfg.pipeline.step);
        ordered_json j;
        j["domain"] = d.name;
        j["dim"] = d.dim;
        j["h"] = cfg.h;
        j["eta"] = cfg.pipeline.eta;
        ordered_json x0 = ordered_json::array();
        for (int k = 0; k < d.dim; ++k) x0.push_back(am.x[static_cast<std::size_t>(k)]);
        j["x0"] = x0;
        j["median_exit_time"] = res.T.value;
        j["bracket"] = ordered_json::array({res.T.t_lo, res.T.t_hi});
        if (cfg.paths > 0) {
            const auto paths =
                fklab::simulate_paths(op, nullptr, am.x, res.T.value, cfg.paths, cfg.seed);
            const auto mc = fklab::mc_survival(paths, res.T.value);
            ordered_json m;
            m["paths"] = cfg.paths;
            m["seed"] = cfg.seed;
            m["survival_at_T"] = mc.mean;
            m["std_error"] = mc.std_error;
            j["monte_carlo"] = m;
        }
        const std::string path = cfg.out_dir + "/exit-time-" + slug(d.name) + ".json";
        fklab::write_text_file(path, j.dump(2) + "\n");
        std::cout << "exit-time " << d.name << " T=" << fmt(res.T.value) << " -> " << path << "\n";
    }
    return 0;
}

int run_verify(const Ctx& ctx, const std::string& kind) {
    const ExperimentConfig cfg = ctx.config();
    bool any_fail = false;
    for (const auto& d : cfg.domains) {
        fklab::Certificate cert;
        if (kind == "T1")
            cert = fklab::theorem1_certificate(d, cfg.h, cfg.coefficients, cfg.potential,
                                               cfg.pipeline);
        else if (kind == "T2")
            cert = fklab::theorem2_certificate(d, cfg.h, cfg.coefficients, cfg.potential,
                                               cfg.pipeline);
        else
            cert = fklab::theorem3_check(d, cfg.h, cfg.coefficients, cfg.potential,
                                         cfg.pipeline.eta, cfg.pipeline);
        const std::string path = cfg.out_dir + "/" + cert.key + ".json";
        fklab::write_certificate(cert, path);
        std::cout << cert.key << " verdict=" << cert.verdict
                  << " norm=" << fmt(cert.norm_value) << " threshold=" << fmt(cert.threshold)
                  << " -> " << path << "\n";
        if (cert.verdict == "FAIL") any_fail = true;
    }
    return any_fail ? 1 : 0;
}

int run_lemma_sweep(const Ctx& ctx) {
    const std::string dir = ctx.out_dir_only();
    const std::vector<int> dims{2, 3, 4, 5, 7};
    std::vector<std::vector<double>> rows;
    bool dominated = true;
    for (int n : dims) {
        const fklab::KernelConstants kc = fklab::KernelConstants::exact_heat(n);
        for (int i = 0; i < 40; ++i) {
            const double x = 1e-3 * std::pow(20.0 / 1e-3, i / 39.0);
            const double r = std::sqrt(x * kc.c2 * 1.0);
            const double exact = fklab::time_integrated_gaussian(r, 1.0, kc);
            const double bound = fklab::lemma_gauss_bound(r, 1.0, kc);
            rows.push_back({static_cast<double>(n), x, exact, bound,
                            exact > 0 ? bound / exact : 0.0});
            if (bound < exact * (1.0 - 1e-12)) dominated = false;
        }
    }
    fklab::write_csv(dir + "/lemma-sweep.csv", {"n", "x", "exact", "bound", "ratio"}, rows);
    std::cout << "lemma-sweep wrote " << rows.size() << " rows -> " << dir
              << "/lemma-sweep.csv (bound dominates: " << (dominated ? "yes" : "NO") << ")\n";

    if (!ctx.config_path.empty()) {
        const ExperimentConfig cfg = ctx.config();
        std::ostringstream os;
        os << "domain,dim,h,d,ratio_kind,ratio\n";
        for (const auto& dspec : cfg.domains) {
            auto mask = fklab::build_domain(dspec, cfg.h);
            auto V = fklab::make_potential_template(cfg.potential, mask);
            const double d = std::max(4.0 * cfg.h, 0.5 * fklab::inradius(*mask));
            if (dspec.dim >= 3) {
                const double r =
                    fklab::lemma_est_ratio(V, d, fklab::KernelConstants::exact_heat(3));
                os << dspec.name << "," << dspec.dim << "," << fmt(cfg.h) << "," << fmt(d)
                   << ",kernel-over-lorentz," << fmt(r) << "\n";
            } else {
                const double r = fklab::lemma_final_ratio(V, d);
                os << dspec.name << "," << dspec.dim << "," << fmt(cfg.h) << "," << fmt(d)
                   << ",final-over-logkernel," << fmt(r) << "\n";
            }
        }
        fklab::write_text_file(cfg.out_dir + "/lemma-estimates.csv", os.str());
        std::cout << "lemma-sweep wrote field estimates -> " << cfg.out_dir
                  << "/lemma-estimates.csv\n";
    }
    return dominated ? 0 : 1;
}

int run_counterexample(const Ctx& ctx) {
    const std::string dir = ctx.out_dir_only();
    std::vector<std::vector<double>> rows;
    const double two_pi = 2.0 * std::acos(-1.0);
    for (int k = 2; k <= 6; ++k) {
        const double eps = std::exp(-static_cast<double>(k));
        const double l1 = fklab::spike_l1_norm(eps);
        const double conv = fklab::spike_abslog_convolution(eps);
        const double asym = two_pi / (std::log(1.0 / eps) + 0.5);
        rows.push_back({eps, l1, conv, l1 / asym, conv / two_pi});
    }
    fklab::write_csv(dir + "/counterexample.csv",
                     {"eps", "l1_norm", "log_convolution", "l1_over_asymptote",
                      "conv_over_2pi"},
                     rows);
    std::cout << "counterexample wrote " << rows.size() << " rows -> " << dir
              << "/counterexample.csv\n";
    return 0;
}

int run_baselines(const Ctx& ctx) {
    const ExperimentConfig cfg = ctx.config();
    std::ostringstream os;
    os << "domain,dim,h,volume,lambda1,fk_product,fk_classical_constant,lambda1_lower_bound,"
          "vmax,barta_gap,r,lr_norm,global_product,global_rhs_scale\n";
    for (const auto& d : cfg.domains) {
        auto mask = fklab::build_domain(d, cfg.h);
        auto A = fklab::make_coefficients(cfg.coefficients, mask);
        const auto op = fklab::assemble_operator(A);
        const auto pair = fklab::principal_eigenpair(op);
        const auto V = fklab::make_potential_template(cfg.potential, mask);
        const auto b = fklab::global_baselines(op, V, pair.lambda, cfg.pipeline.r_exponent);
        os << d.name << "," << d.dim << "," << fmt(cfg.h) << "," << fmt(b.volume) << ","
           << fmt(b.lambda1) << "," << fmt(b.fk_product) << "," << fmt(b.fk_classical_constant)
           << "," << fmt(b.lambda1_lower_bound) << "," << fmt(b.vmax) << "," << fmt(b.barta_gap)
           << "," << fmt(b.r_exponent) << "," << fmt(b.lr_norm) << "," << fmt(b.global_product)
           << "," << fmt(b.global_rhs_scale) << "\n";
    }
    fklab::write_text_file(cfg.out_dir + "/baselines.csv", os.str());
    std::cout << "baselines wrote " << cfg.domains.size() << " rows -> " << cfg.out_dir
              << "/baselines.csv\n";
    return 0;
}

int run_report(const Ctx& ctx) {
    const std::string dir = ctx.out_dir_only();
    const auto all = fklab::report_directory(dir);
    std::vector<fklab::CertSummary> certs;
    int skipped = 0;
    for (const auto& r : all) {
        if (r.malformed)
            ++skipped;
        else
            certs.push_back(r);
    }
    std::ostringstream os;
    os << "key,kind,domain,verdict,h,eta,median_exit_time,norm_value,threshold\n";
    bool any_fail = false;
    for (const auto& r : certs) {
        os << r.key << "," << r.kind << "," << r.domain << "," << r.verdict << "," << fmt(r.h)
           << "," << fmt(r.eta) << "," << fmt(r.T) << "," << fmt(r.norm_value) << ","
           << fmt(r.threshold) << "\n";
        if (r.verdict == "FAIL") any_fail = true;
    }
    fklab::write_text_file(dir + "/report.csv", os.str());
    std::cout << fklab::render_summary_table(certs);
    std::cout << "report: " << certs.size() << " certificates, " << skipped
              << " other json files skipped -> " << dir << "/report.csv\n";
    return any_fail ? 1 : 0;
}

int run_export_mask(const Ctx& ctx) {
    const ExperimentConfig cfg = ctx.config();
    for (const auto& d : cfg.domains) {
        auto mask = fklab::build_domain(d, cfg.h);
        const std::string base = cfg.out_dir + "/mask-" + slug(d.name);
        fklab::export_mask(*mask, base);
        std::cout << "export-mask " << d.name << " -> " << base << ".json/.bin\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exit-time and potential-norm certificate laboratory"};
    app.require_subcommand(1);
    app.fallthrough();  // let --config and friends appear after the subcommand

    Ctx ctx;
    app.add_option("--config", ctx.config_path, "experiment config (TOML subset)");
    app.add_option("--out", ctx.out_override, "output directory (overrides the config)");
    auto* seed_opt = app.add_option("--seed", ctx.seed, "Monte Carlo seed (overrides the config)");
    app.add_option("--threads", ctx.threads,
                   "worker thread count (FKLAB_THREADS env var wins over this flag)");

    std::string mode;
    for (const char* name :
         {"eigen", "exit-time", "fk-verify", "fk-verify-2d", "lieb-check", "lemma-sweep",
          "counterexample", "baselines", "report", "export-mask"}) {
        auto* sub = app.add_subcommand(
            name, std::string("run the ") + name + " pipeline");
        sub->callback([&mode, name] { mode = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    ctx.seed_set = seed_opt->count() > 0;
    if (ctx.threads > 0) fklab::set_thread_count(ctx.threads);

    try {
        if (mode == "eigen") return run_eigen(ctx);
        if (mode == "exit-time") return run_exit_time(ctx);
        if (mode == "fk-verify") return run_verify(ctx, "T1");
        if (mode == "fk-verify-2d") return run_verify(ctx, "T2");
        if (mode == "lieb-check") return run_verify(ctx, "T3");
        if (mode == "lemma-sweep") return run_lemma_sweep(ctx);
        if (mode == "counterexample") return run_counterexample(ctx);
        if (mode == "baselines") return run_baselines(ctx);
        if (mode == "report") return run_report(ctx);
        if (mode == "export-mask") return run_export_mask(ctx);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const fklab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
