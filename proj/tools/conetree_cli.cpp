// conetree: Green functions, spectral bands and random-perturbation
// statistics for label-invariant operators on substitution trees.

#include <CLI11.hpp>

#include <complex>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "conetree/errors.hpp"
#include "conetree/green.hpp"
#include "conetree/io.hpp"
#include "conetree/oracle.hpp"
#include "conetree/radial.hpp"
#include "conetree/random_sim.hpp"

using namespace conetree;

namespace {

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("CONETREE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        write_file(out_path, content);
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double h = n > 1 ? (b - a) / (n - 1) : 0.0;
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a + h * i;
    return g;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Green functions and band structure on trees of finite cone type"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    int threads_flag = 0;
    app.add_option("--threads", threads_flag, "worker threads (env CONETREE_THREADS as fallback)");

    std::string matrix_path, operator_path = "", out_path = "";

    // check
    auto* c_check = app.add_subcommand("check", "axiom report for a substitution matrix");
    c_check->add_option("matrix", matrix_path, "matrix JSON file")->required();
    c_check->add_option("--out", out_path, "output file (default stdout)");

    // solve
    auto* c_solve = app.add_subcommand("solve", "reduced Green vector at one spectral point");
    double s_E = 0.0, s_eta = 1e-3, s_tol = 1e-10, s_eta_min = 1e-7, s_tau = 1e-4;
    bool s_boundary = false;
    c_solve->add_option("--matrix", matrix_path)->required();
    c_solve->add_option("--operator", operator_path, "operator JSON (default adjacency)");
    c_solve->add_option("--E", s_E, "energy")->required();
    c_solve->add_option("--eta", s_eta, "imaginary part of z");
    c_solve->add_flag("--boundary", s_boundary, "eta-continuation to the real axis");
    c_solve->add_option("--eta-min", s_eta_min);
    c_solve->add_option("--tol", s_tol);
    c_solve->add_option("--tau", s_tau, "band threshold for the real-limit flag");
    c_solve->add_option("--out", out_path);

    // scan
    auto* c_scan = app.add_subcommand("scan", "band scan: Sigma1 intervals and Sigma0 candidates");
    double sc_emin = -5, sc_emax = 5, sc_eta_min = 1e-7, sc_tau = 1e-4, sc_align = 1e-3;
    int sc_points = 2001;
    std::string sc_csv = "";
    c_scan->add_option("--matrix", matrix_path)->required();
    c_scan->add_option("--operator", operator_path);
    c_scan->add_option("--emin", sc_emin)->required();
    c_scan->add_option("--emax", sc_emax)->required();
    c_scan->add_option("--points", sc_points);
    c_scan->add_option("--eta-min", sc_eta_min);
    c_scan->add_option("--tau", sc_tau);
    c_scan->add_option("--align-tol", sc_align);
    c_scan->add_option("--out", out_path, "band report JSON");
    c_scan->add_option("--csv", sc_csv, "per-point Green values CSV");

    // density
    auto* c_density = app.add_subcommand("density", "spectral density on a grid");
    double d_emin = -5, d_emax = 5, d_eta = 1e-3;
    int d_points = 2001, d_root = 0;
    c_density->add_option("--matrix", matrix_path)->required();
    c_density->add_option("--operator", operator_path);
    c_density->add_option("--emin", d_emin)->required();
    c_density->add_option("--emax", d_emax)->required();
    c_density->add_option("--points", d_points);
    c_density->add_option("--eta", d_eta);
    c_density->add_option("--root-label", d_root);
    c_density->add_option("--out", out_path);

    // radial
    auto* c_radial = app.add_subcommand("radial", "layered recursion for a radial potential");
    std::string r_pot;
    double r_lambda = 0.1, r_E = 0.0, r_eta = 0.5, r_tol = 1e-10;
    int r_layers = 0;
    c_radial->add_option("--matrix", matrix_path)->required();
    c_radial->add_option("--operator", operator_path);
    c_radial->add_option("--potential", r_pot, "potential JSON")->required();
    c_radial->add_option("--lambda", r_lambda);
    c_radial->add_option("--E", r_E)->required();
    c_radial->add_option("--eta", r_eta);
    c_radial->add_option("--layers", r_layers, "0 = automatic depth");
    c_radial->add_option("--tol", r_tol);
    c_radial->add_option("--out", out_path);

    // random
    auto* c_random = app.add_subcommand("random", "Monte Carlo deviation statistics");
    std::string rnd_spec;
    std::vector<double> rnd_lambdas;
    std::uint64_t rnd_samples = 0, rnd_seed = std::uint64_t(-1);
    double rnd_p = 0.0;
    c_random->add_option("--matrix", matrix_path)->required();
    c_random->add_option("--operator", operator_path);
    c_random->add_option("--spec", rnd_spec, "run config JSON")->required();
    c_random->add_option("--lambdas", rnd_lambdas, "override the config lambda list");
    c_random->add_option("--samples", rnd_samples, "override sample count");
    c_random->add_option("--seed", rnd_seed, "override master seed");
    c_random->add_option("--p", rnd_p, "override moment exponent");
    c_random->add_option("--out", out_path);

    // kappa
    auto* c_kappa = app.add_subcommand("kappa", "averaged-contraction-coefficient survey");
    double k_E = 0.0, k_eta = 0.0, k_R = 0.1, k_lambda = 0.0, k_p = 2.0;
    std::uint64_t k_samples = 10000, k_seed = 1;
    int k_root = 0;
    c_kappa->add_option("--matrix", matrix_path)->required();
    c_kappa->add_option("--operator", operator_path);
    c_kappa->add_option("--E", k_E)->required();
    c_kappa->add_option("--eta", k_eta, "0 = boundary values");
    c_kappa->add_option("--R", k_R)->required();
    c_kappa->add_option("--samples", k_samples);
    c_kappa->add_option("--lambda", k_lambda);
    c_kappa->add_option("--p", k_p);
    c_kappa->add_option("--seed", k_seed);
    c_kappa->add_option("--root-label", k_root);
    c_kappa->add_option("--out", out_path);

    // oracle
    auto* c_oracle = app.add_subcommand("oracle", "recursion vs dense-resolvent comparison");
    int o_depth = 8, o_root = 0;
    double o_E = 0.3, o_eta = 0.5;
    c_oracle->add_option("--matrix", matrix_path)->required();
    c_oracle->add_option("--operator", operator_path);
    c_oracle->add_option("--depth", o_depth);
    c_oracle->add_option("--E", o_E);
    c_oracle->add_option("--eta", o_eta);
    c_oracle->add_option("--root-label", o_root);
    c_oracle->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);
    const int threads = resolve_threads(threads_flag);

    try {
        SubstitutionMatrix m = load_matrix_file(matrix_path);
        auto params = [&]() -> OperatorParams {
            SubstitutionMatrix mm = m;
            require_axioms(mm);
            if (operator_path.empty()) return build_adjacency(mm);
            return load_operator_file(operator_path, mm);
        };

        if (*c_check) {
            const AxiomReport r = check_axioms(m);
            emit(out_path, axiom_report_json(m, r) + "\n");
            return 0;
        }

        if (*c_solve) {
            const OperatorParams p = params();
            GreenVector g;
            double residual = 0;
            bool real_limit = false;
            cplx z;
            if (s_boundary) {
                const BoundaryResult r = solve_boundary(p, s_E, s_eta_min, s_tol, s_tau);
                g = r.gamma;
                residual = r.residual;
                real_limit = r.real_limit;
                z = cplx{s_E, r.eta_reached};
            } else {
                z = cplx{s_E, s_eta};
                g = solve_fixed_point(p, z, {s_tol, 2000});
                residual = max_residual(p, z, g);
            }
            const std::string cfg = "solve --E " + std::to_string(s_E);
            emit(out_path, green_vector_json(m, g, z, residual, real_limit, cfg) + "\n");
            return 0;
        }

        if (*c_scan) {
            const OperatorParams p = params();
            ScanOptions opts;
            opts.eta_min = sc_eta_min;
            opts.tau = sc_tau;
            opts.align_tol = sc_align;
            opts.threads = threads;
            const BandScan scan = scan_bands(p, sc_emin, sc_emax, sc_points, opts);
            const std::string cfg = "scan [" + std::to_string(sc_emin) + "," +
                                    std::to_string(sc_emax) + "] x" + std::to_string(sc_points);
            emit(out_path, band_scan_json(m, scan, cfg) + "\n");
            if (!sc_csv.empty()) {
                std::vector<double> rho(scan.grid.size());
                constexpr double inv_pi = 0.31830988618379067154;
                for (std::size_t i = 0; i < scan.grid.size(); ++i)
                    rho[i] = inv_pi * scan.gammas[i][0].imag();
                write_file(sc_csv, density_csv(scan.grid, scan.eta_reached, p, scan.gammas, rho));
            }
            return 0;
        }

        if (*c_density) {
            const OperatorParams p = params();
            const auto grid = linspace(d_emin, d_emax, d_points);
            const auto gammas = solve_grid(p, grid, d_eta, threads);
            constexpr double inv_pi = 0.31830988618379067154;
            std::vector<double> rho(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i)
                rho[i] = inv_pi * gammas[i][static_cast<std::size_t>(d_root)].imag();
            const std::vector<double> etas = {d_eta};
            emit(out_path, density_csv(grid, etas, p, gammas, rho, d_root));
            return 0;
        }

        if (*c_radial) {
            const OperatorParams p = params();
            const RadialPotential pot = load_potential_file(r_pot, m.size());
            const RadialResult res =
                solve_radial(p, cplx{r_E, r_eta}, r_lambda, pot, r_layers, r_tol);
            emit(out_path, radial_csv(m, res));
            return 0;
        }

        if (*c_random) {
            const OperatorParams p = params();
            RandomRunConfig cfg = load_random_config(rnd_spec, m.size());
            if (!rnd_lambdas.empty()) cfg.lambdas = rnd_lambdas;
            if (rnd_samples > 0) cfg.samples = rnd_samples;
            if (rnd_seed != std::uint64_t(-1)) cfg.seed = rnd_seed;
            if (rnd_p > 0) cfg.p_exp = rnd_p;
            if (cfg.offdiagonal)
                throw ValidationError("random: off-diagonal runs use sample_green directly; "
                                      "deviation CSV covers the potential case");
            std::vector<DeviationStats> rows;
            for (double lam : cfg.lambdas) {
                for (std::size_t lab = 0; lab < m.size(); ++lab) {
                    SubstitutionMatrix mm = m;
                    require_axioms(mm);
                    const TruncatedTree tree =
                        build_truncated_tree(mm, static_cast<int>(lab), cfg.depth);
                    PotentialSpec spec{cfg.per_label, lam, cfg.seed};
                    rows.push_back(estimate_deviation(p, tree, spec, cplx{cfg.E, cfg.eta},
                                                      cfg.p_exp, cfg.samples, threads));
                }
            }
            emit(out_path, deviation_csv(m, rows));
            return 0;
        }

        if (*c_kappa) {
            const OperatorParams p = params();
            const cplx z{k_E, k_eta};
            const TwoSphereContext ctx = build_two_sphere_context(p, m, k_root, z);
            const KappaSurvey s = kappa_survey(ctx, z, k_lambda, k_R, k_samples, k_p, k_seed, threads);
            const std::string cfg = "kappa --E " + std::to_string(k_E) + " --R " + std::to_string(k_R);
            emit(out_path, kappa_survey_json(s, cfg) + "\n");
            return 0;
        }

        if (*c_oracle) {
            const OperatorParams p = params();
            SubstitutionMatrix mm = m;
            require_axioms(mm);
            const TruncatedTree tree = build_truncated_tree(mm, o_root, o_depth);
            const VertexOperator vo = realize_on_tree(p, tree);
            const auto h = assemble_matrix(tree, vo);
            const cplx z{o_E, o_eta};
            const ResolventOracle lu(h, tree.vertex_count(), z);

            const auto gam = sweep_truncated(p, tree, z);
            const auto full = extend_to_full(p, tree, gam);
            const auto root_col = lu.column(0);

            double diag_diff = 0;
            const std::int64_t probe = std::min<std::int64_t>(tree.vertex_count(), 64);
            for (std::int64_t v = 0; v < probe; ++v) {
                const auto lu_col = lu.column(v);
                diag_diff = std::max(diag_diff,
                                     std::abs(full[static_cast<std::size_t>(v)] -
                                              lu_col[static_cast<std::size_t>(v)]));
            }
            double off_diff = 0;
            for (std::int64_t v = 0; v < tree.vertex_count(); ++v)
                off_diff = std::max(off_diff,
                                    std::abs(offdiag_path_product(tree, full, gam, 0, v) -
                                             root_col[static_cast<std::size_t>(v)]));
            std::string rep = "{\n  \"version\": \"" + version_string() + "\",\n";
            rep += "  \"vertices\": " + std::to_string(tree.vertex_count()) + ",\n";
            rep += "  \"root_abs_diff\": \"" +
                   fmt_g17(std::abs(gam[0] - root_col[0])) + "\",\n";
            rep += "  \"diag_max_abs_diff\": \"" + fmt_g17(diag_diff) + "\",\n";
            rep += "  \"offdiag_max_abs_diff\": \"" + fmt_g17(off_diff) + "\"\n}\n";
            emit(out_path, rep);
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const SolveError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const SizeCapError& e) {
        std::cerr << "size cap: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
