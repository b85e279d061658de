#include "conetree/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "conetree/errors.hpp"

namespace conetree {

using json = nlohmann::json;

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

std::string fmt_cplx(cplx v) { return fmt_g17(v.real()) + "," + fmt_g17(v.imag()); }

std::string version_string() {
#ifdef CONETREE_VERSION
    return CONETREE_VERSION;
#else
    return "conetree-v1.0.0";
#endif
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << content;
}

namespace {

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed JSON");
    return j;
}

DistributionSpec parse_distribution(const json& j) {
    DistributionSpec d;
    const std::string kind = j.value("kind", "uniform");
    if (kind == "uniform") {
        d.kind = DistributionSpec::Kind::Uniform;
    } else if (kind == "two_point") {
        d.kind = DistributionSpec::Kind::TwoPoint;
        d.a = j.value("a", -1.0);
        d.b = j.value("b", 1.0);
        d.prob_a = j.value("p", 0.5);
    } else if (kind == "constant") {
        d.kind = DistributionSpec::Kind::Constant;
        d.value = j.value("value", 0.0);
    } else {
        throw ValidationError("unknown distribution kind: " + kind);
    }
    return d;
}

} // namespace

SubstitutionMatrix parse_matrix_json(const std::string& text) {
    const json j = parse(text);
    if (!j.contains("matrix")) throw ValidationError("matrix JSON: missing \"matrix\"");
    SubstitutionMatrix m;
    for (const auto& row : j.at("matrix")) {
        std::vector<std::int64_t> r;
        for (const auto& v : row) {
            if (!v.is_number_integer() && !v.is_number_unsigned())
                throw ValidationError("matrix JSON: entries must be integers");
            r.push_back(v.get<std::int64_t>());
        }
        m.entries.push_back(std::move(r));
    }
    if (j.contains("labels")) {
        for (const auto& l : j.at("labels")) m.labels.push_back(l.get<std::string>());
    } else {
        for (std::size_t i = 0; i < m.entries.size(); ++i)
            m.labels.push_back(std::to_string(i + 1));
    }
    if (m.labels.size() != m.entries.size())
        throw ValidationError("matrix JSON: label count does not match matrix size");
    return m;
}

SubstitutionMatrix load_matrix_file(const std::string& path) {
    return parse_matrix_json(read_file(path));
}

std::string matrix_to_json(const SubstitutionMatrix& m) {
    json j;
    j["labels"] = m.labels;
    j["matrix"] = m.entries;
    if (m.primitivity_exponent) j["n"] = *m.primitivity_exponent;
    return j.dump(2);
}

OperatorParams parse_operator_json(const std::string& text, const SubstitutionMatrix& m) {
    const json j = parse(text);
    const std::string kind = j.value("kind", "custom");
    if (kind == "adjacency") return build_adjacency(m);
    if (kind == "laplacian") return build_laplacian_dirichlet(m);
    if (kind == "normalized") return build_normalized_laplacian(m);
    if (kind != "custom") throw ValidationError("unknown operator kind: " + kind);
    OperatorParams p;
    if (!j.contains("offdiag") || !j.contains("diag"))
        throw ValidationError("custom operator JSON needs \"offdiag\" and \"diag\"");
    for (const auto& row : j.at("offdiag"))
        p.offdiag.push_back(row.get<std::vector<double>>());
    p.diag = j.at("diag").get<std::vector<double>>();
    validate_params(p, m);
    return p;
}

OperatorParams load_operator_file(const std::string& path, const SubstitutionMatrix& m) {
    return parse_operator_json(read_file(path), m);
}

std::string operator_to_json(const OperatorParams& p) {
    json j;
    j["kind"] = "custom";
    j["offdiag"] = p.offdiag;
    j["diag"] = p.diag;
    return j.dump(2);
}

RadialPotential parse_potential_json(const std::string& text, std::size_t n_labels) {
    const json j = parse(text);
    RadialPotential v;
    v.horizon = j.value("horizon", 0);
    if (v.horizon < 0) throw ValidationError("potential JSON: negative horizon");
    v.n_labels = n_labels;
    v.fallback = j.value("default", 0.0);
    v.values.assign(static_cast<std::size_t>(v.horizon) + 1,
                    std::vector<double>(n_labels, v.fallback));
    if (j.contains("values")) {
        for (const auto& triple : j.at("values")) {
            if (!triple.is_array() || triple.size() != 3)
                throw ValidationError("potential JSON: values must be [s, label, v] triples");
            const int s = triple[0].get<int>();
            const int lab = triple[1].get<int>();
            const double val = triple[2].get<double>();
            if (s < 0 || s > v.horizon)
                throw ValidationError("potential JSON: layer index out of range");
            if (lab < 0 || static_cast<std::size_t>(lab) >= n_labels)
                throw ValidationError("potential JSON: label index out of range");
            v.values[static_cast<std::size_t>(s)][static_cast<std::size_t>(lab)] = val;
        }
    }
    validate_potential(v);
    return v;
}

RadialPotential load_potential_file(const std::string& path, std::size_t n_labels) {
    return parse_potential_json(read_file(path), n_labels);
}

RandomRunConfig parse_random_config(const std::string& text, std::size_t n_labels) {
    const json j = parse(text);
    RandomRunConfig cfg;
    cfg.echo = j.dump();
    cfg.offdiagonal = j.value("offdiagonal", false);
    if (j.contains("distributions")) {
        for (const auto& d : j.at("distributions")) cfg.per_label.push_back(parse_distribution(d));
        if (cfg.per_label.size() != n_labels)
            throw ValidationError("random config: need one distribution per label");
    } else if (j.contains("distribution")) {
        cfg.per_label.push_back(parse_distribution(j.at("distribution")));
    } else {
        cfg.per_label.push_back(DistributionSpec{});
    }
    if (j.contains("lambdas"))
        cfg.lambdas = j.at("lambdas").get<std::vector<double>>();
    else
        cfg.lambdas = {j.value("lambda", 0.1)};
    cfg.E = j.value("E", 0.0);
    cfg.eta = j.value("eta", 1.0);
    cfg.p_exp = j.value("p", 2.0);
    cfg.samples = j.value("samples", std::uint64_t{1000});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.depth = j.value("depth", 12);
    return cfg;
}

RandomRunConfig load_random_config(const std::string& path, std::size_t n_labels) {
    return parse_random_config(read_file(path), n_labels);
}

std::string axiom_report_json(const SubstitutionMatrix& m, const AxiomReport& r) {
    json j;
    j["version"] = version_string();
    j["labels"] = m.labels;
    j["M0"] = r.m0;
    j["M1"] = r.m1;
    j["M2"] = r.m2;
    if (r.n) j["n"] = *r.n;
    j["ok"] = r.ok();
    return j.dump(2);
}

std::string tree_to_json(const TruncatedTree& t) {
    json verts = json::array();
    for (std::int64_t v = 0; v < t.vertex_count(); ++v) {
        const auto vi = static_cast<std::size_t>(v);
        verts.push_back({{"id", v},
                         {"label", t.matrix.labels[static_cast<std::size_t>(t.label[vi])]},
                         {"parent", t.parent[vi]}});
    }
    json j;
    j["version"] = version_string();
    j["depth"] = t.depth_limit;
    j["vertices"] = std::move(verts);
    return j.dump();
}

std::string green_vector_json(const SubstitutionMatrix& m, const GreenVector& g, cplx z,
                              double residual, bool real_limit, const std::string& config_echo) {
    json comps = json::array();
    for (std::size_t j = 0; j < g.size(); ++j)
        comps.push_back({{"label", m.labels[j]},
                         {"re", fmt_g17(g[j].real())},
                         {"im", fmt_g17(g[j].imag())}});
    json out;
    out["version"] = version_string();
    out["config"] = config_echo;
    out["E"] = fmt_g17(z.real());
    out["eta"] = fmt_g17(z.imag());
    out["gamma"] = std::move(comps);
    out["residual"] = fmt_g17(residual);
    out["real_limit"] = real_limit;
    return out.dump(2);
}

std::string band_scan_json(const SubstitutionMatrix& m, const BandScan& scan,
                           const std::string& config_echo) {
    json intervals = json::array();
    for (const auto& [a, b] : scan.sigma1)
        intervals.push_back({{"lo", fmt_g17(a)}, {"hi", fmt_g17(b)}});
    json cands = json::array();
    for (double e : scan.sigma0_candidates) cands.push_back(fmt_g17(e));
    json j;
    j["version"] = version_string();
    j["config"] = config_echo;
    j["labels"] = m.labels;
    j["sigma1_intervals"] = std::move(intervals);
    j["sigma0_candidates"] = std::move(cands);
    j["interval_count"] = scan.sigma1.size();
    j["max_residual"] = fmt_g17(scan.max_residual);
    j["solver_failures"] = scan.solver_failures;
    return j.dump(2);
}

std::string kappa_survey_json(const KappaSurvey& s, const std::string& config_echo) {
    json j;
    j["version"] = version_string();
    j["config"] = config_echo;
    j["samples"] = s.n;
    j["max_kappa"] = fmt_g17(s.max_kappa);
    j["delta_hat"] = fmt_g17(s.delta_hat);
    j["q50"] = fmt_g17(s.q50);
    j["q90"] = fmt_g17(s.q90);
    j["q99"] = fmt_g17(s.q99);
    j["perms"] = s.n_perms_used;
    j["exact_perms"] = s.exact_perms;
    return j.dump(2);
}

std::string density_csv(std::span<const double> grid, std::span<const double> etas,
                        const OperatorParams& p, std::span<const GreenVector> gammas,
                        std::span<const double> rho, int root_label) {
    std::ostringstream out;
    out << "E,eta";
    for (std::size_t j = 0; j < p.size(); ++j)
        out << ",re_gamma_" << j << ",im_gamma_" << j;
    out << ",re_g_root,im_g_root,density\n";
    const auto rl = static_cast<std::size_t>(root_label);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << fmt_g17(grid[i]) << "," << fmt_g17(etas.size() == 1 ? etas[0] : etas[i]);
        for (std::size_t j = 0; j < p.size(); ++j)
            out << "," << fmt_cplx(gammas[i][j]);
        out << "," << fmt_cplx(gammas[i][rl]) << "," << fmt_g17(rho[i]) << "\n";
    }
    return out.str();
}

std::string radial_csv(const SubstitutionMatrix& m, const RadialResult& r) {
    std::ostringstream out;
    out << "layer";
    for (const auto& l : m.labels) out << ",re_gamma_" << l << ",im_gamma_" << l;
    out << "\n";
    for (std::size_t s = 0; s < r.layers.size(); ++s) {
        out << s;
        for (const auto& g : r.layers[s]) out << "," << fmt_cplx(g);
        out << "\n";
    }
    return out.str();
}

std::string deviation_csv(const SubstitutionMatrix& m, std::span<const DeviationStats> rows) {
    std::ostringstream out;
    out << "label,lambda,p,samples,mean_gamma_p,sd,ci3,mean_abs_g_p,seed_gap\n";
    for (const auto& r : rows) {
        out << m.labels[static_cast<std::size_t>(r.label)] << "," << fmt_g17(r.lambda) << ","
            << fmt_g17(r.p_exp) << "," << r.n << "," << fmt_g17(r.mean) << "," << fmt_g17(r.sd)
            << "," << fmt_g17(r.half_width3) << "," << fmt_g17(r.mean_abs_g_p) << ","
            << fmt_g17(r.seed_gap) << "\n";
    }
    return out.str();
}

} // namespace conetree
