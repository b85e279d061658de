#pragma once

#include <string>
#include <vector>

#include "conetree/green.hpp"
#include "conetree/radial.hpp"
#include "conetree/random_sim.hpp"
#include "conetree/substitution.hpp"
#include "conetree/tree.hpp"

namespace conetree {

// All floating point output goes through fmt_g17 (17 significant digits,
// scientific) so that repeated runs are byte-identical.
std::string fmt_g17(double v);
std::string fmt_cplx(cplx v);  // "re,im" pair, both g17

std::string version_string();

// JSON schemas (nlohmann/json under the hood):
//   matrix    {"labels": ["1","2"], "matrix": [[2,1],[1,1]]}
//   operator  {"kind": "adjacency"|"laplacian"|"normalized"|"custom",
//              "offdiag": [[...]], "diag": [...]}   (offdiag/diag for custom)
//   potential {"horizon": N, "values": [[s, label, v], ...], "default": 0}
//   random    {"potential": {...}|"edge_weights": {...}, "distribution(s)": ...}
SubstitutionMatrix parse_matrix_json(const std::string& text);
SubstitutionMatrix load_matrix_file(const std::string& path);
std::string matrix_to_json(const SubstitutionMatrix& m);

OperatorParams parse_operator_json(const std::string& text, const SubstitutionMatrix& m);
OperatorParams load_operator_file(const std::string& path, const SubstitutionMatrix& m);
std::string operator_to_json(const OperatorParams& p);

RadialPotential parse_potential_json(const std::string& text, std::size_t n_labels);
RadialPotential load_potential_file(const std::string& path, std::size_t n_labels);

struct RandomRunConfig {
    bool offdiagonal = false;  // potential vs edge-weight perturbation
    std::vector<DistributionSpec> per_label;
    std::vector<double> lambdas;
    double E = 0.0;
    double eta = 1.0;
    double p_exp = 2.0;
    std::uint64_t samples = 1000;
    std::uint64_t seed = 0;
    int depth = 12;
    std::string echo;  // original config text
};
RandomRunConfig parse_random_config(const std::string& text, std::size_t n_labels);
RandomRunConfig load_random_config(const std::string& path, std::size_t n_labels);

std::string axiom_report_json(const SubstitutionMatrix& m, const AxiomReport& r);
std::string tree_to_json(const TruncatedTree& t);
std::string green_vector_json(const SubstitutionMatrix& m, const GreenVector& g, cplx z,
                              double residual, bool real_limit, const std::string& config_echo);
std::string band_scan_json(const SubstitutionMatrix& m, const BandScan& scan,
                           const std::string& config_echo);
std::string kappa_survey_json(const KappaSurvey& s, const std::string& config_echo);

std::string density_csv(std::span<const double> grid, std::span<const double> etas,
                        const OperatorParams& p, std::span<const GreenVector> gammas,
                        std::span<const double> rho, int root_label = 0);
std::string radial_csv(const SubstitutionMatrix& m, const RadialResult& r);
std::string deviation_csv(const SubstitutionMatrix& m, std::span<const DeviationStats> rows);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace conetree
