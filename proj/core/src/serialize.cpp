#include "superres/serialize.hpp"

#include "superres/errors.hpp"

namespace superres {

namespace {

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_to_json(const Eigen::VectorXd& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

}  // namespace

Json to_json(const SourceParams& theta) {
    return Json{{"s0", theta.s0}, {"s", theta.s}, {"q", theta.q}};
}

SourceParams params_from_json(const Json& j) {
    return SourceParams(j.at("s0").get<double>(), j.at("s").get<double>(),
                        j.at("q").get<double>());
}

Json to_json(const PsfModel& model) {
    Json j;
    if (model.kind() == PsfKind::gaussian) {
        j["kind"] = "gaussian";
        j["sigma"] = model.sigma();
        j["quad_nodes"] = model.rule().size();
    } else {
        j["kind"] = "tabulated";
        j["max_derivative_order"] = model.max_derivative_order();
        Json xs = Json::array(), vs = Json::array();
        for (double x : model.table_x()) xs.push_back(x);
        for (double v : model.table_amplitude()) vs.push_back(v);
        j["x"] = std::move(xs);
        j["amplitude"] = std::move(vs);
    }
    return j;
}

PsfModel psf_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian")
        return PsfModel::gaussian(j.at("sigma").get<double>(),
                                  j.at("quad_nodes").get<int>());
    if (kind == "tabulated")
        return PsfModel::tabulated(j.at("x").get<std::vector<double>>(),
                                   j.at("amplitude").get<std::vector<double>>(),
                                   j.at("max_derivative_order").get<int>());
    throw DomainError("serialize: unknown PSF kind: " + kind);
}

Json to_json(const FisherMatrix& fisher, const SourceParams& theta, const PsfModel& model) {
    Json j;
    j["order"] = {"s0", "s", "q"};
    j["matrix"] = matrix_to_json(fisher.matrix());
    j["kind"] = fisher.kind() == FisherKind::quantum ? "quantum" : "classical";
    j["theta"] = to_json(theta);
    j["psf"] = to_json(model);
    if (fisher.unbounded_information()) j["unbounded_information"] = true;
    if (fisher.has_infinite_entries()) j["infinite_entries"] = true;
    return j;
}

Json to_json(const OrthonormalBasis& basis) {
    Json j;
    j["x0"] = basis.x0();
    j["dim"] = basis.dim();
    j["overlap_matrix"] = matrix_to_json(basis.overlap_matrix());
    j["psf"] = to_json(basis.psf());
    return j;
}

OrthonormalBasis basis_from_json(const Json& j) {
    const PsfModel psf = psf_from_json(j.at("psf"));
    OrthonormalBasis basis =
        OrthonormalBasis::build(psf, j.at("x0").get<double>(), j.at("dim").get<int>());
    const auto rows = j.at("overlap_matrix");
    const auto& g = basis.overlap_matrix();
    for (int a = 0; a < basis.dim(); ++a)
        for (int b = 0; b < basis.dim(); ++b)
            if (std::abs(rows.at(a).at(b).get<double>() - g(a, b)) > 1e-9)
                throw AccuracyError("serialize: cached overlap matrix disagrees with rebuild");
    return basis;
}

Json to_json(const CrlbSummary& summary) {
    Json j;
    j["theta_true"] = to_json(summary.theta_true);
    j["estimator_mean"] = vector_to_json(summary.estimator_mean);
    j["covariance"] = matrix_to_json(summary.covariance);
    j["crlb_classical"] = matrix_to_json(summary.crlb_classical);
    j["crlb_quantum"] = matrix_to_json(summary.crlb_quantum);
    j["n_photons"] = summary.n_photons;
    j["replications"] = summary.replications;
    j["seed"] = summary.seed;
    j["failures"] = summary.failures;
    return j;
}

namespace {

Json estimation_to_json(const EstimationResult& est, std::uint64_t photons) {
    Json j;
    j["theta_hat"] = to_json(est.theta_hat);
    j["log_likelihood"] = est.log_likelihood;
    j["converged"] = est.converged;
    j["iterations"] = est.iterations;
    j["photons"] = photons;
    return j;
}

}  // namespace

Json to_json(const AdaptiveResult& result, const AdaptiveSchedule& schedule,
             const SourceParams& theta_true, std::uint64_t seed) {
    Json j;
    j["theta_true"] = to_json(theta_true);
    j["schedule"] = Json{{"total_photons", schedule.total_photons},
                        {"first_stage_fraction", schedule.first_stage_fraction},
                        {"phi", schedule.phi},
                        {"basis_dim", schedule.basis_dim}};
    j["seed"] = seed;
    j["stage1"] = estimation_to_json(result.stage1, result.stage1_photons);
    j["stage2"] = estimation_to_json(result.stage2, result.stage2_photons);
    j["x0_opt_estimate"] = result.x0_opt_estimate;
    j["fallback_used"] = result.fallback_used;
    return j;
}

}  // namespace superres
