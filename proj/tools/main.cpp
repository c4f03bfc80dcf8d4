// Command-line front end: measure computation, cross-route verification,
// identifier export, the three application solvers, and case-study bundles.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phiquad/applications.hpp"
#include "phiquad/casestudy.hpp"
#include "phiquad/closed_form.hpp"
#include "phiquad/divergence.hpp"
#include "phiquad/dual.hpp"
#include "phiquad/io.hpp"
#include "phiquad/primal.hpp"
#include "phiquad/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

struct SpecWithBeta {
    phiquad::DivergenceSpec spec;
    double beta;
};

// Spec grammar name:key=value,...; the radius may ride along as beta=... but
// an explicit --beta flag wins.
SpecWithBeta resolve_spec(const std::string& spec_text, std::optional<double> beta_flag) {
    const auto parsed = phiquad::parse_spec_string(spec_text);
    double beta = 1.0;
    if (parsed.beta) beta = *parsed.beta;
    if (beta_flag) beta = *beta_flag;
    return {parsed.spec, beta};
}

void print_quadrangle(const phiquad::QuadrangleResult& q, const std::string& which) {
    auto want = [&](const char* name) { return which == "all" || which == name; };
    if (want("risk")) std::printf("risk        %.10g\n", q.risk);
    if (want("deviation")) std::printf("deviation   %.10g\n", q.deviation);
    if (want("regret")) std::printf("regret      %.10g\n", q.regret);
    if (want("error")) std::printf("error       %.10g\n", q.error);
    if (want("statistic"))
        std::printf("statistic   [%.10g, %.10g]\n", q.statistic_lo, q.statistic_hi);
    std::printf("optimizers  C=%.10g t=%.10g\n", q.optimal_c, q.optimal_t);
}

int cmd_compute(const std::string& spec_text, std::optional<double> beta_flag,
                const std::string& data_path, const std::string& which, const std::string& route,
                const std::string& out_path) {
    const auto [spec, beta] = resolve_spec(spec_text, beta_flag);
    const auto x = phiquad::read_distribution_csv(data_path);

    phiquad::QuadrangleResult q;
    if (route == "closed") {
        q = phiquad::closed_form_quadrangle(spec, beta, x);
    } else if (route == "primal") {
        q = phiquad::primal_quadrangle(spec, beta, x);
    } else {
        const auto risk = phiquad::dual_risk_oracle(spec, beta, x);
        const auto regret = phiquad::dual_regret_oracle(spec, beta, x);
        q.spec_name = spec.name();
        q.beta = beta;
        q.risk = risk.value;
        q.deviation = risk.value - x.mean();
        q.regret = regret.value;
        q.error = regret.value - x.mean();
        const auto stat = phiquad::primal_statistic(spec, beta, x);
        q.statistic_lo = stat.first;
        q.statistic_hi = stat.second;
        const auto primal = phiquad::primal_risk(spec, beta, x);
        q.optimal_c = primal.c;
        q.optimal_t = primal.t;
        std::printf("identifier  E[Q]=%.8f E[phi(Q)]=%.8f E[XQ]=%.10g\n",
                    risk.identifier.mean_weight, risk.identifier.divergence_value,
                    risk.identifier.attained_objective);
    }
    print_quadrangle(q, which);

    if (!out_path.empty()) {
        nlohmann::json doc{{"command", "compute"},
                           {"spec", spec.name()},
                           {"beta", beta},
                           {"values", phiquad::quadrangle_to_json(q)},
                           {"optimizers", {{"C", q.optimal_c}, {"t", q.optimal_t}}},
                           {"diagnostics", {{"route", route}, {"atoms", x.size()}}}};
        phiquad::write_json(out_path, doc);
    }
    return kExitOk;
}

int cmd_verify(const std::string& spec_text, std::optional<double> beta_flag,
               const std::string& data_path) {
    const auto [spec, beta] = resolve_spec(spec_text, beta_flag);
    const auto x = phiquad::read_distribution_csv(data_path);
    const auto report = phiquad::verify_routes(spec, beta, x);
    std::printf("%-50s %12s %10s  %s\n", "check", "gap", "tol", "status");
    for (const auto& c : report.checks)
        std::printf("%-50s %12.3e %10.1e  %s\n", c.name.c_str(), c.gap, c.tolerance,
                    c.passed ? "ok" : "FAIL");
    if (report.dual_skipped)
        std::printf("note: dual oracle skipped (more than 8 atoms)\n");
    if (!report.all_passed()) {
        std::printf("verification FAILED\n");
        return kExitVerify;
    }
    std::printf("verification ok\n");
    return kExitOk;
}

int cmd_identify(const std::string& spec_text, std::optional<double> beta_flag,
                 const std::string& data_path, const std::string& out_path) {
    const auto [spec, beta] = resolve_spec(spec_text, beta_flag);
    const auto x = phiquad::read_distribution_csv(data_path);
    const auto primal = phiquad::primal_risk(spec, beta, x);
    const auto id = phiquad::risk_identifier_from_primal(spec, beta, x, primal.c_over_t(), primal.t);
    std::vector<std::vector<double>> values;
    for (std::size_t i = 0; i < x.size(); ++i) values.push_back({x.value(i)});
    const std::string path = out_path.empty() ? "identifier.csv" : out_path;
    phiquad::write_identifier_csv(path, values, x.probs(), id.weights);
    std::printf("risk        %.10g\n", primal.value);
    std::printf("identifier  E[Q]=%.8f E[phi(Q)]=%.8f E[XQ]=%.10g -> %s\n", id.mean_weight,
                id.divergence_value, id.attained_objective, path.c_str());
    return kExitOk;
}

nlohmann::json report_json(const char* command, const phiquad::DivergenceSpec& spec, double beta,
                           const phiquad::SolutionReport& report, const std::string& id_path) {
    return {{"command", command},
            {"spec", spec.name()},
            {"beta", beta},
            {"decision", report.decision},
            {"intercept", report.intercept},
            {"objective", report.objective},
            {"diagnostics",
             {{"iterations", report.diagnostics.iterations},
              {"final_step", report.diagnostics.final_step},
              {"converged", report.diagnostics.converged}}},
            {"identifier", id_path}};
}

void emit_plot(const std::string& path, const std::vector<std::vector<double>>& points,
               const std::vector<double>& weights, const std::vector<int>& labels, bool with_line,
               double slope, double icept) {
    phiquad::detail::write_scatter_svg(path, points, weights, labels, with_line, slope, icept);
    std::printf("plot        %s\n", path.c_str());
}

int cmd_portfolio(const std::string& spec_text, std::optional<double> beta_flag,
                  const std::string& data_path, const std::string& out_path, bool emit_plot_flag,
                  bool long_only) {
    const auto [spec, beta] = resolve_spec(spec_text, beta_flag);
    const auto table = phiquad::read_csv(data_path);
    phiquad::PortfolioProblem problem{table.rows, {}, spec, beta, long_only};
    const auto report = phiquad::solve_portfolio(problem);
    std::printf("weights    ");
    for (double w : report.decision) std::printf(" %.8f", w);
    std::printf("\nobjective   %.10g\n", report.objective);

    const std::string stem = out_path.empty() ? "portfolio" : out_path;
    const std::string id_path = stem + "_identifier.csv";
    phiquad::write_identifier_csv(id_path, table.rows,
                                  phiquad::detail::uniform_probs(table.rows.size()),
                                  report.weights);
    phiquad::write_json(stem + "_report.json",
                        report_json("portfolio", spec, beta, report, id_path));
    if (emit_plot_flag && table.columns.size() == 2)
        emit_plot(stem + "_plot.svg", table.rows, report.weights, {}, false, 0.0, 0.0);
    return kExitOk;
}

int cmd_classify(const std::string& spec_text, std::optional<double> beta_flag,
                 const std::string& data_path, double reg_weight, const std::string& out_path,
                 bool emit_plot_flag) {
    const auto [spec, beta] = resolve_spec(spec_text, beta_flag);
    const auto table = phiquad::read_csv(data_path);
    if (table.columns.empty() || table.columns.back() != "label")
        throw phiquad::DomainError("classification data needs a trailing 'label' column");
    phiquad::ClassificationProblem problem{{}, {}, spec, beta, reg_weight};
    for (const auto& row : table.rows) {
        problem.features.emplace_back(row.begin(), row.end() - 1);
        problem.labels.push_back(row.back() > 0 ? 1 : -1);
    }
    const auto report = phiquad::solve_classification(problem);
    std::printf("weights    ");
    for (double w : report.decision) std::printf(" %.8f", w);
    std::printf("\nthreshold   %.8f\nobjective   %.10g\n", report.intercept, report.objective);

    const std::string stem = out_path.empty() ? "classify" : out_path;
    const std::string id_path = stem + "_identifier.csv";
    phiquad::write_identifier_csv(id_path, problem.features,
                                  phiquad::detail::uniform_probs(problem.features.size()),
                                  report.weights);
    phiquad::write_json(stem + "_report.json",
                        report_json("classify", spec, beta, report, id_path));
    if (emit_plot_flag && problem.features.front().size() == 2) {
        const bool sloped = std::abs(report.decision[1]) > 1e-12;
        emit_plot(stem + "_plot.svg", problem.features, report.weights, problem.labels, sloped,
                  sloped ? -report.decision[0] / report.decision[1] : 0.0,
                  sloped ? report.intercept / report.decision[1] : 0.0);
    }
    return kExitOk;
}

int cmd_regress(const std::string& spec_text, std::optional<double> beta_flag,
                const std::string& data_path, const std::string& out_path, bool emit_plot_flag) {
    const auto [spec, beta] = resolve_spec(spec_text, beta_flag);
    const auto table = phiquad::read_csv(data_path);
    if (table.columns.empty() || table.columns.back() != "y")
        throw phiquad::DomainError("regression data needs a trailing 'y' column");
    phiquad::RegressionProblem problem{{}, {}, spec, beta};
    for (const auto& row : table.rows) {
        problem.regressors.emplace_back(row.begin(), row.end() - 1);
        problem.response.push_back(row.back());
    }
    const auto sol = phiquad::solve_regression(problem);
    std::printf("coefficients");
    for (double w : sol.error_route.decision) std::printf(" %.8f", w);
    std::printf("\nintercept   %.8f\nerror       %.10g\n", sol.error_route.intercept,
                sol.error_route.objective);
    std::printf("deviation route: objective %.10g, statistic [%.8f, %.8f]\n",
                sol.deviation_route.objective, sol.statistic_lo, sol.statistic_hi);

    const std::string stem = out_path.empty() ? "regress" : out_path;
    const std::string id_path = stem + "_identifier.csv";
    std::vector<std::vector<double>> points;
    for (std::size_t i = 0; i < problem.regressors.size(); ++i) {
        auto row = problem.regressors[i];
        row.push_back(problem.response[i]);
        points.push_back(std::move(row));
    }
    phiquad::write_identifier_csv(id_path, points,
                                  phiquad::detail::uniform_probs(points.size()),
                                  sol.deviation_route.weights);
    auto doc = report_json("regress", spec, beta, sol.error_route, id_path);
    doc["deviation_route"] = {{"decision", sol.deviation_route.decision},
                              {"objective", sol.deviation_route.objective},
                              {"statistic_lo", sol.statistic_lo},
                              {"statistic_hi", sol.statistic_hi}};
    phiquad::write_json(stem + "_report.json", doc);
    if (emit_plot_flag && problem.regressors.front().size() == 1)
        emit_plot(stem + "_plot.svg", points, sol.deviation_route.weights, {}, true,
                  sol.error_route.decision[0], sol.error_route.intercept);
    return kExitOk;
}

int cmd_casestudy(const std::string& which, std::uint64_t seed, const std::string& outdir) {
    std::filesystem::create_directories(outdir);
    phiquad::CaseStudyKind kind;
    if (which == "portfolio")
        kind = phiquad::CaseStudyKind::Portfolio;
    else if (which == "classify")
        kind = phiquad::CaseStudyKind::Classify;
    else if (which == "regress")
        kind = phiquad::CaseStudyKind::Regress;
    else
        throw phiquad::DomainError("casestudy: which must be portfolio|classify|regress");
    const auto bundle = phiquad::run_case_study(kind, seed, outdir);
    std::printf("data        %s\nreport      %s\nidentifier  %s\nplot        %s\n",
                bundle.data_path.c_str(), bundle.report_path.c_str(),
                bundle.identifier_path.c_str(), bundle.plot_path.c_str());
    std::printf("decision   ");
    for (double w : bundle.decision) std::printf(" %.8f", w);
    std::printf("\nobjective   %.10g\n", bundle.objective);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phi-divergence risk quadrangle toolkit"};
    app.set_config("--config");
    app.require_subcommand(1);

    std::string spec_text = "pearson_chi2_extended";
    std::optional<double> beta_flag;
    std::string data_path, out_path, which = "all", route = "closed";
    double reg_weight = 1.0;
    bool emit_plot_flag = false, long_only = false;
    std::string cs_which = "regress", outdir = "casestudy";
    std::uint64_t seed = 3;

    auto add_common = [&](CLI::App* sub, bool needs_data) {
        sub->add_option("--spec", spec_text, "divergence spec, name:key=value,...");
        sub->add_option("--beta", beta_flag, "ambiguity radius (overrides beta= in --spec)");
        if (needs_data) sub->add_option("--data", data_path, "input CSV")->required();
        sub->add_option("--out", out_path, "output path stem");
    };

    auto* compute = app.add_subcommand("compute", "quadrangle values for a distribution");
    add_common(compute, true);
    compute->add_option("--which", which)->check(
        CLI::IsMember({"risk", "deviation", "regret", "error", "statistic", "all"}));
    compute->add_option("--route", route)->check(CLI::IsMember({"primal", "closed", "dual"}));

    auto* verify = app.add_subcommand("verify", "cross-route equivalence and axiom report");
    add_common(verify, true);

    auto* identify = app.add_subcommand("identify", "risk identifier export");
    add_common(identify, true);

    auto* portfolio = app.add_subcommand("portfolio", "minimize risk of portfolio loss");
    add_common(portfolio, true);
    portfolio->add_flag("--emit-plot", emit_plot_flag);
    portfolio->add_flag("--long-only", long_only);

    auto* classify = app.add_subcommand("classify", "margin classification");
    add_common(classify, true);
    classify->add_option("--reg", reg_weight, "coefficient on ||w||^2");
    classify->add_flag("--emit-plot", emit_plot_flag);

    auto* regress = app.add_subcommand("regress", "generalized linear regression");
    add_common(regress, true);
    regress->add_flag("--emit-plot", emit_plot_flag);

    auto* casestudy = app.add_subcommand("casestudy", "regenerate and solve a case study");
    casestudy->add_option("--which", cs_which)
        ->check(CLI::IsMember({"portfolio", "classify", "regress"}));
    casestudy->add_option("--seed", seed);
    casestudy->add_option("--outdir", outdir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (compute->parsed())
            return cmd_compute(spec_text, beta_flag, data_path, which, route, out_path);
        if (verify->parsed()) return cmd_verify(spec_text, beta_flag, data_path);
        if (identify->parsed()) return cmd_identify(spec_text, beta_flag, data_path, out_path);
        if (portfolio->parsed())
            return cmd_portfolio(spec_text, beta_flag, data_path, out_path, emit_plot_flag,
                                 long_only);
        if (classify->parsed())
            return cmd_classify(spec_text, beta_flag, data_path, reg_weight, out_path,
                                emit_plot_flag);
        if (regress->parsed())
            return cmd_regress(spec_text, beta_flag, data_path, out_path, emit_plot_flag);
        if (casestudy->parsed()) return cmd_casestudy(cs_which, seed, outdir);
    } catch (const phiquad::DomainError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const phiquad::DegenerateInput& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    }
    return kExitOk;
}
