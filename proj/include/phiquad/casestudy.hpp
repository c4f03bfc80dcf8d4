#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "phiquad/applications.hpp"
#include "phiquad/io.hpp"

// Reproduces the three case studies on regenerated data: bivariate Gaussian
// losses for portfolio optimization and regression, two Gaussian clusters for
// classification. Draws are deterministic for a given seed (hand-rolled
// Box-Muller on mt19937_64, independent of the standard library's
// distribution implementations), so a bundle regenerates byte-identically.

namespace phiquad {

enum class CaseStudyKind { Portfolio, Classify, Regress };

struct CaseStudyBundle {
    std::string data_path;
    std::string report_path;
    std::string identifier_path;
    std::string plot_path;
    std::vector<double> decision;
    double intercept = 0.0;
    double objective = 0.0;
    std::vector<std::vector<double>> data;
    std::vector<int> labels; // classification only
    std::vector<double> weights;
};

namespace detail {

class GaussianSource {
  public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // Box-Muller on uniforms in (0,1]
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(6.283185307179586 * u2);
        have_spare_ = true;
        return r * std::cos(6.283185307179586 * u2);
    }

  private:
    double uniform() {
        return (static_cast<double>(rng_() >> 11) + 1.0) * (1.0 / 9007199254740993.0);
    }
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// 1000 samples, zero mean, unit variances, covariance 1/2.
inline std::vector<std::vector<double>> gaussian_pairs(std::uint64_t seed, std::size_t count) {
    GaussianSource g(seed);
    std::vector<std::vector<double>> out;
    out.reserve(count);
    const double b = std::sqrt(0.75);
    for (std::size_t i = 0; i < count; ++i) {
        const double z1 = g.next(), z2 = g.next();
        out.push_back({z1, 0.5 * z1 + b * z2});
    }
    return out;
}

// Two clusters at (-0.3, 0) and (0.3, 0); variance 0.05, covariance 0.02.
inline void cluster_pairs(std::uint64_t seed, std::vector<std::vector<double>>& features,
                          std::vector<int>& labels) {
    GaussianSource g(seed);
    const double l11 = std::sqrt(0.05);
    const double l21 = 0.02 / l11;
    const double l22 = std::sqrt(0.05 - 0.02 * 0.02 / 0.05);
    for (int cls = 0; cls < 2; ++cls) {
        const double mx = cls == 0 ? -0.3 : 0.3;
        const int label = cls == 0 ? 1 : -1;
        for (int i = 0; i < 100; ++i) {
            const double z1 = g.next(), z2 = g.next();
            features.push_back({mx + l11 * z1, l21 * z1 + l22 * z2});
            labels.push_back(label);
        }
    }
}

// Minimal scatter plot writer. Grayscale encodes the identifier weight
// (darker = larger); labels +1/-1 draw as circles/diamonds; an optional line
// is clipped to the view box by sampling.
inline void write_scatter_svg(const std::string& path,
                              const std::vector<std::vector<double>>& points,
                              const std::vector<double>& weights, const std::vector<int>& labels,
                              bool with_line, double line_slope, double line_icept) {
    const double width = 640.0, height = 480.0, margin = 40.0;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : points) {
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        ymin = std::min(ymin, p[1]);
        ymax = std::max(ymax, p[1]);
    }
    const double xpad = 0.05 * (xmax - xmin + 1e-12), ypad = 0.05 * (ymax - ymin + 1e-12);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;
    double wmin = 1e300, wmax = -1e300;
    for (double w : weights) {
        wmin = std::min(wmin, w);
        wmax = std::max(wmax, w);
    }
    const double wspan = wmax - wmin > 1e-12 ? wmax - wmin : 1.0;

    auto sx = [&](double v) { return margin + (v - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto sy = [&](double v) { return height - margin - (v - ymin) / (ymax - ymin) * (height - 2 * margin); };

    std::ofstream out(path);
    if (!out) throw DomainError("cannot write '" + path + "'");
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  margin, height - margin, width - margin, height - margin);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  margin, margin, margin, height - margin);
    out << buf;
    if (with_line) {
        const double y1 = line_slope * xmin + line_icept, y2 = line_slope * xmax + line_icept;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"steelblue\" "
                      "stroke-width=\"1.5\"/>\n",
                      sx(xmin), sy(y1), sx(xmax), sy(y2));
        out << buf;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double rel = (weights[i] - wmin) / wspan;
        const int gray = static_cast<int>(230.0 - 200.0 * rel); // darker = larger weight
        const double cx = sx(points[i][0]), cy = sy(points[i][1]);
        if (!labels.empty() && labels[i] < 0) {
            std::snprintf(buf, sizeof buf,
                          "<rect x=\"%.2f\" y=\"%.2f\" width=\"5.2\" height=\"5.2\" "
                          "transform=\"rotate(45 %.2f %.2f)\" fill=\"rgb(%d,%d,%d)\"/>\n",
                          cx - 2.6, cy - 2.6, cx, cy, gray, gray, gray);
        } else {
            std::snprintf(buf, sizeof buf,
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"rgb(%d,%d,%d)\"/>\n", cx,
                          cy, gray, gray, gray);
        }
        out << buf;
    }
    out << "</svg>\n";
}

} // namespace detail

inline CaseStudyBundle run_case_study(CaseStudyKind kind, std::uint64_t seed,
                                      const std::string& outdir) {
    CaseStudyBundle bundle;
    const DivergenceSpec spec = DivergenceSpec::pearson_chi2_extended(); // mean quadrangle
    auto path = [&](const std::string& stem) { return outdir + "/" + stem; };

    if (kind == CaseStudyKind::Portfolio) {
        bundle.data = detail::gaussian_pairs(seed, 1000);
        PortfolioProblem problem{bundle.data, {}, spec, 100.0, false};
        const auto report = solve_portfolio(problem);
        bundle.decision = report.decision;
        bundle.objective = report.objective;
        bundle.weights = report.weights;

        bundle.data_path = path("casestudy_portfolio_data.csv");
        CsvTable data{{"asset0", "asset1"}, bundle.data};
        write_csv(bundle.data_path, data);
        bundle.identifier_path = path("casestudy_portfolio_identifier.csv");
        write_identifier_csv(bundle.identifier_path, bundle.data,
                             detail::uniform_probs(bundle.data.size()), bundle.weights);
        bundle.report_path = path("casestudy_portfolio_report.json");
        write_json(bundle.report_path,
                   {{"command", "casestudy"},
                    {"which", "portfolio"},
                    {"seed", seed},
                    {"spec", spec.name()},
                    {"beta", 100.0},
                    {"decision", bundle.decision},
                    {"objective", bundle.objective},
                    {"diagnostics",
                     {{"iterations", report.diagnostics.iterations},
                      {"final_step", report.diagnostics.final_step},
                      {"converged", report.diagnostics.converged}}},
                    {"identifier", bundle.identifier_path}});
        bundle.plot_path = path("casestudy_portfolio_plot.svg");
        detail::write_scatter_svg(bundle.plot_path, bundle.data, bundle.weights, {}, false, 0.0,
                                  0.0);
    } else if (kind == CaseStudyKind::Classify) {
        detail::cluster_pairs(seed, bundle.data, bundle.labels);
        ClassificationProblem problem{bundle.data, bundle.labels, spec, 0.01, 1.0};
        const auto report = solve_classification(problem);
        bundle.decision = report.decision;
        bundle.intercept = report.intercept;
        bundle.objective = report.objective;
        bundle.weights = report.weights;

        bundle.data_path = path("casestudy_classify_data.csv");
        CsvTable data{{"x0", "x1", "label"}, {}};
        for (std::size_t i = 0; i < bundle.data.size(); ++i)
            data.rows.push_back(
                {bundle.data[i][0], bundle.data[i][1], static_cast<double>(bundle.labels[i])});
        write_csv(bundle.data_path, data);
        bundle.identifier_path = path("casestudy_classify_identifier.csv");
        write_identifier_csv(bundle.identifier_path, bundle.data,
                             detail::uniform_probs(bundle.data.size()), bundle.weights);
        bundle.report_path = path("casestudy_classify_report.json");
        write_json(bundle.report_path,
                   {{"command", "casestudy"},
                    {"which", "classify"},
                    {"seed", seed},
                    {"spec", spec.name()},
                    {"beta", 0.01},
                    {"decision", bundle.decision},
                    {"intercept", bundle.intercept},
                    {"objective", bundle.objective},
                    {"diagnostics",
                     {{"iterations", report.diagnostics.iterations},
                      {"final_step", report.diagnostics.final_step},
                      {"converged", report.diagnostics.converged}}},
                    {"identifier", bundle.identifier_path}});
        bundle.plot_path = path("casestudy_classify_plot.svg");
        // decision line w0 x + w1 y - b = 0
        const bool sloped = std::abs(bundle.decision[1]) > 1e-12;
        detail::write_scatter_svg(bundle.plot_path, bundle.data, bundle.weights, bundle.labels,
                                  sloped,
                                  sloped ? -bundle.decision[0] / bundle.decision[1] : 0.0,
                                  sloped ? bundle.intercept / bundle.decision[1] : 0.0);
    } else {
        bundle.data = detail::gaussian_pairs(seed, 1000);
        RegressionProblem problem{{}, {}, spec, 100.0};
        for (const auto& p : bundle.data) {
            problem.regressors.push_back({p[0]});
            problem.response.push_back(p[1]);
        }
        const auto sol = solve_regression(problem);
        bundle.decision = sol.error_route.decision;
        bundle.intercept = sol.error_route.intercept;
        bundle.objective = sol.error_route.objective;
        // Identifier of the centered residual: the worst-case reweighting of
        // the deviation being minimized.
        bundle.weights = sol.deviation_route.weights;

        bundle.data_path = path("casestudy_regress_data.csv");
        CsvTable data{{"x", "y"}, bundle.data};
        write_csv(bundle.data_path, data);
        bundle.identifier_path = path("casestudy_regress_identifier.csv");
        write_identifier_csv(bundle.identifier_path, bundle.data,
                             detail::uniform_probs(bundle.data.size()), bundle.weights);
        bundle.report_path = path("casestudy_regress_report.json");
        write_json(bundle.report_path,
                   {{"command", "casestudy"},
                    {"which", "regress"},
                    {"seed", seed},
                    {"spec", spec.name()},
                    {"beta", 100.0},
                    {"decision", bundle.decision},
                    {"intercept", bundle.intercept},
                    {"objective", bundle.objective},
                    {"diagnostics",
                     {{"iterations", sol.error_route.diagnostics.iterations},
                      {"final_step", sol.error_route.diagnostics.final_step},
                      {"converged", sol.error_route.diagnostics.converged}}},
                    {"identifier", bundle.identifier_path}});
        bundle.plot_path = path("casestudy_regress_plot.svg");
        detail::write_scatter_svg(bundle.plot_path, bundle.data, bundle.weights, {}, true,
                                  bundle.decision[0], bundle.intercept);
    }
    return bundle;
}

} // namespace phiquad
