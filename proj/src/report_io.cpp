#include "ruinlab/errors.hpp"
#include "ruinlab/pipeline.hpp"

#include <cctype>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

namespace ruinlab {

namespace {

using Json = nlohmann::ordered_json;

std::string optional_number(const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError(fmt::format("cannot write '{}'", path.string()));
    }
    out << content;
    if (!out) {
        throw InputError(fmt::format("write failed for '{}'", path.string()));
    }
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

std::string summary_csv(const AnalysisReport& r) {
    std::string out = "product,field,minimum,maximum,mean,std_dev,n\n";
    for (const auto& s : r.segments) {
        const std::pair<const char*, const SummaryStats*> rows[] = {
            {"premium", &s.premium}, {"claims_paid", &s.claims_paid}, {"claim_count", &s.claim_count}};
        for (const auto& [name, st] : rows) {
            out += fmt::format("{},{},{},{},{},{},{}\n", to_string(s.segment), name, st->minimum, st->maximum,
                               st->mean, st->std_dev, st->n);
        }
    }
    return out;
}

std::string fits_csv(const AnalysisReport& r) {
    std::string out = "product,distribution,parameter,estimate,std_error,n,gof_statistic,gof_dof,gof_p_value\n";
    auto row = [&](Segment seg, const char* dist, const char* param, double est, double se, std::size_t n,
                   const std::optional<GofResult>& gof) {
        out += fmt::format("{},{},{},{},{},{},", to_string(seg), dist, param, est, se, n);
        if (gof) {
            out += fmt::format("{},{},{}\n", gof->statistic, gof->dof, gof->p_value);
        } else {
            out += ",,\n";
        }
    };
    for (const auto& s : r.segments) {
        row(s.segment, "poisson", "lambda", s.frequency.lambda_hat, s.frequency.std_error, s.frequency.n,
            s.frequency_gof);
        row(s.segment, "exponential_monthly", "rate", s.monthly_severity.rate_hat, s.monthly_severity.std_error,
            s.monthly_severity.n, s.severity_gof);
        row(s.segment, "exponential_claim", "rate", s.claim_severity.rate_hat, s.claim_severity.std_error,
            s.claim_severity.n, std::nullopt);
    }
    return out;
}

std::string dependence_csv(const AnalysisReport& r) {
    std::string out = "product,pearson_r,pearson_p,kendall_tau,gumbel_theta,cvm_statistic,independence_p,"
                      "simulated_theta,loading\n";
    for (const auto& s : r.segments) {
        const auto& d = s.dependence;
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(s.segment), d.pearson_r, d.pearson_p,
                           d.kendall_tau, d.gumbel_theta, d.cvm_statistic, d.independence_p, s.model.copula_theta,
                           s.model.loading);
    }
    return out;
}

std::string curves_csv(const AnalysisReport& r) {
    std::string out = "product,assumption,u0,psi_hat,std_error\n";
    for (const auto& s : r.segments) {
        for (const auto* curve : {&s.independent, &s.dependent}) {
            for (const auto& e : *curve) {
                out += fmt::format("{},{},{},{},{}\n", to_string(s.segment), to_string(e.assumption), e.u0,
                                   e.psi_hat, e.std_error);
            }
        }
    }
    return out;
}

std::string test_row(const TestResult& t, const std::string& comparison) {
    return fmt::format("{},{},{},{},{},{},{}\n", t.test, comparison, t.statistic, optional_number(t.z_value),
                       t.dof, t.p_value, t.n_effective);
}

std::string tests_csv(const AnalysisReport& r) {
    std::string out = "test,comparison,statistic,z_value,dof,p_value,n_effective\n";
    for (const auto& s : r.segments) {
        if (s.dependent_vs_independent) {
            out += test_row(*s.dependent_vs_independent,
                            fmt::format("{} dependent v. independent", to_string(s.segment)));
        }
    }
    for (const auto& p : r.pairwise) {
        out += test_row(p.result, fmt::format("{} v. {}", to_string(p.first), to_string(p.second)));
    }
    if (r.friedman) {
        std::string labels;
        for (std::size_t i = 0; i < r.friedman->ranks.size(); ++i) {
            labels += (i == 0 ? "" : " ") + r.friedman->ranks[i].label;
        }
        out += test_row(*r.friedman, labels);
    }
    return out;
}

std::string figure_csv(const SegmentReport& s) {
    std::string out = "u0,psi_dependent,psi_independent\n";
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        out += fmt::format("{},{},{}\n", s.grid[i], s.dependent[i].psi_hat, s.independent[i].psi_hat);
    }
    return out;
}

Json stats_json(const SummaryStats& s) {
    return Json{{"minimum", s.minimum}, {"maximum", s.maximum}, {"mean", s.mean}, {"std_dev", s.std_dev}, {"n", s.n}};
}

Json gof_json(const std::optional<GofResult>& g) {
    if (!g) return nullptr;
    return Json{{"statistic", g->statistic}, {"dof", g->dof}, {"p_value", g->p_value}, {"bins", g->bins}};
}

Json test_json(const TestResult& t) {
    Json groups = Json::array();
    for (const auto& g : t.ranks) {
        Json j{{"label", g.label}, {"count", g.count}, {"mean_rank", g.mean_rank}, {"rank_sum", g.rank_sum}};
        j["median"] = g.median ? Json(*g.median) : Json(nullptr);
        groups.push_back(std::move(j));
    }
    Json j{{"test", t.test}, {"statistic", t.statistic}};
    j["z_value"] = t.z_value ? Json(*t.z_value) : Json(nullptr);
    j["dof"] = t.dof;
    j["p_value"] = t.p_value;
    j["n_effective"] = t.n_effective;
    j["ranks"] = std::move(groups);
    return j;
}

Json curve_json(const std::vector<RuinEstimate>& curve) {
    Json arr = Json::array();
    for (const auto& e : curve) {
        arr.push_back(Json{{"u0", e.u0}, {"psi_hat", e.psi_hat}, {"std_error", e.std_error}});
    }
    return arr;
}

} // namespace

std::string report_json(const AnalysisReport& r) {
    Json root;
    root["config"] = serialize(r.config);
    Json segments = Json::array();
    for (const auto& s : r.segments) {
        Json j;
        j["segment"] = to_string(s.segment);
        j["months"] = s.months;
        j["summary"] = Json{{"premium", stats_json(s.premium)},
                            {"claims_paid", stats_json(s.claims_paid)},
                            {"claim_count", stats_json(s.claim_count)}};
        j["frequency"] = Json{{"lambda", s.frequency.lambda_hat}, {"std_error", s.frequency.std_error},
                              {"gof", gof_json(s.frequency_gof)}};
        j["monthly_severity"] = Json{{"rate", s.monthly_severity.rate_hat},
                                     {"std_error", s.monthly_severity.std_error},
                                     {"gof", gof_json(s.severity_gof)}};
        j["claim_severity"] = Json{{"rate", s.claim_severity.rate_hat}, {"std_error", s.claim_severity.std_error},
                                   {"claims", s.claim_severity.n}};
        const auto& d = s.dependence;
        j["dependence"] = Json{{"pearson_r", d.pearson_r},         {"pearson_p", d.pearson_p},
                               {"kendall_tau", d.kendall_tau},     {"gumbel_theta", d.gumbel_theta},
                               {"cvm_statistic", d.cvm_statistic}, {"independence_p", d.independence_p}};
        j["model"] = Json{{"lambda", s.model.lambda},
                          {"beta", s.model.beta},
                          {"loading", s.model.loading},
                          {"premium", premium_per_period(s.model)},
                          {"copula_theta", s.model.copula_theta},
                          {"horizon", s.model.horizon},
                          {"monitoring", to_string(s.model.monitoring)}};
        j["independent"] = curve_json(s.independent);
        j["dependent"] = curve_json(s.dependent);
        j["dependent_vs_independent"] =
            s.dependent_vs_independent ? test_json(*s.dependent_vs_independent) : Json(nullptr);
        j["warnings"] = s.warnings;
        segments.push_back(std::move(j));
    }
    root["segments"] = std::move(segments);
    root["friedman"] = r.friedman ? test_json(*r.friedman) : Json(nullptr);
    Json pairwise = Json::array();
    for (const auto& p : r.pairwise) {
        Json j = test_json(p.result);
        j["comparison"] = fmt::format("{} v. {}", to_string(p.first), to_string(p.second));
        pairwise.push_back(std::move(j));
    }
    root["pairwise"] = std::move(pairwise);
    root["warnings"] = r.warnings;
    return root.dump(2) + "\n";
}

void emit_tables(const AnalysisReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw InputError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
    }
    write_file(dir / "summary.csv", summary_csv(report));
    write_file(dir / "fits.csv", fits_csv(report));
    write_file(dir / "dependence.csv", dependence_csv(report));
    write_file(dir / "ruin_curves.csv", curves_csv(report));
    write_file(dir / "tests.csv", tests_csv(report));
    for (const auto& s : report.segments) {
        write_file(dir / fmt::format("figure_{}.csv", lower(to_string(s.segment))), figure_csv(s));
    }
    write_file(dir / "report.json", report_json(report));
}

} // namespace ruinlab
