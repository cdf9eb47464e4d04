#include "genrehawkes/serialize.hpp"

#include "genrehawkes/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

namespace genrehawkes {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace {

const std::set<std::string> kFitKeys = {"model", "branching_ratio", "loglik", "aic", "k", "converged", "n_iter",
                                        "warnings"};

double number_or_nan(const Json& v) {
    return v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json to_json(const FitResult& fit) {
    Json j;
    j["model"] = fit.model;
    for (std::size_t i = 0; i < fit.params.size(); ++i) j[fit.param_names.at(i)] = fit.params[i];
    if (fit.branching_ratio) j["branching_ratio"] = *fit.branching_ratio;
    j["loglik"] = fit.log_likelihood;
    j["aic"] = fit.aic;
    j["k"] = fit.n_params;
    j["converged"] = fit.converged;
    j["n_iter"] = fit.n_iterations;
    j["warnings"] = fit.warnings;
    return j;
}

FitResult fit_from_json(const Json& j) {
    FitResult fit;
    fit.model = j.at("model").get<std::string>();
    for (const auto& [key, value] : j.items()) {
        if (kFitKeys.count(key)) continue;
        fit.param_names.push_back(key);
        fit.params.push_back(number_or_nan(value));
    }
    if (j.contains("branching_ratio")) fit.branching_ratio = number_or_nan(j["branching_ratio"]);
    // Restore loglik/k verbatim; aic is recomputed so the invariant holds.
    fit.set_likelihood(number_or_nan(j.at("loglik")), j.at("k").get<int>());
    fit.converged = j.at("converged").get<bool>();
    fit.n_iterations = j.at("n_iter").get<int>();
    if (j.contains("warnings")) fit.warnings = j["warnings"].get<std::vector<std::string>>();
    return fit;
}

Json to_json(const HawkesParams& p) { return Json{{"mu", p.mu}, {"beta", p.beta}, {"omega", p.omega}}; }

HawkesParams hawkes_from_json(const Json& j) {
    return HawkesParams{j.at("mu").get<double>(), j.at("beta").get<double>(), j.at("omega").get<double>()};
}

Json to_json(const AttributionReport& r) {
    Json j;
    j["cluster_id"] = r.cluster_id;
    j["attributable"] = r.attributable;
    if (r.attributable) {
        j["s_self"] = r.s_self;
        j["s_pop"] = r.s_pop;
        j["s_exo"] = r.s_exo;
    } else {
        j["s_self"] = nullptr;
        j["s_pop"] = nullptr;
        j["s_exo"] = nullptr;
        j["reason"] = r.reason;
    }
    j["n_pairs_evaluated"] = r.n_pairs_evaluated;
    j["w_comments"] = r.w_comments;
    j["negative_exo"] = r.negative_exo;
    return j;
}

Json to_json(const ForecastRow& r) {
    Json j;
    j["cluster_id"] = r.cluster_id;
    j["model"] = r.model;
    j["train_days"] = r.train_days;
    j["horizon_days"] = r.horizon_days;
    j["loglik"] = r.loglik;
    j["aic"] = r.aic;
    j["predicted"] = r.predicted;
    j["actual"] = r.actual;
    j["abs_error"] = r.abs_error;
    j["rel_error"] = r.rel_error;
    j["test_loglik"] = optional_number(r.test_loglik);
    j["mc_std"] = optional_number(r.mc_std);
    j["status"] = r.status;
    return j;
}

Json to_json(const ComparisonTable& t) {
    Json j;
    j["rows"] = Json::array();
    for (const auto& r : t.rows) j["rows"].push_back(to_json(r));
    j["summary"] = Json::array();
    for (const auto& s : t.summary) {
        j["summary"].push_back(Json{{"model", s.model},
                                    {"n_ok", s.n_ok},
                                    {"mean_abs_error", s.mean_abs_error},
                                    {"mean_rel_error", s.mean_rel_error}});
    }
    j["excluded"] = Json::array();
    for (const auto& e : t.excluded) j["excluded"].push_back(Json{{"cluster_id", e.cluster_id}, {"reason", e.reason}});
    return j;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& t) {
    out << "cluster_id,model,train_days,horizon_days,loglik,aic,predicted,actual,abs_error,rel_error,test_loglik,mc_std,"
           "status\n";
    for (const auto& r : t.rows) {
        out << r.cluster_id << ',' << r.model << ',' << format_number(r.train_days) << ','
            << format_number(r.horizon_days) << ',' << format_number(r.loglik) << ',' << format_number(r.aic) << ','
            << format_number(r.predicted) << ',' << r.actual << ',' << format_number(r.abs_error) << ','
            << format_number(r.rel_error) << ',' << (r.test_loglik ? format_number(*r.test_loglik) : "") << ','
            << (r.mc_std ? format_number(*r.mc_std) : "") << ',' << r.status << '\n';
    }
}

void write_attribution_csv(std::ostream& out, const std::vector<AttributionReport>& reports) {
    out << "cluster_id,factor,value\n";
    for (const auto& r : reports) {
        if (!r.attributable) continue;
        out << r.cluster_id << ",self," << format_number(r.s_self) << '\n';
        out << r.cluster_id << ",popularity," << format_number(r.s_pop) << '\n';
        out << r.cluster_id << ",exogenous," << format_number(r.s_exo) << '\n';
    }
}

void write_assignments_csv(std::ostream& out, const std::vector<GenreCluster>& clusters) {
    std::vector<std::pair<std::string, int>> rows;
    for (const auto& c : clusters) {
        for (const auto& e : c.events.events()) rows.emplace_back(e.video_id, c.cluster_id);
    }
    std::sort(rows.begin(), rows.end());
    out << "video_id,cluster_id\n";
    for (const auto& [id, cid] : rows) out << id << ',' << cid << '\n';
}

std::map<std::string, int> read_assignments_csv(std::istream& in, const std::string& source) {
    std::map<std::string, int> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (n == 1) {
            if (line != "video_id,cluster_id") throw ParseError(source, n, "<header>", "expected 'video_id,cluster_id'");
            continue;
        }
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos || comma == 0) throw ParseError(source, n, "<record>", "expected two fields");
        int cid = 0;
        const char* first = line.data() + comma + 1;
        const char* last = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(first, last, cid);
        if (ec != std::errc{} || ptr != last) throw ParseError(source, n, "cluster_id", "expected an integer");
        if (!out.emplace(line.substr(0, comma), cid).second) {
            throw ParseError(source, n, "video_id", "assigned twice");
        }
    }
    if (n == 0) throw ParseError(source, 0, "<file>", "empty");
    return out;
}

std::vector<GenreCluster> clusters_from_assignments(const EventStream& stream,
                                                    const std::map<std::string, int>& assignment) {
    std::map<int, std::vector<Event>> members;
    for (const auto& e : stream.events()) {
        auto it = assignment.find(e.video_id);
        if (it == assignment.end()) throw Error("video '" + e.video_id + "' has no cluster assignment");
        members[it->second].push_back(e);
    }
    if (assignment.size() != stream.size()) {
        throw Error("cluster assignments mention videos that are not in the input stream");
    }
    std::vector<GenreCluster> out;
    for (auto& [cid, events] : members) {
        std::set<std::string> tags;
        for (const auto& e : events) tags.insert(e.tags.begin(), e.tags.end());
        out.push_back(GenreCluster{cid, TagSet(tags.begin(), tags.end()), stream.with_events(std::move(events))});
    }
    return out;
}

Json cluster_summary_json(const std::vector<GenreCluster>& clusters, std::int64_t eta) {
    Json j;
    j["eta"] = eta;
    j["n_clusters"] = clusters.size();
    j["clusters"] = Json::array();
    for (const auto& c : clusters) {
        Json cj;
        cj["cluster_id"] = c.cluster_id;
        cj["tags"] = c.tags;
        cj["n_events"] = c.events.size();
        cj["first_time"] = c.events.empty() ? 0.0 : c.events.events().front().upload_time;
        cj["last_time"] = c.events.empty() ? 0.0 : c.events.events().back().upload_time;
        j["clusters"].push_back(std::move(cj));
    }
    return j;
}

Json ground_truth_json(const SyntheticCorpus& corpus, std::uint64_t seed) {
    Json j;
    j["seed"] = seed;
    j["horizon_days"] = corpus.stream.horizon();
    j["origin_epoch"] = corpus.stream.origin_epoch();
    j["clusters"] = Json::array();
    std::map<int, std::size_t> sizes;
    for (const auto& [id, label] : corpus.labels) ++sizes[label];
    for (std::size_t i = 0; i < corpus.truth.size(); ++i) {
        const auto& c = corpus.truth[i];
        Json cj;
        cj["label"] = i;
        cj["tags"] = c.tags;
        cj["params"] = to_json(c.params);
        cj["branching_ratio"] = c.params.branching_ratio();
        cj["n_events"] = sizes[static_cast<int>(i)];
        cj["uploaders"] = c.uploaders.pool;
        cj["stickiness"] = c.uploaders.stickiness;
        j["clusters"].push_back(std::move(cj));
    }
    j["labels"] = Json::object();
    for (const auto& [id, label] : corpus.labels) j["labels"][id] = label;
    return j;
}

CorpusRequest corpus_request_from_json(const Json& j) {
    CorpusRequest req;
    std::size_t index = 0;
    try {
        req.horizon = j.value("horizon_days", req.horizon);
        req.options.link_eta = j.value("link_eta", req.options.link_eta);
        req.options.extra_tag_probability = j.value("extra_tag_probability", req.options.extra_tag_probability);
        req.options.origin_epoch = j.value("origin_epoch", req.options.origin_epoch);
        for (const auto& cj : j.at("clusters")) {
            ClusterSpec c;
            c.tags = cj.at("tags").get<std::vector<std::string>>();
            c.params =
                HawkesParams{cj.at("mu").get<double>(), cj.at("beta").get<double>(), cj.at("omega").get<double>()};
            const auto& up = cj.at("uploaders");
            if (up.is_number_integer()) {
                const auto n = up.get<std::size_t>();
                for (std::size_t u = 0; u < n; ++u) {
                    c.uploaders.pool.push_back("u" + std::to_string(index) + "_" + std::to_string(u));
                }
            } else {
                c.uploaders.pool = up.get<std::vector<std::string>>();
            }
            c.uploaders.stickiness = cj.value("stickiness", 0.0);
            req.clusters.push_back(std::move(c));
            ++index;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("corpus spec, cluster " + std::to_string(index) + ": " + e.what());
    }
    if (!(req.horizon > 0.0)) throw Error("corpus spec: horizon_days must be positive");
    for (std::size_t i = 0; i < req.clusters.size(); ++i) {
        const auto& c = req.clusters[i];
        const auto where = "corpus spec, cluster " + std::to_string(i) + ": ";
        if (c.tags.empty()) throw Error(where + "tags must not be empty");
        if (c.uploaders.pool.empty()) throw Error(where + "needs at least one uploader");
        if (c.uploaders.stickiness < 0.0 || c.uploaders.stickiness > 1.0) {
            throw Error(where + "stickiness must be in [0, 1]");
        }
        try {
            check_params(c.params);
        } catch (const std::invalid_argument& e) {
            throw Error(where + e.what());
        }
    }
    return req;
}

}  // namespace genrehawkes
