#include "commands.hpp"

#include "genrehawkes/attribution.hpp"
#include "genrehawkes/baselines.hpp"
#include "genrehawkes/error.hpp"
#include "genrehawkes/forecast.hpp"
#include "genrehawkes/hawkes.hpp"
#include "genrehawkes/ingest.hpp"
#include "genrehawkes/parallel.hpp"
#include "genrehawkes/rng.hpp"
#include "genrehawkes/serialize.hpp"
#include "genrehawkes/simulate.hpp"
#include "genrehawkes/taggraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

namespace genrehawkes::cli {

namespace fs = std::filesystem;

namespace {

// Models `fit` knows about, in output order. The *_mc forecast variants reuse
// the fits of their base model.
const std::vector<std::string> kFitModels = {model::hawkes,     model::poisson,    model::pc_nhpp,
                                             model::nhpp_drift, model::arima_lite, model::hawkes_global};

// Three genres with clearly different dynamics; small enough that the whole
// pipeline runs in seconds.
constexpr const char* kDefaultCorpusSpec = R"({
  "horizon_days": 240,
  "link_eta": 3,
  "clusters": [
    {"tags": ["anime", "cosplay", "manga"], "mu": 0.6, "beta": 1.4, "omega": 2.0, "uploaders": 12, "stickiness": 0.7},
    {"tags": ["guitar", "live", "music"], "mu": 1.5, "beta": 0.3, "omega": 1.0, "uploaders": 40, "stickiness": 0.1},
    {"tags": ["cooking", "recipe"], "mu": 0.4, "beta": 0.24, "omega": 0.4, "uploaders": 6, "stickiness": 0.3}
  ]
})";

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to a sibling temp file and renames it into place, so readers never
// see a partial artifact.
void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw Error("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

void write_json(const fs::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

Json read_json(const fs::path& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

fs::path require_artifact(const RunConfig& cfg, const char* name, const char* producer) {
    const fs::path p = cfg.out / name;
    if (!fs::exists(p)) {
        throw UsageError(p.string() + " not found; run `genrehawkes " + std::string(producer) + "` first");
    }
    return p;
}

EventStream load_stream(const RunConfig& cfg) {
    if (!fs::exists(cfg.input)) throw UsageError("input file not found: " + cfg.input);
    return parse_events(cfg.input, format_from_path(cfg.input));
}

std::vector<GenreCluster> load_clusters(const RunConfig& cfg, const EventStream& stream) {
    const auto path = require_artifact(cfg, artifact::assignments, "cluster");
    std::ifstream in(path);
    const auto assignment = read_assignments_csv(in, path.string());
    return clusters_from_assignments(stream, assignment);
}

std::vector<std::string> selected(const RunConfig& cfg, const std::vector<std::string>& known) {
    if (cfg.models.empty()) return known;
    std::vector<std::string> out;
    for (const auto& m : known) {
        if (std::find(cfg.models.begin(), cfg.models.end(), m) != cfg.models.end()) out.push_back(m);
    }
    return out;
}

PopularityAverage popularity_mode(const RunConfig& cfg) {
    return cfg.popularity_average == "all_time" ? PopularityAverage::all_time : PopularityAverage::prior;
}

Json error_entry(const std::string& model, const std::string& message) {
    return Json{{"model", model}, {"status", "error: " + message}};
}

// The stored full-window Hawkes fit of every cluster that has one.
std::map<int, FitResult> hawkes_fits(const Json& fits) {
    std::map<int, FitResult> out;
    for (const auto& c : fits.at("clusters")) {
        for (const auto& f : c.at("fits")) {
            if (f.at("model") == model::hawkes && !f.contains("status")) {
                out.emplace(c.at("cluster_id").get<int>(), fit_from_json(f));
            }
        }
    }
    return out;
}

std::string csv_number(const Json& v) { return v.is_number() ? format_number(v.get<double>()) : ""; }

}  // namespace

std::pair<std::int64_t, std::int64_t> parse_sweep(const std::string& text) {
    const auto colon = text.find(':');
    std::int64_t a = 0, b = 0;
    try {
        if (colon == std::string::npos) throw std::invalid_argument("no colon");
        std::size_t used_a = 0, used_b = 0;
        a = std::stoll(text.substr(0, colon), &used_a);
        b = std::stoll(text.substr(colon + 1), &used_b);
        if (used_a != colon || used_b != text.size() - colon - 1) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
        throw UsageError("--sweep expects A:B with integers, got '" + text + "'");
    }
    if (a < 1 || b < a) throw UsageError("--sweep A:B needs 1 <= A <= B, got '" + text + "'");
    return {a, b};
}

void validate(const RunConfig& cfg, const std::string& command) {
    if (command != "simulate" && cfg.input.empty()) throw UsageError("--input is required");
    if (command == "cluster") {
        if (!cfg.eta && !cfg.sweep) throw UsageError("give --eta, --sweep A:B, or both");
        if (cfg.eta && *cfg.eta < 1) throw UsageError("--eta must be >= 1");
    }
    if (!(cfg.bin_width > 0.0)) throw UsageError("--bin-width must be positive");
    if (!(cfg.train_days > 0.0)) throw UsageError("--train-days must be positive");
    if (!(cfg.horizon_days > 0.0)) throw UsageError("--horizon-days must be positive");
    if (!(cfg.w_comments >= 0.0)) throw UsageError("--w-comments must be non-negative");
    if (cfg.mc_samples < kMinMcSamples) {
        throw UsageError("--mc-samples must be at least " + std::to_string(kMinMcSamples));
    }
    if (cfg.popularity_average != "prior" && cfg.popularity_average != "all_time") {
        throw UsageError("--popularity-average must be 'prior' or 'all_time'");
    }
    const auto& known = known_models();
    for (const auto& m : cfg.models) {
        if (std::find(known.begin(), known.end(), m) == known.end()) throw UsageError("unknown model '" + m + "'");
    }
    if (fs::exists(cfg.out) && !fs::is_directory(cfg.out)) {
        throw UsageError("--out " + cfg.out.string() + " exists and is not a directory");
    }
}

int cmd_cluster(const RunConfig& cfg) {
    const auto stream = load_stream(cfg);
    const auto graph = build_affinity_graph(stream, cfg.threads);
    fs::create_directories(cfg.out);

    if (cfg.sweep) {
        std::ostringstream csv;
        csv << "eta,n_components,n_singletons,largest,smallest,mean_size\n";
        for (const auto& r : sweep_eta(graph, cfg.sweep->first, cfg.sweep->second)) {
            csv << r.eta << ',' << r.n_components << ',' << r.n_singletons << ',' << r.largest << ',' << r.smallest
                << ',' << format_number(r.mean_size) << '\n';
        }
        write_atomic(cfg.out / artifact::eta_sweep, csv.str());
        std::cout << "eta sweep " << cfg.sweep->first << ':' << cfg.sweep->second << " written to "
                  << (cfg.out / artifact::eta_sweep).string() << '\n';
    }
    if (cfg.eta) {
        const auto components = connected_components(prune_graph(graph, *cfg.eta));
        const auto clusters = assign_videos(stream, components);
        std::ostringstream csv;
        write_assignments_csv(csv, clusters);
        write_atomic(cfg.out / artifact::assignments, csv.str());
        write_json(cfg.out / artifact::clusters, cluster_summary_json(clusters, *cfg.eta));
        std::cout << stream.size() << " videos, " << graph.node_count() << " tags, " << components.size()
                  << " components, " << clusters.size() << " clusters at eta=" << *cfg.eta << '\n';
    }
    return 0;
}

int cmd_fit(const RunConfig& cfg) {
    const auto stream = load_stream(cfg);
    const auto clusters = load_clusters(cfg, stream);
    const auto models = selected(cfg, kFitModels);
    const bool want_global = std::find(models.begin(), models.end(), model::hawkes_global) != models.end();

    std::vector<Json> per_cluster(clusters.size());
    parallel_for(clusters.size(), cfg.threads, [&](std::size_t i) {
        const auto& c = clusters[i];
        const auto times = c.events.times();
        const double T = c.events.horizon();
        Json fits = Json::array();
        // Hawkes is always fitted: forecast and attribute depend on it.
        for (const auto& m : kFitModels) {
            if (m == model::hawkes_global) continue;
            if (m != model::hawkes && std::find(models.begin(), models.end(), m) == models.end()) continue;
            try {
                if (m == model::hawkes) fits.push_back(to_json(fit_hawkes(times, T)));
                if (m == model::poisson) fits.push_back(to_json(fit_poisson(times, T)));
                if (m == model::pc_nhpp) fits.push_back(to_json(fit_pc_nhpp(times, T, cfg.bin_width)));
                if (m == model::nhpp_drift) fits.push_back(to_json(fit_nhpp_drift(times, T)));
                if (m == model::arima_lite) {
                    const auto days = static_cast<std::size_t>(std::ceil(T));
                    fits.push_back(to_json(fit_arima_lite(daily_counts(times, 0.0, days), 2, 1, 2, 1).fit));
                }
            } catch (const std::exception& e) {
                fits.push_back(error_entry(m, e.what()));
            }
        }
        per_cluster[i] = Json{{"cluster_id", c.cluster_id}, {"n_events", c.events.size()}, {"fits", fits}};
    });

    Json out;
    out["horizon_days"] = stream.horizon();
    out["bin_width"] = cfg.bin_width;
    out["clusters"] = per_cluster;
    if (want_global) {
        try {
            out["global"] = to_json(fit_global_hawkes(clusters));
        } catch (const std::exception& e) {
            out["global"] = error_entry(model::hawkes_global, e.what());
        }
    }
    fs::create_directories(cfg.out);
    write_json(cfg.out / artifact::fits, out);

    std::size_t supercritical = 0;
    for (const auto& [id, f] : hawkes_fits(out)) supercritical += f.has_warning(warning::supercritical);
    std::cout << "fitted " << clusters.size() << " clusters";
    if (supercritical) std::cout << " (" << supercritical << " supercritical)";
    std::cout << '\n';
    return 0;
}

int cmd_forecast(const RunConfig& cfg) {
    const auto stream = load_stream(cfg);
    const auto clusters = load_clusters(cfg, stream);
    const auto fits = read_json(require_artifact(cfg, artifact::fits, "fit"));

    const SplitSpec spec{cfg.train_days, cfg.horizon_days, std::nullopt};
    try {
        check_split(spec, stream.horizon());
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("forecast: ") + e.what());
    }
    EvaluationOptions opts;
    opts.bin_width = cfg.bin_width;
    opts.mc_samples = cfg.mc_samples;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    const auto table = evaluate_all(clusters, spec, selected(cfg, known_models()), opts);

    fs::create_directories(cfg.out);
    std::ostringstream csv;
    write_comparison_csv(csv, table);
    write_atomic(cfg.out / artifact::forecast_csv, csv.str());
    write_json(cfg.out / artifact::forecast_json, to_json(table));

    // Forward forecast past the end of the data from the full-window fits.
    const auto hawkes = hawkes_fits(fits);
    Json rows = Json::array();
    std::ostringstream fwd;
    fwd << "cluster_id,t,horizon_days,expected_count,mc_mean,mc_std,status\n";
    std::size_t refused = 0;
    for (const auto& c : clusters) {
        const double t = c.events.horizon();
        Json row{{"cluster_id", c.cluster_id}, {"t", t}, {"horizon_days", cfg.horizon_days}};
        const auto it = hawkes.find(c.cluster_id);
        std::string status = "ok";
        if (it == hawkes.end()) {
            status = "error: no hawkes fit";
        } else {
            const auto p = hawkes_params(it->second);
            const auto times = c.events.times();
            try {
                row["expected_count"] = expected_count(p, times, t, cfg.horizon_days);
                const auto mc = mc_expected_count(p, times, t, cfg.horizon_days, cfg.mc_samples,
                                                  derive_seed(cfg.seed, static_cast<std::uint64_t>(c.cluster_id)),
                                                  cfg.threads);
                row["mc_mean"] = mc.mean;
                row["mc_std"] = mc.std;
            } catch (const RefusedError& e) {
                status = e.what();
                ++refused;
            }
        }
        row["status"] = status;
        fwd << c.cluster_id << ',' << format_number(t) << ',' << format_number(cfg.horizon_days) << ','
            << csv_number(row.value("expected_count", Json())) << ',' << csv_number(row.value("mc_mean", Json()))
            << ',' << csv_number(row.value("mc_std", Json())) << ',' << status << '\n';
        rows.push_back(row);
    }
    write_atomic(cfg.out / artifact::forward_csv, fwd.str());
    write_json(cfg.out / artifact::forward_json, Json{{"clusters", rows}});

    std::cout << table.rows.size() << " forecast rows over " << clusters.size() - table.excluded.size()
              << " clusters";
    if (!table.excluded.empty()) std::cout << ", " << table.excluded.size() << " excluded";
    if (refused) std::cout << ", " << refused << " refused (supercritical)";
    std::cout << '\n';
    return 0;
}

int cmd_attribute(const RunConfig& cfg) {
    const auto stream = load_stream(cfg);
    const auto clusters = load_clusters(cfg, stream);
    const auto fits = read_json(require_artifact(cfg, artifact::fits, "fit"));
    const auto hawkes = hawkes_fits(fits);
    const PopularityIndex popularity(stream, cfg.w_comments, popularity_mode(cfg));

    std::vector<GenreCluster> fitted;
    for (const auto& c : clusters) {
        if (hawkes.count(c.cluster_id)) fitted.push_back(c);
    }
    const auto scored = attribution_report(fitted, hawkes, popularity, cfg.threads);
    std::vector<AttributionReport> reports;
    auto next = scored.begin();
    for (const auto& c : clusters) {
        if (hawkes.count(c.cluster_id)) {
            reports.push_back(*next++);
        } else {
            AttributionReport r;
            r.cluster_id = c.cluster_id;
            r.reason = "no hawkes fit";
            r.w_comments = cfg.w_comments;
            reports.push_back(r);
        }
    }

    Json j;
    j["w_comments"] = cfg.w_comments;
    j["popularity_average"] = cfg.popularity_average;
    j["clusters"] = Json::array();
    for (const auto& r : reports) j["clusters"].push_back(to_json(r));
    fs::create_directories(cfg.out);
    write_json(cfg.out / artifact::attribution_json, j);
    std::ostringstream csv;
    write_attribution_csv(csv, reports);
    write_atomic(cfg.out / artifact::attribution_csv, csv.str());

    const auto n_ok = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return r.attributable; });
    std::cout << "attributed " << n_ok << " of " << reports.size() << " clusters\n";
    return 0;
}

int cmd_simulate(const RunConfig& cfg) {
    const Json spec = cfg.corpus_spec.empty() ? Json::parse(kDefaultCorpusSpec) : read_json(cfg.corpus_spec);
    const auto request = corpus_request_from_json(spec);
    const auto corpus = make_synthetic_corpus(request.clusters, request.horizon, cfg.seed, request.options, cfg.threads);

    fs::create_directories(cfg.out);
    std::ostringstream events;
    write_events(events, corpus.stream, InputFormat::jsonl);
    write_atomic(cfg.out / artifact::corpus, events.str());
    write_json(cfg.out / artifact::ground_truth, ground_truth_json(corpus, cfg.seed));
    std::cout << corpus.stream.size() << " events in " << request.clusters.size() << " clusters written to "
              << (cfg.out / artifact::corpus).string() << '\n';
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const auto stream = load_stream(cfg);
    const auto clusters = load_clusters(cfg, stream);
    const auto summary = read_json(require_artifact(cfg, artifact::clusters, "cluster"));
    const auto fits = read_json(require_artifact(cfg, artifact::fits, "fit"));
    const auto table = read_json(require_artifact(cfg, artifact::forecast_json, "forecast"));
    const auto forward = read_json(require_artifact(cfg, artifact::forward_json, "forecast"));
    const auto attribution = read_json(require_artifact(cfg, artifact::attribution_json, "attribute"));

    Json warnings = Json::array();
    for (const auto& c : fits.at("clusters")) {
        for (const auto& f : c.at("fits")) {
            const auto where = "cluster " + std::to_string(c.at("cluster_id").get<int>()) + " " +
                               f.at("model").get<std::string>() + ": ";
            if (f.contains("status")) warnings.push_back(where + f.at("status").get<std::string>());
            for (const auto& w : f.value("warnings", Json::array())) warnings.push_back(where + w.get<std::string>());
        }
    }
    for (const auto& e : table.at("excluded")) {
        warnings.push_back("cluster " + std::to_string(e.at("cluster_id").get<int>()) +
                           " excluded from forecast: " + e.at("reason").get<std::string>());
    }
    for (const auto& r : forward.at("clusters")) {
        if (r.at("status") != "ok") {
            warnings.push_back("cluster " + std::to_string(r.at("cluster_id").get<int>()) +
                               " forward forecast: " + r.at("status").get<std::string>());
        }
    }
    for (const auto& a : attribution.at("clusters")) {
        const auto where = "cluster " + std::to_string(a.at("cluster_id").get<int>()) + " attribution: ";
        if (!a.at("attributable").get<bool>()) warnings.push_back(where + a.at("reason").get<std::string>());
        if (a.at("negative_exo").get<bool>()) warnings.push_back(where + "s_self + s_pop > 1, negative s_exo");
    }

    Json report;
    report["n_events"] = stream.size();
    report["horizon_days"] = stream.horizon();
    report["origin_epoch"] = stream.origin_epoch();
    report["clusters"] = summary;
    report["fits"] = fits;
    report["forecast"] = table;
    report["forward_forecast"] = forward;
    report["attribution"] = attribution;
    report["warnings"] = warnings;

    // AIC(hawkes) - AIC(poisson) on the full window, one bar per cluster.
    std::ostringstream aic;
    aic << "cluster_id,aic_hawkes,aic_poisson,difference\n";
    for (const auto& c : fits.at("clusters")) {
        std::optional<double> h, p;
        for (const auto& f : c.at("fits")) {
            if (f.contains("status")) continue;
            if (f.at("model") == model::hawkes) h = f.at("aic").get<double>();
            if (f.at("model") == model::poisson) p = f.at("aic").get<double>();
        }
        if (h && p) {
            aic << c.at("cluster_id").get<int>() << ',' << format_number(*h) << ',' << format_number(*p) << ','
                << format_number(*h - *p) << '\n';
        }
    }

    std::ostringstream shares;
    shares << "cluster_id,self,popularity,exogenous\n";
    for (const auto& a : attribution.at("clusters")) {
        if (!a.at("attributable").get<bool>()) continue;
        shares << a.at("cluster_id").get<int>() << ',' << csv_number(a.at("s_self")) << ','
               << csv_number(a.at("s_pop")) << ',' << csv_number(a.at("s_exo")) << '\n';
    }

    std::ostringstream weekly;
    weekly << "cluster_id,week,week_start_day,count\n";
    const auto n_weeks = static_cast<std::size_t>(std::floor(stream.horizon() / 7.0)) + 1;
    for (const auto& c : clusters) {
        std::vector<std::size_t> counts(n_weeks, 0);
        for (const auto& e : c.events.events()) {
            counts[std::min(n_weeks - 1, static_cast<std::size_t>(e.upload_time / 7.0))]++;
        }
        for (std::size_t w = 0; w < n_weeks; ++w) {
            weekly << c.cluster_id << ',' << w << ',' << w * 7 << ',' << counts[w] << '\n';
        }
    }

    fs::create_directories(cfg.out);
    write_json(cfg.out / artifact::report, report);
    write_atomic(cfg.out / artifact::aic_diff, aic.str());
    write_atomic(cfg.out / artifact::factor_shares, shares.str());
    write_atomic(cfg.out / artifact::weekly_counts, weekly.str());
    std::cout << "report for " << clusters.size() << " clusters written to " << (cfg.out / artifact::report).string();
    if (!warnings.empty()) std::cout << " (" << warnings.size() << " warnings)";
    std::cout << '\n';
    return 0;
}

}  // namespace genrehawkes::cli
