#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "manifest.hpp"
#include "udemd/udemd.hpp"

using nlohmann::json;
using namespace udemd;
using cli::RunManifest;

namespace {

cli::Logger logger;

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::IoError, "cannot open '" + path + "' for writing");
    return out;
}

void close_out(std::ofstream& out, const std::string& path) {
    out.close();
    require(!out.fail(), ErrorCode::IoError, "failed writing '" + path + "'");
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + path + "'");
    return in;
}

void write_json(const json& j, const std::optional<std::string>& out) {
    if (!out) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    auto f = open_out(*out);
    f << j.dump(2) << '\n';
    close_out(f, *out);
    auto in = open_in(*out);
    require(!json::parse(in).is_discarded(), ErrorCode::IoError, "JSON output did not re-parse");
}

void finish(RunManifest& manifest, const std::optional<std::string>& out) {
    if (!out) return;
    manifest.output(*out);
    manifest.write(*out);
    logger.info("wrote " + *out, {{"run_id", manifest.run_id()}});
}

struct EmbedArgs {
    unsigned scales = 4;
    double alpha = 0.5;
    double subsample = 1.0;
    std::uint64_t seed = 0;
    double laziness = 0.0;
    bool anisotropic = false;
    bool fine_heavy = false;
    bool keep_mass = false;
};

void add_embed_flags(CLI::App* cmd, EmbedArgs& a) {
    cmd->add_option("-K,--scales", a.scales, "Largest dyadic scale K")->capture_default_str();
    cmd->add_option("--alpha", a.alpha, "Scale weighting exponent in (0, 1/2]")->capture_default_str();
    cmd->add_option("--subsample", a.subsample, "Per-band coordinate keep rate in (0, 1]")->capture_default_str();
    cmd->add_option("--seed", a.seed, "Seed for subsampling")->capture_default_str();
    cmd->add_option("--laziness", a.laziness, "Holding probability of the random walk")->capture_default_str();
    cmd->add_flag("--anisotropic", a.anisotropic, "Density-normalize the adjacency before building the walk");
    cmd->add_flag("--fine-heavy", a.fine_heavy, "Use the fine-heavy band weighting");
    cmd->add_flag("--keep-mass", a.keep_mass, "Do not normalize signal columns");
}

UdemdConfig config_from(const EmbedArgs& a) {
    UdemdConfig cfg;
    cfg.scales = a.scales;
    cfg.alpha = a.alpha;
    cfg.subsample = {a.subsample, a.seed};
    cfg.weight_sign = a.fine_heavy ? WeightSign::FineHeavy : WeightSign::CoarseHeavy;
    cfg.keep_mass = a.keep_mass;
    cfg.validate();
    return cfg;
}

void record_embed_params(RunManifest& m, const EmbedArgs& a) {
    m.param("scales", a.scales);
    m.param("alpha", a.alpha);
    m.param("subsample", a.subsample);
    m.param("laziness", a.laziness);
    m.param("anisotropic", a.anisotropic);
    m.param("fine_heavy", a.fine_heavy);
    m.param("keep_mass", a.keep_mass);
    m.seed(a.seed);
}

struct Loaded {
    Graph graph;
    SignalSet signals;
};

Loaded load_inputs(RunManifest& m, const std::string& graph_path, const std::string& signal_path, bool keep_mass) {
    return m.phase("load", [&] {
        m.input("graph", graph_path);
        m.input("signals", signal_path);
        LoadReport report;
        Graph g = load_graph_file(graph_path, &report);
        if (report.self_loops) logger.info("graph has self-loops", {{"count", report.self_loops}});
        SignalSet s = load_signals_file(signal_path, g.node_count());
        if (!keep_mass) s = normalize_columns(std::move(s));
        return Loaded{std::move(g), std::move(s)};
    });
}

MultiscaleEmbedding load_embedding_file(const std::string& path) {
    auto in = open_in(path);
    if (ends_with(path, ".csv") || ends_with(path, ".txt")) return load_embedding_text(in);
    return load_embedding(in);
}

// ---------------------------------------------------------------- embed

int cmd_embed(const std::string& graph_path, const std::string& signal_path, const EmbedArgs& a,
              const std::string& out) {
    RunManifest m("embed", UDEMD_VERSION);
    record_embed_params(m, a);
    const auto cfg = config_from(a);
    auto in = load_inputs(m, graph_path, signal_path, a.keep_mass);
    const auto e = m.phase("embed", [&] {
        const auto op = build_random_walk(in.graph, {a.laziness, a.anisotropic});
        return udemd_embed(op, in.signals, cfg);
    });
    m.param("shape", {e.signal_count(), e.dimension()});
    m.phase("write", [&] {
        auto f = open_out(out);
        const bool text = ends_with(out, ".csv") || ends_with(out, ".txt");
        if (text) {
            f << "# " << m.reference(out) << '\n';
            save_embedding_text(f, e);
        } else {
            save_embedding(f, e, m.reference(out));
        }
        close_out(f, out);
        require(load_embedding_file(out) == e, ErrorCode::IoError, "embedding did not round-trip");
    });
    finish(m, out);
    return 0;
}

// ---------------------------------------------------------------- distmat

int cmd_distmat(const std::optional<std::string>& embedding, const std::optional<std::string>& graph_path,
                const std::optional<std::string>& signal_path, const std::string& metric, const EmbedArgs& a,
                const std::string& out) {
    RunManifest m("distmat", UDEMD_VERSION);
    m.param("metric", metric);
    std::optional<DistanceMatrix> dm;
    std::vector<std::string> labels;
    if (embedding) {
        require(metric == "udemd", ErrorCode::InvalidArgument, "an embedding input only supports --metric udemd");
        m.input("embedding", *embedding);
        const auto e = m.phase("load", [&] { return load_embedding_file(*embedding); });
        dm = m.phase("distances", [&] { return udemd_distance_matrix(e); });
    } else {
        require(graph_path && signal_path, ErrorCode::InvalidArgument, "need --embedding or both --graph and --signals");
        record_embed_params(m, a);
        auto in = load_inputs(m, *graph_path, *signal_path, a.keep_mass);
        labels = in.signals.labels();
        dm = m.phase("distances", [&]() -> DistanceMatrix {
            const auto op = build_random_walk(in.graph, {a.laziness, a.anisotropic});
            if (metric == "udemd") return udemd_distance_matrix(udemd_embed(op, in.signals, config_from(a)));
            if (metric == "tv") return pairwise_tv(in.signals);
            if (metric == "tv-diffused") return pairwise_tv_diffused(op, in.signals, 1);
            if (metric == "euclidean") return pairwise_euclidean(in.signals);
            fail(ErrorCode::InvalidArgument, "unknown metric '" + metric + "'");
        });
    }
    if (!labels.empty()) dm->set_labels(labels);
    require(dm->validation_error() <= 1e-9, ErrorCode::NonFiniteValue, "distance matrix failed validation");
    m.phase("write", [&] {
        auto f = open_out(out);
        save_distance_matrix_csv(f, *dm, m.reference(out));
        close_out(f, out);
        auto back = open_in(out);
        require(load_distance_matrix_csv(back).size() == dm->size(), ErrorCode::IoError, "distance matrix re-read failed");
    });
    finish(m, out);
    return 0;
}

// ---------------------------------------------------------------- knn

int cmd_knn(const std::optional<std::string>& distances, const std::optional<std::string>& embedding, std::size_t k,
            const std::string& out) {
    RunManifest m("knn", UDEMD_VERSION);
    m.param("k", k);
    require(distances.has_value() != embedding.has_value(), ErrorCode::InvalidArgument,
            "give exactly one of --distances or --embedding");
    const DistanceMatrix dm = m.phase("load", [&] {
        if (distances) {
            m.input("distances", *distances);
            auto in = open_in(*distances);
            return load_distance_matrix_csv(in);
        }
        m.input("embedding", *embedding);
        return udemd_distance_matrix(load_embedding_file(*embedding));
    });
    const auto nl = m.phase("knn", [&] { return knn(dm, k); });
    m.phase("write", [&] {
        auto f = open_out(out);
        f << "# " << m.reference(out) << '\n';
        f << "query,rank,neighbor,distance\n";
        for (std::size_t q = 0; q < nl.query_count(); ++q)
            for (std::size_t r = 0; r < nl.neighbors[q].size(); ++r)
                f << q << ',' << r + 1 << ',' << nl.neighbors[q][r].index << ','
                  << csv::format_double(nl.neighbors[q][r].distance) << '\n';
        close_out(f, out);
    });
    finish(m, out);
    return 0;
}

// ---------------------------------------------------------------- gen

void write_signals(const SignalSet& s, const std::string& path) {
    auto f = open_out(path);
    if (ends_with(path, ".bin"))
        save_signals_binary(f, s);
    else
        save_signals_csv(f, s);
    close_out(f, path);
}

int cmd_gen_ring(std::size_t n, const std::string& out, const std::optional<std::string>& signals_out) {
    RunManifest m("gen ring", UDEMD_VERSION);
    m.param("nodes", n);
    const Graph g = m.phase("generate", [&] { return gen_ring(n); });
    m.phase("write", [&] {
        auto f = open_out(out);
        f << "# " << m.reference(out) << '\n';
        write_edge_list(f, g);
        close_out(f, out);
        if (signals_out) {
            SignalSet s(n, n);
            for (std::size_t i = 0; i < n; ++i) s(i, i) = 1.0;
            write_signals(s, *signals_out);
            m.output(*signals_out);
        }
    });
    finish(m, out);
    return 0;
}

int cmd_gen_sphere(const SphereOptions& opt, const std::string& out, const std::optional<std::string>& signals_out,
                   const std::optional<std::string>& labels_out, const std::optional<std::string>& truth_out) {
    RunManifest m("gen sphere", UDEMD_VERSION);
    m.param("distributions", opt.distributions);
    m.param("points_per", opt.points_per);
    m.param("noise_spike", opt.noise_spike);
    m.param("spike_mass", opt.spike_mass);
    m.param("knn_k", opt.knn_k);
    m.param("cluster_sigma", opt.cluster_sigma);
    m.param("super_clusters", opt.super_clusters);
    m.seed(opt.seed);
    const auto ds = m.phase("generate", [&] { return gen_sphere_dataset(opt); });
    m.phase("write", [&] {
        auto f = open_out(out);
        f << "# " << m.reference(out) << '\n';
        write_edge_list(f, ds.graph);
        close_out(f, out);
        if (signals_out) {
            write_signals(ds.signals, *signals_out);
            m.output(*signals_out);
        }
        if (labels_out) {
            auto l = open_out(*labels_out);
            for (int g : ds.groups) l << g << '\n';
            close_out(l, *labels_out);
            m.output(*labels_out);
        }
        if (truth_out) {
            const std::size_t md = ds.means.size();
            DistanceMatrix dm(md, "great-circle");
            for (std::size_t i = 0; i < md; ++i)
                for (const auto& nb : ds.truth.neighbors[i]) dm(i, nb.index) = nb.distance;
            auto t = open_out(*truth_out);
            save_distance_matrix_csv(t, dm, m.reference(out));
            close_out(t, *truth_out);
            m.output(*truth_out);
        }
    });
    finish(m, out);
    return 0;
}

// ---------------------------------------------------------------- oracle

json transport_json(const ot::TransportResult& r, bool unbalanced) {
    json j{{"cost", r.cost}, {"iterations", r.iterations}, {"converged", r.converged}};
    if (unbalanced) {
        j["destroyed_mass"] = r.destroyed_mass;
        j["created_mass"] = r.created_mass;
    }
    if (std::isfinite(r.dual_objective)) j["dual_objective"] = r.dual_objective;
    json plan = json::array();
    for (std::size_t i = 0; i < r.n; ++i)
        for (std::size_t k = 0; k < r.n; ++k)
            if (r.plan_at(i, k) > 1e-15) plan.push_back({i, k, r.plan_at(i, k)});
    j["plan"] = plan;
    return j;
}

struct OracleArgs {
    std::string graph;
    std::string signals;
    std::size_t i = 0, j = 1;
    double lambda = 1.0;
    double epsilon = 1e-2;
    std::size_t max_iter = 10000;
    double tol = 1e-9;
    std::optional<std::string> out;
};

int cmd_oracle(const std::string& kind, const OracleArgs& a) {
    RunManifest m("oracle " + kind, UDEMD_VERSION);
    m.param("i", a.i);
    m.param("j", a.j);
    auto in = m.phase("load", [&] {
        m.input("graph", a.graph);
        m.input("signals", a.signals);
        Graph g = load_graph_file(a.graph);
        SignalSet s = normalize_columns(load_signals_file(a.signals, g.node_count()));
        return Loaded{std::move(g), std::move(s)};
    });
    const std::size_t ms = in.signals.signal_count();
    require(a.i < ms && a.j < ms, ErrorCode::IndexOutOfRange, "signal index out of range");
    const auto cost = ot::CostMatrix::from_geodesics(all_pairs_geodesics(in.graph));
    const auto mu = in.signals.column(a.i), nu = in.signals.column(a.j);
    json report{{"kind", kind}, {"nodes", cost.size()}, {"i", a.i}, {"j", a.j}};
    m.phase("solve", [&] {
        if (kind == "exact") {
            report["result"] = transport_json(ot::exact_emd(cost, mu, nu), false);
        } else if (kind == "unbalanced") {
            m.param("lambda", a.lambda);
            report["lambda"] = a.lambda;
            report["result"] = transport_json(ot::tv_unbalanced_emd(cost, mu, nu, a.lambda), true);
        } else {
            m.param("epsilon", a.epsilon);
            m.param("max_iter", a.max_iter);
            m.param("tol", a.tol);
            ot::SinkhornOptions so;
            so.epsilon = a.epsilon;
            so.max_iter = a.max_iter;
            so.tol = a.tol;
            report["epsilon"] = a.epsilon;
            const auto r = ot::sinkhorn(cost, mu, nu, so);
            if (!r.converged) logger.info("sinkhorn did not converge; reporting best iterate");
            report["result"] = transport_json(r, false);
        }
    });
    report["run_id"] = m.run_id();
    write_json(report, a.out);
    finish(m, a.out);
    return 0;
}

int cmd_calibrate(const ot::CalibrationOptions& opt, const std::optional<std::string>& out) {
    RunManifest m("oracle calibrate", UDEMD_VERSION);
    m.param("trials", opt.trials);
    m.param("nodes", opt.nodes);
    m.seed(opt.seed);
    const auto report = m.phase("calibrate", [&] { return ot::lemma1_calibration(opt); });
    json j = report;
    j["run_id"] = m.run_id();
    write_json(j, out);
    finish(m, out);
    return 0;
}

// ---------------------------------------------------------------- experiments

int cmd_ring_exp(const experiments::RingOptions& opt, const std::string& out,
                 const std::optional<std::string>& summary_out) {
    RunManifest m("ring-exp", UDEMD_VERSION);
    m.param("nodes", opt.nodes);
    m.param("scales", opt.scales);
    m.param("alpha", opt.alpha);
    m.param("laziness", opt.laziness);
    const auto r = m.phase("run", [&] { return experiments::ring_experiment(opt); });
    m.phase("write", [&] {
        auto f = open_out(out);
        f << "# " << m.reference(out) << '\n';
        f << "K,j,geodesic,threshold,udemd\n";
        for (const auto& row : r.rows)
            f << row.scales << ',' << row.j << ',' << csv::format_double(row.geodesic) << ','
              << csv::format_double(row.threshold) << ',' << csv::format_double(row.udemd) << '\n';
        close_out(f, out);
        if (summary_out) {
            json s = json::array();
            for (const auto& x : r.summary)
                s.push_back({{"K", x.scales}, {"spearman", x.spearman}, {"onset", x.onset}, {"plateau", x.plateau}});
            write_json(s, summary_out);
            m.output(*summary_out);
        }
    });
    finish(m, out);
    return 0;
}

int cmd_sphere_exp(const experiments::SphereExperimentOptions& opt, const std::optional<std::string>& out) {
    RunManifest m("sphere-exp", UDEMD_VERSION);
    m.param("distributions", opt.data.distributions);
    m.param("points_per", opt.data.points_per);
    m.param("noise_spike", opt.data.noise_spike);
    m.param("scales", opt.scales);
    m.param("methods", opt.methods);
    m.param("k", opt.k);
    m.seed(opt.data.seed);
    const auto r = m.phase("run", [&] { return experiments::sphere_experiment(opt); });
    json j{{"nodes", r.nodes}, {"signals", r.signals}, {"k", r.k}, {"ot_solver_invoked", r.ot_solver_invoked}};
    j["results"] = json::array();
    for (const auto& s : r.scores) {
        json row{{"method", s.method}, {"p_at_k", s.precision}, {"seconds", s.seconds}, {"skipped", s.skipped}};
        if (s.scales) row["K"] = *s.scales;
        if (!s.note.empty()) row["note"] = s.note;
        j["results"].push_back(row);
    }
    j["run_id"] = m.run_id();
    write_json(j, out);
    finish(m, out);
    return 0;
}

int cmd_eval(const std::string& distances, const std::optional<std::string>& labels,
             const std::optional<std::string>& pred, std::optional<std::size_t> clusters,
             const std::optional<std::string>& truth_distances, std::size_t k, const std::optional<std::string>& out) {
    RunManifest m("eval", UDEMD_VERSION);
    m.input("distances", distances);
    auto din = open_in(distances);
    const auto dm = load_distance_matrix_csv(din);
    json scores = json::object();
    json params = json::object();
    m.phase("score", [&] {
        if (labels) {
            m.input("labels", *labels);
            auto lin = open_in(*labels);
            const auto truth = read_labels(lin);
            require(truth.size() == dm.size(), ErrorCode::InvalidLabels, "label count does not match distances");
            scores["silhouette"] = silhouette(dm, truth);
            LabelVector predicted;
            if (pred) {
                m.input("pred", *pred);
                auto pin = open_in(*pred);
                predicted = read_labels(pin);
            } else {
                std::size_t classes = 0;
                for (int t : truth) classes = std::max<std::size_t>(classes, static_cast<std::size_t>(t) + 1);
                const std::size_t c = clusters.value_or(classes);
                params["clusters"] = c;
                predicted = cluster_from_distances(dm, c);
            }
            scores["ari"] = ari(predicted, truth);
            scores["nmi"] = nmi(predicted, truth);
            scores["ami"] = ami(predicted, truth);
        }
        if (truth_distances) {
            m.input("truth_distances", *truth_distances);
            auto tin = open_in(*truth_distances);
            const auto tdm = load_distance_matrix_csv(tin);
            require(tdm.size() == dm.size(), ErrorCode::DimensionMismatch, "truth distances differ in size");
            params["k"] = k;
            scores["p_at_k"] = precision_at_k(knn(dm, k), knn(tdm, k), k);
        }
    });
    require(!scores.empty(), ErrorCode::InvalidArgument, "nothing to evaluate; give --labels and/or --truth-distances");
    m.param("parameters", params);
    json j{{"method", dm.metric_name()}, {"dataset", distances}, {"parameters", params}, {"scores", scores},
           {"run_id", m.run_id()}};
    write_json(j, out);
    finish(m, out);
    return 0;
}

int cmd_bench(const experiments::BenchOptions& opt, const std::string& out) {
    RunManifest m("bench", UDEMD_VERSION);
    m.param("nodes", opt.nodes);
    m.param("signals", opt.signals);
    m.param("scales", opt.scales);
    m.param("repeats", opt.repeats);
    m.seed(opt.seed);
    const auto rows = m.phase("bench", [&] { return experiments::bench(opt); });
    m.phase("write", [&] {
        auto f = open_out(out);
        f << "# " << m.reference(out) << '\n';
        f << "nodes,edges,signals,K,repeats,median_seconds,min_seconds\n";
        for (const auto& r : rows)
            f << r.nodes << ',' << r.edges << ',' << r.signals << ',' << r.scales << ',' << r.repeats << ','
              << csv::format_double(r.median_seconds) << ',' << csv::format_double(r.min_seconds) << '\n';
        close_out(f, out);
    });
    finish(m, out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unbalanced diffusion earth mover's distances on graphs"};
    app.set_version_flag("--version", UDEMD_VERSION);
    app.require_subcommand(1);
    bool json_logs = false;
    app.add_flag("--json-logs", json_logs, "Emit log lines as JSON on stderr");

    // embed
    auto* embed = app.add_subcommand("embed", "Compute the multiscale embedding of signals on a graph");
    std::string graph_path, signal_path, out;
    EmbedArgs ea;
    embed->add_option("--graph", graph_path, "Edge list")->required();
    embed->add_option("--signals", signal_path, "Signal matrix (CSV, or .bin)")->required();
    embed->add_option("--out", out, "Output (.bin binary, .csv text)")->required();
    add_embed_flags(embed, ea);

    // distmat
    auto* distmat = app.add_subcommand("distmat", "Pairwise distance matrix as CSV");
    std::optional<std::string> dm_embedding, dm_graph, dm_signals;
    std::string metric = "udemd";
    distmat->add_option("--embedding", dm_embedding, "Precomputed embedding");
    distmat->add_option("--graph", dm_graph, "Edge list");
    distmat->add_option("--signals", dm_signals, "Signal matrix");
    distmat->add_option("--metric", metric, "udemd | tv | tv-diffused | euclidean")
        ->check(CLI::IsMember({"udemd", "tv", "tv-diffused", "euclidean"}))
        ->capture_default_str();
    distmat->add_option("--out", out, "Output CSV")->required();
    add_embed_flags(distmat, ea);

    // knn
    auto* knn_cmd = app.add_subcommand("knn", "Exact k nearest neighbors");
    std::optional<std::string> knn_dist, knn_emb;
    std::size_t k = 10;
    knn_cmd->add_option("--distances", knn_dist, "Distance matrix CSV");
    knn_cmd->add_option("--embedding", knn_emb, "Embedding file");
    knn_cmd->add_option("-k", k, "Neighbors per query")->capture_default_str();
    knn_cmd->add_option("--out", out, "Output CSV")->required();

    // gen
    auto* gen = app.add_subcommand("gen", "Synthetic graphs and signals");
    gen->require_subcommand(1);
    auto* gen_ring_cmd = gen->add_subcommand("ring", "Cycle graph with unit weights");
    std::size_t ring_nodes = 500;
    std::optional<std::string> signals_out, labels_out, truth_out;
    gen_ring_cmd->add_option("--nodes", ring_nodes, "Number of nodes")->capture_default_str();
    gen_ring_cmd->add_option("--out", out, "Output edge list")->required();
    gen_ring_cmd->add_option("--signals-out", signals_out, "Also write one dirac per node");
    auto* gen_sphere_cmd = gen->add_subcommand("sphere", "Gaussian clusters on the sphere with a kNN graph");
    SphereOptions so;
    gen_sphere_cmd->add_option("-m,--distributions", so.distributions, "Number of distributions")->capture_default_str();
    gen_sphere_cmd->add_option("--points-per", so.points_per, "Points per distribution")->capture_default_str();
    gen_sphere_cmd->add_flag("--noise-spike", so.noise_spike, "Add one random spike point per distribution");
    gen_sphere_cmd->add_option("--spike-mass", so.spike_mass, "Mass fraction on the spike")->capture_default_str();
    gen_sphere_cmd->add_option("--knn", so.knn_k, "Neighbors in the point graph")->capture_default_str();
    gen_sphere_cmd->add_option("--sigma", so.cluster_sigma, "Cluster spread")->capture_default_str();
    gen_sphere_cmd->add_option("--super-clusters", so.super_clusters, "Plant this many groups of distributions");
    gen_sphere_cmd->add_option("--seed", so.seed, "Random seed")->capture_default_str();
    gen_sphere_cmd->add_option("--out", out, "Output edge list")->required();
    gen_sphere_cmd->add_option("--signals-out", signals_out, "Signal matrix output");
    gen_sphere_cmd->add_option("--labels-out", labels_out, "Planted group per distribution");
    gen_sphere_cmd->add_option("--truth-out", truth_out, "Great-circle distances between cluster means (CSV)");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Exact and entropic transport on small instances");
    oracle->require_subcommand(1);
    OracleArgs oa;
    auto add_instance = [&](CLI::App* c) {
        c->add_option("--graph", oa.graph, "Edge list; ground cost is the geodesic distance")->required();
        c->add_option("--signals", oa.signals, "Signal matrix")->required();
        c->add_option("--i", oa.i, "Source column")->capture_default_str();
        c->add_option("--j", oa.j, "Target column")->capture_default_str();
        c->add_option("--out", oa.out, "Output JSON (stdout if omitted)");
    };
    auto* o_exact = oracle->add_subcommand("exact", "Balanced transport cost (network simplex)");
    add_instance(o_exact);
    auto* o_unb = oracle->add_subcommand("unbalanced", "TV-unbalanced transport cost");
    add_instance(o_unb);
    o_unb->add_option("--lambda", oa.lambda, "Cost per unit of teleported mass")->required();
    auto* o_sink = oracle->add_subcommand("sinkhorn", "Entropic transport (log-domain Sinkhorn)");
    add_instance(o_sink);
    o_sink->add_option("--epsilon", oa.epsilon, "Entropic regularization")->capture_default_str();
    o_sink->add_option("--max-iter", oa.max_iter, "Iteration cap")->capture_default_str();
    o_sink->add_option("--tol", oa.tol, "Marginal tolerance")->capture_default_str();
    auto* o_cal = oracle->add_subcommand("calibrate", "Measure the truncation / TV-penalty ratio");
    ot::CalibrationOptions co;
    std::optional<std::string> cal_out;
    o_cal->add_option("--trials", co.trials, "Random instances")->capture_default_str();
    o_cal->add_option("--nodes", co.nodes, "Nodes per instance")->capture_default_str();
    o_cal->add_option("--seed", co.seed, "Random seed")->capture_default_str();
    o_cal->add_option("--out", cal_out, "Output JSON (stdout if omitted)");

    // ring-exp
    auto* ring_exp = app.add_subcommand("ring-exp", "UDEMD between diracs on a ring vs thresholded geodesic");
    experiments::RingOptions ro;
    std::optional<std::string> summary_out;
    ring_exp->add_option("--nodes", ro.nodes, "Ring size")->capture_default_str();
    ring_exp->add_option("-K,--scales", ro.scales, "Scales to sweep")->expected(1, -1);
    ring_exp->add_option("--alpha", ro.alpha, "Scale weighting exponent")->capture_default_str();
    ring_exp->add_option("--laziness", ro.laziness, "Holding probability of the walk")->capture_default_str();
    ring_exp->add_option("--out", out, "Output CSV")->required();
    ring_exp->add_option("--summary-out", summary_out, "Per-K summary JSON");

    // sphere-exp
    auto* sphere_exp = app.add_subcommand("sphere-exp", "Neighbor retrieval on the sphere dataset");
    experiments::SphereExperimentOptions xo;
    xo.data.noise_spike = false;
    std::optional<std::string> sphere_out;
    sphere_exp->add_option("-m,--distributions", xo.data.distributions, "Number of distributions")
        ->capture_default_str();
    sphere_exp->add_option("--points-per", xo.data.points_per, "Points per distribution")->capture_default_str();
    sphere_exp->add_flag("--noise-spike", xo.data.noise_spike, "Add noise spikes");
    sphere_exp->add_option("--spike-mass", xo.data.spike_mass, "Mass fraction on the spike")->capture_default_str();
    sphere_exp->add_option("--knn", xo.data.knn_k, "Neighbors in the point graph")->capture_default_str();
    sphere_exp->add_option("--sigma", xo.data.cluster_sigma, "Cluster spread")->capture_default_str();
    sphere_exp->add_option("--seed", xo.data.seed, "Random seed")->capture_default_str();
    sphere_exp->add_option("-K,--scales", xo.scales, "Scales for udemd")->expected(1, -1);
    sphere_exp->add_option("--methods", xo.methods, "udemd tv tv-diffused euclidean sinkhorn")->expected(1, -1);
    sphere_exp->add_option("-k", xo.k, "Neighbors scored by P@k (use about m/20)")->capture_default_str();
    sphere_exp->add_option("--laziness", xo.laziness, "Holding probability of the walk")->capture_default_str();
    sphere_exp->add_option("--epsilon", xo.sinkhorn_epsilon, "Sinkhorn regularization")->capture_default_str();
    sphere_exp->add_option("--out", sphere_out, "Output JSON (stdout if omitted)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Score a distance matrix");
    std::string eval_dist;
    std::optional<std::string> eval_labels, eval_pred, eval_truth, eval_out;
    std::optional<std::size_t> eval_clusters;
    std::size_t eval_k = 10;
    eval_cmd->add_option("--distances", eval_dist, "Distance matrix CSV")->required();
    eval_cmd->add_option("--labels", eval_labels, "True class per row");
    eval_cmd->add_option("--pred", eval_pred, "Predicted class per row (default: k-medoids)");
    eval_cmd->add_option("--clusters", eval_clusters, "k-medoids cluster count (default: true class count)");
    eval_cmd->add_option("--truth-distances", eval_truth, "Reference distances for P@k");
    eval_cmd->add_option("-k", eval_k, "Neighbors for P@k")->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "Output JSON (stdout if omitted)");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Embedding wall times over a grid");
    experiments::BenchOptions bo;
    bench_cmd->add_option("-n,--nodes", bo.nodes, "Graph sizes")->expected(1, -1);
    bench_cmd->add_option("-m,--signals", bo.signals, "Signal counts")->expected(1, -1);
    bench_cmd->add_option("-K,--scales", bo.scales, "Scales")->expected(1, -1);
    bench_cmd->add_option("--repeats", bo.repeats, "Timed repeats per cell")->capture_default_str();
    bench_cmd->add_option("--seed", bo.seed, "Random seed")->capture_default_str();
    bench_cmd->add_option("--out", out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    logger.set_json(json_logs);

    try {
        if (*embed) return cmd_embed(graph_path, signal_path, ea, out);
        if (*distmat) return cmd_distmat(dm_embedding, dm_graph, dm_signals, metric, ea, out);
        if (*knn_cmd) return cmd_knn(knn_dist, knn_emb, k, out);
        if (*gen_ring_cmd) return cmd_gen_ring(ring_nodes, out, signals_out);
        if (*gen_sphere_cmd) return cmd_gen_sphere(so, out, signals_out, labels_out, truth_out);
        if (*o_exact) return cmd_oracle("exact", oa);
        if (*o_unb) return cmd_oracle("unbalanced", oa);
        if (*o_sink) return cmd_oracle("sinkhorn", oa);
        if (*o_cal) return cmd_calibrate(co, cal_out);
        if (*ring_exp) return cmd_ring_exp(ro, out, summary_out);
        if (*sphere_exp) return cmd_sphere_exp(xo, sphere_out);
        if (*eval_cmd) return cmd_eval(eval_dist, eval_labels, eval_pred, eval_clusters, eval_truth, eval_k, eval_out);
        if (*bench_cmd) {
            if (bo.nodes.empty() || bo.signals.empty() || bo.scales.empty()) {
                logger.error("bench grid is empty");
                return 2;
            }
            return cmd_bench(bo, out);
        }
    } catch (const udemd::Error& e) {
        logger.error(e.what(), {{"code", to_string(e.code())}});
        return 1;
    } catch (const std::exception& e) {
        logger.error(e.what());
        return 1;
    }
    return 2;
}
