// mca — mutual connectivity analysis of time-series ensembles.
//
// Subcommands: synth | preprocess | affinity | cluster | ccm | influence |
// dice | pipeline. Every option resolves as flag > config-file key >
// built-in default, and every run writes a <output>.manifest recording the
// resolved configuration, the master seed and input digests.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mca/affinity.hpp"
#include "mca/causality.hpp"
#include "mca/community.hpp"
#include "mca/ensemble.hpp"
#include "mca/io.hpp"
#include "mca/svg.hpp"
#include "mca/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char *kVersion = "mca 1.0.0";

// ----------------------------------------------------------------------
// Option resolution: flag > config-file key > default. Options are
// registered against CLI11 without defaults; after parsing, get() decides.

struct Resolver {
    CLI::App *cmd = nullptr;
    std::map<std::string, std::string> file;
    std::map<std::string, std::string> resolved; // for the manifest

    void load_config(const std::string &path)
    {
        if (!path.empty()) {
            file = mca::io::load_keyvalue(path);
        }
    }

    template <typename T>
    T get(const std::string &key, const T &def)
    {
        const CLI::Option *opt = cmd->get_option_no_throw("--" + key);
        T value = def;
        if (opt != nullptr && opt->count() > 0) {
            value = opt->as<T>();
        } else if (const auto it = file.find(key); it != file.end()) {
            std::stringstream ss(it->second);
            if constexpr (std::is_same_v<T, bool>) {
                value = it->second == "1" || it->second == "true" ||
                        it->second == "yes";
            } else if constexpr (std::is_same_v<T, std::string>) {
                value = it->second;
            } else {
                ss >> value;
                if (ss.fail()) {
                    throw CLI::ValidationError(
                        "config", "bad value for key '" + key + "': '" +
                                      it->second + "'");
                }
            }
        }
        record(key, value);
        return value;
    }

    template <typename T> void record(const std::string &key, const T &value)
    {
        if constexpr (std::is_same_v<T, std::string>) {
            resolved[key] = value;
        } else if constexpr (std::is_same_v<T, bool>) {
            resolved[key] = value ? "1" : "0";
        } else if constexpr (std::is_same_v<T, double>) {
            resolved[key] = mca::io::format_double(value);
        } else {
            resolved[key] = std::to_string(value);
        }
    }
};

std::vector<double> parse_double_list(const std::string &text)
{
    try {
        std::vector<double> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            out.push_back(std::stod(item));
        }
        return out;
    } catch (const std::exception &) {
        throw CLI::ValidationError("--fractions",
                                   "bad number list '" + text + "'");
    }
}

std::vector<std::size_t> parse_size_list(const std::string &text)
{
    try {
        std::vector<std::size_t> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            out.push_back(static_cast<std::size_t>(std::stoull(item)));
        }
        return out;
    } catch (const std::exception &) {
        throw CLI::ValidationError("--sizes", "bad size list '" + text + "'");
    }
}

void write_manifest(const fs::path &primary_out, const std::string &command,
                    const Resolver &r,
                    const std::vector<fs::path> &inputs)
{
    std::map<std::string, std::string> kv = r.resolved;
    kv["command"] = command;
    kv["tool"] = kVersion;
    for (const auto &in : inputs) {
        kv["digest." + in.filename().string()] = mca::io::file_digest(in);
    }
    mca::io::save_keyvalue(kv, primary_out.string() + ".manifest");
}

mca::Ensemble load_input(const std::string &csv, const std::string &meta)
{
    return mca::io::load_ensemble(csv, meta.empty() ? fs::path{}
                                                    : fs::path(meta));
}

// Shared predictor flags.
struct PredictorFlags {
    std::string predictor;
    std::size_t embed_dim = 0;
    std::size_t theiler = 0;
    std::size_t grbf_k = 0;
    double grbf_rho = 0.0;
    double grbf_train_fraction = 0.0;
    double grbf_fuzzifier = 0.0;
    std::uint64_t seed = 0;
    int threads = 0;

    void add_options(CLI::App *cmd)
    {
        cmd->add_option("--predictor", predictor,
                        "Predictor kind: glm or grbf");
        cmd->add_option("--embed-dim", embed_dim, "Delay embedding dimension");
        cmd->add_option("--theiler", theiler,
                        "GLM temporal exclusion window");
        cmd->add_option("--grbf-k", grbf_k,
                        "GRBF prototype count (0 = auto)");
        cmd->add_option("--grbf-rho", grbf_rho,
                        "GRBF kernel width (0 = nearest-prototype rule)");
        cmd->add_option("--grbf-train-fraction", grbf_train_fraction,
                        "GRBF training split fraction");
        cmd->add_option("--grbf-fuzzifier", grbf_fuzzifier,
                        "Fuzzy C-means fuzzifier m");
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--threads", threads,
                        "Worker threads (0 = MCA_THREADS or hardware)");
    }

    mca::PredictorConfig resolve(Resolver &r) const
    {
        mca::PredictorConfig cfg;
        const std::string kind = r.get<std::string>("predictor", "glm");
        if (kind == "glm") {
            cfg.kind = mca::PredictorKind::glm;
        } else if (kind == "grbf") {
            cfg.kind = mca::PredictorKind::grbf;
        } else {
            throw CLI::ValidationError("--predictor",
                                       "must be glm or grbf, got '" + kind +
                                           "'");
        }
        cfg.embed_dim = r.get<std::size_t>("embed-dim", 3);
        cfg.theiler = r.get<std::size_t>("theiler", 0);
        cfg.grbf.k = r.get<std::size_t>("grbf-k", 0);
        cfg.grbf.rho = r.get<double>("grbf-rho", 0.0);
        cfg.grbf.train_fraction =
            r.get<double>("grbf-train-fraction", 0.6);
        cfg.grbf.fuzzifier = r.get<double>("grbf-fuzzifier", 2.0);
        cfg.seed = r.get<std::uint64_t>("seed", 1);
        cfg.threads = r.get<int>("threads", 0);
        if (cfg.embed_dim < 1) {
            throw CLI::ValidationError("--embed-dim", "must be >= 1");
        }
        if (cfg.grbf.train_fraction <= 0.0 ||
            cfg.grbf.train_fraction >= 1.0) {
            throw CLI::ValidationError("--grbf-train-fraction",
                                       "must lie in (0,1)");
        }
        return cfg;
    }
};

std::pair<std::vector<double>, std::size_t>
load_matrix_any(const std::string &path)
{
    if (fs::path(path).extension() == ".mca") {
        return mca::io::load_matrix_binary(path);
    }
    return mca::io::load_matrix_csv(path);
}

// ----------------------------------------------------------------------
// ccm output writers.

void write_ccm_outputs(const mca::CcmResult &res, const std::string &prefix,
                       bool averaged_out)
{
    const std::size_t m = res.node_count();
    const std::size_t n_reg = res.n_regions();

    // Region name per node, in node order.
    std::vector<std::string> node_region(m);
    for (const auto &reg : res.regions) {
        for (const std::size_t g : reg.members) {
            for (std::size_t a = 0; a < m; a++) {
                if (res.nodes[a] == g) {
                    node_region[a] = reg.name;
                }
            }
        }
    }

    {
        std::ofstream out(prefix + ".skills.csv", std::ios::binary);
        out << "fraction,repetition,source_region,target_region,"
               "source_node,target_node,skill\n";
        for (std::size_t fi = 0; fi < res.fractions.size(); fi++) {
            for (std::size_t rep = 0; rep < res.repetitions; rep++) {
                for (std::size_t a = 0; a < m; a++) {
                    for (std::size_t b = 0; b < m; b++) {
                        if (a == b) {
                            continue;
                        }
                        out << mca::io::format_double(res.fractions[fi])
                            << ',' << rep << ',' << node_region[a] << ','
                            << node_region[b] << ',' << res.nodes[a] << ','
                            << res.nodes[b] << ','
                            << mca::io::format_double(
                                   res.skills[fi][rep][a * m + b])
                            << '\n';
                    }
                }
            }
        }
    }

    {
        std::ofstream out(prefix + ".summary.csv", std::ios::binary);
        out << "fraction,pair,direction,median,p25,p75,pvalue,significant\n";
        for (std::size_t fi = 0; fi < res.fractions.size(); fi++) {
            for (std::size_t p = 0; p < n_reg; p++) {
                for (std::size_t q = 0; q < n_reg; q++) {
                    if (p == q) {
                        continue;
                    }
                    const auto &ds = res.summaries[fi][p * n_reg + q];
                    const auto &a = res.regions[p].name;
                    const auto &b = res.regions[q].name;
                    const std::string pair =
                        p < q ? a + "-" + b : b + "-" + a;
                    out << mca::io::format_double(res.fractions[fi]) << ','
                        << pair << ',' << a << "->" << b << ','
                        << mca::io::format_double(ds.median) << ','
                        << mca::io::format_double(ds.p25) << ','
                        << mca::io::format_double(ds.p75) << ','
                        << mca::io::format_double(ds.pvalue) << ','
                        << (ds.significant ? 1 : 0) << '\n';
                }
            }
        }
    }

    {
        const auto glob = mca::global_causality(res);
        std::ofstream out(prefix + ".edges.csv", std::ios::binary);
        out << "# a direction is reported when its test is significant at "
               "no fewer than half of the fractions >= 0.5; the stronger "
               "median at the top fraction names it\n";
        out << "pair,direction,p_at_max_fraction\n";
        for (const auto &e : glob.edges) {
            std::string dir = "symmetric";
            if (e.direction == "a->b") {
                dir = e.region_a + "->" + e.region_b;
            } else if (e.direction == "b->a") {
                dir = e.region_b + "->" + e.region_a;
            }
            out << e.region_a << '-' << e.region_b << ',' << dir << ','
                << mca::io::format_double(e.p_at_max_fraction) << '\n';
        }
    }

    {
        std::ofstream out(prefix + ".nodes.csv", std::ios::binary);
        out << "row_index,series_index,region\n";
        for (std::size_t a = 0; a < m; a++) {
            out << a << ',' << res.nodes[a] << ',' << node_region[a] << '\n';
        }
    }

    if (averaged_out) {
        for (std::size_t fi = 0; fi < res.fractions.size(); fi++) {
            char frac[32];
            std::snprintf(frac, sizeof(frac), "%g", res.fractions[fi]);
            mca::io::save_matrix_csv(res.averaged[fi], m,
                                     prefix + ".averaged_f" + frac + ".csv");
        }
    }
}

// ----------------------------------------------------------------------
// Subcommand runners. Each returns the primary output path for manifests.

int run_synth(Resolver &r)
{
    const std::string kind = r.get<std::string>("kind", "community_blocks");
    const std::string out = r.get<std::string>("out", "synth");
    const auto seed = r.get<std::uint64_t>("seed", 1);
    const auto length = r.get<std::size_t>("length", 488);
    const double dt = r.get<double>("dt", 0.5);

    const fs::path csv = out + ".csv";
    const fs::path meta = out + ".meta";

    if (kind == "coupled_logistic") {
        mca::LogisticSpec spec;
        spec.length = length;
        spec.dt = dt;
        spec.seed = seed;
        spec.r_x = r.get<double>("rx", 3.8);
        spec.r_y = r.get<double>("ry", 3.5);
        spec.beta_xy = r.get<double>("beta-xy", 0.0);
        spec.beta_yx = r.get<double>("beta-yx", 0.3);
        spec.burn_in = r.get<std::size_t>("burn-in", 300);
        auto [e, truth] = mca::gen_coupled_logistic(spec);
        for (auto &s : e.series) {
            s = mca::znormalize(s);
        }
        mca::io::save_ensemble(e, csv, meta);
        std::ofstream tf(out + ".direction.txt", std::ios::binary);
        tf << (truth.x_drives_y ? "X->Y\n" : "")
           << (truth.y_drives_x ? "Y->X\n" : "");
        std::cout << "synth: coupled_logistic N=2 L=" << e.length()
                  << " -> " << csv.string() << "\n";
    } else if (kind == "community_blocks") {
        mca::CommunitySpec spec;
        spec.sizes = parse_size_list(r.get<std::string>("sizes", "30,30,30"));
        spec.length = length;
        spec.dt = dt;
        spec.noise_sigma = r.get<double>("noise-sigma", 0.5);
        spec.band_lo = r.get<double>("band-lo", 0.0083);
        spec.band_hi = r.get<double>("band-hi", 0.08);
        spec.seed = seed;
        auto [e, truth] = mca::gen_community_ensemble(spec);
        mca::io::save_ensemble(e, csv, meta);
        mca::io::save_region_masks(truth, out + ".truth.csv");
        std::cout << "synth: community_blocks N=" << e.count()
                  << " L=" << e.length() << " -> " << csv.string() << "\n";
    } else if (kind == "noise") {
        const auto n = r.get<std::size_t>("n", 10);
        const auto e = mca::gen_noise_ensemble(n, length, dt, seed);
        mca::io::save_ensemble(e, csv, meta);
        std::cout << "synth: noise N=" << n << " L=" << length << " -> "
                  << csv.string() << "\n";
    } else {
        throw CLI::ValidationError("--kind",
                                   "unknown synthetic kind '" + kind + "'");
    }
    write_manifest(csv, "synth", r, {});
    return 0;
}

int run_preprocess(Resolver &r)
{
    const std::string in = r.get<std::string>("in", "");
    const std::string meta = r.get<std::string>("meta", "");
    const std::string out = r.get<std::string>("out", "");
    if (in.empty() || out.empty()) {
        throw CLI::ValidationError("preprocess", "--in and --out are required");
    }
    mca::Ensemble e = load_input(in, meta);

    const double smooth_sigma = r.get<double>("smooth-sigma", 0.0);
    if (smooth_sigma > 0.0) {
        e = mca::smooth_spatial(e, smooth_sigma);
    }

    mca::PreprocessConfig cfg;
    cfg.drop = r.get<std::size_t>("drop", 0);
    cfg.detrend = !r.get<bool>("no-detrend", false);
    cfg.normalize = !r.get<bool>("no-normalize", false);
    const double lo = r.get<double>("band-lo", 0.0);
    const double hi = r.get<double>("band-hi", 0.0);
    if (hi > 0.0) {
        cfg.band_lo = lo;
        cfg.band_hi = hi;
    }
    const auto processed = mca::preprocess(e, cfg);
    mca::io::save_ensemble(processed, out,
                           out + std::string(".meta"));
    write_manifest(out, "preprocess", r,
                   meta.empty() ? std::vector<fs::path>{in}
                                : std::vector<fs::path>{in, meta});
    std::cout << "preprocess: N=" << processed.count()
              << " L=" << processed.length() << " -> " << out << "\n";
    return 0;
}

int run_affinity(Resolver &r, PredictorFlags &pf)
{
    const std::string in = r.get<std::string>("in", "");
    const std::string meta = r.get<std::string>("meta", "");
    const std::string out = r.get<std::string>("out", "");
    if (in.empty() || out.empty()) {
        throw CLI::ValidationError("affinity", "--in and --out are required");
    }
    const std::string binary_out = r.get<std::string>("binary-out", "");
    const std::string svg = r.get<std::string>("svg", "");
    const auto cfg = pf.resolve(r);

    const auto e = load_input(in, meta);
    if (e.length() < cfg.embed_dim + 2) {
        throw CLI::ValidationError(
            "--embed-dim", "embedding dimension " +
                               std::to_string(cfg.embed_dim) +
                               " is too large for series of length " +
                               std::to_string(e.length()));
    }
    mca::ComputeStats stats;
    const auto a = mca::compute_affinity(e, cfg, &stats);
    mca::io::save_matrix_csv(a.values, a.n, out);
    if (!binary_out.empty()) {
        mca::io::save_matrix_binary(a.values, a.n, binary_out);
    }
    if (!svg.empty()) {
        mca::svg::render_heatmap(a.values, a.n, a.n, svg, "affinity");
    }
    write_manifest(out, "affinity", r,
                   meta.empty() ? std::vector<fs::path>{in}
                                : std::vector<fs::path>{in, meta});
    std::printf("affinity: N=%zu predictor=%s stage1=%.3fs stage2=%.3fs -> %s\n",
                a.n, mca::predictor_name(cfg.kind), stats.stage1_seconds,
                stats.stage2_seconds, out.c_str());
    return 0;
}

int run_cluster(Resolver &r)
{
    const std::string affinity = r.get<std::string>("affinity", "");
    const std::string out = r.get<std::string>("out", "");
    if (affinity.empty() || out.empty()) {
        throw CLI::ValidationError("cluster",
                                   "--affinity and --out are required");
    }
    const auto seed = r.get<std::uint64_t>("seed", 1);
    const bool no_symmetrize = r.get<bool>("no-symmetrize", false);
    auto [values, n] = load_matrix_any(affinity);

    mca::AffinityMatrix a;
    a.n = n;
    a.values = std::move(values);
    std::size_t k = r.get<std::size_t>("knn-k", 0);
    if (k == 0) {
        k = mca::default_knn_k(n);
        r.record("knn-k.effective", k);
    }
    const auto g = mca::sparsify_mutual_knn(a, k, !no_symmetrize);
    const auto part = mca::louvain(g, seed);

    {
        std::ofstream pf(out, std::ios::binary);
        pf << "node_index,community_id\n";
        for (std::size_t i = 0; i < part.assignment.size(); i++) {
            pf << i << ',' << part.assignment[i] << '\n';
        }
    }
    const std::string levels_out = r.get<std::string>("levels-out", "");
    if (!levels_out.empty()) {
        std::ofstream lf(levels_out, std::ios::binary);
        lf << "level,node_index,community_id\n";
        for (std::size_t l = 0; l < part.levels.size(); l++) {
            for (std::size_t i = 0; i < part.levels[l].size(); i++) {
                lf << l << ',' << i << ',' << part.levels[l][i] << '\n';
            }
        }
    }
    write_manifest(out, "cluster", r, {affinity});
    std::printf("cluster: N=%zu k=%zu communities=%zu Q=%.6f -> %s\n", n, k,
                part.n_communities, part.q, out.c_str());
    return 0;
}

int run_ccm(Resolver &r, PredictorFlags &pf)
{
    const std::string in = r.get<std::string>("in", "");
    const std::string meta = r.get<std::string>("meta", "");
    const std::string regions_path = r.get<std::string>("regions", "");
    const std::string out = r.get<std::string>("out", "");
    if (in.empty() || regions_path.empty() || out.empty()) {
        throw CLI::ValidationError(
            "ccm", "--in, --regions and --out are required");
    }

    mca::CcmConfig cfg;
    cfg.predictor = pf.resolve(r);
    cfg.fractions = parse_double_list(
        r.get<std::string>("fractions", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8"));
    cfg.repetitions = r.get<std::size_t>("repetitions", 20);
    cfg.permutations = r.get<std::size_t>("permutations", 10000);
    cfg.alpha = r.get<double>("alpha", 0.05);
    const std::string test = r.get<std::string>("test", "ranksum");
    if (test == "ranksum") {
        cfg.test = mca::CcmTest::ranksum;
    } else if (test == "permutation") {
        cfg.test = mca::CcmTest::permutation;
    } else {
        throw CLI::ValidationError("--test",
                                   "must be ranksum or permutation");
    }

    const auto e = load_input(in, meta);
    const auto regions = mca::io::load_region_masks(regions_path);
    const auto res = mca::ccm_run(e, regions, cfg);
    write_ccm_outputs(res, out, r.get<bool>("averaged-out", false));

    const std::string svg = r.get<std::string>("svg", "");
    if (!svg.empty()) {
        // First region pair by default, or --svg-pair A:B.
        std::size_t pa = 0;
        std::size_t pb = 1;
        const std::string pair = r.get<std::string>("svg-pair", "");
        if (!pair.empty()) {
            const auto colon = pair.find(':');
            if (colon == std::string::npos) {
                throw CLI::ValidationError("--svg-pair", "expected A:B");
            }
            const std::string na = pair.substr(0, colon);
            const std::string nb = pair.substr(colon + 1);
            bool found_a = false;
            bool found_b = false;
            for (std::size_t i = 0; i < regions.size(); i++) {
                if (regions[i].name == na) {
                    pa = i;
                    found_a = true;
                }
                if (regions[i].name == nb) {
                    pb = i;
                    found_b = true;
                }
            }
            if (!found_a || !found_b) {
                throw CLI::ValidationError("--svg-pair",
                                           "unknown region in '" + pair + "'");
            }
        }
        mca::svg::CurveSeries fwd{regions[pa].name + "->" + regions[pb].name,
                                  mca::compare_directions(res, pa, pb)};
        mca::svg::CurveSeries rev{regions[pb].name + "->" + regions[pa].name,
                                  mca::compare_directions(res, pb, pa)};
        mca::svg::render_ccm_curves(res.fractions, {fwd, rev}, svg);
    }

    write_manifest(out + ".summary.csv", "ccm", r, {in, regions_path});
    std::cout << "ccm: nodes=" << res.node_count()
              << " fractions=" << res.fractions.size()
              << " repetitions=" << res.repetitions << " -> " << out
              << ".{skills,summary,edges,nodes}.csv\n";
    return 0;
}

int run_influence(Resolver &r)
{
    const std::string affinity = r.get<std::string>("affinity", "");
    const std::string regions_path = r.get<std::string>("regions", "");
    const std::string r1 = r.get<std::string>("r1", "");
    const std::string r2 = r.get<std::string>("r2", "");
    const std::string out = r.get<std::string>("out", "");
    if (affinity.empty() || regions_path.empty() || r1.empty() ||
        r2.empty() || out.empty()) {
        throw CLI::ValidationError(
            "influence",
            "--affinity, --regions, --r1, --r2 and --out are required");
    }
    auto [values, n] = load_matrix_any(affinity);

    // Optional node mapping (row_index,series_index[,region]) for
    // submatrices written by ccm.
    std::vector<std::size_t> nodes(n);
    const std::string nodes_path = r.get<std::string>("nodes", "");
    if (nodes_path.empty()) {
        for (std::size_t i = 0; i < n; i++) {
            nodes[i] = i;
        }
    } else {
        const auto kvs = [&] {
            std::ifstream in_(nodes_path);
            if (!in_) {
                throw mca::DataError("cannot open " + nodes_path);
            }
            std::vector<std::size_t> map_(n, 0);
            std::string line;
            bool header = true;
            while (std::getline(in_, line)) {
                if (header) {
                    header = false;
                    continue;
                }
                std::stringstream ss(line);
                std::string cell;
                std::getline(ss, cell, ',');
                const auto row = std::stoull(cell);
                std::getline(ss, cell, ',');
                if (row < n) {
                    map_[row] = std::stoull(cell);
                }
            }
            return map_;
        }();
        nodes = kvs;
    }

    const auto masks = mca::io::load_region_masks(regions_path);
    const mca::RegionMask *ma = nullptr;
    const mca::RegionMask *mb = nullptr;
    for (const auto &m : masks) {
        if (m.name == r1) {
            ma = &m;
        }
        if (m.name == r2) {
            mb = &m;
        }
    }
    if (ma == nullptr || mb == nullptr) {
        throw CLI::ValidationError("influence", "region name not found");
    }

    const auto inf = mca::influence_scores(values, nodes, *ma, *mb);
    {
        std::ofstream f(out, std::ios::binary);
        f << "node_index,region,score\n";
        for (std::size_t i = 0; i < inf.nodes.size(); i++) {
            f << inf.nodes[i] << ',' << inf.region_of[i] << ','
              << mca::io::format_double(inf.scores[i]) << '\n';
        }
    }
    const std::string svg = r.get<std::string>("svg", "");
    if (!svg.empty()) {
        mca::svg::render_heatmap(inf.scores, 1, inf.scores.size(), svg,
                                 "influence " + r1 + " vs " + r2);
    }
    write_manifest(out, "influence", r, {affinity, regions_path});
    std::cout << "influence: " << inf.nodes.size() << " nodes -> " << out
              << "\n";
    return 0;
}

int run_dice(Resolver &r)
{
    const std::string partition_path = r.get<std::string>("partition", "");
    const std::string truth_path = r.get<std::string>("truth", "");
    const std::string out = r.get<std::string>("out", "");
    if (partition_path.empty() || truth_path.empty() || out.empty()) {
        throw CLI::ValidationError(
            "dice", "--partition, --truth and --out are required");
    }
    const std::string region = r.get<std::string>("region", "");

    mca::Partition part;
    {
        std::ifstream in(partition_path);
        if (!in) {
            throw mca::DataError("cannot open " + partition_path);
        }
        std::string line;
        bool header = true;
        std::vector<std::pair<std::size_t, std::uint32_t>> rows;
        while (std::getline(in, line)) {
            if (header) {
                header = false;
                continue;
            }
            if (line.empty()) {
                continue;
            }
            std::stringstream ss(line);
            std::string cell;
            std::getline(ss, cell, ',');
            const auto node = std::stoull(cell);
            std::getline(ss, cell, ',');
            rows.push_back({node, static_cast<std::uint32_t>(
                                      std::stoul(cell))});
        }
        std::size_t max_node = 0;
        for (const auto &[node, comm] : rows) {
            max_node = std::max(max_node, node);
        }
        part.assignment.assign(max_node + 1, 0);
        for (const auto &[node, comm] : rows) {
            part.assignment[node] = comm;
        }
    }

    const auto masks = mca::io::load_region_masks(truth_path);
    const mca::RegionMask *truth = nullptr;
    if (region.empty()) {
        truth = &masks.at(0);
    } else {
        for (const auto &m : masks) {
            if (m.name == region) {
                truth = &m;
            }
        }
        if (truth == nullptr) {
            throw CLI::ValidationError("--region",
                                       "region '" + region + "' not found");
        }
    }

    const auto res = mca::merge_to_maximize_dice(part, *truth);
    {
        std::ofstream f(out, std::ios::binary);
        f << "step,cluster_id,dice_after\n";
        for (std::size_t s = 0; s < res.trace.size(); s++) {
            f << s << ',' << res.trace[s].cluster << ','
              << mca::io::format_double(res.trace[s].dice_after) << '\n';
        }
    }
    write_manifest(out, "dice", r, {partition_path, truth_path});
    std::printf("dice: region=%s merged=%zu clusters dice=%.6f -> %s\n",
                truth->name.c_str(), res.clusters.size(), res.dice_value,
                out.c_str());
    return 0;
}

int run_pipeline(Resolver &r, PredictorFlags &pf)
{
    const std::string in = r.get<std::string>("in", "");
    const std::string meta = r.get<std::string>("meta", "");
    const std::string out_dir = r.get<std::string>("out-dir", "");
    if (in.empty() || out_dir.empty()) {
        throw CLI::ValidationError("pipeline",
                                   "--in and --out-dir are required");
    }
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    // Preprocess.
    mca::Ensemble e = load_input(in, meta);
    mca::PreprocessConfig pc;
    pc.drop = r.get<std::size_t>("drop", 0);
    pc.detrend = !r.get<bool>("no-detrend", false);
    pc.normalize = !r.get<bool>("no-normalize", false);
    const double lo = r.get<double>("band-lo", 0.0);
    const double hi = r.get<double>("band-hi", 0.0);
    if (hi > 0.0) {
        pc.band_lo = lo;
        pc.band_hi = hi;
    }
    e = mca::preprocess(e, pc);
    mca::io::save_ensemble(e, dir / "preprocessed.csv",
                           dir / "preprocessed.meta");

    // Affinity.
    const auto cfg = pf.resolve(r);
    mca::ComputeStats stats;
    const auto a = mca::compute_affinity(e, cfg, &stats);
    mca::io::save_matrix_csv(a.values, a.n, dir / "affinity.csv");

    // Cluster.
    std::size_t k = r.get<std::size_t>("knn-k", 0);
    if (k == 0) {
        k = mca::default_knn_k(a.n);
    }
    const auto g =
        mca::sparsify_mutual_knn(a, k, !r.get<bool>("no-symmetrize", false));
    const auto part = mca::louvain(g, cfg.seed);
    {
        std::ofstream f(dir / "partition.csv", std::ios::binary);
        f << "node_index,community_id\n";
        for (std::size_t i = 0; i < part.assignment.size(); i++) {
            f << i << ',' << part.assignment[i] << '\n';
        }
    }

    // Optional merge against a truth mask.
    const std::string truth_path = r.get<std::string>("truth", "");
    double dice_value = -1.0;
    if (!truth_path.empty()) {
        const auto masks = mca::io::load_region_masks(truth_path);
        std::ofstream f(dir / "dice.csv", std::ios::binary);
        f << "region,dice,clusters\n";
        for (const auto &m : masks) {
            const auto res = mca::merge_to_maximize_dice(part, m);
            f << m.name << ',' << mca::io::format_double(res.dice_value)
              << ',' << res.clusters.size() << '\n';
            dice_value = std::max(dice_value, res.dice_value);
        }
    }

    // Optional CCM stage.
    const std::string regions_path = r.get<std::string>("regions", "");
    if (!regions_path.empty()) {
        mca::CcmConfig ccfg;
        ccfg.predictor = cfg;
        ccfg.fractions = parse_double_list(r.get<std::string>(
            "fractions", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8"));
        ccfg.repetitions = r.get<std::size_t>("repetitions", 20);
        const auto regions = mca::io::load_region_masks(regions_path);
        const auto res = mca::ccm_run(e, regions, ccfg);
        write_ccm_outputs(res, (dir / "ccm").string(), false);
    }

    write_manifest(dir / "partition.csv", "pipeline", r,
                   meta.empty() ? std::vector<fs::path>{in}
                                : std::vector<fs::path>{in, meta});
    std::printf("pipeline: N=%zu communities=%zu Q=%.6f%s -> %s\n", a.n,
                part.n_communities, part.q,
                dice_value >= 0.0
                    ? (" dice=" + mca::io::format_double(dice_value)).c_str()
                    : "",
                out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mutual connectivity analysis of time-series ensembles"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // Every subcommand takes --config (flat key=value, '#' comments).
    const auto add_common = [](CLI::App *cmd, std::string &config) {
        cmd->add_option("--config", config,
                        "Config file; flags override its keys");
    };

    std::string cfg_synth, cfg_pre, cfg_aff, cfg_clu, cfg_ccm, cfg_inf,
        cfg_dice, cfg_pipe;

    auto *synth = app.add_subcommand("synth", "Generate synthetic ensembles");
    add_common(synth, cfg_synth);
    std::string synth_sink;
    synth->add_option("--kind", synth_sink,
                      "coupled_logistic | community_blocks | noise");
    synth->add_option("--out", synth_sink, "Output prefix");
    synth->add_option("--seed", synth_sink, "Master seed");
    synth->add_option("--length", synth_sink, "Samples per series");
    synth->add_option("--dt", synth_sink, "Sampling period, seconds");
    synth->add_option("--n", synth_sink, "Series count (noise)");
    synth->add_option("--sizes", synth_sink, "Community sizes, e.g. 30,30,30");
    synth->add_option("--noise-sigma", synth_sink, "Member noise level");
    synth->add_option("--band-lo", synth_sink, "Latent band low edge, Hz");
    synth->add_option("--band-hi", synth_sink, "Latent band high edge, Hz");
    synth->add_option("--rx", synth_sink, "Logistic r_x");
    synth->add_option("--ry", synth_sink, "Logistic r_y");
    synth->add_option("--beta-xy", synth_sink, "Coupling Y->X");
    synth->add_option("--beta-yx", synth_sink, "Coupling X->Y");
    synth->add_option("--burn-in", synth_sink, "Discarded leading steps");

    auto *pre = app.add_subcommand("preprocess",
                                   "Detrend, band filter, normalize");
    add_common(pre, cfg_pre);
    std::string pre_sink;
    pre->add_option("--in", pre_sink, "Input ensemble CSV");
    pre->add_option("--meta", pre_sink, "Input sidecar");
    pre->add_option("--out", pre_sink, "Output ensemble CSV");
    pre->add_option("--drop", pre_sink, "Initial samples to drop");
    pre->add_option("--band-lo", pre_sink, "Band low edge, Hz (0 = off)");
    pre->add_option("--band-hi", pre_sink, "Band high edge, Hz (0 = off)");
    pre->add_flag("--no-detrend", "Skip linear detrending");
    pre->add_flag("--no-normalize", "Skip z-normalization");
    pre->add_option("--smooth-sigma", pre_sink,
                    "Spatial Gaussian sigma in pixels (needs grid)");

    PredictorFlags pf_aff;
    auto *aff = app.add_subcommand("affinity",
                                   "Pairwise cross-prediction matrix");
    add_common(aff, cfg_aff);
    std::string aff_sink;
    aff->add_option("--in", aff_sink, "Input ensemble CSV (preprocessed)");
    aff->add_option("--meta", aff_sink, "Input sidecar");
    aff->add_option("--out", aff_sink, "Output affinity CSV");
    aff->add_option("--binary-out", aff_sink, "Optional binary matrix (.mca)");
    aff->add_option("--svg", aff_sink, "Optional heatmap SVG");
    pf_aff.add_options(aff);

    auto *clu = app.add_subcommand("cluster",
                                   "Mutual-kNN sparsify + Louvain");
    add_common(clu, cfg_clu);
    std::string clu_sink;
    clu->add_option("--affinity", clu_sink, "Affinity matrix (.csv or .mca)");
    clu->add_option("--out", clu_sink, "Partition CSV");
    clu->add_option("--levels-out", clu_sink, "Optional hierarchy CSV");
    clu->add_option("--knn-k", clu_sink, "Mutual-kNN k (0 = 20% of nodes)");
    clu->add_flag("--no-symmetrize",
                  "Null model uses directed row-sum degrees");
    clu->add_option("--seed", clu_sink, "Louvain visit-order seed");

    PredictorFlags pf_ccm;
    auto *ccm = app.add_subcommand("ccm",
                                   "Convergent cross-mapping over fractions");
    add_common(ccm, cfg_ccm);
    std::string ccm_sink;
    ccm->add_option("--in", ccm_sink, "Input ensemble CSV (preprocessed)");
    ccm->add_option("--meta", ccm_sink, "Input sidecar");
    ccm->add_option("--regions", ccm_sink, "Region mask CSV");
    ccm->add_option("--out", ccm_sink, "Output prefix");
    ccm->add_option("--fractions", ccm_sink, "Comma list in (0,1]");
    ccm->add_option("--repetitions", ccm_sink, "Subset draws per fraction");
    ccm->add_option("--test,--ccm-test", ccm_sink, "ranksum | permutation");
    ccm->add_option("--permutations", ccm_sink, "Permutation count");
    ccm->add_option("--alpha", ccm_sink, "Significance level");
    ccm->add_flag("--averaged-out", "Write per-fraction averaged matrices");
    ccm->add_option("--svg", ccm_sink, "Optional curve SVG");
    ccm->add_option("--svg-pair", ccm_sink, "Region pair A:B for the SVG");
    pf_ccm.add_options(ccm);

    auto *inf = app.add_subcommand("influence",
                                   "Per-node influence scores");
    add_common(inf, cfg_inf);
    std::string inf_sink;
    inf->add_option("--affinity", inf_sink, "Affinity matrix (.csv or .mca)");
    inf->add_option("--nodes", inf_sink,
                    "Row-to-series mapping CSV (for ccm submatrices)");
    inf->add_option("--regions", inf_sink, "Region mask CSV");
    inf->add_option("--r1", inf_sink, "First region name");
    inf->add_option("--r2", inf_sink, "Second region name");
    inf->add_option("--out", inf_sink, "Output CSV");
    inf->add_option("--svg", inf_sink, "Optional strip heatmap SVG");

    auto *dice = app.add_subcommand("dice",
                                    "Merge clusters to maximize Dice");
    add_common(dice, cfg_dice);
    std::string dice_sink;
    dice->add_option("--partition", dice_sink, "Partition CSV");
    dice->add_option("--truth", dice_sink, "Truth mask CSV");
    dice->add_option("--region", dice_sink, "Truth region name (default first)");
    dice->add_option("--out", dice_sink, "Merge trace CSV");

    PredictorFlags pf_pipe;
    auto *pipe = app.add_subcommand(
        "pipeline", "preprocess -> affinity -> cluster (-> ccm)");
    add_common(pipe, cfg_pipe);
    std::string pipe_sink;
    pipe->add_option("--in", pipe_sink, "Input ensemble CSV");
    pipe->add_option("--meta", pipe_sink, "Input sidecar");
    pipe->add_option("--out-dir", pipe_sink, "Output directory");
    pipe->add_option("--drop", pipe_sink, "Initial samples to drop");
    pipe->add_option("--band-lo", pipe_sink, "Band low edge, Hz (0 = off)");
    pipe->add_option("--band-hi", pipe_sink, "Band high edge, Hz (0 = off)");
    pipe->add_flag("--no-detrend", "Skip linear detrending");
    pipe->add_flag("--no-normalize", "Skip z-normalization");
    pipe->add_option("--knn-k", pipe_sink, "Mutual-kNN k (0 = 20% of nodes)");
    pipe->add_flag("--no-symmetrize",
                   "Null model uses directed row-sum degrees");
    pipe->add_option("--truth", pipe_sink, "Optional truth mask CSV");
    pipe->add_option("--regions", pipe_sink, "Optional CCM region mask CSV");
    pipe->add_option("--fractions", pipe_sink, "CCM fractions");
    pipe->add_option("--repetitions", pipe_sink, "CCM repetitions");
    pf_pipe.add_options(pipe);

    try {
        app.parse(argc, argv);

        const auto run = [&](CLI::App *cmd, const std::string &config,
                             auto &&fn) -> std::optional<int> {
            if (cmd->parsed()) {
                Resolver r;
                r.cmd = cmd;
                r.load_config(config);
                return fn(r);
            }
            return std::nullopt;
        };

        std::optional<int> status;
        if (!status) {
            status = run(synth, cfg_synth,
                         [&](Resolver &r) { return run_synth(r); });
        }
        if (!status) {
            status = run(pre, cfg_pre,
                         [&](Resolver &r) { return run_preprocess(r); });
        }
        if (!status) {
            status = run(aff, cfg_aff, [&](Resolver &r) {
                return run_affinity(r, pf_aff);
            });
        }
        if (!status) {
            status = run(clu, cfg_clu,
                         [&](Resolver &r) { return run_cluster(r); });
        }
        if (!status) {
            status = run(ccm, cfg_ccm,
                         [&](Resolver &r) { return run_ccm(r, pf_ccm); });
        }
        if (!status) {
            status = run(inf, cfg_inf,
                         [&](Resolver &r) { return run_influence(r); });
        }
        if (!status) {
            status = run(dice, cfg_dice,
                         [&](Resolver &r) { return run_dice(r); });
        }
        if (!status) {
            status = run(pipe, cfg_pipe, [&](Resolver &r) {
                return run_pipeline(r, pf_pipe);
            });
        }
        return status.value_or(2);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help / --version
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const mca::DataError &e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 1;
    } catch (const mca::DegenerateSeriesError &e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
