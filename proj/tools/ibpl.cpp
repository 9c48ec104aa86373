// ibpl: command-line driver wiring worlds, solvers, trainers and metrics
// into reproducible file-based experiments. Every command writes its
// outputs atomically and drops a run manifest next to them.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ibp/metrics.hpp"
#include "ibp/partition.hpp"
#include "ibp/prob.hpp"
#include "ibp/roundtrip.hpp"
#include "ibp/serialize.hpp"
#include "ibp/trainer.hpp"
#include "ibp/world_gen.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("IBPL_LOG");
    if (!env) return LogLevel::Error;
    std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

using ibp::json;

// Run manifest written alongside every output artifact.
struct ManifestWriter {
    std::string command;
    json config = json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    json extra = json::object();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const std::filesystem::path& path) const {
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        json m{{"command", command}, {"config", config},     {"inputs", inputs},
               {"outputs", outputs}, {"seed", seed},         {"version", kVersion},
               {"duration_ms", elapsed}};
        for (auto& [k, v] : extra.items()) m[k] = v;
        ibp::write_file_atomic(path, m.dump(2) + "\n");
    }
};

std::vector<ibp::AmbiguityPair> parse_ambiguity_pairs(const std::string& text) {
    std::vector<ibp::AmbiguityPair> pairs;
    if (text.empty()) return pairs;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        std::size_t a, b, p;
        char c1, c2;
        std::istringstream ps(item);
        if (!(ps >> a >> c1 >> b >> c2 >> p) || c1 != ':' || c2 != ':')
            throw std::invalid_argument("ambiguity pair must be a:b:pivot, got '" + item + "'");
        pairs.push_back({a, b, p});
    }
    return pairs;
}

ibp::World load_world(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw std::runtime_error("world file not found: " + path);
    return ibp::world_from_json(ibp::read_json(path));
}

std::vector<ibp::TokenSeq> load_token_file(const std::string& path) {
    std::istringstream is(ibp::read_file(path));
    std::vector<ibp::TokenSeq> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(ibp::tokenize_line(line));
    }
    return out;
}

// ---- generate-world ----

int cmd_generate_world(const std::string& preset, std::size_t n_source, std::size_t n_pivot,
                       const std::string& pairs_text, double concentration, std::uint64_t seed,
                       const std::string& out) {
    ManifestWriter mf;
    mf.command = "generate-world";
    ibp::World world;
    if (preset == "confounder") {
        world = ibp::build_confounder_world();
        mf.config = json{{"preset", "confounder"}};
    } else if (preset.empty()) {
        ibp::WorldSpec spec;
        spec.n_source = n_source;
        spec.n_pivot = n_pivot;
        spec.ambiguity_pairs = parse_ambiguity_pairs(pairs_text);
        spec.concentration = concentration;
        spec.seed = seed;
        world = ibp::build_random_world(spec);
        mf.config = json{{"n_source", n_source},
                         {"n_pivot", n_pivot},
                         {"ambiguity_pairs", pairs_text},
                         {"concentration", concentration},
                         {"seed", seed}};
        mf.seed = seed;
    } else {
        throw std::invalid_argument("unknown preset '" + preset + "'");
    }
    ibp::write_file_atomic(out, ibp::world_to_json(world).dump(2) + "\n");
    mf.outputs = {out};
    mf.write(out + ".manifest.json");
    log_info("wrote world '" + world.name + "' to " + out);
    return 0;
}

// ---- roundtrip-analyze ----

int cmd_roundtrip_analyze(const std::string& world_path, const std::string& pivot_mode,
                          std::size_t k, double confound_threshold, const std::string& out) {
    ManifestWriter mf;
    mf.command = "roundtrip-analyze";
    mf.config = json{{"world", world_path},
                     {"pivot_mode", pivot_mode},
                     {"k", k},
                     {"confound_threshold", confound_threshold}};
    mf.inputs = {world_path};
    ibp::World world = load_world(world_path);

    ibp::PivotSelection sel = pivot_mode == "topk" ? ibp::PivotSelection::topk(k)
                                                   : ibp::PivotSelection::all();
    const auto& labels = world.joint.x_labels;

    json dists = json::object();
    double max_resid = 0.0;
    for (const auto& x : labels) {
        ibp::ProbVector d = ibp::roundtrip_dist(world, x, sel);
        dists[x] = d.weights;
        max_resid = std::max(max_resid, ibp::decomposition_check(world, x));
    }

    json smt_matrix = json::array();
    json confounded = json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < labels.size(); ++j) {
            double s = ibp::s_mt(world, labels[i], labels[j], sel);
            row.push_back(s);
            if (i < j && s > confound_threshold &&
                ibp::strict_similarity(world, labels[i], labels[j]) == 0)
                confounded.push_back(json::array({labels[i], labels[j], s}));
        }
        smt_matrix.push_back(row);
    }

    json report{{"world", world.name},
                {"x_labels", labels},
                {"pivot_mode", pivot_mode},
                {"roundtrip_dists", dists},
                {"s_mt_matrix", smt_matrix},
                {"decomposition_residual_max", max_resid},
                {"confounded_pairs", confounded}};
    ibp::write_file_atomic(out, report.dump(2) + "\n");
    mf.outputs = {out};
    mf.write(out + ".manifest.json");
    return 0;
}

// ---- ib-solve ----

int cmd_ib_solve(const std::string& world_path, double epsilon, const std::string& method,
                 std::size_t clusters, const std::string& out) {
    ManifestWriter mf;
    mf.command = "ib-solve";
    mf.config = json{{"world", world_path},
                     {"epsilon", epsilon},
                     {"method", method},
                     {"clusters", clusters}};
    mf.inputs = {world_path};
    ibp::World world = load_world(world_path);

    ibp::Partition part = method == "agglomerative"
                              ? ibp::agglomerative_ib(world, clusters)
                              : ibp::solve_ib_exhaustive(world, epsilon);

    double loss = ibp::info_loss(world, part);
    double i_xy = ibp::mutual_information(world.joint);
    double i_ty = ibp::mutual_information(ibp::coarsen_joint(world, part));
    auto b4 = ibp::bound_thm4(world, part);
    auto b7 = ibp::bound_thm7(world, part);

    json cluster_reports = json::array();
    for (const auto& cluster : part.clusters()) {
        std::vector<std::string> members;
        for (std::size_t i : cluster) members.push_back(world.joint.x_labels[i]);
        ibp::ClusterReport rep = ibp::cluster_mixture(world, members);
        cluster_reports.push_back(json{{"members", members},
                                       {"mixture", rep.mixture.weights},
                                       {"weights", rep.weights},
                                       {"partial_weights", rep.partial_weights}});
    }

    json report{{"world", world.name},
                {"method", method},
                {"epsilon", epsilon},
                {"partition", part.assignment},
                {"i_xt", ibp::partition_mi_xt(world, part)},
                {"i_ty", i_ty},
                {"i_xy", i_xy},
                {"info_loss", loss},
                {"bound_thm4_lhs", b4.lhs},
                {"bound_thm7_lhs", b7.lhs},
                {"clusters", cluster_reports}};
    ibp::write_file_atomic(out, report.dump(2) + "\n");
    mf.outputs = {out};
    mf.write(out + ".manifest.json");
    return 0;
}

// ---- train ----

int cmd_train(const std::string& world_path, ibp::TrainerConfig cfg, const std::string& mode,
              const std::string& corpus_path, const std::string& out_prefix) {
    ManifestWriter mf;
    mf.command = "train";
    cfg.mode = mode == "sampled" ? ibp::TrainerConfig::Mode::Sampled
                                 : ibp::TrainerConfig::Mode::Exact;
    mf.config = ibp::config_to_json(cfg);
    mf.config["world"] = world_path;
    mf.inputs = {world_path};
    mf.seed = cfg.seed;
    ibp::World world = load_world(world_path);

    ibp::ParallelCorpus corpus;
    const ibp::ParallelCorpus* corpus_ptr = nullptr;
    if (cfg.mode == ibp::TrainerConfig::Mode::Sampled) {
        if (corpus_path.empty())
            throw std::invalid_argument("--mode sampled requires --corpus");
        corpus = ibp::corpus_from_json(ibp::read_json(corpus_path));
        corpus_ptr = &corpus;
        mf.inputs.push_back(corpus_path);
    }

    ibp::TrainState state = ibp::train(world, cfg, corpus_ptr);
    auto [i_xt, i_ty] = ibp::mi_report(world, state);
    double i_xy = ibp::mutual_information(world.joint);

    std::string model_path = out_prefix + ".model.json";
    std::string trace_path = out_prefix + ".trace.csv";
    ibp::write_file_atomic(model_path,
                           ibp::model_to_json(state, cfg, world.name).dump(2) + "\n");

    // Trace CSV; exact MI columns are filled every 100 steps by replaying
    // the deterministic run.
    {
        ibp::TrainState replay = ibp::init_state(world, cfg);
        std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        std::ostringstream csv;
        csv.precision(17);
        csv << "step,l_mt,l_adv,objective,i_xt,i_ty\n";
        for (const auto& row : state.trace) {
            csv << row.step << ',' << row.l_mt << ',' << row.l_adv << ',' << row.objective
                << ',';
            if (row.step % 100 == 0 || row.step == cfg.steps) {
                auto [xt, ty] = ibp::mi_report(world, replay);
                csv << xt << ',' << ty;
            } else {
                csv << ',';
            }
            csv << '\n';
            if (row.step < cfg.steps)
                ibp::train_step(world, replay, cfg, rng, corpus_ptr);
        }
        ibp::write_file_atomic(trace_path, csv.str());
    }

    mf.outputs = {model_path, trace_path};
    mf.extra = json{{"final_i_xt", i_xt},
                    {"final_i_ty", i_ty},
                    {"i_xy", i_xy},
                    {"i_ty_over_i_xy", i_xy > 0 ? i_ty / i_xy : 0.0},
                    {"adv_steps", state.adv_steps}};
    mf.write(out_prefix + ".manifest.json");
    log_info("trained " + std::to_string(cfg.steps) + " steps; I(T,Y)/I(X,Y) = " +
             std::to_string(i_xy > 0 ? i_ty / i_xy : 0.0));
    return 0;
}

// ---- tradeoff-curve ----

struct EvalSet {
    std::vector<std::string> sources;
    std::vector<std::string> references;
};

EvalSet default_eval_set(const ibp::World& world) {
    // Reference paraphrase of each source: its nearest other source under
    // S_MT, ties to the lowest index.
    EvalSet ev;
    const auto& labels = world.joint.x_labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ev.sources.push_back(labels[i]);
        std::size_t best = i == 0 ? 1 : 0;
        double best_s = ibp::s_mt(world, labels[i], labels[best]);
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (j == i) continue;
            double s = ibp::s_mt(world, labels[i], labels[j]);
            if (s > best_s + 1e-12) {
                best = j;
                best_s = s;
            }
        }
        ev.references.push_back(labels[best]);
    }
    return ev;
}

std::string pick_candidate(const ibp::ProbVector& dist, std::size_t self_idx,
                           double self_margin) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < dist.size(); ++i)
        if (dist.weights[i] > dist.weights[arg]) arg = i;
    if (self_margin > 0.0 && arg == self_idx) {
        std::size_t alt = self_idx == 0 ? 1 : 0;
        for (std::size_t i = 0; i < dist.size(); ++i)
            if (i != self_idx && dist.weights[i] > dist.weights[alt]) alt = i;
        if (dist.weights[alt] >= dist.weights[arg] - self_margin) arg = alt;
    }
    return dist.labels[arg];
}

int cmd_tradeoff_curve(const std::string& world_path, const std::string& lambdas_text,
                       std::size_t steps, std::uint64_t seed, const std::string& eval_path,
                       double self_margin, const std::string& out) {
    ManifestWriter mf;
    mf.command = "tradeoff-curve";
    mf.config = json{{"world", world_path}, {"lambdas", lambdas_text}, {"steps", steps},
                     {"seed", seed},        {"eval_corpus", eval_path}, {"self_margin", self_margin}};
    mf.inputs = {world_path};
    mf.seed = seed;
    ibp::World world = load_world(world_path);

    std::vector<double> lambdas;
    {
        std::istringstream is(lambdas_text);
        std::string item;
        while (std::getline(is, item, ',')) lambdas.push_back(std::stod(item));
        if (lambdas.empty()) throw std::invalid_argument("--lambdas must be non-empty");
        std::sort(lambdas.begin(), lambdas.end());
    }

    EvalSet ev;
    if (eval_path.empty()) {
        ev = default_eval_set(world);
    } else {
        json j = ibp::read_json(eval_path);
        ev.sources = j.at("sources").get<std::vector<std::string>>();
        ev.references = j.at("references").get<std::vector<std::string>>();
        if (ev.sources.size() != ev.references.size() || ev.sources.empty())
            throw std::invalid_argument("eval corpus: sources/references mismatch");
        mf.inputs.push_back(eval_path);
    }

    std::vector<ibp::TokenSeq> src_tokens, ref_tokens;
    for (const auto& s : ev.sources) src_tokens.push_back(ibp::label_tokens(s));
    for (const auto& r : ev.references) ref_tokens.push_back(ibp::label_tokens(r));

    std::ostringstream csv;
    csv.precision(17);
    csv << "lambda,i_xt,i_ty,bleu,self_bleu,ibleu\n";
    for (double lambda : lambdas) {
        ibp::TrainerConfig cfg;
        cfg.lambda = lambda;
        cfg.steps = steps;
        cfg.seed = seed;
        ibp::TrainState state = ibp::train(world, cfg);
        auto [i_xt, i_ty] = ibp::mi_report(world, state);

        std::vector<ibp::TokenSeq> cand_tokens;
        for (const auto& s : ev.sources) {
            ibp::ProbVector dist = ibp::paraphrase_dist_soft(world, state, s);
            cand_tokens.push_back(
                ibp::label_tokens(pick_candidate(dist, world.joint.x_index(s), self_margin)));
        }
        ibp::MetricReport rep = ibp::ibleu(cand_tokens, ref_tokens, src_tokens);
        csv << lambda << ',' << i_xt << ',' << i_ty << ',' << rep.bleu << ','
            << rep.self_bleu << ',' << rep.ibleu << '\n';
        log_info("lambda " + std::to_string(lambda) + " done");
    }
    ibp::write_file_atomic(out, csv.str());
    mf.outputs = {out};
    mf.write(out + ".manifest.json");
    return 0;
}

// ---- evaluate ----

int cmd_evaluate(const std::string& sources_path, const std::string& candidates_path,
                 const std::string& references_path, double alpha, const std::string& out) {
    ManifestWriter mf;
    mf.command = "evaluate";
    mf.config = json{{"sources", sources_path},
                     {"candidates", candidates_path},
                     {"references", references_path},
                     {"alpha", alpha}};
    mf.inputs = {sources_path, candidates_path, references_path};
    auto sources = load_token_file(sources_path);
    auto candidates = load_token_file(candidates_path);
    auto references = load_token_file(references_path);
    if (sources.size() != candidates.size() || candidates.size() != references.size())
        throw std::invalid_argument("evaluate: corpora lengths differ");

    ibp::MetricReport rep = ibp::ibleu(candidates, references, sources, alpha);
    json report{{"bleu", rep.bleu},
                {"self_bleu", rep.self_bleu},
                {"ibleu", rep.ibleu},
                {"alpha", rep.alpha}};
    ibp::write_file_atomic(out, report.dump(2) + "\n");
    mf.outputs = {out};
    mf.write(out + ".manifest.json");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"information-bottleneck paraphrase analysis over finite bilingual worlds"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // generate-world
    std::string gw_preset, gw_pairs, gw_out;
    std::size_t gw_ns = 4, gw_np = 6;
    double gw_conc = 1.0;
    std::uint64_t gw_seed = 0;
    auto* gw = app.add_subcommand("generate-world", "construct a toy bilingual world");
    gw->add_option("--preset", gw_preset, "named preset (confounder)");
    gw->add_option("--n-source", gw_ns);
    gw->add_option("--n-pivot", gw_np);
    gw->add_option("--ambiguity-pairs", gw_pairs, "comma list of a:b:pivot triples");
    gw->add_option("--concentration", gw_conc);
    gw->add_option("--seed", gw_seed);
    gw->add_option("--out", gw_out)->required();

    // roundtrip-analyze
    std::string rt_world, rt_mode = "all", rt_out;
    std::size_t rt_k = 1;
    double rt_thr = 0.4;
    auto* rt = app.add_subcommand("roundtrip-analyze", "round-trip MT similarity report");
    rt->add_option("--world", rt_world)->required();
    rt->add_option("--pivot-mode", rt_mode)->check(CLI::IsMember({"all", "topk"}));
    rt->add_option("--k", rt_k);
    rt->add_option("--confound-threshold", rt_thr);
    rt->add_option("--out", rt_out)->required();

    // ib-solve
    std::string ib_world, ib_method = "exhaustive", ib_out;
    double ib_eps = 0.0;
    std::size_t ib_clusters = 1;
    auto* ib = app.add_subcommand("ib-solve", "deterministic-partition IB solver");
    ib->add_option("--world", ib_world)->required();
    ib->add_option("--epsilon", ib_eps);
    ib->add_option("--method", ib_method)->check(CLI::IsMember({"exhaustive", "agglomerative"}));
    ib->add_option("--clusters", ib_clusters);
    ib->add_option("--out", ib_out)->required();

    // train
    std::string tr_world, tr_mode = "exact", tr_corpus, tr_out;
    ibp::TrainerConfig tr_cfg;
    auto* tr = app.add_subcommand("train", "adversarial tabular trainer");
    tr->add_option("--world", tr_world)->required();
    tr->add_option("--lambda", tr_cfg.lambda);
    tr->add_option("--k-frac", tr_cfg.k_frac);
    tr->add_option("--steps", tr_cfg.steps);
    tr->add_option("--lr", tr_cfg.lr);
    tr->add_option("--clusters", tr_cfg.n_clusters);
    tr->add_option("--batch-size", tr_cfg.batch_size);
    tr->add_option("--seed", tr_cfg.seed);
    tr->add_option("--mode", tr_mode)->check(CLI::IsMember({"exact", "sampled"}));
    tr->add_option("--corpus", tr_corpus);
    tr->add_option("--out", tr_out, "output prefix")->required();

    // tradeoff-curve
    std::string tc_world, tc_lambdas = "0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95", tc_eval,
                tc_out;
    std::size_t tc_steps = 20000;
    std::uint64_t tc_seed = 0;
    double tc_margin = 0.0;
    auto* tc = app.add_subcommand("tradeoff-curve", "lambda sweep with metric columns");
    tc->add_option("--world", tc_world)->required();
    tc->add_option("--lambdas", tc_lambdas);
    tc->add_option("--steps", tc_steps);
    tc->add_option("--seed", tc_seed);
    tc->add_option("--eval-corpus", tc_eval);
    tc->add_option("--self-margin", tc_margin);
    tc->add_option("--out", tc_out)->required();

    // evaluate
    std::string ev_src, ev_cand, ev_ref, ev_out;
    double ev_alpha = 0.7;
    auto* ev = app.add_subcommand("evaluate", "BLEU / self-BLEU / iBLEU report");
    ev->add_option("--sources", ev_src)->required();
    ev->add_option("--candidates", ev_cand)->required();
    ev->add_option("--references", ev_ref)->required();
    ev->add_option("--alpha", ev_alpha);
    ev->add_option("--out", ev_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (gw->parsed())
            return cmd_generate_world(gw_preset, gw_ns, gw_np, gw_pairs, gw_conc, gw_seed,
                                      gw_out);
        if (rt->parsed()) return cmd_roundtrip_analyze(rt_world, rt_mode, rt_k, rt_thr, rt_out);
        if (ib->parsed()) return cmd_ib_solve(ib_world, ib_eps, ib_method, ib_clusters, ib_out);
        if (tr->parsed()) return cmd_train(tr_world, tr_cfg, tr_mode, tr_corpus, tr_out);
        if (tc->parsed())
            return cmd_tradeoff_curve(tc_world, tc_lambdas, tc_steps, tc_seed, tc_eval,
                                      tc_margin, tc_out);
        if (ev->parsed()) return cmd_evaluate(ev_src, ev_cand, ev_ref, ev_alpha, ev_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
