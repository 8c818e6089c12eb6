// Command-line harness: dataset conversion and generation, training,
// evaluation, ablation runs, noise-robustness sweeps, and raw stream
// spectrum analysis. Exit codes: 0 success, 1 runtime failure, 2 usage
// error.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unidyg/io.hpp"
#include "unidyg/synth.hpp"
#include "unidyg/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace unidyg;

namespace {

struct CommonOpts {
    std::string input;
    std::string mode = "ctdg";
    std::string out_dir = "out";
    std::string attention = "fgat_n";
    std::string dynamics = "frequency";
    double theta = 0.2;
    std::size_t neighbors = 12;
    std::size_t batch = 600;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    std::size_t dim = 100;
    std::size_t time_dim = 100;
    std::size_t layers = 1;
    std::size_t epochs = 50;
    std::size_t patience = 5;
    std::size_t grad_chunk = 100;
    std::size_t mrr_negatives = 100;
};

void add_model_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--mode", o.mode, "stream type: ctdg | dtdg")
        ->check(CLI::IsMember({"ctdg", "dtdg"}));
    cmd->add_option("--attention", o.attention, "attention variant: fgat_n | fgat | gat")
        ->check(CLI::IsMember({"fgat_n", "fgat", "gat"}));
    cmd->add_option("--dynamics", o.dynamics, "state update: frequency | time-linear")
        ->check(CLI::IsMember({"frequency", "time-linear"}));
    cmd->add_option("--theta", o.theta, "energy-gate threshold");
    cmd->add_option("--neighbors", o.neighbors, "sampled neighbors per query");
    cmd->add_option("--batch", o.batch, "mini-batch size");
    cmd->add_option("--lr", o.lr, "learning rate");
    cmd->add_option("--seed", o.seed, "run seed");
    cmd->add_option("--dim", o.dim, "embedding/state dimension");
    cmd->add_option("--time-dim", o.time_dim, "time-encoding dimension");
    cmd->add_option("--layers", o.layers, "encoder layers");
    cmd->add_option("--epochs", o.epochs, "max training epochs");
    cmd->add_option("--patience", o.patience, "early-stopping patience");
    cmd->add_option("--chunk", o.grad_chunk, "events per gradient step");
    cmd->add_option("--mrr-negatives", o.mrr_negatives, "candidate-set size for MRR");
}

GraphMode parse_mode(const std::string& m) {
    return m == "dtdg" ? GraphMode::Dtdg : GraphMode::Ctdg;
}

AttentionKind parse_attention(const std::string& a) {
    if (a == "fgat") return AttentionKind::Fgat;
    if (a == "gat") return AttentionKind::Gat;
    return AttentionKind::FgatN;
}

std::vector<Event> load_events(const std::string& path, GraphMode mode) {
    if (mode == GraphMode::Dtdg) {
        // accept either the snapshot layout or an already-converted
        // unified stream whose timestamps are snapshot indices
        std::ifstream probe(path);
        std::string header;
        std::getline(probe, header);
        if (header.rfind("snapshot,", 0) == 0) return dtdg_to_events(load_dtdg_csv(path));
    }
    return load_ctdg_csv(path);
}

ModelConfig model_config(const CommonOpts& o, const std::vector<Event>& events) {
    ModelConfig mc;
    mc.mode = parse_mode(o.mode);
    mc.encoder.d = o.dim;
    mc.encoder.d_s = o.dim;
    mc.encoder.d_t = o.time_dim;
    mc.encoder.d_e = events.empty() ? 0 : events.front().features.size();
    mc.encoder.layers = o.layers;
    mc.encoder.n_neighbors = o.neighbors;
    mc.encoder.theta = o.theta;
    mc.encoder.attention = parse_attention(o.attention);
    mc.dynamics =
        o.dynamics == "time-linear" ? DynamicsKind::TimeLinear : DynamicsKind::Frequency;
    return mc;
}

TrainConfig train_config(const CommonOpts& o) {
    TrainConfig tc;
    tc.batch_size = o.batch;
    tc.lr = o.lr;
    tc.max_epochs = o.epochs;
    tc.patience = o.patience;
    tc.seed = o.seed;
    tc.grad_chunk = o.grad_chunk;
    tc.mrr_negatives = o.mrr_negatives;
    return tc;
}

json metrics_json(const EvalResult& r) {
    return json{{"auc", r.auc}, {"ap", r.ap}, {"mrr", r.mrr}};
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    std::uint64_t seed, const std::vector<std::string>& files) {
    json m;
    m["command"] = command;
    m["seed"] = seed;
    m["files"] = files;
    write_json((out_dir / "manifest.json").string(), m);
}

// One train + test run; shared by train / ablate / noise-sweep.
struct RunOutcome {
    TrainResult training;
    EvalResult test;
};

RunOutcome run_training(Model& model, const std::vector<Event>& events,
                        const CommonOpts& o, const std::string& log_path = "") {
    SplitConfig scfg;
    scfg.seed = o.seed;
    SplitResult split = chronological_split(events, scfg, model.cfg.mode);
    TrainConfig tc = train_config(o);
    tc.log_path = log_path;
    RunOutcome out;
    out.training = train(model, split, tc);
    out.test = evaluate_test(model, split, tc);
    return out;
}

// ------------------------------------------------------------------ convert

int cmd_convert(const CommonOpts& o, const std::string& generate,
                std::size_t synth_events) {
    fs::create_directories(o.out_dir);
    std::vector<Event> events;
    json sidecar;
    if (!generate.empty()) {
        if (generate == "ctdg") {
            SyntheticConfig cfg;
            cfg.n_events = synth_events;
            cfg.seed = o.seed;
            events = generate_synthetic_ctdg(cfg);
            sidecar["source"] = "synthetic-ctdg";
        } else {
            SnapshotSurrogateConfig cfg;
            cfg.seed = o.seed;
            events = dtdg_to_events(generate_snapshot_surrogate(cfg));
            sidecar["source"] = "synthetic-dtdg";
        }
    } else {
        events = load_events(o.input, parse_mode(o.mode));
        sidecar["source"] = o.input;
    }
    sidecar["mode"] = generate == "dtdg" ? "dtdg" : o.mode;
    sidecar["n_events"] = events.size();
    sidecar["n_nodes"] = node_universe(events).size();
    sidecar["seed"] = o.seed;
    if (sidecar["mode"] == "dtdg" || parse_mode(o.mode) == GraphMode::Dtdg) {
        std::vector<double> boundaries;
        for (const auto& e : events)
            if (boundaries.empty() || boundaries.back() != e.t) boundaries.push_back(e.t);
        sidecar["snapshots"] = boundaries;
    }
    const fs::path out = fs::path(o.out_dir) / "events.csv";
    write_events_csv(out.string(), events);
    write_json((fs::path(o.out_dir) / "events.json").string(), sidecar);
    write_manifest(o.out_dir, "convert", o.seed, {"events.csv", "events.json"});
    std::cout << "wrote " << events.size() << " events to " << out.string() << "\n";
    return 0;
}

// -------------------------------------------------------------------- train

int cmd_train(const CommonOpts& o) {
    fs::create_directories(o.out_dir);
    auto events = load_events(o.input, parse_mode(o.mode));
    Model model(model_config(o, events));
    model.init(o.seed);

    const std::string log_path = (fs::path(o.out_dir) / "metrics.jsonl").string();
    RunOutcome run = run_training(model, events, o, log_path);

    save_checkpoint((fs::path(o.out_dir) / "checkpoint.bin").string(),
                    model.parameters());
    json results;
    results["best_epoch"] = run.training.best_epoch;
    results["val"] = metrics_json(run.training.best_val);
    results["test"] = metrics_json(run.test);
    write_json((fs::path(o.out_dir) / "results.json").string(), results);
    write_manifest(o.out_dir, "train", o.seed,
                   {"checkpoint.bin", "metrics.jsonl", "results.json"});
    std::cout << results.dump(2) << "\n";
    return 0;
}

// --------------------------------------------------------------------- eval

int cmd_eval(const CommonOpts& o, const std::string& checkpoint) {
    fs::create_directories(o.out_dir);
    auto events = load_events(o.input, parse_mode(o.mode));
    Model model(model_config(o, events));
    load_checkpoint(checkpoint, model.parameters());

    SplitConfig scfg;
    scfg.seed = o.seed;
    SplitResult split = chronological_split(events, scfg, model.cfg.mode);
    EvalResult test = evaluate_test(model, split, train_config(o));

    json results;
    results["test"] = metrics_json(test);
    write_json((fs::path(o.out_dir) / "results.json").string(), results);
    write_manifest(o.out_dir, "eval", o.seed, {"results.json"});
    std::cout << results.dump(2) << "\n";
    return 0;
}

// ------------------------------------------------------------------- ablate

int cmd_ablate(const CommonOpts& o, std::size_t n_seeds) {
    fs::create_directories(o.out_dir);
    auto events = load_events(o.input, parse_mode(o.mode));

    struct Variant {
        std::string name, attention, dynamics;
    };
    const std::vector<Variant> variants{
        {"full", "fgat_n", "frequency"},
        {"w_fgat", "fgat", "frequency"},
        {"w_gat", "gat", "frequency"},
        {"time_linear", "fgat_n", "time-linear"},
    };

    std::ofstream csv(fs::path(o.out_dir) / "ablation.csv");
    csv << "variant,seed,auc,ap,mrr\n";
    csv.precision(10);
    for (const auto& v : variants) {
        for (std::size_t s = 0; s < n_seeds; ++s) {
            CommonOpts run_opts = o;
            run_opts.attention = v.attention;
            run_opts.dynamics = v.dynamics;
            run_opts.seed = o.seed + s;
            Model model(model_config(run_opts, events));
            model.init(run_opts.seed);
            RunOutcome run = run_training(model, events, run_opts);
            csv << v.name << "," << run_opts.seed << "," << run.test.auc << ","
                << run.test.ap << "," << run.test.mrr << "\n"
                << std::flush;
            std::cout << v.name << " seed " << run_opts.seed << " auc " << run.test.auc
                      << "\n";
        }
    }
    write_manifest(o.out_dir, "ablate", o.seed, {"ablation.csv"});
    return 0;
}

// --------------------------------------------------------------- noise-sweep

int cmd_noise_sweep(const CommonOpts& o, const std::vector<double>& levels,
                    std::size_t n_seeds) {
    fs::create_directories(o.out_dir);
    auto events = load_events(o.input, parse_mode(o.mode));

    std::ofstream csv(fs::path(o.out_dir) / "noise_sweep.csv");
    csv << "level,variant,seed,auc\n";
    csv.precision(10);
    for (double level : levels) {
        auto noisy = inject_noise(events, level, o.seed);
        for (const std::string& variant : {"fgat_n", "fgat", "gat"}) {
            for (std::size_t s = 0; s < n_seeds; ++s) {
                CommonOpts run_opts = o;
                run_opts.attention = variant;
                run_opts.seed = o.seed + s;
                Model model(model_config(run_opts, noisy));
                model.init(run_opts.seed);
                RunOutcome run = run_training(model, noisy, run_opts);
                csv << level << "," << variant << "," << run_opts.seed << ","
                    << run.test.auc << "\n"
                    << std::flush;
                std::cout << "level " << level << " " << variant << " seed "
                          << run_opts.seed << " auc " << run.test.auc << "\n";
            }
        }
    }
    write_manifest(o.out_dir, "noise-sweep", o.seed, {"noise_sweep.csv"});
    return 0;
}

// ----------------------------------------------------------------- spectrum

int cmd_spectrum(const CommonOpts& o, std::size_t window, std::size_t feature_index) {
    fs::create_directories(o.out_dir);
    auto events = load_events(o.input, parse_mode(o.mode));
    if (window > events.size())
        throw std::runtime_error("spectrum: window exceeds event count");
    auto spec = stream_spectrum(events, window);
    if (!spec.feature_amplitude.empty() && feature_index >= spec.feature_amplitude.size())
        throw std::runtime_error("spectrum: feature index out of range");

    std::ofstream csv(fs::path(o.out_dir) / "spectrum.csv");
    csv << "f,amp_feature,amp_interarrival\n";
    csv.precision(12);
    for (std::size_t f = 0; f < spec.window; ++f) {
        double feat_amp =
            spec.feature_amplitude.empty() ? 0.0 : spec.feature_amplitude[feature_index][f];
        csv << f << "," << feat_amp << "," << spec.gap_amplitude[f] << "\n";
    }
    write_manifest(o.out_dir, "spectrum", o.seed, {"spectrum.csv"});
    std::cout << "wrote spectrum over " << spec.window << " events\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unidyg: frequency-domain representation learning on dynamic graphs"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string generate;
    std::size_t synth_events = 5000;
    std::string checkpoint;
    std::size_t n_seeds = 5;
    std::vector<double> levels{0.0, 0.1, 0.2, 0.3, 0.4};
    std::size_t window = 400;
    std::size_t feature_index = 0;

    auto* convert = app.add_subcommand("convert", "convert or generate an event stream");
    convert->add_option("--input", o.input, "input CSV");
    convert->add_option("--mode", o.mode)->check(CLI::IsMember({"ctdg", "dtdg"}));
    convert->add_option("--generate", generate, "emit a synthetic stream: ctdg | dtdg")
        ->check(CLI::IsMember({"ctdg", "dtdg"}));
    convert->add_option("--events", synth_events, "synthetic event count");
    convert->add_option("--seed", o.seed);
    convert->add_option("--out", o.out_dir);

    auto* train_cmd = app.add_subcommand("train", "train a model");
    train_cmd->add_option("--input", o.input)->required();
    train_cmd->add_option("--out", o.out_dir);
    add_model_flags(train_cmd, o);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    eval_cmd->add_option("--input", o.input)->required();
    eval_cmd->add_option("--checkpoint", checkpoint)->required();
    eval_cmd->add_option("--out", o.out_dir);
    add_model_flags(eval_cmd, o);

    auto* ablate_cmd = app.add_subcommand("ablate", "run attention/dynamics ablations");
    ablate_cmd->add_option("--input", o.input)->required();
    ablate_cmd->add_option("--out", o.out_dir);
    ablate_cmd->add_option("--seeds", n_seeds, "seeds per variant");
    add_model_flags(ablate_cmd, o);

    auto* sweep_cmd = app.add_subcommand("noise-sweep", "robustness across noise levels");
    sweep_cmd->add_option("--input", o.input)->required();
    sweep_cmd->add_option("--out", o.out_dir);
    sweep_cmd->add_option("--levels", levels, "noise levels");
    sweep_cmd->add_option("--seeds", n_seeds, "seeds per cell");
    add_model_flags(sweep_cmd, o);

    auto* spectrum_cmd = app.add_subcommand("spectrum", "stream spectrum over a window");
    spectrum_cmd->add_option("--input", o.input)->required();
    spectrum_cmd->add_option("--out", o.out_dir);
    spectrum_cmd->add_option("--window", window, "leading events to analyze");
    spectrum_cmd->add_option("--feature-index", feature_index, "feature channel");
    spectrum_cmd->add_option("--mode", o.mode)->check(CLI::IsMember({"ctdg", "dtdg"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (convert->parsed()) {
            if (generate.empty() == o.input.empty()) {
                std::cerr << "convert: give exactly one of --input or --generate\n";
                return 2;
            }
            return cmd_convert(o, generate, synth_events);
        }
        if (train_cmd->parsed()) return cmd_train(o);
        if (eval_cmd->parsed()) return cmd_eval(o, checkpoint);
        if (ablate_cmd->parsed()) return cmd_ablate(o, n_seeds);
        if (sweep_cmd->parsed()) return cmd_noise_sweep(o, levels, n_seeds);
        if (spectrum_cmd->parsed()) return cmd_spectrum(o, window, feature_index);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
