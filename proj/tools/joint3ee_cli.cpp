#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "joint3ee/joint3ee.hpp"

using namespace joint3ee;

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kIo = 2, kSchema = 3, kDiagnostic = 4 };

struct TrainArgs {
    std::string train_path;
    std::string dev_path;
    std::string out_path;
    std::string config_path;
    std::string pretrained_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs, batch_size, embed_dim, hidden_dim, ff_hidden, bij_width;
    std::optional<int> window;
    std::optional<double> alpha, beta, gamma, dropout;
    bool ablate = false;
    bool literal = false;
};

struct EvalArgs {
    std::string model_path;
    std::string corpus_path;
    bool as_json = false;
    bool errors = false;
};

struct PredictArgs {
    std::string model_path;
    std::string corpus_path;
    std::string out_path;
};

struct GenerateArgs {
    SyntheticSpec spec;
    bool no_linguistic = false;
    std::string out_path;
};

struct DiagArgs {
    std::string mode;
    double tolerance = 1e-4;
    std::size_t sample = 0;
    double bias = 0.0;
    std::size_t trials = 100;
    std::size_t validity_trials = 10000;
    std::uint64_t seed = 1;
};

void log(const std::string& msg) { std::cerr << msg << '\n'; }

std::vector<Sentence> load_nonempty(const std::string& path, const LoadOptions& options = {}) {
    std::vector<std::string> warnings;
    LoadOptions opts = options;
    opts.warnings = &warnings;
    auto corpus = load_corpus(path, opts);
    for (const auto& w : warnings) log("warning: " + path + ": " + w);
    if (corpus.empty()) throw IoError("corpus '" + path + "' is empty");
    log("loaded " + std::to_string(corpus.size()) + " sentences from " + path);
    return corpus;
}

json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& ex) {
        throw ParseError("config '" + path + "': " + ex.what());
    }
}

template <typename T, typename U>
void override_with(T& field, const std::optional<U>& value) {
    if (value) field = static_cast<T>(*value);
}

int run_train(const TrainArgs& a) {
    ModelConfig mc;
    TrainConfig tc;
    if (!a.config_path.empty()) {
        const json cfg = read_config(a.config_path);
        if (cfg.contains("model")) mc = ModelConfig::from_json(cfg["model"]);
        if (cfg.contains("train")) tc = TrainConfig::from_json(cfg["train"]);
    }
    override_with(tc.seed, a.seed);
    override_with(tc.epochs, a.epochs);
    override_with(tc.batch_size, a.batch_size);
    override_with(tc.weights.alpha, a.alpha);
    override_with(tc.weights.beta, a.beta);
    override_with(tc.weights.gamma, a.gamma);
    override_with(tc.dropout, a.dropout);
    override_with(mc.embed_dim, a.embed_dim);
    override_with(mc.hidden_dim, a.hidden_dim);
    override_with(mc.ff_hidden, a.ff_hidden);
    override_with(mc.bij_width, a.bij_width);
    override_with(mc.window, a.window);
    if (a.ablate) mc.external_features = false;
    if (a.literal) mc.literal_indexing = true;
    tc.validate();

    const auto corpus = load_nonempty(a.train_path);
    const ModelInputs inputs = fit_inputs(corpus, mc);
    std::vector<Sentence> dev;
    if (!a.dev_path.empty()) dev = load_nonempty(a.dev_path, {&inputs.schema, nullptr});

    Rng init_rng(tc.seed);
    std::optional<EmbeddingTable> embeddings;
    if (!a.pretrained_path.empty()) {
        embeddings = load_pretrained(a.pretrained_path, inputs.vocab, mc.embed_dim, init_rng);
        log("pretrained vectors cover " + std::to_string(embeddings->pretrained_rows) + " of " +
            std::to_string(inputs.vocab.size()) + " words");
    }
    JointModel model(inputs.schema, inputs.vocab, inputs.features, mc, init_rng, std::move(embeddings));
    log("input width " + std::to_string(model.input_width()) + ", ARP input width " +
        std::to_string(model.arp_layout().width()) + ", " + std::to_string(model.parameters().size()) +
        " parameter tensors");

    ParameterSnapshot best;
    double best_score = -1.0;
    std::size_t best_epoch = 0;
    TrainHooks hooks;
    hooks.after_epoch = [&](const EpochLog& e) {
        std::cout << "epoch " << e.epoch << " C* " << e.mean_loss;
        if (!dev.empty()) {
            const auto report = score(predict_corpus(model, dev), dev);
            const double sel = selection_score(report);
            std::cout << " dev_entity_f1 " << report.entity.f1() << " dev_trigger_f1 "
                      << report.trigger_classification.f1() << " dev_role_f1 " << report.role_classification.f1();
            if (sel > best_score) {
                best_score = sel;
                best_epoch = e.epoch;
                best = ParameterSnapshot(model.parameters());
            }
        }
        std::cout << std::endl;
        return true;
    };
    train(model, corpus, tc, hooks);
    if (!best.empty()) {
        auto params = model.parameters();
        best.restore(params);
        log("selected epoch " + std::to_string(best_epoch) + " (dev score " + std::to_string(best_score) + ")");
    }
    save_checkpoint(a.out_path, model, tc);
    log("wrote " + a.out_path);
    return kOk;
}

int run_eval(const EvalArgs& a) {
    const Checkpoint ck = load_checkpoint(a.model_path);
    const auto corpus = load_nonempty(a.corpus_path, {&ck.model.schema(), nullptr});
    const auto preds = predict_corpus(ck.model, corpus);
    const EvalReport report = score(preds, corpus);
    if (a.as_json) {
        json out = report_to_json(report);
        if (a.errors) {
            const ErrorReport err = error_report(preds, corpus);
            json missed = json::object(), incorrect = json::object();
            for (const auto& s : err.missed) missed[s.label] = s.percent;
            for (const auto& s : err.incorrect) incorrect[s.label] = s.percent;
            out["MISSED"] = missed;
            out["INCORRECT"] = incorrect;
        }
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << format_report(report);
        if (a.errors) std::cout << '\n' << format_errors(error_report(preds, corpus));
    }
    return kOk;
}

int run_predict(const PredictArgs& a) {
    const Checkpoint ck = load_checkpoint(a.model_path);
    std::vector<std::string> warnings;
    const auto corpus = load_corpus(a.corpus_path, {nullptr, &warnings});
    for (const auto& w : warnings) log("warning: " + w);
    const auto preds = predict_corpus(ck.model, corpus);
    if (a.out_path.empty()) {
        write_corpus(std::cout, preds);
    } else {
        save_corpus(a.out_path, preds);
        log("wrote " + std::to_string(preds.size()) + " predictions to " + a.out_path);
    }
    return kOk;
}

int run_generate(GenerateArgs a) {
    a.spec.with_linguistic = !a.no_linguistic;
    const auto corpus = generate_synthetic_corpus(a.spec);
    if (a.out_path.empty()) {
        write_corpus(std::cout, corpus);
    } else {
        save_corpus(a.out_path, corpus);
        log("wrote " + std::to_string(corpus.size()) + " sentences to " + a.out_path);
    }
    return kOk;
}

int run_diag(const DiagArgs& a) {
    if (a.mode == "gradcheck") {
        GradCheckOptions opts;
        opts.max_coordinates_per_parameter = a.sample;
        opts.analytic_bias = a.bias;
        opts.sampling_seed = a.seed;
        const GradCheckResult r = run_gradient_suite(opts);
        bool ok = true;
        for (const auto& [name, err] : r.per_parameter) {
            const bool pass = err < a.tolerance;
            ok = ok && pass;
            std::cout << (pass ? "ok   " : "FAIL ") << name << " max_rel_err " << err << '\n';
        }
        std::cout << (ok ? "PASS" : "FAIL") << " gradcheck: " << r.coordinates_checked
                  << " coordinates, max relative error " << r.max_relative_error << " at " << r.worst_parameter
                  << '[' << r.worst_index << "]\n";
        return ok ? kOk : kDiagnostic;
    }
    const ViterbiOracleResult r = run_viterbi_oracle(a.trials, a.validity_trials, a.seed);
    for (const auto& f : r.failures) std::cout << "FAIL " << f << '\n';
    std::cout << (r.passed() ? "PASS" : "FAIL") << " viterbi-oracle: " << (r.instances - r.mismatches) << '/'
              << r.instances << " match exhaustive search, " << r.violations << " forbidden transitions in "
              << r.validity_instances << " instances\n";
    return r.passed() ? kOk : kDiagnostic;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint entity mention, event trigger and argument role extraction"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Train a model and write the dev-best checkpoint");
    train_cmd->add_option("--train", ta.train_path, "Training corpus (JSON lines)")->required();
    train_cmd->add_option("--dev", ta.dev_path, "Development corpus used for model selection");
    train_cmd->add_option("-o,--out", ta.out_path, "Checkpoint to write")->required();
    train_cmd->add_option("--config", ta.config_path, "JSON file with \"model\" and \"train\" sections");
    train_cmd->add_option("--pretrained", ta.pretrained_path, "Text embedding file: word v1 ... vd per line");
    train_cmd->add_option("--seed", ta.seed, "Seed for initialization, shuffling and dropout");
    train_cmd->add_option("--epochs", ta.epochs);
    train_cmd->add_option("--batch-size", ta.batch_size);
    train_cmd->add_option("--alpha", ta.alpha, "Weight of the entity mention loss");
    train_cmd->add_option("--beta", ta.beta, "Weight of the trigger loss");
    train_cmd->add_option("--gamma", ta.gamma, "Weight of the argument role loss");
    train_cmd->add_option("--dropout", ta.dropout);
    train_cmd->add_option("--embed-dim", ta.embed_dim);
    train_cmd->add_option("--hidden-dim", ta.hidden_dim);
    train_cmd->add_option("--ff-hidden", ta.ff_hidden);
    train_cmd->add_option("--bij-width", ta.bij_width, "Width of the hashed pair feature block");
    train_cmd->add_option("--u", ta.window, "Local context window size");
    train_cmd->add_flag("--ablate-external-features", ta.ablate,
                        "Drop POS/chunk/dependency inputs and the pair feature block");
    train_cmd->add_flag("--literal-indexing", ta.literal,
                        "Use the entity label of the trigger and event label of the argument token");

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on an annotated corpus");
    eval_cmd->add_option("-m,--model", ea.model_path)->required();
    eval_cmd->add_option("--corpus", ea.corpus_path)->required();
    eval_cmd->add_flag("--json", ea.as_json, "Machine-readable report");
    eval_cmd->add_flag("--errors", ea.errors, "Append MISSED/INCORRECT trigger analysis");

    PredictArgs pa;
    auto* predict_cmd = app.add_subcommand("predict", "Extract entities and events; writes JSON lines");
    predict_cmd->add_option("-m,--model", pa.model_path)->required();
    predict_cmd->add_option("--corpus", pa.corpus_path)->required();
    predict_cmd->add_option("-o,--out", pa.out_path, "Output file (default: standard output)");

    GenerateArgs ga;
    auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic annotated corpus");
    gen_cmd->add_option("--sentences", ga.spec.sentences)->capture_default_str();
    gen_cmd->add_option("--seed", ga.spec.seed)->capture_default_str();
    gen_cmd->add_option("--ambiguity", ga.spec.ambiguity, "Rate of context-dependent trigger words")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    gen_cmd->add_flag("--no-linguistic", ga.no_linguistic, "Omit POS, chunk and dependency layers");
    gen_cmd->add_option("-o,--out", ga.out_path, "Output file (default: standard output)");

    DiagArgs da;
    auto* diag_cmd = app.add_subcommand("diag", "Run the gradient or Viterbi self-checks");
    diag_cmd->add_option("mode", da.mode)->required()->check(CLI::IsMember({"gradcheck", "viterbi-oracle"}));
    diag_cmd->add_option("--tolerance", da.tolerance)->capture_default_str();
    diag_cmd->add_option("--sample", da.sample, "Coordinates sampled per parameter (0 = all)")
        ->capture_default_str();
    diag_cmd->add_option("--inject-gradient-bias", da.bias, "Corrupt analytic gradients (negative control)");
    diag_cmd->add_option("--trials", da.trials)->capture_default_str();
    diag_cmd->add_option("--validity-trials", da.validity_trials)->capture_default_str();
    diag_cmd->add_option("--seed", da.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kFailure;
    }

    try {
        if (*train_cmd) return run_train(ta);
        if (*eval_cmd) return run_eval(ea);
        if (*predict_cmd) return run_predict(pa);
        if (*gen_cmd) return run_generate(ga);
        if (*diag_cmd) return run_diag(da);
    } catch (const SchemaError& ex) {
        log(std::string("error: schema mismatch: ") + ex.what());
        return kSchema;
    } catch (const IoError& ex) {
        log(std::string("error: ") + ex.what());
        return kIo;
    } catch (const ParseError& ex) {
        log(std::string("error: ") + ex.what());
        return kIo;
    } catch (const AnnotationError& ex) {
        log(std::string("error: ") + ex.what());
        return kIo;
    } catch (const std::exception& ex) {
        log(std::string("error: ") + ex.what());
        return kFailure;
    }
    return kFailure;
}
