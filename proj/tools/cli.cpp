#include "cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "procex/errors.hpp"
#include "procex/evaluation.hpp"
#include "procex/explainer.hpp"
#include "procex/features.hpp"
#include "procex/predictor.hpp"
#include "procex/process_model.hpp"
#include "procex/simulation.hpp"

namespace procex::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    bool quiet = false;

    std::string process;
    std::string out;
    std::uint64_t seed = 42;

    // simulate
    std::int64_t n_cases = 0;
    double noise = 0.0;
    std::vector<std::string> dists;

    // import
    std::string csv;
    std::string attr_columns;
    std::string label_column = "label";
    std::string case_column = "case_id";
    std::string activity_column = "activity";
    std::string positive_value = "POSITIVE";
    std::string negative_value = "NEGATIVE";
    std::string process_name = "imported";

    // train
    std::string log;
    Hyperparams hp;
    double split = 0.2;

    // explain
    std::string model;
    std::string case_id;
    std::string attrs;
    std::string mode = "vanilla";
    std::string strategy = "propagate";
    std::size_t samples = 5000;
    double spread = 1.0;
    double flip_p = 0.5;
    std::optional<double> kernel_width;
    double ridge_lambda = 1.0;
    bool collapse_derived = false;
    std::size_t top = 0;

    // evaluate
    std::size_t instances = 20;
    std::string seeds = "1,2,3,4,5";
    std::string figdata;
    std::string label_filter = "NEGATIVE";
    std::string required_activity = "skilled_agent_review";
    bool no_collapsed = false;
};

struct Application {
    CLI::App app{"Process-aware local explanations for outcome predictions.", "procex"};
    Options opt;
    std::map<std::string, CLI::App*> commands;
};

const CLI::Validator kProbability = CLI::Range(0.0, 1.0, "PROB");
const CLI::Validator kNoise = CLI::Range(0.0, 0.5, "NOISE");
const CLI::Validator kNonNegative(
    [](std::string& v) { return v.starts_with('-') ? std::string("must be non-negative") : std::string(); },
    "NONNEGATIVE");

void add_process(CLI::App* sub, Options& o) {
    sub->add_option("process", o.process, "Process definition file (.bp)")->required();
}

void add_explain_tuning(CLI::App* sub, Options& o) {
    sub->add_option("--strategy", o.strategy, "Process-aware constraint strategy")
        ->check(CLI::IsMember({"propagate", "reject"}))
        ->capture_default_str();
    sub->add_option("--samples", o.samples, "Perturbation samples per explanation, instance included")
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max(), "AT_LEAST_2"))
        ->capture_default_str();
    sub->add_option("--spread", o.spread, "Numeric perturbation scale in feature standard deviations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--flip-p", o.flip_p, "Vanilla indicator flip probability")->check(kProbability)->capture_default_str();
    sub->add_option("--kernel-width", o.kernel_width, "Kernel width (default 0.75*sqrt(arity))")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", o.ridge_lambda, "Surrogate ridge penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
}

std::unique_ptr<Application> build_app() {
    auto a = std::make_unique<Application>();
    CLI::App& app = a->app;
    Options& o = a->opt;
    app.get_formatter()->column_width(34);
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("-q,--quiet", o.quiet, "Suppress progress messages on stderr");

    CLI::App* sub = app.add_subcommand("validate", "Check a process definition and print its findings");
    add_process(sub, o);
    a->commands["validate"] = sub;

    sub = app.add_subcommand("causal-graph", "Print the attribute-to-activity causality edges as JSON");
    add_process(sub, o);
    sub->add_option("--out", o.out, "Also write the JSON to this file");
    a->commands["causal-graph"] = sub;

    sub = app.add_subcommand("simulate", "Generate a labelled event log from a process definition");
    add_process(sub, o);
    sub->add_option("--n", o.n_cases, "Number of cases")->required()->check(kNonNegative);
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_option("--out", o.out, "Output JSONL file (stdout when omitted)");
    sub->add_option("--noise", o.noise, "Label flip probability, at most 0.5")->check(kNoise)->capture_default_str();
    sub->add_option("--dist", o.dists, "Attribute distribution, name=uniform or name=tnormal:MEAN:STD (repeatable)");
    a->commands["simulate"] = sub;

    sub = app.add_subcommand("import", "Convert an event CSV (one row per event) to JSONL");
    sub->add_option("--csv", o.csv, "Input CSV file")->required();
    sub->add_option("--attrs", o.attr_columns, "Comma-separated attribute columns")->required();
    sub->add_option("--label", o.label_column, "Label column")->capture_default_str();
    sub->add_option("--case-col", o.case_column, "Case id column")->capture_default_str();
    sub->add_option("--activity-col", o.activity_column, "Activity column")->capture_default_str();
    sub->add_option("--positive", o.positive_value, "Label value read as POSITIVE")->capture_default_str();
    sub->add_option("--negative", o.negative_value, "Label value read as NEGATIVE")->capture_default_str();
    sub->add_option("--process-name", o.process_name, "Process name recorded in the log")->capture_default_str();
    sub->add_option("--out", o.out, "Output JSONL file (stdout when omitted)");
    a->commands["import"] = sub;

    sub = app.add_subcommand("train", "Fit the logistic outcome predictor and print held-out metrics");
    add_process(sub, o);
    sub->add_option("--log", o.log, "Training event log (JSONL)")->required();
    sub->add_option("--out", o.out, "Output model JSON file")->required();
    sub->add_option("--lr", o.hp.learning_rate, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--l2", o.hp.l2, "L2 penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--epochs", o.hp.epochs, "Maximum gradient steps")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--tol", o.hp.tol, "Stop once max |gradient| falls below this")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--split", o.split, "Held-out fraction")->check(CLI::Range(0.0, 1.0, "[0, 1)"))->capture_default_str();
    sub->add_option("--seed", o.hp.seed, "Split seed")->capture_default_str();
    a->commands["train"] = sub;

    sub = app.add_subcommand("explain", "Explain one prediction and print the explanation JSON");
    add_process(sub, o);
    sub->add_option("--model", o.model, "Model JSON file")->required();
    auto* case_opt = sub->add_option("--case-id", o.case_id, "Explain this case from --log");
    sub->add_option("--log", o.log, "Event log holding --case-id")->needs(case_opt);
    auto* attrs_opt = sub->add_option("--attrs", o.attrs, "Hypothetical case, k=v,... over every attribute");
    case_opt->excludes(attrs_opt);
    sub->add_option("--mode", o.mode, "Sampling mode")
        ->check(CLI::IsMember({"vanilla", "process-aware"}))
        ->capture_default_str();
    add_explain_tuning(sub, o);
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_flag("--collapse-derived", o.collapse_derived, "Process-aware only: drop indicator columns from the surrogate");
    sub->add_option("--top", o.top, "Keep only the k strongest attributions (0 keeps all)")->capture_default_str();
    sub->add_option("--out", o.out, "Also write the JSON to this file");
    a->commands["explain"] = sub;

    sub = app.add_subcommand("evaluate", "Run the vanilla vs process-aware comparison experiment");
    add_process(sub, o);
    sub->add_option("--model", o.model, "Model JSON file")->required();
    sub->add_option("--log", o.log, "Event log to draw instances from")->required();
    sub->add_option("--instances", o.instances, "Number of instances")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seeds", o.seeds, "Comma-separated explainer seeds")->capture_default_str();
    sub->add_option("--out", o.out, "Report JSON file")->required();
    sub->add_option("--figdata", o.figdata, "Figure CSV (default: figdata.csv beside --out)");
    sub->add_option("--label", o.label_filter, "Instance label filter: NEGATIVE, POSITIVE or any")
        ->check(CLI::IsMember({"NEGATIVE", "POSITIVE", "any"}))
        ->capture_default_str();
    sub->add_option("--require-activity", o.required_activity, "Instances must contain this activity (empty: no filter)")
        ->capture_default_str();
    sub->add_flag("--no-collapsed", o.no_collapsed, "Skip the collapsed process-aware variant");
    add_explain_tuning(sub, o);
    a->commands["evaluate"] = sub;

    return a;
}

// -- helpers ------------------------------------------------------------------

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (item.empty()) throw UsageError("empty item in list '" + text + "'");
        out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw UsageError("bad number '" + text + "' in " + what);
    return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw UsageError("bad integer '" + text + "' in " + what);
    return v;
}

std::map<std::string, AttributeDistribution> parse_distributions(const std::vector<std::string>& specs) {
    std::map<std::string, AttributeDistribution> out;
    for (const auto& spec : specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--dist expects name=uniform|tnormal:MEAN:STD");
        std::string name = spec.substr(0, eq), body = spec.substr(eq + 1);
        AttributeDistribution d;
        if (body.rfind("tnormal:", 0) == 0) {
            std::string rest = body.substr(8);
            auto colon = rest.find(':');
            if (colon == std::string::npos) throw UsageError("--dist expects tnormal:MEAN:STD");
            d.kind = AttributeDistribution::Kind::TruncatedNormal;
            d.mean = parse_double(rest.substr(0, colon), "--dist");
            d.stddev = parse_double(rest.substr(colon + 1), "--dist");
            if (!(d.stddev > 0.0)) throw UsageError("--dist standard deviation must be positive");
        } else if (body != "uniform") {
            throw UsageError("unknown distribution '" + body + "'");
        }
        out[name] = d;
    }
    return out;
}

AttributeAssignment parse_assignment(const std::string& text) {
    AttributeAssignment attrs;
    for (const auto& item : split_list(text)) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--attrs expects k=v,...");
        attrs[item.substr(0, eq)] = parse_double(item.substr(eq + 1), "--attrs");
    }
    return attrs;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + path);
    f << content;
    if (!f) throw Error(ErrorKind::IoError, "write failed for " + path);
}

/// Sidecar `<path>.meta.json` echoing the command and every option value.
void write_config_echo(const std::string& path, const CLI::App& sub) {
    ordered_json j;
    j["command"] = sub.get_name();
    ordered_json options = ordered_json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_name() == "--help") continue;
        std::string name = opt->get_name();
        if (opt->count() > 0) {
            const auto& results = opt->results();
            if (opt->get_expected_max() > 1 || results.size() > 1) options[name] = results;
            else options[name] = results.empty() ? std::string("true") : results.front();
        } else {
            options[name] = opt->get_default_str();
        }
    }
    j["options"] = std::move(options);
    write_file(path + ".meta.json", j.dump(2) + "\n");
}

class Logger {
public:
    Logger(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
    void info(const std::string& msg) const {
        if (!quiet_) err_ << "procex: " << msg << '\n';
    }

private:
    std::ostream& err_;
    bool quiet_;
};

// -- commands -----------------------------------------------------------------

int cmd_validate(const Options& o, std::ostream& out) {
    std::ifstream f(o.process, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot read " + o.process);
    std::stringstream buf;
    buf << f.rdbuf();
    ValidationReport report = validate(parse_process_unchecked(buf.str()));
    if (report.ok()) {
        out << "no findings\n";
        return kExitOk;
    }
    for (const auto& finding : report.findings)
        out << to_string(finding.rule) << ' ' << finding.subject << ": " << finding.message << '\n';
    return kExitDomainError;
}

int cmd_causal_graph(const Options& o, const CLI::App& sub, std::ostream& out) {
    ProcessDefinition def = load_process_file(o.process);
    CausalityGraph graph = derive_causality_graph(def);
    ordered_json j;
    j["process"] = def.name;
    ordered_json edges = ordered_json::array();
    for (const auto& e : graph.edges) edges.push_back({{"source", e.source}, {"target", e.target}});
    j["edges"] = std::move(edges);
    std::string text = j.dump(2) + "\n";
    out << text;
    if (!o.out.empty()) {
        write_file(o.out, text);
        write_config_echo(o.out, sub);
    }
    return kExitOk;
}

int cmd_simulate(const Options& o, const CLI::App& sub, std::ostream& out, const Logger& log) {
    ProcessDefinition def = load_process_file(o.process);
    SimulationConfig config;
    config.distributions = parse_distributions(o.dists);
    for (const auto& [name, d] : config.distributions)
        if (!def.find_attribute(name)) throw Error(ErrorKind::UnknownAttribute, "--dist names " + name);
    config.label_noise = o.noise;
    config.n_cases = static_cast<std::uint64_t>(o.n_cases);
    config.seed = o.seed;
    EventLog result = generate_log(def, config);
    for (const auto& w : result.warnings) log.info("warning: " + w);
    if (o.out.empty()) {
        write_jsonl(result, out);
        return kExitOk;
    }
    write_file(o.out, to_jsonl(result));
    write_config_echo(o.out, sub);
    log.info("wrote " + std::to_string(result.traces.size()) + " traces to " + o.out);
    return kExitOk;
}

int cmd_import(const Options& o, const CLI::App& sub, std::ostream& out, const Logger& log) {
    CsvImportOptions options;
    options.attribute_columns = split_list(o.attr_columns);
    options.label_column = o.label_column;
    options.case_column = o.case_column;
    options.activity_column = o.activity_column;
    options.positive_value = o.positive_value;
    options.negative_value = o.negative_value;
    options.process_name = o.process_name;
    EventLog result = import_log_csv(o.csv, options);
    for (const auto& w : result.warnings) log.info("warning: " + w);
    if (o.out.empty()) {
        write_jsonl(result, out);
        return kExitOk;
    }
    write_file(o.out, to_jsonl(result));
    write_config_echo(o.out, sub);
    log.info("imported " + std::to_string(result.traces.size()) + " traces to " + o.out);
    return kExitOk;
}

ordered_json metrics_json(const Metrics& m) {
    return {{"n", m.n},
            {"accuracy", m.accuracy},
            {"auc", m.auc},
            {"true_positive", m.true_positive},
            {"false_positive", m.false_positive},
            {"true_negative", m.true_negative},
            {"false_negative", m.false_negative}};
}

int cmd_train(const Options& o, const CLI::App& sub, std::ostream& out, const Logger& log) {
    if (o.split >= 1.0) throw UsageError("--split must be below 1");
    ProcessDefinition def = load_process_file(o.process);
    EventLog data = read_jsonl_file(o.log, def.name);
    FeatureSchema schema = build_schema(def);
    auto [train_part, test_part] = split_log(data, o.split, o.hp.seed);
    log.info("training on " + std::to_string(train_part.traces.size()) + " traces");
    LogisticModel model = train(train_part, schema, o.hp);
    save_model(model, o.out);
    write_config_echo(o.out, sub);

    ordered_json j;
    j["n_train"] = train_part.traces.size();
    j["n_test"] = test_part.traces.size();
    j["train"] = metrics_json(evaluate(model, train_part));
    j["test"] = test_part.traces.empty() ? ordered_json(nullptr) : metrics_json(evaluate(model, test_part));
    j["epochs_run"] = model.train_meta.epochs_run;
    j["converged"] = model.train_meta.converged;
    j["final_loss"] = model.train_meta.final_loss;
    out << j.dump(2) << '\n';
    return kExitOk;
}

ExplainConfig explain_config(const Options& o) {
    ExplainConfig c;
    c.strategy = o.strategy == "reject" ? ConstraintStrategy::Reject : ConstraintStrategy::Propagate;
    c.n_samples = o.samples;
    c.spread = o.spread;
    c.flip_p = o.flip_p;
    c.kernel_width = o.kernel_width;
    c.ridge_lambda = o.ridge_lambda;
    return c;
}

int cmd_explain(const Options& o, const CLI::App& sub, std::ostream& out) {
    if (o.case_id.empty() == o.attrs.empty()) throw UsageError("give exactly one of --case-id or --attrs");
    if (!o.case_id.empty() && o.log.empty()) throw UsageError("--case-id requires --log");
    AttributeAssignment attrs;
    if (!o.attrs.empty()) attrs = parse_assignment(o.attrs);
    ProcessDefinition def = load_process_file(o.process);
    LogisticModel model = load_model(o.model, def);
    const FeatureSchema& schema = model.schema();
    if (o.top > schema.arity())
        throw UsageError("--top exceeds the feature count " + std::to_string(schema.arity()));

    FeatureVector instance;
    std::string instance_id;
    if (!o.case_id.empty()) {
        EventLog data = read_jsonl_file(o.log, def.name);
        auto it = std::find_if(data.traces.begin(), data.traces.end(),
                               [&](const Trace& t) { return t.case_id == o.case_id; });
        if (it == data.traces.end()) throw Error(ErrorKind::NoMatchingInstances, "no case " + o.case_id + " in " + o.log);
        instance = encode_trace(schema, *it);
        instance_id = o.case_id;
    } else {
        for (const auto& [name, v] : attrs)
            if (!def.find_attribute(name)) throw Error(ErrorKind::UnknownAttribute, "--attrs names " + name);
        instance = synthesize_instance(def, schema, attrs, o.seed);
        instance_id = "hypothetical";
    }

    ExplainConfig c = explain_config(o);
    c.mode = o.mode == "process-aware" ? SamplingMode::ProcessAware : SamplingMode::Vanilla;
    c.seed = o.seed;
    c.collapse_derived = o.collapse_derived;
    Explanation e = explain(model, def, instance, c, instance_id);
    std::string text = explanation_to_json(e, o.top > 0 ? std::optional<std::size_t>(o.top) : std::nullopt);
    out << text;
    if (!o.out.empty()) {
        write_file(o.out, text);
        write_config_echo(o.out, sub);
    }
    return kExitOk;
}

std::string sibling_path(const std::string& path, const std::string& file) {
    auto slash = path.find_last_of('/');
    return slash == std::string::npos ? file : path.substr(0, slash + 1) + file;
}

int cmd_evaluate(const Options& o, const CLI::App& sub, std::ostream& out, const Logger& log) {
    ExperimentConfig config;
    config.n_instances = o.instances;
    config.seeds.clear();
    for (const auto& s : split_list(o.seeds)) config.seeds.push_back(parse_u64(s, "--seeds"));
    if (o.label_filter == "any") config.label.reset();
    else config.label = parse_label(o.label_filter);
    if (o.required_activity.empty()) config.required_activity.reset();
    else config.required_activity = o.required_activity;
    config.include_collapsed = !o.no_collapsed;
    config.explain = explain_config(o);

    ProcessDefinition def = load_process_file(o.process);
    LogisticModel model = load_model(o.model, def);
    EventLog data = read_jsonl_file(o.log, def.name);
    log.info("explaining up to " + std::to_string(config.n_instances) + " instances under " +
             std::to_string(config.seeds.size()) + " seeds");
    ExperimentReport report = run_comparison(def, model, data, config);
    write_file(o.out, report_to_json(report));
    write_config_echo(o.out, sub);
    std::string figdata = o.figdata.empty() ? sibling_path(o.out, "figdata.csv") : o.figdata;
    write_file(figdata, figure_data_csv(report));
    write_config_echo(figdata, sub);
    log.info("wrote " + o.out + " and " + figdata);
    out << aggregates_to_json(report.aggregates);
    return kExitOk;
}

int run(Application& a, std::ostream& out, std::ostream& err) {
    const Options& o = a.opt;
    Logger log(err, o.quiet);
    for (const auto& [name, sub] : a.commands) {
        if (!sub->parsed()) continue;
        if (name == "validate") return cmd_validate(o, out);
        if (name == "causal-graph") return cmd_causal_graph(o, *sub, out);
        if (name == "simulate") return cmd_simulate(o, *sub, out, log);
        if (name == "import") return cmd_import(o, *sub, out, log);
        if (name == "train") return cmd_train(o, *sub, out, log);
        if (name == "explain") return cmd_explain(o, *sub, out);
        if (name == "evaluate") return cmd_evaluate(o, *sub, out, log);
    }
    throw UsageError("a subcommand is required");
}

std::string first_line(const std::string& text) {
    auto nl = text.find('\n');
    return nl == std::string::npos ? text : text.substr(0, nl);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto a = build_app();
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        a->app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << a->app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << a->app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "procex: usage error: " << first_line(e.what()) << '\n';
        return kExitUsageError;
    }
    try {
        return run(*a, out, err);
    } catch (const UsageError& e) {
        err << "procex: usage error: " << first_line(e.what()) << '\n';
        return kExitUsageError;
    } catch (const Error& e) {
        err << "procex: " << e.what() << '\n';
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "procex: " << to_string(ErrorKind::IoError) << ": " << e.what() << '\n';
        return kExitDomainError;
    }
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, out, err);
}

std::string help_text(std::string_view subcommand) {
    auto a = build_app();
    if (subcommand.empty()) return a->app.help();
    auto it = a->commands.find(std::string(subcommand));
    if (it == a->commands.end()) throw std::invalid_argument("unknown subcommand " + std::string(subcommand));
    return it->second->help(a->app.get_name());
}

std::vector<std::string> subcommand_names() {
    return {"validate", "causal-graph", "simulate", "import", "train", "explain", "evaluate"};
}

}  // namespace procex::cli
