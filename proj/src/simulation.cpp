#include "procex/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <boost/tokenizer.hpp>
#include "json.hpp"

namespace procex {

namespace {

using ordered_json = nlohmann::ordered_json;

double sample_one(const AttributeDecl& decl, const AttributeDistribution& dist, Rng& rng) {
    if (dist.kind == AttributeDistribution::Kind::Uniform)
        return decl.lower + (decl.upper - decl.lower) * rng.uniform();
    for (int attempt = 0; attempt < 10000; ++attempt) {
        double x = dist.mean + dist.stddev * rng.normal();
        if (x >= decl.lower && x <= decl.upper) return x;
    }
    return std::clamp(dist.mean, decl.lower, decl.upper);
}

void check_config(const ProcessDefinition& def, const SimulationConfig& config) {
    if (!(config.label_noise >= 0.0 && config.label_noise <= 0.5))
        throw Error(ErrorKind::InvalidArgument, "label noise must lie in [0, 0.5]");
    for (const auto& [name, dist] : config.distributions) {
        if (!def.find_attribute(name)) throw Error(ErrorKind::UnknownAttribute, name);
        if (dist.kind == AttributeDistribution::Kind::TruncatedNormal && !(dist.stddev > 0.0))
            throw Error(ErrorKind::InvalidArgument, "truncated normal std must be positive for " + name);
    }
}

std::vector<std::string> split_csv_row(const std::string& line) {
    boost::tokenizer<boost::escaped_list_separator<char>> tok(line);
    return {tok.begin(), tok.end()};
}

double parse_number(std::string_view text, std::size_t row) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
        throw Error(ErrorKind::UnparsableNumber, "row " + std::to_string(row));
    return value;
}

}  // namespace

Path walk_process(const ProcessDefinition& def, const AttributeAssignment& attrs, Rng& rng) {
    Path path;
    const Node* node = def.find_node(def.start);
    while (node) {
        if (const auto* act = std::get_if<Activity>(&node->body)) {
            path.activities.push_back(node->name);
            node = def.find_node(act->successor);
        } else if (const auto* xor_gw = std::get_if<XorGateway>(&node->body)) {
            const std::string* chosen = &xor_gw->otherwise;
            for (const auto& br : xor_gw->branches) {
                if (eval_guard(br.guard, attrs)) {
                    chosen = &br.target;
                    break;
                }
            }
            node = def.find_node(*chosen);
        } else if (const auto* choice = std::get_if<ChoiceGateway>(&node->body)) {
            double u = rng.uniform();
            double cumulative = 0.0;
            const std::string* chosen = &choice->branches.back().target;
            for (const auto& br : choice->branches) {
                cumulative += br.probability;
                if (u < cumulative) {
                    chosen = &br.target;
                    break;
                }
            }
            node = def.find_node(*chosen);
        } else {
            path.end_label = std::get<EndNode>(node->body).label;
            return path;
        }
    }
    throw Error(ErrorKind::UnknownTarget, "walk left the process graph");
}

Trace execute_case(const ProcessDefinition& def, const AttributeAssignment& attrs, Rng& rng,
                   double label_noise, std::string case_id) {
    Path path = walk_process(def, attrs, rng);
    Trace trace;
    trace.case_id = std::move(case_id);
    trace.attrs = attrs;
    trace.activities = std::move(path.activities);
    trace.label = path.end_label;
    if (label_noise > 0.0 && rng.bernoulli(label_noise))
        trace.label = trace.label == Label::Positive ? Label::Negative : Label::Positive;
    return trace;
}

AttributeAssignment sample_attributes(const ProcessDefinition& def, const SimulationConfig& config,
                                      Rng& rng) {
    AttributeAssignment attrs;
    for (const auto& name : def.attribute_names()) {
        const AttributeDecl& decl = *def.find_attribute(name);
        auto it = config.distributions.find(name);
        AttributeDistribution dist = it == config.distributions.end() ? AttributeDistribution{} : it->second;
        attrs[name] = sample_one(decl, dist, rng);
    }
    return attrs;
}

std::string case_id_for(std::uint64_t ordinal) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "c%06llu", static_cast<unsigned long long>(ordinal + 1));
    return buf;
}

EventLog generate_log(const ProcessDefinition& def, const SimulationConfig& config) {
    check_config(def, config);
    EventLog log;
    log.process_name = def.name;
    log.provenance.kind = Provenance::Kind::Simulated;
    log.provenance.config = config;
    if (config.n_cases == 0) {
        log.warnings.push_back("n_cases = 0: generated an empty log");
        return log;
    }
    log.traces.reserve(config.n_cases);
    for (std::uint64_t i = 0; i < config.n_cases; ++i) {
        Rng rng(config.seed, i);
        AttributeAssignment attrs = sample_attributes(def, config, rng);
        log.traces.push_back(execute_case(def, attrs, rng, config.label_noise, case_id_for(i)));
    }
    return log;
}

IndicatorVector indicators_of(const ProcessDefinition& def, const std::vector<std::string>& activities) {
    std::vector<std::string> names = def.activity_names();
    IndicatorVector out(names.size(), 0);
    for (const auto& act : activities) {
        auto it = std::lower_bound(names.begin(), names.end(), act);
        if (it == names.end() || *it != act) throw Error(ErrorKind::SchemaMismatch, "unknown activity " + act);
        out[static_cast<std::size_t>(it - names.begin())] = 1;
    }
    return out;
}

bool is_conformant(const ProcessDefinition& def, const AttributeAssignment& attrs,
                   const IndicatorVector& indicators) {
    std::size_t expected = def.activity_names().size();
    if (indicators.size() != expected)
        throw Error(ErrorKind::SchemaMismatch, "indicator vector has " + std::to_string(indicators.size()) +
                                                   " entries, process declares " + std::to_string(expected) +
                                                   " activities");
    return reachable_indicators(def, attrs).count(indicators) > 0;
}

// --- CSV import ---

EventLog import_log_csv(std::istream& in, const CsvImportOptions& options, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::EmptyLog, source + " has no header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_csv_row(line);
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(ErrorKind::MissingColumn, name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t case_col = column(options.case_column);
    const std::size_t activity_col = column(options.activity_column);
    const std::size_t label_col = column(options.label_column);
    std::vector<std::size_t> attr_cols;
    for (const auto& name : options.attribute_columns) attr_cols.push_back(column(name));

    EventLog log;
    log.process_name = options.process_name;
    log.provenance.kind = Provenance::Kind::Imported;
    log.provenance.source = source;
    std::unordered_map<std::string, std::size_t> by_case;
    std::vector<bool> labelled;

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_row(line);
        cells.resize(std::max(cells.size(), header.size()));
        const std::string& case_id = cells[case_col];
        auto [it, fresh] = by_case.emplace(case_id, log.traces.size());
        if (fresh) {
            Trace trace;
            trace.case_id = case_id;
            for (std::size_t k = 0; k < attr_cols.size(); ++k)
                trace.attrs[options.attribute_columns[k]] = parse_number(cells[attr_cols[k]], row);
            log.traces.push_back(std::move(trace));
            labelled.push_back(false);
        }
        Trace& trace = log.traces[it->second];
        if (!cells[activity_col].empty()) trace.activities.push_back(cells[activity_col]);
        const std::string& label = cells[label_col];
        if (!label.empty() && !labelled[it->second]) {
            if (label == options.positive_value)
                trace.label = Label::Positive;
            else if (label == options.negative_value)
                trace.label = Label::Negative;
            else
                throw Error(ErrorKind::BadLabel, "row " + std::to_string(row) + ": '" + label + "'");
            labelled[it->second] = true;
        }
    }
    if (log.traces.empty()) throw Error(ErrorKind::EmptyLog, source + " contains no events");
    for (std::size_t i = 0; i < log.traces.size(); ++i)
        if (!labelled[i]) throw Error(ErrorKind::BadLabel, "case " + log.traces[i].case_id + " has no label");
    return log;
}

EventLog import_log_csv(const std::string& path, const CsvImportOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    return import_log_csv(in, options, path);
}

// --- JSONL ---

void write_jsonl(const EventLog& log, std::ostream& out) {
    for (const auto& trace : log.traces) {
        ordered_json line;
        line["case_id"] = trace.case_id;
        ordered_json attrs = ordered_json::object();
        for (const auto& [name, value] : trace.attrs) attrs[name] = value;
        line["attrs"] = std::move(attrs);
        line["activities"] = trace.activities;
        line["label"] = std::string(to_string(trace.label));
        out << line.dump() << '\n';
    }
}

std::string to_jsonl(const EventLog& log) {
    std::ostringstream out;
    write_jsonl(log, out);
    return out.str();
}

EventLog read_jsonl(std::istream& in, const std::string& process_name) {
    EventLog log;
    log.process_name = process_name;
    log.provenance.kind = Provenance::Kind::Imported;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            Trace trace;
            trace.case_id = j.at("case_id").get<std::string>();
            for (const auto& [name, value] : j.at("attrs").items()) trace.attrs[name] = value.get<double>();
            trace.activities = j.at("activities").get<std::vector<std::string>>();
            trace.label = parse_label(j.at("label").get<std::string>());
            if (!ids.insert(trace.case_id).second) throw Error(ErrorKind::DuplicateCaseId, trace.case_id);
            log.traces.push_back(std::move(trace));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return log;
}

EventLog read_jsonl_file(const std::string& path, const std::string& process_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    EventLog log = read_jsonl(in, process_name);
    log.provenance.source = path;
    return log;
}

}  // namespace procex
