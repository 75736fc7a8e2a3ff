#include "procex/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>

namespace procex {

std::size_t FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].name == name) return i;
    throw Error(ErrorKind::UnknownFeature, std::string(name));
}

std::string schema_hash(const std::vector<Feature>& features) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& f : features) {
        mix(f.name);
        mix(f.kind == FeatureKind::Numeric ? ":numeric\n" : ":binary\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FeatureSchema build_schema(const ProcessDefinition& def) {
    FeatureSchema schema;
    schema.process_name = def.name;
    for (const auto& name : def.attribute_names()) {
        const AttributeDecl& decl = *def.find_attribute(name);
        schema.features.push_back({name, FeatureKind::Numeric, decl.lower, decl.upper});
    }
    schema.n_attributes = schema.features.size();
    for (const auto& name : def.activity_names())
        schema.features.push_back({name, FeatureKind::Binary, 0.0, 1.0});
    schema.hash = schema_hash(schema.features);
    return schema;
}

FeatureVector encode_trace(const FeatureSchema& schema, const Trace& trace) {
    FeatureVector v(schema.arity(), 0.0);
    for (std::size_t i = 0; i < schema.n_attributes; ++i) {
        auto it = trace.attrs.find(schema.features[i].name);
        if (it == trace.attrs.end())
            throw Error(ErrorKind::SchemaMismatch,
                        "case " + trace.case_id + " lacks attribute " + schema.features[i].name);
        v[i] = it->second;
    }
    for (const auto& act : trace.activities) {
        auto first = schema.features.begin() + static_cast<std::ptrdiff_t>(schema.n_attributes);
        auto it = std::find_if(first, schema.features.end(), [&](const Feature& f) { return f.name == act; });
        if (it == schema.features.end())
            throw Error(ErrorKind::SchemaMismatch, "case " + trace.case_id + " has unknown activity " + act);
        v[static_cast<std::size_t>(it - schema.features.begin())] = 1.0;
    }
    return v;
}

AttributeAssignment attributes_of(const FeatureSchema& schema, std::span<const double> v) {
    if (v.size() != schema.arity()) throw Error(ErrorKind::SchemaMismatch, "vector arity");
    AttributeAssignment attrs;
    for (std::size_t i = 0; i < schema.n_attributes; ++i) attrs[schema.features[i].name] = v[i];
    return attrs;
}

IndicatorVector indicators_of(const FeatureSchema& schema, std::span<const double> v) {
    if (v.size() != schema.arity()) throw Error(ErrorKind::SchemaMismatch, "vector arity");
    IndicatorVector out;
    out.reserve(schema.arity() - schema.n_attributes);
    for (std::size_t i = schema.n_attributes; i < schema.arity(); ++i) out.push_back(v[i] != 0.0 ? 1 : 0);
    return out;
}

double Scaler::scale(std::size_t i) const {
    return stddev[i] < kConstantFeatureStd ? 1.0 : stddev[i];
}

FeatureVector Scaler::apply(std::span<const double> raw) const {
    if (raw.size() != mean.size()) throw Error(ErrorKind::SchemaMismatch, "vector arity");
    FeatureVector z(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) z[i] = (raw[i] - mean[i]) / scale(i);
    return z;
}

FeatureVector Scaler::invert(std::span<const double> standardized) const {
    if (standardized.size() != mean.size()) throw Error(ErrorKind::SchemaMismatch, "vector arity");
    FeatureVector x(standardized.size());
    for (std::size_t i = 0; i < standardized.size(); ++i) x[i] = standardized[i] * scale(i) + mean[i];
    return x;
}

Scaler fit_scaler(const std::vector<FeatureVector>& rows) {
    if (rows.empty()) throw Error(ErrorKind::EmptyLog, "cannot fit a scaler on zero rows");
    const std::size_t d = rows.front().size();
    const double n = static_cast<double>(rows.size());
    Scaler s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
    for (auto& m : s.mean) m /= n;
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) s.stddev[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
    for (auto& v : s.stddev) v = std::sqrt(v / n);
    return s;
}

Scaler fit_scaler(const FeatureSchema& schema, const EventLog& log) {
    std::vector<FeatureVector> rows;
    rows.reserve(log.traces.size());
    for (const auto& t : log.traces) rows.push_back(encode_trace(schema, t));
    return fit_scaler(rows);
}

}  // namespace procex
