// ===========================================================================
// JSON schemas: parsing of every input document, serialization of every
// verdict. All documents are stamped "schema": "corrspec/1"; object keys are
// emitted in sorted order, so identical values give identical bytes.
// ===========================================================================
#include "corrspec/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "corrspec/error.hpp"

namespace corrspec::jsonio {

namespace {

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) fail(Err::ParseError, where + ": expected a JSON object");
}

const json& field(const json& j, const std::string& key, const std::string& where) {
    require_object(j, where);
    auto it = j.find(key);
    if (it == j.end()) fail(Err::ParseError, where + ": missing key \"" + key + "\"");
    return *it;
}

void check_stamp(const json& j, const std::string& where) {
    if (!j.is_object()) return;
    auto it = j.find("schema");
    if (it != j.end() && (!it->is_string() || it->get<std::string>() != kSchema))
        fail(Err::ParseError, where + ": unsupported schema (expected \"" +
                                  std::string(kSchema) + "\")");
}

std::vector<std::string> as_labels(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        fail(Err::ParseError, where + ": expected a nonempty array of labels");
    std::vector<std::string> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_string()) fail(Err::ParseError, where + ": labels must be strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(Err::ParseError, where + ": expected a number");
    return j.get<double>();
}

prob::Vec as_vec(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        fail(Err::ParseError, where + ": expected a nonempty array of numbers");
    prob::Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = as_number(j[i], where);
    return v;
}

prob::Mat as_mat(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        fail(Err::ParseError, where + ": expected a nonempty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty())
        fail(Err::ParseError, where + ": rows must be nonempty arrays");
    const std::size_t cols = j[0].size();
    prob::Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            fail(Err::ParseError, where + ": ragged rows (row " + std::to_string(r) + ")");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_number(j[r][c], where);
    }
    return m;
}

json vec_json(const prob::Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json mat_json(const prob::Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json labels_json(const prob::Alphabet& a) {
    json out = json::array();
    for (const auto& l : a.labels) out.push_back(l);
    return out;
}

// JSON has no infinities; unmeasured margins stay null
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json id_or_null(std::uint64_t id) {
    return id == oracle::kNoPair ? json(nullptr) : json(id);
}

json constraints_json(const dpi::MembershipReport& r) {
    json cs = json::array();
    for (const auto& c : r.constraints)
        cs.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"bound", c.bound},
                      {"margin", c.margin},
                      {"pass", c.pass}});
    return cs;
}

} // namespace

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

json load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Err::ParseError, "cannot read file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        fail(Err::ParseError, path + ": " + e.what());
    }
    return j;
}

void save_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Err::ParseError, "cannot write file: " + path);
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// input schemas
// ---------------------------------------------------------------------------

prob::JointDist parse_joint(const json& j) {
    check_stamp(j, "joint");
    prob::JointDist d(prob::Alphabet(as_labels(field(j, "rows", "joint"), "joint.rows")),
                      prob::Alphabet(as_labels(field(j, "cols", "joint"), "joint.cols")),
                      as_mat(field(j, "mass", "joint"), "joint.mass"));
    if (d.mass.rows() != d.rows.size() || d.mass.cols() != d.cols.size())
        fail(Err::ParseError, "joint: mass shape does not match the alphabets");
    prob::validate_joint(d);
    return d;
}

prob::FactoredDist parse_factored(const json& j) {
    check_stamp(j, "factored");
    const json& axes = field(j, "axes", "factored");
    if (!axes.is_array() || axes.empty())
        fail(Err::ParseError, "factored.axes: expected a nonempty array");
    std::vector<prob::Axis> out;
    out.reserve(axes.size());
    for (const auto& a : axes) {
        const std::string name = field(a, "name", "factored.axes").is_string()
                                     ? a.at("name").get<std::string>()
                                     : "";
        if (name.empty()) fail(Err::ParseError, "factored.axes: names must be nonempty strings");
        out.push_back({name, prob::Alphabet(
                                 as_labels(field(a, "labels", "factored.axes"), "factored.axes"))});
    }
    const prob::Vec flat = as_vec(field(j, "mass", "factored"), "factored.mass");
    return prob::make_factored(std::move(out),
                               std::vector<double>(flat.data(), flat.data() + flat.size()));
}

prob::Kernel parse_kernel(const json& j) {
    check_stamp(j, "kernel");
    prob::Kernel k(prob::Alphabet(as_labels(field(j, "from", "kernel"), "kernel.from")),
                   prob::Alphabet(as_labels(field(j, "to", "kernel"), "kernel.to")),
                   as_mat(field(j, "rows", "kernel"), "kernel.rows"));
    if (k.rows.rows() != k.from.size() || k.rows.cols() != k.to.size())
        fail(Err::ParseError, "kernel: rows shape does not match the alphabets");
    prob::validate_kernel(k);
    return k;
}

dpi::ChainSpec parse_chain(const json& j) {
    check_stamp(j, "chain");
    dpi::ChainSpec chain;
    chain.pxy = parse_joint(field(j, "pxy", "chain"));
    chain.kzy = parse_kernel(field(j, "kzy", "chain"));
    return chain;
}

regions::Candidate parse_candidate(const json& j) {
    check_stamp(j, "candidate");
    regions::Candidate c;
    c.pq = as_vec(field(j, "pq", "candidate"), "candidate.pq");
    c.x1 = prob::Alphabet(as_labels(field(j, "x1", "candidate"), "candidate.x1"));
    c.x2 = prob::Alphabet(as_labels(field(j, "x2", "candidate"), "candidate.x2"));
    c.table = as_mat(field(j, "table", "candidate"), "candidate.table");
    return c;
}

regions::DistortionSpec parse_distortion(const json& j) {
    check_stamp(j, "distortion");
    regions::DistortionSpec ds;
    ds.d1 = as_mat(field(j, "d1", "distortion"), "distortion.d1");
    ds.d2 = as_mat(field(j, "d2", "distortion"), "distortion.d2");
    return ds;
}

bool is_factored_document(const json& j) { return j.is_object() && j.contains("axes"); }

// ---------------------------------------------------------------------------
// output schemas
// ---------------------------------------------------------------------------

json to_json(const prob::JointDist& d) {
    return {{"schema", kSchema},
            {"rows", labels_json(d.rows)},
            {"cols", labels_json(d.cols)},
            {"mass", mat_json(d.mass)}};
}

json to_json(const prob::FactoredDist& f) {
    json axes = json::array();
    for (const auto& a : f.axes)
        axes.push_back({{"name", a.name}, {"labels", labels_json(a.alphabet)}});
    json mass = json::array();
    for (double x : f.mass) mass.push_back(x);
    return {{"schema", kSchema}, {"axes", std::move(axes)}, {"mass", std::move(mass)}};
}

json to_json(const prob::Kernel& k) {
    return {{"schema", kSchema},
            {"from", labels_json(k.from)},
            {"to", labels_json(k.to)},
            {"rows", mat_json(k.rows)}};
}

json to_json(const dpi::MembershipReport& r, const std::string& set_name) {
    return {{"schema", kSchema},
            {"kind", "membership"},
            {"set", set_name},
            {"pass", r.pass},
            {"lambda2_bound", r.lambda2_bound},
            {"constraints", constraints_json(r)},
            {"skipped_events", r.skipped_events},
            {"worst", r.worst},
            {"worst_margin", finite_or_null(r.worst_margin)}};
}

json to_json(const dpi::DPIReport& r) {
    return {{"schema", kSchema},
            {"kind", "dpi"},
            {"holds", r.holds},
            {"lambda_xy", vec_json(r.lam_xy)},
            {"lambda_yz", vec_json(r.lam_yz)},
            {"lambda_xz", vec_json(r.lam_xz)},
            {"slack", vec_json(r.slack)},
            {"min_slack", r.min_slack},
            {"factorization_residual", finite_or_null(r.factorization_residual)}};
}

json to_json(const spectral::CorrelationSpectrum& s) {
    json sigma = json::array();
    sigma.push_back(s.lambda1);
    for (Eigen::Index i = 0; i < s.lambdas.size(); ++i) sigma.push_back(s.lambdas(i));
    return {{"schema", kSchema}, {"kind", "spectrum"}, {"sigma", std::move(sigma)}};
}

json to_json(const asymptotic::NLetterSpectrum& s, int n) {
    json distinct = json::array();
    for (const auto& d : s.distinct)
        distinct.push_back({{"value", d.value}, {"multiplicity", d.multiplicity}});
    return {{"schema", kSchema},
            {"kind", "nletter"},
            {"n", n},
            {"values", vec_json(s.values)},
            {"distinct", std::move(distinct)},
            {"total", s.total}};
}

json to_json(const oracle::FrontierResult& r) {
    json best = json::array();
    json ids = json::array();
    for (Eigen::Index i = 0; i < r.best_lambda.size(); ++i) {
        best.push_back(r.best_lambda(i));
        ids.push_back(id_or_null(r.best_id[static_cast<std::size_t>(i)]));
    }
    return {{"schema", kSchema},
            {"kind", "frontier"},
            {"mode", r.mode == oracle::Mode::Exhaustive ? "exhaustive" : "random"},
            {"samples_evaluated", r.samples_evaluated},
            {"seed", r.seed},
            {"lambda2_uv", r.lambda2_uv},
            {"best_lambda", std::move(best)},
            {"best_id", std::move(ids)},
            {"argmax", {{"n", r.argmax.n},
                        {"enc1", to_json(r.argmax.enc1)},
                        {"enc2", to_json(r.argmax.enc2)}}},
            {"violations", {{"necc", r.necc_violations},
                            {"nec", r.nec_violations},
                            {"outer2", r.outer2_violations}}},
            {"outer2_skipped", r.outer2_skipped},
            {"first_violation_id", id_or_null(r.first_violation_id)},
            {"worst_margins", {{"necc", finite_or_null(r.worst_necc_margin)},
                               {"nec", finite_or_null(r.worst_nec_margin)},
                               {"outer2", finite_or_null(r.worst_outer2_margin)}}},
            {"clean", r.clean}};
}

json to_json(const regions::RegionSampleResult& r, const std::string& set_name) {
    return {{"schema", kSchema},
            {"kind", "rd_region"},
            {"set", set_name},
            {"lambda2_uv", r.lambda2_uv},
            {"samples", static_cast<long long>(r.records.size())},
            {"selected", static_cast<long long>(r.region.size())},
            {"counts", {{"sin", r.count_sin},
                        {"sout1", r.count_sout1},
                        {"sout2", r.count_sout2},
                        {"sout4", r.count_sout4},
                        {"sout2cap4", r.count_cap}}},
            {"hierarchy_violations", {{"sin_not_sout2", r.sin_not_sout2},
                                      {"sout2cert_not_sout1", r.sout2cert_not_sout1},
                                      {"sin_not_sout4", r.sin_not_sout4},
                                      {"cap_not_sout4", r.cap_not_sout4}}},
            {"hierarchy_ok", r.hierarchy_ok}};
}

json spectrum_report(const prob::JointDist& d) {
    prob::JointDist copy = d;
    const auto spec = spectral::correlation_spectrum(copy);
    const auto iff = spectral::verify_theorem_iff(spectral::tilde(copy));
    json out = to_json(spec);
    out["lambda2"] = spec.lambdas.size() > 0 ? spec.lambdas(0) : 0.0;
    out["valid"] = iff.valid;
    if (const auto dec = spectral::decomposes(copy)) {
        out["decomposes"] = {{"s1_rows", dec->s1_rows}, {"s2_cols", dec->s2_cols}};
    } else {
        out["decomposes"] = nullptr;
    }
    return out;
}

// ---------------------------------------------------------------------------
// schema validators (shape only; values are the producers' contract)
// ---------------------------------------------------------------------------

void check_schema(const json& j, const std::string& kind) {
    require_object(j, kind);
    if (!j.contains("schema") || j.at("schema") != kSchema)
        fail(Err::ParseError, kind + ": missing or wrong \"schema\" stamp");
    auto need = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (!j.contains(k)) fail(Err::ParseError, kind + ": missing key \"" + k + "\"");
    };
    if (kind == "joint") {
        need({"rows", "cols", "mass"});
    } else if (kind == "factored") {
        need({"axes", "mass"});
    } else if (kind == "kernel") {
        need({"from", "to", "rows"});
    } else if (kind == "spectrum") {
        need({"kind", "sigma", "lambda2", "valid", "decomposes"});
    } else if (kind == "membership") {
        need({"kind", "set", "pass", "lambda2_bound", "constraints", "skipped_events",
              "worst", "worst_margin"});
    } else if (kind == "dpi") {
        need({"kind", "holds", "lambda_xy", "lambda_yz", "lambda_xz", "slack", "min_slack",
              "factorization_residual"});
    } else if (kind == "nletter") {
        need({"kind", "n", "values", "distinct", "total"});
    } else if (kind == "frontier") {
        need({"kind", "mode", "samples_evaluated", "seed", "lambda2_uv", "best_lambda",
              "best_id", "argmax", "violations", "outer2_skipped", "first_violation_id",
              "worst_margins", "clean"});
    } else if (kind == "rd_region") {
        need({"kind", "set", "lambda2_uv", "samples", "selected", "counts",
              "hierarchy_violations", "hierarchy_ok"});
    } else if (kind == "validate") {
        need({"kind", "type", "valid"});
    } else {
        fail(Err::ParseError, "unknown document kind: " + kind);
    }
}

} // namespace corrspec::jsonio
