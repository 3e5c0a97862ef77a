#pragma once

#include <string>

#include "json.hpp"

#include "corrspec/asymptotic.hpp"
#include "corrspec/dpi.hpp"
#include "corrspec/oracle.hpp"
#include "corrspec/regions.hpp"
#include "corrspec/spectral.hpp"

namespace corrspec::jsonio {

using nlohmann::json;

// every serialized document carries this version stamp; parsers accept documents
// without the key but reject a mismatching one
inline constexpr const char* kSchema = "corrspec/1";

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

// ParseError when the file is unreadable or not valid JSON
json load_file(const std::string& path);
void save_file(const std::string& path, const json& j);

// ---------------------------------------------------------------------------
// input schemas (all parsers validate the parsed object before returning)
// ---------------------------------------------------------------------------

// {"rows": ["u0", ...], "cols": ["v0", ...], "mass": [[...], ...]}
prob::JointDist parse_joint(const json& j);

// {"axes": [{"name": "x1", "labels": [...]}, ...], "mass": [flat row-major]}
prob::FactoredDist parse_factored(const json& j);

// {"from": [...], "to": [...], "rows": [[...], ...]}, row-stochastic
prob::Kernel parse_kernel(const json& j);

// {"pxy": <joint>, "kzy": <kernel>}
dpi::ChainSpec parse_chain(const json& j);

// {"pq": [...], "x1": [...], "x2": [...], "table": [[...], ...]}
// table rows run over (q,u,v) cells row-major, columns over (x1,x2)
regions::Candidate parse_candidate(const json& j);

// {"d1": [[...], ...], "d2": [[...], ...]}
regions::DistortionSpec parse_distortion(const json& j);

// true when the document looks like a factored tensor rather than a pair joint
bool is_factored_document(const json& j);

// ---------------------------------------------------------------------------
// output schemas (stamped with {"schema": "corrspec/1", "kind": ...}); doubles
// that are not finite serialize as null
// ---------------------------------------------------------------------------

json to_json(const prob::JointDist& d);
json to_json(const prob::FactoredDist& f);
json to_json(const prob::Kernel& k);
json to_json(const dpi::MembershipReport& r, const std::string& set_name);
json to_json(const dpi::DPIReport& r);
json to_json(const spectral::CorrelationSpectrum& s);
json to_json(const asymptotic::NLetterSpectrum& s, int n);
json to_json(const oracle::FrontierResult& r);
json to_json(const regions::RegionSampleResult& r, const std::string& set_name);

// spectrum verdict document: sigma, lambda2, the iff-validity of the tilde, and
// the support decomposition when one exists
json spectrum_report(const prob::JointDist& d);

// required-key check for a serialized document; ParseError on violation. Used by
// tests to confirm every emitted document round-trips through its own schema.
void check_schema(const json& j, const std::string& kind);

} // namespace corrspec::jsonio
