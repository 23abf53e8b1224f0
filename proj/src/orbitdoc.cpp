#include "helium/orbitdoc.hpp"
#include "helium/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace helium::orbitdoc {

using nlohmann::json;

namespace {

json nan_to_null(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) {
        if (std::isnan(x))
            arr.push_back(nullptr);
        else
            arr.push_back(x);
    }
    return arr;
}

std::vector<double> null_to_nan(const json& arr) {
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& x : arr)
        v.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                : x.get<double>());
    return v;
}

} // namespace

OrbitDocument from_orbit(const matching::OrbitPair& orbit) {
    OrbitDocument d;
    d.n1 = orbit.n1;
    d.n2 = orbit.n2;
    d.note = orbit.note;
    d.m = orbit.m;
    d.sigma1 = orbit.sigma1;
    d.sigma2 = orbit.sigma2;
    d.qbar1 = orbit.qbar1;
    d.qbar2 = orbit.qbar2;
    d.q0_1 = orbit.arc1.q0;
    d.q0_2 = orbit.arc2.q0;
    d.k1 = orbit.arc1.k.k();
    d.k2 = orbit.arc2.k.k();
    d.kinetic1 = orbit.kinetic1;
    d.kinetic2 = orbit.kinetic2;
    d.invq1 = orbit.invq1;
    d.invq2 = orbit.invq2;
    d.grid_n = orbit.grid_n;
    d.q1 = orbit.q1;
    d.q2 = orbit.q2;
    d.qdot1 = orbit.qdot1;
    d.qdot2 = orbit.qdot2;
    d.parity1 = orbit.z1.parity == levicivita::Parity::Twisted ? "twisted" : "periodic";
    d.parity2 = orbit.z2.parity == levicivita::Parity::Twisted ? "twisted" : "periodic";
    d.z1 = orbit.z1.values;
    d.z2 = orbit.z2.values;
    d.zero_index1 = orbit.zero_index1;
    d.zero_index2 = orbit.zero_index2;
    d.diagnostics = functional::build_report(orbit);
    return d;
}

matching::OrbitPair to_orbit(const OrbitDocument& d) {
    matching::OrbitPair o;
    o.n1 = d.n1;
    o.n2 = d.n2;
    o.note = d.note;
    o.sigma1 = d.sigma1;
    o.sigma2 = d.sigma2;
    o.m = d.m;
    o.arc1 = freefall::make_header(d.m, d.q0_1);
    o.arc2 = freefall::make_header(d.m, d.q0_2);
    o.qbar1 = d.qbar1;
    o.qbar2 = d.qbar2;
    o.grid_n = d.grid_n;
    o.q1 = d.q1;
    o.q2 = d.q2;
    o.qdot1 = d.qdot1;
    o.qdot2 = d.qdot2;
    o.z1.parity = d.parity1 == "twisted" ? levicivita::Parity::Twisted
                                         : levicivita::Parity::Periodic;
    o.z2.parity = d.parity2 == "twisted" ? levicivita::Parity::Twisted
                                         : levicivita::Parity::Periodic;
    o.z1.values = d.z1;
    o.z2.values = d.z2;
    o.zero_index1 = d.zero_index1;
    o.zero_index2 = d.zero_index2;
    o.kinetic1 = d.kinetic1;
    o.kinetic2 = d.kinetic2;
    o.invq1 = d.invq1;
    o.invq2 = d.invq2;
    return o;
}

std::string to_json(const OrbitDocument& d) {
    json j;
    j["schema_version"] = d.schema_version;
    j["n1"] = d.n1;
    j["n2"] = d.n2;
    j["note"] = d.note;
    j["m"] = d.m;
    j["sigma1"] = d.sigma1;
    j["sigma2"] = d.sigma2;
    j["qbar1"] = d.qbar1;
    j["qbar2"] = d.qbar2;
    j["q0_1"] = d.q0_1;
    j["q0_2"] = d.q0_2;
    j["k1"] = d.k1;
    j["k2"] = d.k2;
    j["kinetic1"] = d.kinetic1;
    j["kinetic2"] = d.kinetic2;
    j["invq1"] = d.invq1;
    j["invq2"] = d.invq2;
    j["grid_n"] = d.grid_n;
    j["q1"] = d.q1;
    j["q2"] = d.q2;
    j["qdot1"] = nan_to_null(d.qdot1);
    j["qdot2"] = nan_to_null(d.qdot2);
    j["parity1"] = d.parity1;
    j["parity2"] = d.parity2;
    j["z1"] = d.z1;
    j["z2"] = d.z2;
    j["zero_index1"] = d.zero_index1;
    j["zero_index2"] = d.zero_index2;
    json diag;
    const functional::ActionReport& r = d.diagnostics;
    diag["Q1"] = r.Q1;
    diag["Q2"] = r.Q2;
    diag["A"] = r.A;
    diag["B"] = r.B;
    diag["grad_sup"] = r.grad_sup;
    diag["grad_l2"] = r.grad_l2;
    diag["a1"] = r.a1;
    diag["a2"] = r.a2;
    diag["b1"] = r.b1;
    diag["b2"] = r.b2;
    diag["c1"] = r.c1;
    diag["c2"] = r.c2;
    diag["mu1"] = r.mu1;
    diag["mu2"] = r.mu2;
    diag["energy_range1"] = r.energy_range1;
    diag["energy_range2"] = r.energy_range2;
    diag["action_S"] = r.action_S;
    j["diagnostics"] = diag;
    return j.dump(1) + "\n";
}

OrbitDocument from_json(const std::string& text) {
    json j = json::parse(text);
    OrbitDocument d;
    d.schema_version = j.at("schema_version").get<int>();
    if (d.schema_version != 1)
        throw DomainError("orbit document: unsupported schema version");
    d.n1 = j.at("n1").get<int>();
    d.n2 = j.at("n2").get<int>();
    d.note = j.at("note").get<std::string>();
    d.m = j.at("m").get<double>();
    d.sigma1 = j.at("sigma1").get<double>();
    d.sigma2 = j.at("sigma2").get<double>();
    d.qbar1 = j.at("qbar1").get<double>();
    d.qbar2 = j.at("qbar2").get<double>();
    d.q0_1 = j.at("q0_1").get<double>();
    d.q0_2 = j.at("q0_2").get<double>();
    d.k1 = j.at("k1").get<double>();
    d.k2 = j.at("k2").get<double>();
    d.kinetic1 = j.at("kinetic1").get<double>();
    d.kinetic2 = j.at("kinetic2").get<double>();
    d.invq1 = j.at("invq1").get<double>();
    d.invq2 = j.at("invq2").get<double>();
    d.grid_n = j.at("grid_n").get<int>();
    d.q1 = j.at("q1").get<std::vector<double>>();
    d.q2 = j.at("q2").get<std::vector<double>>();
    d.qdot1 = null_to_nan(j.at("qdot1"));
    d.qdot2 = null_to_nan(j.at("qdot2"));
    d.parity1 = j.at("parity1").get<std::string>();
    d.parity2 = j.at("parity2").get<std::string>();
    d.z1 = j.at("z1").get<std::vector<double>>();
    d.z2 = j.at("z2").get<std::vector<double>>();
    d.zero_index1 = j.at("zero_index1").get<std::vector<int>>();
    d.zero_index2 = j.at("zero_index2").get<std::vector<int>>();
    const json& diag = j.at("diagnostics");
    functional::ActionReport& r = d.diagnostics;
    r.Q1 = diag.at("Q1").get<double>();
    r.Q2 = diag.at("Q2").get<double>();
    r.A = diag.at("A").get<double>();
    r.B = diag.at("B").get<double>();
    r.grad_sup = diag.at("grad_sup").get<double>();
    r.grad_l2 = diag.at("grad_l2").get<double>();
    r.a1 = diag.at("a1").get<double>();
    r.a2 = diag.at("a2").get<double>();
    r.b1 = diag.at("b1").get<double>();
    r.b2 = diag.at("b2").get<double>();
    r.c1 = diag.at("c1").get<double>();
    r.c2 = diag.at("c2").get<double>();
    r.mu1 = diag.at("mu1").get<std::vector<double>>();
    r.mu2 = diag.at("mu2").get<std::vector<double>>();
    r.energy_range1 = diag.at("energy_range1").get<double>();
    r.energy_range2 = diag.at("energy_range2").get<double>();
    r.action_S = diag.at("action_S").get<double>();
    return d;
}

void write_file(const OrbitDocument& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("orbit document: cannot open '" + path + "' for writing");
    out << to_json(d);
}

OrbitDocument read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("orbit document: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

} // namespace helium::orbitdoc
