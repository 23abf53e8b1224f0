#pragma once

#include "helium/functional.hpp"
#include "helium/matching.hpp"

#include <string>
#include <vector>

namespace helium::orbitdoc {

/// Self-describing on-disk form of an orbit plus its diagnostics.
/// Serialization is deterministic (sorted keys, shortest round-trip number
/// format), so write -> read -> write is byte-identical.
struct OrbitDocument {
    int schema_version = 1;
    int n1 = 1, n2 = 1;
    std::string note;
    double m = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0;
    double qbar1 = 0.0, qbar2 = 0.0;
    double q0_1 = 0.0, q0_2 = 0.0;
    double k1 = 0.0, k2 = 0.0;
    double kinetic1 = 0.0, kinetic2 = 0.0;
    double invq1 = 0.0, invq2 = 0.0;
    int grid_n = 0;
    std::vector<double> q1, q2;
    std::vector<double> qdot1, qdot2; // NaN marks an absent velocity sample
    std::string parity1, parity2;     // "periodic" | "twisted"
    std::vector<double> z1, z2;
    std::vector<int> zero_index1, zero_index2;
    functional::ActionReport diagnostics;
};

OrbitDocument from_orbit(const matching::OrbitPair& orbit);

/// Reconstruct the in-memory orbit representation (sample arrays and
/// headers) from a document.
matching::OrbitPair to_orbit(const OrbitDocument& doc);

std::string to_json(const OrbitDocument& doc);
OrbitDocument from_json(const std::string& text);

void write_file(const OrbitDocument& doc, const std::string& path);
OrbitDocument read_file(const std::string& path);

} // namespace helium::orbitdoc
