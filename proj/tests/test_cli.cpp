// End-to-end checks of the command-line tool: document round trips, exit
// codes, CSV output structure. Takes the path of the binary as argv[1].

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
    if (!ok)
        ++failures;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::vector<double>> read_csv(const std::string& path, int cols) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line); // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) == cols)
            rows.push_back(row);
    }
    return rows;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-helium-orbits>\n");
        return 2;
    }
    const std::string cli = argv[1];
    char tmpl[] = "/tmp/helium_cli_XXXXXX";
    const std::string dir = mkdtemp(tmpl);
    const std::string doc = dir + "/orbit.json";

    // build + verify a fresh orbit
    check(run(cli + " orbit --n1 2 --n2 3 --out " + doc + " > " + dir + "/orbit.log") == 0,
          "orbit (2,3) exits 0");
    const std::string orbit_log = slurp(dir + "/orbit.log");
    check(orbit_log.find("zeros=(2,3)") != std::string::npos,
          "summary reports zero counts (2,3)");
    check(run(cli + " verify " + doc + " > " + dir + "/verify.log") == 0,
          "verify exits 0 on a fresh orbit");
    const std::string vlog = slurp(dir + "/verify.log");
    check(vlog.find("FAIL") == std::string::npos, "no FAIL lines on a fresh orbit");
    check(vlog.find("PASS  matching-identity") != std::string::npos,
          "matching identity reported");

    // byte-identical write -> read -> write
    check(run(cli + " verify " + doc + " --rewrite " + dir + "/copy.json > /dev/null") == 0,
          "rewrite exits 0");
    check(slurp(doc) == slurp(dir + "/copy.json"), "document round trip is byte-identical");

    // corrupt the stored mean field by 1%
    {
        nlohmann::json j = nlohmann::json::parse(slurp(doc));
        j["m"] = j["m"].get<double>() * 1.01;
        std::ofstream out(dir + "/bad.json", std::ios::binary);
        out << j.dump(1) << "\n";
    }
    check(run(cli + " verify " + dir + "/bad.json > " + dir + "/bad.log") == 1,
          "verify exits 1 on the corrupted document");
    const std::string blog = slurp(dir + "/bad.log");
    check(blog.find("FAIL  matching-identity") != std::string::npos,
          "matching-identity FAIL line present");

    // corrupt one position sample
    {
        nlohmann::json j = nlohmann::json::parse(slurp(doc));
        j["q1"][100] = -j["q1"][100].get<double>() - 0.1;
        std::ofstream out(dir + "/neg.json", std::ios::binary);
        out << j.dump(1) << "\n";
    }
    check(run(cli + " verify " + dir + "/neg.json > " + dir + "/neg.log") == 1,
          "verify exits 1 on a negated sample");
    check(slurp(dir + "/neg.log").find("FAIL  nonnegativity") != std::string::npos,
          "nonnegativity FAIL line present");

    // fuzz self-test: seeded corruption must trip the checker
    check(run(cli + " verify " + doc + " --fuzz --seed 42 > " + dir + "/fuzz.log") == 1,
          "verify --fuzz exits 1");
    check(slurp(dir + "/fuzz.log").find("fuzz: corrupted") != std::string::npos,
          "fuzz corruption announced");

    // sweep-psi: log grid through r = 1, monotone, reciprocal pairs
    check(run(cli + " sweep-psi --r-min 0.25 --r-max 4 --count 5 --out " + dir +
              "/psi.csv > /dev/null") == 0,
          "sweep-psi exits 0");
    {
        const auto rows = read_csv(dir + "/psi.csv", 3);
        check(rows.size() == 5, "sweep-psi row count");
        check(std::fabs(rows[2][0] - 1.0) < 1e-12 && std::fabs(rows[2][2] - 1.0) < 1e-9,
              "row at r = 1 has Psi = 1");
        bool mono = true, recip = true, kdec = true;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            mono = mono && rows[i][2] > rows[i - 1][2];
            kdec = kdec && rows[i][1] < rows[i - 1][1];
        }
        for (std::size_t i = 0; i < rows.size(); ++i)
            recip = recip &&
                    std::fabs(rows[i][2] * rows[rows.size() - 1 - i][2] - 1.0) < 1e-8;
        check(mono, "Psi column strictly increasing");
        check(kdec, "kappa column strictly decreasing");
        check(recip, "Psi(r) Psi(1/r) = 1 across the symmetric grid");
    }

    // falltable: f_sigma strictly increasing and below sqrt(2)
    check(run(cli + " falltable --sigma 0.5 --out " + dir + "/fall.csv > /dev/null") == 0,
          "falltable exits 0");
    {
        const auto rows = read_csv(dir + "/fall.csv", 5);
        check(rows.size() == 5, "falltable row count");
        bool mono = true, bounded = true;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0)
                mono = mono && rows[i][4] > rows[i - 1][4];
            bounded = bounded && rows[i][4] < std::sqrt(2.0);
        }
        check(mono, "f_sigma column strictly increasing");
        check(bounded, "f_sigma column below sqrt(2)");
    }

    // exit codes for bad input
    check(run(cli + " orbit --n1 0 --n2 1 --out " + dir + "/x.json 2> /dev/null") == 2,
          "invalid arguments exit 2");
    check(run(cli + " sweep-psi --r-min 5 --r-max 1 --out " + dir + "/y.csv 2> /dev/null") == 2,
          "inverted sweep range exits 2");
    check(run(cli + " verify " + dir + "/missing.json 2> /dev/null") == 3,
          "unreadable document exits 3");

    std::printf("test_cli: %s\n", failures == 0 ? "all checks passed" : "FAILURES");
    return failures == 0 ? 0 : 1;
}
