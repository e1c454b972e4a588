#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace {

const std::string cli = SYMPATH_CLI;
const std::string data = SYMPATH_TEST_DATA;

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    Run r;
    const std::string cmd = cli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string in(const std::string& name) { return data + "/" + name; }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "sympath_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("classify a rotation and hyperbolic block") {
    const Run r = run("classify " + in("rotation_hyperbolic.json"));
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["stratum"]["name"] == "O_UR");
    CHECK(j["n"] == 2);
    CHECK(j["eigenvalues"].size() == 4);
}

TEST_CASE("classify identity reports the isolated boundary point") {
    const Run r = run("classify " + in("identity4.json"));
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["stratum"]["detail"].get<std::string>().find("isolated boundary point") != std::string::npos);
}

TEST_CASE("classify rejects bad input with exit 2") {
    CHECK(run("classify " + in("not_symplectic.json")).code == 2);
    CHECK(run("classify " + in("malformed.json")).code == 2);
    CHECK(run("classify " + in("missing.json")).code == 2);
    CHECK(run("classify").code == 2);
    CHECK(run("frobnicate").code == 2);
}

TEST_CASE("classify accepts a normal form spec") {
    const auto path = scratch("n2.json");
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs(R"({"kind":"N2","theta":1.0471975512,"b":[1,0.5,-0.3]})", f);
        std::fclose(f);
    }
    const Run r = run("classify " + path.string());
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["stratum"]["name"] .get<std::string>().rfind("B_U", 0) == 0);
}

TEST_CASE("trace of the rotation loop touches delta = 0") {
    const Run r = run("trace " + in("rotation_loop_12.json"));
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 2050);
    REQUIRE(rows[0].size() == 11);
    CHECK(rows[0].front() == "t");
    CHECK(rows[0][9] == "delta");
    // delta = 4 (cos 2 pi t - cos 4 pi t)^2, touching zero at t = 1/3 and 2/3
    double worst = 0.0, min_delta = 1e300;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double t = std::stod(rows[i][0]), d = std::stod(rows[i][9]);
        const double c = std::cos(2 * M_PI * t) - std::cos(4 * M_PI * t);
        worst = std::max(worst, std::abs(d - 4 * c * c));
        min_delta = std::min(min_delta, d);
    }
    CHECK(worst < 1e-9);
    CHECK(min_delta > -1e-9);
}

TEST_CASE("trace of the N2 alpha family crosses delta = 0 at alpha = 0") {
    const Run r = run("trace " + in("alpha_n2.json") + " --samples 200");
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 202);
    const double before = std::stod(rows[1 + 90][9]);
    const double after = std::stod(rows[1 + 110][9]);
    CHECK(before * after < 0.0);
    CHECK(std::stod(rows[1 + 100][0]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(std::stod(rows[1 + 100][9])) < 1e-6);
}

TEST_CASE("trace rejects empty specs and tiny grids") {
    CHECK(run("trace " + in("empty.json")).code == 2);
    CHECK(run("trace " + in("rotation_loop_12.json") + " --samples 10").code == 2);
}

TEST_CASE("make-loop then index") {
    const auto loop = scratch("loop35.json");
    REQUIRE(run("make-loop 3 5 --out " + loop.string()).code == 0);
    const Run r = run("index " + loop.string());
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["index"] == 10);
}

TEST_CASE("make-loop below the image is an unrealizable payload") {
    const Run r = run("make-loop 3 2");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["unrealizable"] == true);
    CHECK(!j.contains("loop"));
}

TEST_CASE("join identity to identity chooses k = 1") {
    const Run r = run("join " + in("identity4.json") + " " + in("identity4.json") + " --k auto");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["k"] == 1);
    CHECK(j["positive"] == true);
    CHECK(j["endpoint_error"].get<double>() <= 1e-9);
    CHECK(run("join " + in("identity4.json") + " " + in("identity4.json") + " --k zero").code == 2);
}

TEST_CASE("verify by name, by fixture, and unknown") {
    const Run a = run("verify sp2-angle --trials 20");
    CHECK(a.code == 0);
    CHECK(nlohmann::json::parse(a.out)["passed"] == true);
    const Run b = run("verify half_turn_pair");
    CHECK(b.code == 0);
    CHECK(nlohmann::json::parse(b.out)["fixtures"].size() == 1);
    CHECK(run("verify no-such-check").code == 2);
}

TEST_CASE("collisions of the N2 family") {
    const Run r = run("collisions " + in("alpha_n2.json"));
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["report"]["events"].size() == 1);
    CHECK(j["report"]["events"][0]["t_star"].get<double>() == doctest::Approx(0.0).epsilon(1e-8));
    const Run c = run("collisions " + in("alpha_n2.json") + " --format csv");
    REQUIRE(c.code == 0);
    const auto rows = csv_rows(c.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "t");
    CHECK(rows[0][5] == "stratum_after");
}

TEST_CASE("output is byte-identical across runs and written atomically") {
    const auto a = scratch("a.json"), b = scratch("b.json");
    REQUIRE(run("join " + in("rotation_hyperbolic.json") + " " + in("identity4.json") + " --out " + a.string()).code == 0);
    REQUIRE(run("join " + in("rotation_hyperbolic.json") + " " + in("identity4.json") + " --out " + b.string()).code == 0);
    std::ifstream fa(a), fb(b);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(!sa.str().empty());
    CHECK(sa.str() == sb.str());
    for (const auto& e : std::filesystem::directory_iterator(a.parent_path()))
        CHECK(e.path().string().find(".tmp") == std::string::npos);
}

TEST_CASE("fixtures list and run") {
    const Run l = run("fixtures");
    REQUIRE(l.code == 0);
    CHECK(nlohmann::json::parse(l.out)["fixtures"].size() == 6);
    const Run r = run("fixtures all");
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["passed"] == true);
    CHECK(run("fixtures nope").code == 2);
}
