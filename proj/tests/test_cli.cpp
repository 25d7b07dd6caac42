#include "crx/tensor.hpp"
#include "kuranishi/kuranishi.hpp"
#include "obstruction/obstruction.hpp"

#include <doctest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

using nlohmann::json;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

// stdout only; stderr is merged when `merge` is set
Run crdef(const std::string& args, bool merge = false)
{
    Run r;
    const std::string cmd = std::string("\"") + CRDEF_PATH + "\" " + args + (merge ? " 2>&1" : " 2>/dev/null");
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string data(const std::string& name) { return std::string(DATA_DIR) + "/" + name; }

}  // namespace

TEST_CASE("usage errors exit 2")
{
    CHECK(crdef("").status == 2);
    CHECK(crdef("cohomology --kmin 3 --kmax 1").status == 2);
    CHECK(crdef("obstructions --n 1").status == 2);
    CHECK(crdef("obstructions --n 9").status == 2);
    CHECK(crdef("kuranishi --order 0").status == 2);
    CHECK(crdef("cohomology --format xml").status == 2);
    CHECK(crdef("cohomology --no-such-flag").status == 2);
    CHECK(crdef("classify").status == 2);
    CHECK(crdef("classify --n 4 --input \"" + data("zero_tensor.json") + "\"").status == 2);
    CHECK(crdef("--help").status == 0);
}

TEST_CASE("cohomology")
{
    auto r = crdef("cohomology --n 3 --kmin -4 --kmax -4 --format json");
    CHECK(r.status == 0);
    const auto j = json::parse(r.out);
    CHECK(j["schema_version"] == crx::kSchemaVersion);
    CHECK(j["all_match"] == true);
    bool exceptional = false;
    for (const auto& row : j["rows"])
        if (row["bundle"] == "T[P3](-4) on P3" && row["q"] == 2) {
            CHECK(row["closed"] == 1);
            CHECK(row["oracle"] == 1);
            exceptional = true;
        }
    CHECK(exceptional);

    auto empty = crdef("cohomology --max-dim -1 --format json");
    CHECK(empty.status == 0);
    CHECK(json::parse(empty.out)["rows"].empty());
    CHECK(crdef("cohomology --max-dim -1").status == 0);
}

TEST_CASE("obstructions")
{
    auto r = crdef("obstructions --n 5 --kmin -3 --kmax 0 --format json");
    CHECK(r.status == 0);
    const auto j = json::parse(r.out);
    CHECK(j["kind"] == "obstruction_report");
    std::vector<long> w;
    for (const auto& row : j["weights"]) w.push_back(row["w_linear"]);
    CHECK(w == std::vector<long>{280, 70, 0, 0});

    auto pos = crdef("obstructions --n 5 --kmin 0 --kmax 6 --format json");
    CHECK(pos.status == 0);
    for (const auto& row : json::parse(pos.out)["weights"]) CHECK(row["w_linear"] == 0);

    // a fixed level that is too low for these weights
    CHECK(crdef("obstructions --n 5 --kmin -3 --kmax -2 --cutoff 0").status == 3);

    auto d7 = crdef("obstructions --n 4 --kmin -3 --kmax 3 --format json");
    CHECK(d7.status == 0);
    const auto j7 = json::parse(d7.out);
    REQUIRE(j7.contains("dimension7"));
    CHECK(j7["dimension7"]["ok"] == true);
    CHECK(crdef("obstructions --n 4 --kmin -2 --kmax 3").out.find("dimension 7") != std::string::npos);
}

TEST_CASE("classify the bundled tensors")
{
    auto w3 = crdef("classify --format json --input \"" + data("w3_obstructed.json") + "\"");
    CHECK(w3.status == 1);
    const auto v = json::parse(w3.out)["verdict"];
    CHECK(v["fillable_N"] == false);
    REQUIRE(v["residuals"].size() == 1);
    CHECK(v["residuals"][0]["k"] == -3);
    CHECK(crdef("classify --input \"" + data("w3_obstructed.json") + "\"").out.find("residual at weight -3") !=
          std::string::npos);

    auto g = crdef("classify --format json --input \"" + data("gauge_trivial.json") + "\"");
    CHECK(g.status == 0);
    CHECK(json::parse(g.out)["verdict"]["fillable_N"] == true);

    auto z = crdef("classify --format json --input \"" + data("zero_tensor.json") + "\"");
    CHECK(z.status == 0);
    CHECK(json::parse(z.out)["verdict"]["stable"] == true);

    // the weight range must cover the input
    CHECK(crdef("classify --kmin -2 --input \"" + data("w3_obstructed.json") + "\"").status == 2);
}

TEST_CASE("bundled tensors match their construction")
{
    const auto w3 = crx::read_tensor_file(data("w3_obstructed.json"));
    const auto ws = obstruction::w_space(crx::build_weight_complex(5, -3));
    CHECK(w3.n == 5);
    CHECK(w3.total() == ws.vector(0, 0));

    const auto g = crx::read_tensor_file(data("gauge_trivial.json"));
    CHECK(!g.total().empty());
    CHECK(crx::dbar(g.total()).empty());
    CHECK(crx::flat(g.total()).empty());

    CHECK(crx::read_tensor_file(data("zero_tensor.json")).empty());

    for (const char* f : {"w3_obstructed.json", "gauge_trivial.json", "zero_tensor.json"}) {
        std::ifstream in(data(f));
        const auto j = json::parse(in);
        CHECK(crx::to_json(crx::tensor_from_json(j)) == j);
    }
}

TEST_CASE("malformed input is reported with its position")
{
    const std::string path = "crdef_malformed.json";
    std::ofstream(path) << "{\"n\": 5,\n \"entries\": [ }";
    auto r = crdef("classify --input " + path, true);
    CHECK(r.status == 2);
    CHECK(r.out.find("line 2") != std::string::npos);

    std::ofstream(path) << R"({"schema_version": 1, "kind": "deformation_tensor", "n": 5, "entries": [{"weight": -3}]})";
    auto s = crdef("classify --input " + path, true);
    CHECK(s.status == 2);
    CHECK(s.out.find("/entries/0") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("verify and the bracket fault")
{
    auto ok = crdef("verify --n 4 --kmin -2 --kmax 1 --format json");
    CHECK(ok.status == 0);
    const auto j = json::parse(ok.out);
    CHECK(j["all_pass"] == true);
    bool d7 = false;
    for (const auto& g : j["groups"]) d7 = d7 || g["group"] == "dimension7";
    CHECK(d7);

    auto bad = crdef("verify --n 3 --kmin -2 --kmax 1 --inject-bracket-fault --format json");
    CHECK(bad.status == 1);
    for (const auto& g : json::parse(bad.out)["groups"])
        if (g["group"] == "leibniz") CHECK(g["pass"] == false);
}

TEST_CASE("kuranishi")
{
    auto r = crdef("kuranishi --n 3 --order 3 --seed 5 --format json");
    CHECK(r.status == 0);
    const auto j = json::parse(r.out);
    CHECK(j["obstructed"] == false);
    CHECK(j["round_trip"] == true);
    for (const auto& res : j["residuals"]) CHECK(res["zero"] == true);
    const auto s = kuranishi::series_from_json(j["series"]);
    CHECK(s.truncation_order() == 3);
    CHECK(kuranishi::to_json(s) == j["series"]);

    // order 4 from weight -2 reaches -8
    CHECK(crdef("kuranishi --n 5 --weights -2 --order 4").status == 2);
    CHECK(crdef("kuranishi --n 4 --weights -2,0,1 --order 3 --n4-route").status == 0);
}

TEST_CASE("output is deterministic and JSON round-trips")
{
    for (const std::string args : {"obstructions --n 3 --kmin -4 --kmax 2 --format json",
                                   "verify --n 3 --kmin -2 --kmax 1 --seed 9 --format json",
                                   "kuranishi --n 3 --order 3 --seed 2 --format json"}) {
        const auto a = crdef(args), b = crdef(args);
        CHECK(a.out == b.out);
        const auto j = json::parse(a.out);
        CHECK(json::parse(j.dump()) == j);
        CHECK(j.dump(2) + "\n" == a.out);
        CHECK(j.contains("schema_version"));
    }
}
