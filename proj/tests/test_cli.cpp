#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "flexsum/io.hpp"

namespace fs = std::filesystem;
using flexsum::io::json;

namespace
{

const fs::path& work_dir()
{
    static const fs::path dir = [] {
        fs::path d = fs::path(FLEXSUM_TEST_WORKDIR) / "cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args)
{
    const std::string cmd = "cd '" + work_dir().string() + "' && '" FLEXSUM_CLI "' " + args + " >stdout.txt 2>stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const std::string& name) { return flexsum::io::read_text(work_dir() / name); }

json population(const std::string& name)
{
    if (!fs::exists(work_dir() / name)) REQUIRE(run("generate --n 12 --horizon 4 --seed 3 -o " + name) == 0);
    return json::parse(read(name));
}

}  // namespace

TEST_CASE("usage errors exit with 1")
{
    CHECK(run("generate --n 0") == 1);
    CHECK(run("generate") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("") == 1);
    CHECK(run("--version") == 0);
}

TEST_CASE("generate is deterministic and embeds metadata")
{
    const json a = population("pop.json");
    REQUIRE(run("--jobs 2 generate --n 12 --horizon 4 --seed 3 -o pop2.json") == 0);
    CHECK(read("pop.json") == read("pop2.json"));
    setenv("FLEXSUM_JOBS", "3", 1);
    REQUIRE(run("generate --n 12 --horizon 4 --seed 3 -o pop3.json") == 0);
    unsetenv("FLEXSUM_JOBS");
    CHECK(read("pop.json") == read("pop3.json"));
    CHECK(a.at("devices").size() == 12);
    CHECK(a.at("seed") == 3);
    CHECK(a.at("version").get<std::string>() == flexsum::version_string());
    CHECK(a.at("config").contains("p_max"));
    REQUIRE(run("generate --n 12 --horizon 4 --seed 4 -o pop4.json") == 0);
    CHECK(read("pop.json") != read("pop4.json"));
}

TEST_CASE("validate")
{
    population("pop.json");
    REQUIRE(run("validate --pop pop.json -o report.json") == 0);
    const json report = json::parse(read("report.json"));
    CHECK(report.at("passed") == true);
    CHECK(report.at("suites").size() == 4);

    json bad = population("pop.json");
    for (auto& d : bad.at("devices"))
        for (auto& v : d.at("approx").at("y_ub")) v = v.get<double>() + 1e-3;
    flexsum::io::write_json(work_dir() / "bad.json", bad);
    CHECK(run("validate --pop bad.json -o bad_report.json") == 3);
    const json br = json::parse(read("bad_report.json"));
    CHECK(br.at("suites").at(0).at("suite") == "containment");
    CHECK(br.at("suites").at(0).at("passed") == false);

    flexsum::io::write_text(work_dir() / "empty.json", R"({"horizon": 4, "devices": []})");
    CHECK(run("validate --pop empty.json") == 1);
    CHECK(run("validate --pop missing.json") == 1);
}

TEST_CASE("track")
{
    population("pop.json");
    CHECK(run("track --pop pop.json --signal nope.csv") == 1);
    CHECK(read("stderr.txt").find("nope.csv") != std::string::npos);

    REQUIRE(run("track --pop pop.json --synth inside --out-json track.json --out-csv track.csv --signal-out g.csv") == 0);
    const json t = json::parse(read("track.json"));
    CHECK(t.at("gpoly").at("rmse").get<double>() <= 1e-3);
    // both can be exact on a small instance; compare up to the solver gap
    CHECK(t.at("homothet").at("rmse").get<double>() + 1e-4 >= t.at("gpoly").at("rmse").get<double>());
    CHECK(read("track.csv").rfind("t,target,gpoly,homothet", 0) == 0);
    CHECK(json::parse(read("track.csv.meta.json")).contains("version"));

    // the written signal reads back and tracks to the same result
    REQUIRE(run("track --pop pop.json --signal g.csv --out-json track2.json") == 0);
    CHECK(json::parse(read("track2.json")).at("gpoly").at("aggregate") == t.at("gpoly").at("aggregate"));

    flexsum::io::write_text(work_dir() / "short.csv", "t,g_kW\n1,0.5\n");
    CHECK(run("track --pop pop.json --signal short.csv") == 1);
}

TEST_CASE("optimize, approx, aggregate")
{
    population("pop.json");
    REQUIRE(run("optimize --pop pop.json --disaggregate -o opt.json") == 0);
    const json o = json::parse(read("opt.json"));
    CHECK(o.at("disaggregation").at("feasible") == true);
    CHECK(o.at("gpoly").at("error").get<double>() >= -1e-9);
    CHECK(o.at("homothet").at("error").get<double>() >= -1e-9);

    flexsum::io::write_text(work_dir() / "cost.csv", "t,c\n1,1\n2,1\n3,1\n4,1\n");
    REQUIRE(run("optimize --pop pop.json --cost cost.csv --sense max -o opt2.json") == 0);
    const json o2 = json::parse(read("opt2.json"));
    CHECK(o2.at("gpoly").at("J").get<double>() <= o2.at("exact").at("J").get<double>() + 1e-9);
    CHECK(run("optimize --pop pop.json --sense sideways") == 1);

    REQUIRE(run("approx --pop pop.json -o approx.json") == 0);
    const json ap = json::parse(read("approx.json"));
    const json pop = population("pop.json");
    CHECK(ap.at("approximations").at(0).at("y_ub") == pop.at("devices").at(0).at("approx").at("y_ub"));

    REQUIRE(run("aggregate --pop pop.json --samples 5 -o agg.json") == 0);
    CHECK(json::parse(read("agg.json")).at("table").size() == 9);
}

TEST_CASE("approx-error")
{
    REQUIRE(run("approx-error --n 5 --horizons 2,4 --trials 2 --seed 2 -o err.csv --summary sum.csv --gnuplot plot.gp") ==
            0);
    const std::string csv = read("err.csv");
    CHECK(csv.rfind("experiment,seed,trial,n,horizon,method,j_approx,j_exact,error,wall_ms\n", 0) == 0);
    CHECK(read("sum.csv").rfind("horizon,trials,mean_error_gpoly,mean_error_homothet\n", 0) == 0);
    CHECK(read("plot.gp").find("sum.csv") != std::string::npos);
    CHECK(json::parse(read("err.csv.meta.json")).at("seed") == 2);

    population("pop.json");
    CHECK(run("approx-error --pop pop.json --horizons 2,8 --trials 1") == 1);
    CHECK(run("approx-error --pop pop.json --horizons 2,4 --trials 2 -o fixed.csv") == 0);
}
