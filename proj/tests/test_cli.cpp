#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = AUTOBENCH_WORKDIR;

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Run cli(const std::string& args)
{
    fs::create_directories(kWork);
    const std::string cmd = std::string("cd '") + kWork.string() + "' && '" + AUTOBENCH_EXE + "' " + args +
                            " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(kWork / "stdout.txt");
    r.err = slurp(kWork / "stderr.txt");
    return r;
}

void write(const fs::path& p, const std::string& s)
{
    std::ofstream(p, std::ios::binary) << s;
}

}  // namespace

TEST_CASE("emit, validate, inspect")
{
    auto r = cli("democar-emit --out dc.xml");
    REQUIRE(r.code == 0);
    const std::string first = slurp(kWork / "dc.xml");
    REQUIRE(cli("democar-emit --out dc2.xml").code == 0);
    CHECK(slurp(kWork / "dc2.xml") == first);

    r = cli("validate dc.xml");
    CHECK(r.code == 0);
    CHECK(r.out.find("0 violation(s)") != std::string::npos);

    r = cli("inspect dc.xml --tables");
    CHECK(r.code == 0);
    CHECK(r.out.find("tasks: 6") != std::string::npos);
    CHECK(r.out.find("hyperperiod: 100000 us") != std::string::npos);
    CHECK(r.out.find("Task10ms,TransFuelMassSWCEntity,128464,") != std::string::npos);
}

TEST_CASE("validate reports violations and parse errors")
{
    REQUIRE(cli("democar-emit --out dc.xml").code == 0);
    std::string doc = slurp(kWork / "dc.xml");
    const auto pos = doc.find("priority=\"25\"");
    REQUIRE(pos != std::string::npos);
    write(kWork / "dup.xml", doc.replace(pos, 13, "priority=\"30\""));
    auto r = cli("validate dup.xml");
    CHECK(r.code == 3);
    CHECK(r.err.find("dup.xml:") != std::string::npos);
    CHECK(r.err.find("Constraint") != std::string::npos);

    write(kWork / "broken.xml", "<amalthea>\n<swModel>\n</amalthea>\n");
    r = cli("validate broken.xml");
    CHECK(r.code == 3);
    CHECK(r.err.find("broken.xml:3:") != std::string::npos);
    CHECK(r.err.find("Syntax") != std::string::npos);

    CHECK(cli("validate missing.xml").code == 3);
}

TEST_CASE("evaluate")
{
    REQUIRE(cli("democar-emit --out dc.xml").code == 0);
    auto r = cli("evaluate dc.xml --all-on Core_0_0 --mesh 2x2 --active 1 --trace trace.csv");
    CHECK(r.code == 1);
    CHECK(r.out.find("missed deadlines: ") != std::string::npos);
    CHECK(r.out.find(" / 152") != std::string::npos);
    CHECK(slurp(kWork / "trace.csv").rfind("task,runnable,core,release_ns", 0) == 0);

    r = cli("evaluate dc.xml --all-on Core_1_1 --mesh 2x2 --active 3");
    CHECK(r.code == 2);  // inactive core

    CHECK(cli("evaluate dc.xml --mesh 2x2").code == 2);
    CHECK(cli("evaluate dc.xml --all-on Core_0_0 --mesh 2x2 --mode fastest").code == 2);
    CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("optimize is reproducible and its best allocation evaluates as reported")
{
    REQUIRE(cli("democar-emit --out dc.xml").code == 0);
    const std::string args = "optimize dc.xml --mesh 2x2 --active 3 --generations 30 --pop 20 --seed 3 ";
    auto r = cli(args + "--csv a.csv --best-alloc best.json");
    REQUIRE(r.code <= 1);
    REQUIRE(cli(args + "--csv b.csv").code == r.code);
    const std::string a = slurp(kWork / "a.csv");
    CHECK(a == slurp(kWork / "b.csv"));
    CHECK(a.rfind("generation,best_missed,best_makespan_us\n", 0) == 0);
    CHECK(std::count(a.begin(), a.end(), '\n') == 31);

    // the last CSV row and the evaluation of best.json agree
    const auto last = a.substr(a.rfind('\n', a.size() - 2) + 1);
    const auto missed = last.substr(last.find(',') + 1, last.rfind(',') - last.find(',') - 1);
    const auto makespan = last.substr(last.rfind(',') + 1, last.size() - last.rfind(',') - 2);
    auto e = cli("evaluate dc.xml --alloc best.json --mesh 2x2 --active 3");
    CHECK(e.out.find("missed deadlines: " + missed + " / 152") != std::string::npos);
    CHECK(e.out.find("makespan: " + makespan + " us") != std::string::npos);

    CHECK(cli("optimize dc.xml --mesh 2x2 --generations 5 --pop 4 --seed 1 --csv c.csv --elitism 9").code == 2);
}
