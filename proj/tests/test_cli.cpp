// End-to-end checks of the command-line tool: exit codes, manifests,
// config precedence, and byte-identical reruns.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <doctest.h>

#include "mca/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string tool_path()
{
    if (const char *env = std::getenv("MCA_BIN")) {
        return env;
    }
    // Fall back to the sibling tools directory of this test binary.
    char buf[4096];
    const ssize_t len = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
    if (len > 0) {
        buf[len] = '\0';
        const fs::path guess =
            fs::path(buf).parent_path().parent_path() / "tools" / "mca";
        if (fs::exists(guess)) {
            return guess.string();
        }
    }
    return "mca";
}

struct Sandbox {
    fs::path dir;
    Sandbox()
    {
        dir = fs::temp_directory_path() /
              ("mca_cli_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter++));
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }
    static int counter;
};

int Sandbox::counter = 0;

int run(const Sandbox &box, const std::string &args)
{
    const std::string cmd = "cd '" + box.dir.string() + "' && '" +
                            tool_path() + "' " + args + " >cli.out 2>cli.err";
    const int status = std::system(cmd.c_str());
    if (WIFEXITED(status)) {
        return WEXITSTATUS(status);
    }
    return -1;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("cli: synth is byte-identical across reruns")
{
    Sandbox box;
    REQUIRE(run(box, "synth --kind community_blocks --sizes 4,4 --length 128 "
                     "--seed 7 --out a") == 0);
    REQUIRE(run(box, "synth --kind community_blocks --sizes 4,4 --length 128 "
                     "--seed 7 --out b") == 0);
    CHECK(mca::io::file_digest(box.dir / "a.csv") ==
          mca::io::file_digest(box.dir / "b.csv"));
    CHECK(slurp(box.dir / "a.truth.csv") == slurp(box.dir / "b.truth.csv"));
    // Different seed, different bytes.
    REQUIRE(run(box, "synth --kind community_blocks --sizes 4,4 --length 128 "
                     "--seed 8 --out c") == 0);
    CHECK(mca::io::file_digest(box.dir / "a.csv") !=
          mca::io::file_digest(box.dir / "c.csv"));
}

TEST_CASE("cli: affinity output is independent of --threads")
{
    Sandbox box;
    REQUIRE(run(box, "synth --kind noise --n 6 --length 160 --seed 3 "
                     "--out n") == 0);
    REQUIRE(run(box, "affinity --in n.csv --meta n.meta --out a1.csv "
                     "--seed 5 --threads 1") == 0);
    REQUIRE(run(box, "affinity --in n.csv --meta n.meta --out a2.csv "
                     "--seed 5 --threads 2") == 0);
    REQUIRE(run(box, "affinity --in n.csv --meta n.meta --out a3.csv "
                     "--seed 5 --threads 7") == 0);
    CHECK(slurp(box.dir / "a1.csv") == slurp(box.dir / "a2.csv"));
    CHECK(slurp(box.dir / "a1.csv") == slurp(box.dir / "a3.csv"));
}

TEST_CASE("cli: usage errors exit 2, data errors exit 1")
{
    Sandbox box;
    CHECK(run(box, "no-such-command") == 2);
    CHECK(run(box, "affinity --bogus-flag 1") == 2);
    CHECK(run(box, "affinity") == 2); // missing required options
    CHECK(run(box, "affinity --in missing.csv --out x.csv") == 1);

    // Embedding dimension too large for a short ensemble names the flag.
    std::ofstream tiny(box.dir / "tiny.csv");
    tiny << "1,2,3,4\n4,3,2,1\n";
    tiny.close();
    CHECK(run(box, "affinity --in tiny.csv --out x.csv --embed-dim 40") == 2);
    const std::string err = slurp(box.dir / "cli.err");
    CHECK(err.find("--embed-dim") != std::string::npos);
}

TEST_CASE("cli: config precedence is flag > file > default")
{
    Sandbox box;
    {
        std::ofstream cfg(box.dir / "run.cfg");
        cfg << "# fixture config\n";
        cfg << "kind=noise\n";
        cfg << "n=4\n";
        cfg << "length=96\n";
        cfg << "seed=5\n";
    }
    // seed comes from the file.
    REQUIRE(run(box, "synth --config run.cfg --out f") == 0);
    const auto m1 = mca::io::load_keyvalue(box.dir / "f.csv.manifest");
    CHECK(m1.at("seed") == "5");
    CHECK(m1.at("length") == "96");
    CHECK(m1.at("dt") == "0.5"); // built-in default survives

    // The flag overrides the file.
    REQUIRE(run(box, "synth --config run.cfg --seed 9 --out g") == 0);
    const auto m2 = mca::io::load_keyvalue(box.dir / "g.csv.manifest");
    CHECK(m2.at("seed") == "9");
    CHECK(m2.at("length") == "96");
}

TEST_CASE("cli: manifests make reruns reproducible")
{
    Sandbox box;
    REQUIRE(run(box, "synth --kind noise --n 5 --length 128 --seed 2 "
                     "--out n") == 0);
    REQUIRE(run(box, "affinity --in n.csv --out a.csv --seed 11") == 0);
    const std::string manifest1 = slurp(box.dir / "a.csv.manifest");
    const std::string matrix1 = slurp(box.dir / "a.csv");
    REQUIRE(run(box, "affinity --in n.csv --out a.csv --seed 11") == 0);
    CHECK(slurp(box.dir / "a.csv.manifest") == manifest1);
    CHECK(slurp(box.dir / "a.csv") == matrix1);
    // The manifest names the command and carries the input digest.
    const auto kv = mca::io::load_keyvalue(box.dir / "a.csv.manifest");
    CHECK(kv.at("command") == "affinity");
    CHECK(kv.at("digest.n.csv") == mca::io::file_digest(box.dir / "n.csv"));
}

TEST_CASE("cli: pipeline recovers a small planted two-community fixture")
{
    Sandbox box;
    REQUIRE(run(box, "synth --kind community_blocks --sizes 10,10 "
                     "--length 488 --noise-sigma 0.5 --seed 4 --out c") == 0);
    REQUIRE(run(box, "pipeline --in c.csv --meta c.meta --out-dir run "
                     "--truth c.truth.csv --seed 4") == 0);
    CHECK(fs::exists(box.dir / "run" / "partition.csv"));
    CHECK(fs::exists(box.dir / "run" / "affinity.csv"));

    // The dice table reports near-perfect recovery for both communities.
    const std::string dice_csv = slurp(box.dir / "run" / "dice.csv");
    std::stringstream ss(dice_csv);
    std::string line;
    std::getline(ss, line); // header
    int rows = 0;
    while (std::getline(ss, line)) {
        if (line.empty()) {
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const double d = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        CHECK(d >= 0.9);
        rows++;
    }
    CHECK(rows == 2);
}

TEST_CASE("cli: pipeline runs entirely from one config file")
{
    Sandbox box;
    REQUIRE(run(box, "synth --kind community_blocks --sizes 8,8 "
                     "--length 244 --seed 12 --out c") == 0);
    {
        std::ofstream cfg(box.dir / "pipe.cfg");
        cfg << "in=c.csv\n";
        cfg << "meta=c.meta\n";
        cfg << "out-dir=run\n";
        cfg << "band-lo=0.0083\n";
        cfg << "band-hi=0.08\n";
        cfg << "truth=c.truth.csv\n";
        cfg << "seed=12\n";
    }
    REQUIRE(run(box, "pipeline --config pipe.cfg") == 0);
    CHECK(fs::exists(box.dir / "run" / "partition.csv"));
    CHECK(fs::exists(box.dir / "run" / "dice.csv"));
    const auto kv =
        mca::io::load_keyvalue(box.dir / "run" / "partition.csv.manifest");
    CHECK(kv.at("seed") == "12");
    CHECK(kv.at("command") == "pipeline");
}

TEST_CASE("cli: ccm emits the declared artifact set")
{
    Sandbox box;
    REQUIRE(run(box, "synth --kind coupled_logistic --length 300 --seed 6 "
                     "--out l") == 0);
    {
        std::ofstream reg(box.dir / "regions.csv");
        reg << "0,X\n1,Y\n";
    }
    REQUIRE(run(box, "ccm --in l.csv --meta l.meta --regions regions.csv "
                     "--out ccm --fractions 0.3,0.8 --repetitions 4 "
                     "--svg ccm.svg") == 0);
    for (const char *name : {"ccm.skills.csv", "ccm.summary.csv",
                             "ccm.edges.csv", "ccm.nodes.csv", "ccm.svg",
                             "ccm.summary.csv.manifest"}) {
        CHECK(fs::exists(box.dir / name));
    }
    // skills rows: fractions * reps * ordered pairs = 2 * 4 * 2.
    std::stringstream ss(slurp(box.dir / "ccm.skills.csv"));
    std::string line;
    int rows = -1; // discount header
    while (std::getline(ss, line)) {
        if (!line.empty()) {
            rows++;
        }
    }
    CHECK(rows == 16);
}
