#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "resguide/io.hpp"
#include "resguide/synthetic.hpp"

using namespace resguide;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int status;
    std::string out;
    std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int status = cli::run(args, out, err);
    return {status, out.str(), err.str()};
}

fs::path workdir() {
    const fs::path dir = fs::temp_directory_path() / "resguide_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    const auto b = read_file(p);
    return {b.begin(), b.end()};
}

bool single_error_line(const std::string& err) {
    return err.rfind("error: ", 0) == 0 && err.find('\n') == err.size() - 1;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto entries = cli::parse_config("# experiment\nq = 0.2\n\nseed=7  # trailing\n  steps =  12 \n");
    REQUIRE(entries.size() == 3);
    CHECK(entries[0] == std::pair<std::string, std::string>{"q", "0.2"});
    CHECK(entries[1] == std::pair<std::string, std::string>{"seed", "7"});
    CHECK(entries[2] == std::pair<std::string, std::string>{"steps", "12"});
    CHECK_THROWS_AS(cli::parse_config("novalue\n"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_config("= 3\n"), std::invalid_argument);
}

TEST_CASE("embed writes all artifacts and honours ablation") {
    const fs::path dir = workdir();
    write_pgm(dir / "cover.pgm", make_textured_cover(32, 32, 1));
    const Outcome r = run_cli({"embed", "--in", (dir / "cover.pgm").string(), "--q", "0.4", "--seed", "7", "--steps",
                               "20", "--ablate", "rdg,lvg", "--out-dir", (dir / "run").string()});
    REQUIRE(r.status == 0);
    for (const char* suffix : {".stego.pgm", ".prob.rgpm", ".loss.csv", ".metrics.csv"})
        CHECK(fs::exists(dir / "run" / (std::string("cover") + suffix)));
    const std::string loss = slurp(dir / "run" / "cover.loss.csv");
    CHECK(loss.rfind("step,l1,l2,l3,l4,total,active\n", 0) == 0);
    std::istringstream lines(loss);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    CHECK(line.size() > 0);
    CHECK(line.substr(line.rfind(',') + 1) == "RG");
    CHECK(slurp(dir / "run" / "cover.metrics.csv").rfind("method,seed,change_rate", 0) == 0);
}

TEST_CASE("embed is byte-for-byte reproducible") {
    const fs::path dir = workdir();
    write_pgm(dir / "det.pgm", make_textured_cover(32, 32, 2));
    for (const char* out : {"det1", "det2"}) {
        REQUIRE(run_cli({"embed", "--in", (dir / "det.pgm").string(), "--seed", "3", "--steps", "15", "--out-dir",
                         (dir / out).string()})
                    .status == 0);
    }
    for (const char* suffix : {".stego.pgm", ".prob.rgpm", ".loss.csv", ".metrics.csv"}) {
        const std::string name = std::string("det") + suffix;
        CHECK(slurp(dir / "det1" / name) == slurp(dir / "det2" / name));
    }
}

TEST_CASE("baseline methods") {
    const fs::path dir = workdir();
    write_pgm(dir / "base.pgm", make_textured_cover(48, 48, 3));
    REQUIRE(run_cli({"embed", "--in", (dir / "base.pgm").string(), "--method", "hill", "--q", "0.2", "--out-dir",
                     (dir / "hill").string()})
                .status == 0);
    std::istringstream csv(slurp(dir / "hill" / "base.metrics.csv"));
    std::string header;
    std::string row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(row.rfind("hill,0,", 0) == 0);
    const std::string rest = row.substr(7);
    const double bpp = std::stod(rest.substr(rest.find(',') + 1));
    CHECK(std::fabs(bpp - 0.2) < 0.001);
    CHECK_FALSE(fs::exists(dir / "hill" / "base.loss.csv"));

    CHECK(run_cli({"embed", "--in", (dir / "base.pgm").string(), "--method", "random-uniform", "--out-dir",
                   (dir / "uniform").string()})
              .status == 0);
    const Outcome bad = run_cli({"embed", "--in", (dir / "base.pgm").string(), "--method", "wow", "--out-dir",
                                 (dir / "x").string()});
    CHECK(bad.status != 0);
    CHECK(single_error_line(bad.err));
}

TEST_CASE("metrics subcommand") {
    const fs::path dir = workdir();
    const Image cover = make_textured_cover(32, 32, 4);
    write_pgm(dir / "m_cover.pgm", cover);
    write_rgpm(dir / "m.rgpm", ProbabilityMap::uniform(32, 32, 0.2));
    Outcome r = run_cli({"metrics", "--cover", (dir / "m_cover.pgm").string(), "--stego",
                         (dir / "m_cover.pgm").string(), "--prob", (dir / "m.rgpm").string()});
    REQUIRE(r.status == 0);
    std::istringstream lines(r.out);
    std::string header;
    std::string row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "change_rate,payload_bpp,residual_distance,prob_residual_rank_corr,mask_mass_ratio");
    CHECK(row.rfind("0,", 0) == 0);
    CHECK(row.substr(row.find(',', row.find(',') + 1) + 1).rfind("0,", 0) == 0);

    Image one = cover;
    one(0, 0) = static_cast<std::uint8_t>(one(0, 0) ^ 1);
    write_pgm(dir / "m_one.pgm", one);
    r = run_cli({"metrics", "--cover", (dir / "m_cover.pgm").string(), "--stego", (dir / "m_one.pgm").string(), "--prob",
                 (dir / "m.rgpm").string()});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("\n0.0009765625,") != std::string::npos);

    const auto full = read_file(dir / "m.rgpm");
    write_file(dir / "cut.rgpm", std::vector<unsigned char>(full.begin(), full.begin() + 40));
    r = run_cli({"metrics", "--cover", (dir / "m_cover.pgm").string(), "--stego", (dir / "m_cover.pgm").string(),
                 "--prob", (dir / "cut.rgpm").string()});
    CHECK(r.status != 0);
    CHECK(single_error_line(r.err));
    CHECK(r.err.find("bad sidecar") != std::string::npos);

    write_pgm(dir / "m_big.pgm", make_textured_cover(40, 32, 4));
    r = run_cli({"metrics", "--cover", (dir / "m_cover.pgm").string(), "--stego", (dir / "m_big.pgm").string(), "--prob",
                 (dir / "m.rgpm").string()});
    CHECK(r.status != 0);
    CHECK(r.err == "error: dimension mismatch\n");
}

TEST_CASE("gradcheck subcommand") {
    Outcome r = run_cli({"gradcheck"});
    CHECK(r.status == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 9);
    CHECK(r.out.find("FAIL") == std::string::npos);
    r = run_cli({"gradcheck", "--lambda-slope", "1e6"});
    CHECK(r.status == 0);
    r = run_cli({"gradcheck", "--steps", "0"});
    CHECK(r.status != 0);
    CHECK(single_error_line(r.err));
}

TEST_CASE("ablate subcommand writes seven rows") {
    const fs::path dir = workdir();
    write_pgm(dir / "abl.pgm", make_textured_cover(32, 32, 5));
    const Outcome r = run_cli({"ablate", "--in", (dir / "abl.pgm").string(), "--steps", "10", "--out-dir",
                               (dir / "abl").string()});
    REQUIRE(r.status == 0);
    const std::string csv = slurp(dir / "abl" / "abl.ablation.csv");
    CHECK(csv.rfind("subset,l1,l2,l3,l4,total,change_rate,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
    CHECK(csv.find("\nRG+RDG+LVG,") != std::string::npos);
}

TEST_CASE("kernel dump subcommand") {
    const Outcome r = run_cli({"kernel", "dump"});
    CHECK(r.status == 0);
    CHECK(r.out.rfind("KB3 3\n", 0) == 0);
}

TEST_CASE("config file supplies defaults that flags override") {
    const fs::path dir = workdir();
    write_pgm(dir / "cfg.pgm", make_textured_cover(32, 32, 6));
    write_file(dir / "run.cfg", std::string("steps = 5\nseed = 11\nmethod = random-uniform\nq = 0.3\n"));
    Outcome r = run_cli({"embed", "--config", (dir / "run.cfg").string(), "--in", (dir / "cfg.pgm").string(), "--q",
                         "0.2", "--out-dir", (dir / "cfg").string()});
    REQUIRE(r.status == 0);
    const std::string metrics = slurp(dir / "cfg" / "cfg.metrics.csv");
    CHECK(metrics.find("\nrandom-uniform,11,") != std::string::npos);
    std::istringstream lines(metrics);
    std::string row;
    std::getline(lines, row);
    std::getline(lines, row);
    const std::string rest = row.substr(std::string("random-uniform,11,").size());
    CHECK(std::fabs(std::stod(rest.substr(rest.find(',') + 1)) - 0.2) < 1e-9);

    write_file(dir / "bad.cfg", std::string("steps\n"));
    r = run_cli({"embed", "--config", (dir / "bad.cfg").string(), "--in", (dir / "cfg.pgm").string(), "--out-dir",
                 (dir / "cfg").string()});
    CHECK(r.status != 0);
    CHECK(single_error_line(r.err));
}

TEST_CASE("error paths produce one line and a nonzero status") {
    const fs::path dir = workdir();
    for (const auto& args : std::vector<std::vector<std::string>>{
             {},
             {"frobnicate"},
             {"embed", "--in", (dir / "nope.pgm").string(), "--out-dir", (dir / "e").string()},
             {"embed", "--in", (dir / "cfg.pgm").string()},
             {"embed", "--in", (dir / "cfg.pgm").string(), "--q", "2", "--out-dir", (dir / "e").string()},
             {"embed", "--in", (dir / "cfg.pgm").string(), "--q", "abc", "--out-dir", (dir / "e").string()},
             {"ablate", "--in", (dir / "nope.pgm").string(), "--out-dir", (dir / "e").string()},
         }) {
        const Outcome r = run_cli(args);
        CHECK(r.status != 0);
        CHECK_MESSAGE(single_error_line(r.err), r.err);
    }
}
