#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "rydion/cli.hpp"
#include "rydion/curve.hpp"

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("rydion");
    for (const auto& a : args) argv.push_back(a.c_str());
    return rydion::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::vector<std::string> toy_envelope_flags = {
    "--envelope-t-on", "2",  "--envelope-w-on",  "0.4",
    "--envelope-t-off", "8", "--envelope-w-off", "0.5",
    "--cycles", "12"};

void append(std::vector<std::string>& args, const std::vector<std::string>& extra) {
    args.insert(args.end(), extra.begin(), extra.end());
}

} // namespace

TEST_CASE("cli: missing required flag exits 2") {
    CHECK(run_cli({"quantum-curve"}) == 2);
    CHECK(run_cli({"classical-curve", "--trajectories", "5"}) == 2);
    CHECK(run_cli({"no-such-command"}) == 2);
    CHECK(run_cli({}) == 2);
}

TEST_CASE("cli: quantum curve row count follows the grid") {
    const auto dir = temp_dir("rydion_cli_q");
    const auto out = (dir / "curve.csv").string();
    std::vector<std::string> args = {"quantum-curve", "--n0",       "37",
                                     "--m0",          "0",          "--basis-lo",
                                     "30",            "--basis-hi", "40",
                                     "--field-lo",    "340",        "--field-hi",
                                     "344",           "--steps-per-cycle", "400",
                                     "--out",         out};
    append(args, toy_envelope_flags);
    CHECK(run_cli(args) == 0);
    const rydion::IonizationCurve curve = rydion::read_curve_csv(out);
    CHECK(curve.size() == 5);
    CHECK(curve.field_lo == 340.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: zero-field single-point grid gives p_ion = 0") {
    const auto dir = temp_dir("rydion_cli_q0");
    const auto out = (dir / "curve.csv").string();
    std::vector<std::string> args = {"quantum-curve", "--n0", "37", "--m0", "0",
                                     "--basis-lo", "30", "--basis-hi", "40",
                                     "--field-lo", "0", "--field-hi", "0",
                                     "--steps-per-cycle", "400", "--out", out};
    append(args, toy_envelope_flags);
    CHECK(run_cli(args) == 0);
    const rydion::IonizationCurve curve = rydion::read_curve_csv(out);
    REQUIRE(curve.size() == 1);
    CHECK(curve.p[0] == 0.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: classical curve determinism and validation") {
    const auto dir = temp_dir("rydion_cli_c");
    const auto out1 = (dir / "a.csv").string();
    const auto out2 = (dir / "b.csv").string();
    std::vector<std::string> base = {"classical-curve", "--n0", "37",
                                     "--field-lo", "330", "--field-hi", "350",
                                     "--field-step", "10",
                                     "--trajectories", "5", "--seed", "77",
                                     "--steps-per-cycle", "256"};
    append(base, toy_envelope_flags);

    std::vector<std::string> args1 = base;
    append(args1, {"--out", out1});
    std::vector<std::string> args2 = base;
    append(args2, {"--out", out2});
    CHECK(run_cli(args1) == 0);
    CHECK(run_cli(args2) == 0);
    CHECK(slurp(out1) == slurp(out2)); // same seed, identical bytes

    std::vector<std::string> bad = {"classical-curve", "--n0", "37",
                                    "--trajectories", "0"};
    CHECK(run_cli(bad) == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: average over eight identical curves is the identity") {
    const auto dir = temp_dir("rydion_cli_avg");
    rydion::IonizationCurve curve;
    curve.field_lo = 340.0;
    curve.step = 1.0;
    curve.p = {0.0, 0.25, 0.5, 0.75, 1.0};
    curve.meta = {37, "x", "quantum", false};
    for (int m0 : {0, 5, 10, 15, 20, 25, 30, 35})
        rydion::write_curve_csv(curve,
                                dir / ("m" + std::to_string(m0) + "_quantum.csv"));

    const auto out = (dir / "avg.csv").string();
    CHECK(run_cli({"average", "--in-dir", dir.string(), "--out", out}) == 0);
    const rydion::IonizationCurve avg = rydion::read_curve_csv(out);
    REQUIRE(avg.size() == curve.size());
    for (int i = 0; i < avg.size(); ++i)
        CHECK(avg.p[static_cast<size_t>(i)] ==
              doctest::Approx(curve.p[static_cast<size_t>(i)]).epsilon(1e-12));

    // missing file is reported with exit 2
    std::filesystem::remove(dir / "m15_quantum.csv");
    CHECK(run_cli({"average", "--in-dir", dir.string(), "--out", out}) == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: separate droop pass matches the single-pass average") {
    const auto dir = temp_dir("rydion_cli_droop");
    std::mt19937_64 rng(13);
    for (int m0 : {0, 5, 10, 15, 20, 25, 30, 35}) {
        rydion::IonizationCurve curve;
        curve.field_lo = 330.0;
        curve.step = 1.0;
        curve.p.resize(60);
        for (double& p : curve.p)
            p = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        curve.meta = {37, std::to_string(m0), "quantum", false};
        rydion::write_curve_csv(curve, dir / ("m" + std::to_string(m0) + "_quantum.csv"));
    }
    const auto combined = (dir / "combined.csv").string();
    const auto plain = (dir / "plain.csv").string();
    const auto two_pass = (dir / "two_pass.csv").string();
    CHECK(run_cli({"average", "--in-dir", dir.string(), "--droop", "on", "--out",
                   combined}) == 0);
    CHECK(run_cli({"average", "--in-dir", dir.string(), "--droop", "off", "--out",
                   plain}) == 0);
    CHECK(run_cli({"droop", "--in", plain, "--out", two_pass}) == 0);
    // %.17g round-trips doubles, so the data rows agree bit for bit (the
    // leading metadata comment differs)
    auto data_rows = [](const std::filesystem::path& p) {
        std::istringstream in(slurp(p));
        std::string line, rows;
        while (std::getline(in, line))
            if (!line.empty() && line[0] != '#') rows += line + "\n";
        return rows;
    };
    CHECK(data_rows(combined) == data_rows(two_pass));

    // malformed CSV input exits 2
    {
        std::ofstream bad(dir / "m0_quantum.csv");
        bad << "field_V_per_cm,p_ion\n330,0.2\nbroken\n";
    }
    CHECK(run_cli({"average", "--in-dir", dir.string(), "--out", plain}) == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: matelem dumps a symmetric matrix") {
    const auto dir = temp_dir("rydion_cli_mat");
    const auto out = (dir / "z.csv").string();
    CHECK(run_cli({"matelem", "--m0", "0", "--basis-lo", "30", "--basis-hi", "34",
                   "--out", out}) == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "n,nprime,z_au");
    std::map<std::pair<int, int>, double> z;
    int n, np;
    double v;
    char c1, c2;
    while (in >> n >> c1 >> np >> c2 >> v) z[{n, np}] = v;
    CHECK(z.size() == 25);
    for (const auto& [key, val] : z) CHECK(val == z.at({key.second, key.first}));
    CHECK(z.at({30, 30}) == doctest::Approx(1.5 * 30 * 29).epsilon(1e-8));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: reproduce dry run prints the task count") {
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    const int rc = run_cli({"reproduce", "--preset", "n37", "--field-lo", "340",
                            "--field-hi", "350", "--field-step", "5", "--dry-run"});
    std::cout.rdbuf(old);
    CHECK(rc == 0);
    // 3-point grid: 8 m0 quantum curves plus the microcanonical classical one
    CHECK(captured.str().find("quantum tasks: 24") != std::string::npos);
    CHECK(captured.str().find("classical tasks: 3") != std::string::npos);
}

TEST_CASE("cli: config file supplies defaults, flags override") {
    const auto dir = temp_dir("rydion_cli_cfg");
    const auto cfg = dir / "rydion.ini";
    {
        std::ofstream out(cfg);
        out << "[quantum-curve]\n"
               "n0=37\nm0=0\nbasis-lo=30\nbasis-hi=40\n"
               "field-lo=340\nfield-hi=342\nsteps-per-cycle=400\n"
               "envelope-t-on=2\nenvelope-w-on=0.4\n"
               "envelope-t-off=8\nenvelope-w-off=0.5\ncycles=12\n";
    }
    const auto out_a = (dir / "a.csv").string();
    CHECK(run_cli({"quantum-curve", "--config", cfg.string(), "--out", out_a}) == 0);
    const rydion::IonizationCurve a = rydion::read_curve_csv(out_a);
    CHECK(a.size() == 3);

    const auto out_b = (dir / "b.csv").string();
    CHECK(run_cli({"quantum-curve", "--config", cfg.string(), "--field-hi", "344",
                   "--out", out_b}) == 0);
    CHECK(rydion::read_curve_csv(out_b).size() == 5);
    std::filesystem::remove_all(dir);
}
