#include "support.hpp"

#include "cli.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace {

std::string const config_dir = QDCASCADE_CONFIG_DIR;

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "qdcascade");
    std::ostringstream out, err;
    int const code = qdcascade::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json read_json(std::filesystem::path const &p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

std::string write_file(testsupport::TempDir const &dir, std::string const &name,
                       std::string const &text) {
    auto const p = dir / name;
    std::ofstream(p) << text;
    return p.string();
}

std::map<std::string, std::string> hashes(nlohmann::json const &manifest) {
    std::map<std::string, std::string> out;
    for (auto const &f : manifest["files"])
        out[f["name"]] = f["sha256"];
    return out;
}

} // namespace

TEST(Cli, MinimalConfigWritesTagsAndManifest) {
    testsupport::TempDir dir("cli-min");
    auto const r = run({"simulate", "--config", config_dir + "/minimal.cfg", "--out",
                        (dir / "run").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (auto const *name : {"sync.ctag", "xx.ctag", "x.ctag", "manifest.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / "run" / name)) << name;
    auto const m = read_json(dir / "run" / "manifest.json");
    EXPECT_EQ(m["files"].size(), 3u);
    EXPECT_EQ(m["pulses"], 1000);
    EXPECT_EQ(m["files"][0]["records"], 1000);  // one sync tag per pulse
    EXPECT_EQ(m["files"][0]["sha256"].get<std::string>().size(), 64u);
}

TEST(Cli, SameSeedGivesIdenticalFiles) {
    testsupport::TempDir dir("cli-det");
    auto const cfg = config_dir + "/cascade.cfg";
    auto const a = run({"simulate", "--config", cfg, "--pulses", "20000", "--out",
                        (dir / "a").string()});
    auto const b = run({"simulate", "--config", cfg, "--pulses", "20000", "--threads", "3",
                        "--out", (dir / "b").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    auto const ha = hashes(read_json(dir / "a" / "manifest.json"));
    EXPECT_EQ(ha.size(), 8u);
    EXPECT_EQ(ha, hashes(read_json(dir / "b" / "manifest.json")));
    auto const c = run({"simulate", "--config", cfg, "--pulses", "20000", "--seed", "8",
                        "--out", (dir / "c").string()});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_NE(ha.at("x.ctag"), hashes(read_json(dir / "c" / "manifest.json")).at("x.ctag"));
}

TEST(Cli, ExitCodes) {
    testsupport::TempDir dir("cli-exit");
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"--version"}).code, 0);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    auto const bad = write_file(dir, "bad.cfg", "emitter.tau_xx = 161 ps\n");
    auto const r = run({"simulate", "--config", bad, "--out", (dir / "o").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("emitter.tau_x"), std::string::npos) << r.err;
    auto const units = write_file(dir, "units.cfg",
                                  "emitter.tau_xx = 161 parsecs\nemitter.tau_x = 619 ps\n");
    EXPECT_EQ(run({"simulate", "--config", units, "--out", (dir / "o").string()}).code, 2);
    EXPECT_EQ(run({"reproduce", "nope"}).code, 2);
    EXPECT_EQ(run({"correlate", "--a", (dir / "none.ctag").string(), "--b",
                   (dir / "none.ctag").string()})
                  .code,
              2);
}

TEST(Cli, SimulateCorrelateFit) {
    testsupport::TempDir dir("cli-pipe");
    auto const out = (dir / "run").string();
    auto const sim = run({"simulate", "--config", config_dir + "/minimal.cfg", "--pulses",
                          "200000", "--out", out});
    ASSERT_EQ(sim.code, 0) << sim.err;
    auto const hist = (dir / "xx_x.csv").string();
    auto const cor = run({"correlate", "--a", out + "/xx.ctag", "--b", out + "/x.ctag",
                          "--window", "8000", "--out", hist});
    ASSERT_EQ(cor.code, 0) << cor.err;
    auto const fit = run({"fit-lifetime", "--input", hist, "--model", "mono", "--irf-fwhm",
                          "21", "--fit-lo", "-500", "--format", "json"});
    ASSERT_EQ(fit.code, 0) << fit.err;
    auto const j = nlohmann::json::parse(fit.out);
    EXPECT_EQ(j["model"], "mono");
    // Without the XX reference the X line decays with tau_x after the XX rise;
    // the mono fit of xx->x delays is dominated by tau_x.
    EXPECT_NEAR(j["tau_xx_ps"]["value"].get<double>(), 619.0, 40.0);
}

TEST(Cli, ReproduceAndFieldModel) {
    auto const r = run({"reproduce", "trion-correction"});
    EXPECT_EQ(r.code, 0) << r.err;
    auto const j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["pass"], true);
    auto const list = run({"reproduce", "--list"});
    EXPECT_NE(list.out.find("hom-pattern"), std::string::npos);

    auto const fm = run({"field-model", "--v-min", "-1", "--v-max", "0", "--v-step", "0.5"});
    ASSERT_EQ(fm.code, 0) << fm.err;
    EXPECT_NE(fm.out.find("voltage_v"), std::string::npos);
    EXPECT_NE(fm.out.find("onset_v"), std::string::npos);
}
