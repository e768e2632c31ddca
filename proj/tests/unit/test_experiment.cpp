#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "pbgfluor/config.hpp"
#include "pbgfluor/csv.hpp"
#include "pbgfluor/error.hpp"
#include "pbgfluor/experiment.hpp"

using namespace pbgfluor;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const char* env = std::getenv("PBGFLUOR_TEST_TMP");
    auto dir = (env ? fs::path(env) : fs::temp_directory_path() / "pbgfluor_tests") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Small driven run: band kernel, everything cheap.
config::ExperimentConfig small_driven(std::vector<std::string> extra = {}) {
    std::vector<std::string> ov{"kernel.g=0.14", "grid.T=800", "grid.N=4000", "stationary.tol=1e-5", "omega.points=201"};
    ov.insert(ov.end(), extra.begin(), extra.end());
    return config::load_preset("laserband", ov);
}

} // namespace

TEST(Csv, NumberFormatRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 6.02e23, 0.0}) EXPECT_EQ(std::stod(csv::format_number(x)), x);
}

TEST(Run, DeterministicOutputAndManifestReplay) {
    const auto cfg = config::load_preset("markov-lorentzian", {"grid.N=512", "omega.points=101"});
    const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    experiment::write_outputs(experiment::run(cfg), a, 0.0);
    experiment::write_outputs(experiment::run(cfg), b, 1.0);
    EXPECT_EQ(slurp(a / "spectrum_finite_T.csv"), slurp(b / "spectrum_finite_T.csv"));

    const auto manifest = config::parse_config(a / "manifest.txt");
    experiment::write_outputs(experiment::run(manifest), c, 0.0);
    EXPECT_EQ(slurp(a / "spectrum_finite_T.csv"), slurp(c / "spectrum_finite_T.csv"));

    const auto table = csv::read_table(a / "spectrum_finite_T.csv");
    EXPECT_EQ(table.header, (std::vector<std::string>{"omega", "P", "d2P", "coherent_weight", "flags"}));
    EXPECT_EQ(table.columns[0].size(), 101u);
}

TEST(Run, DumpsUseDocumentedColumns) {
    const auto cfg = config::load_preset("markov-lorentzian",
                                         {"grid.N=64", "omega.points=11", "output.trajectory=true", "output.correlation=true"});
    const auto dir = scratch("dumps");
    experiment::write_outputs(experiment::run(cfg), dir, 0.0);
    EXPECT_EQ(csv::read_table(dir / "correlation.csv").header, (std::vector<std::string>{"t1", "t2", "Re", "Im"}));
    EXPECT_EQ(csv::read_table(dir / "trajectory.csv").columns[0].size(), 65u);
}

TEST(Run, PartialOutputsRemovedOnFailure) {
    const auto cfg = config::load_preset("markov-lorentzian", {"grid.N=64", "omega.points=11"});
    const auto dir = scratch("partial");
    fs::create_directories(dir / "manifest.txt");  // blocks the last file
    EXPECT_THROW(experiment::write_outputs(experiment::run(cfg), dir, 0.0), Error);
    EXPECT_FALSE(fs::exists(dir / "spectrum_finite_T.csv"));
}

TEST(Run, ErrorsNameTheModule) {
    const auto cfg = config::load_preset("laserband", {"grid.T=50", "grid.N=1000"});
    try {
        experiment::run(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(std::string(e.what()).rfind("dynamics:", 0), 0u) << e.what();
    }
}

TEST(Sweep, SpectrumOnlyKeys) {
    EXPECT_TRUE(experiment::spectrum_only_key("spatial.d"));
    EXPECT_TRUE(experiment::spectrum_only_key("omega.points"));
    EXPECT_FALSE(experiment::spectrum_only_key("atom.epsilon"));
    EXPECT_FALSE(experiment::spectrum_only_key("grid.N"));
}

TEST(Sweep, EmptyIsNoop) {
    EXPECT_TRUE(experiment::sweep(small_driven(), "spatial.d", {}).empty());
}

TEST(Sweep, DistanceReuseMatchesFreshRuns) {
    const auto base = small_driven({"run.pipelines=stationary", "spatial.enabled=true", "spatial.curvature=1",
                                    "spatial.omega_c=0.5"});
    const auto swept = experiment::sweep(base, "spatial.d", {"5", "20"});
    ASSERT_EQ(swept.size(), 2u);
    EXPECT_EQ(swept[0].dynamics, swept[1].dynamics);
    for (std::size_t i = 0; i < 2; ++i) {
        auto doc = base.document;
        doc.set("spatial.d", i == 0 ? "5" : "20");
        const auto fresh = experiment::run(config::resolve(doc));
        const auto& a = swept[i].spectra.front();
        const auto& b = fresh.spectra.front();
        ASSERT_EQ(a.power.size(), b.power.size());
        for (std::size_t j = 0; j < a.power.size(); ++j) EXPECT_NEAR(a.power[j], b.power[j], 1e-12 * b.max_power());
        ASSERT_TRUE(a.d2_power.has_value());
        EXPECT_DOUBLE_EQ(*a.distance, i == 0 ? 5.0 : 20.0);
    }
}
