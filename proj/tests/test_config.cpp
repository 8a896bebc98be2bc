#include <set>

#include <gtest/gtest.h>

#include "cellpol/config.hpp"
#include "cellpol/errors.hpp"

using namespace cellpol;

namespace {

ConfigError parse_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "no ConfigError for:\n" << text;
    return ConfigError("", 0, "");
}

}  // namespace

TEST(ParseConfig, MinimalUsesDefaults) {
    const RunConfig c = parse_config("model = exchange2d\nM = 20\n");
    EXPECT_EQ(c.model, Model::Exchange2D);
    EXPECT_EQ(c.params.M, 20.0);
    EXPECT_EQ(c.params.D, 1.0);
    EXPECT_EQ(c.params.chi, 1.0);
    EXPECT_EQ(c.params.S, std::vector<double>{1.0});
    EXPECT_EQ(c.params.k_on, 1.0);
    EXPECT_EQ(c.params.k_off, 1.0);
    EXPECT_EQ(c.params.alpha, 0.1);
    EXPECT_EQ(c.params.r, 1.0);
    EXPECT_EQ(c.nx, 64u);
    EXPECT_EQ(c.ny, 64u);
    EXPECT_EQ(c.dt, 1e-3);
    EXPECT_EQ(c.sign, SignConvention::Attractive);
}

TEST(ParseConfig, NegativeMassNamesConstraint) {
    const ConfigError e = parse_error("model = exchange2d\nM = -1\n");
    EXPECT_EQ(e.key(), "M");
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("M > 0"), std::string::npos);
}

TEST(ParseConfig, UnknownKey) {
    const ConfigError e = parse_error("M = 2\ngamma = 3\n");
    EXPECT_EQ(e.key(), "gamma");
    EXPECT_EQ(e.line(), 2);
}

TEST(ParseConfig, TypeMismatch) {
    EXPECT_EQ(parse_error("N_x = 6.5\n").key(), "N_x");
    EXPECT_EQ(parse_error("D = fast\n").key(), "D");
    EXPECT_EQ(parse_error("model = disk\n").key(), "model");
    EXPECT_EQ(parse_error("sign_convention = up\n").key(), "sign_convention");
}

TEST(ParseConfig, RepeatedKey) {
    const ConfigError e = parse_error("M = 1\nD = 2\nM = 3\n");
    EXPECT_EQ(e.key(), "M");
    EXPECT_EQ(e.line(), 3);
}

TEST(ParseConfig, CommentsSectionsAndWhitespace) {
    const RunConfig c = parse_config(
        "# reference run\n"
        "[model]\n"
        "model = simplified1d   # half-line\n"
        "\n"
        "[numerics]\n"
        "  N_x=400\n"
        "blowup_guard = 10x\n"
        "T_end = 5\n");
    EXPECT_EQ(c.model, Model::Simplified1D);
    EXPECT_EQ(c.nx, 400u);
    EXPECT_TRUE(c.blowup_guard.relative);
    EXPECT_EQ(c.blowup_guard.value, 10.0);
    EXPECT_EQ(c.thresholds(0.7).blowup_guard, 7.0);
    EXPECT_EQ(c.T_end, 5.0);
}

TEST(ParseConfig, SArray) {
    const RunConfig c = parse_config("N_y = 4\nS = 1, 2, 3, 4\n");
    EXPECT_EQ(c.params.S, (std::vector<double>{1, 2, 3, 4}));
    EXPECT_EQ(parse_error("N_y = 5\nS = 1, 2, 3, 4\n").key(), "S");
}

TEST(ParseConfig, ModelSpecificConstraints) {
    EXPECT_EQ(parse_error("model = exchange2d\nalpha = 0\n").key(), "alpha");
    EXPECT_NO_THROW(parse_config("model = reduced\nalpha = 0\n"));
    EXPECT_EQ(parse_error("model = exchange2d\nk_off = 200\n").key(), "dt_max");
}

TEST(ConfigKeys, CoverTheDocumentedSet) {
    const std::set<std::string> keys(config_keys().begin(), config_keys().end());
    for (const char* k : {"model", "D", "chi", "S", "k_on", "k_off", "alpha", "r", "M", "N_x", "N_y", "L", "dt",
                          "dt_max", "dt_floor", "T_end", "seed", "eps", "sign_convention", "snapshot_every",
                          "pol_threshold", "homog_threshold", "blowup_guard"}) {
        EXPECT_TRUE(keys.count(k)) << k;
    }
}

TEST(FormatConfig, RoundTrips) {
    RunConfig c;
    c.model = Model::Reduced;
    c.params.M = 0.1 + 0.2;
    c.params.D = 1.0 / 3.0;
    c.ny = 128;
    c.blowup_guard = {10.0, true};
    c.sign = SignConvention::PaperC2;
    c.seed = 123456789012345ull;
    const RunConfig back = parse_config(format_config(c));
    EXPECT_EQ(format_config(back), format_config(c));
    EXPECT_EQ(back.params.M, c.params.M);
    EXPECT_EQ(back.params.D, c.params.D);
    EXPECT_EQ(back.seed, c.seed);
    EXPECT_EQ(back.sign, SignConvention::PaperC2);
}

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(20.0), "20");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(SetConfigValue, OverridesOneKey) {
    RunConfig c = parse_config("M = 2\n");
    set_config_value(c, "M", "3.5");
    EXPECT_EQ(c.params.M, 3.5);
    EXPECT_THROW(set_config_value(c, "nope", "1"), ConfigError);
}
