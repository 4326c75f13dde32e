#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "fklab/config.hpp"
#include "fklab/io.hpp"

using namespace fklab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* tag) {
    const fs::path p = fs::temp_directory_path() / (std::string("fklab-test-") + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Certificate sample_cert() {
    Certificate c;
    c.key = "T1-sample-h8";
    c.kind = "T1";
    c.domain_name = "sample";
    c.dim = 3;
    c.h = 0.125;
    c.potential_source = "calibration";
    c.calibration_scale = 29.23;
    c.calibration_mu = 1.2e-13;
    c.lambda1 = 29.230259515665793;
    c.x0 = {0.4375, 0.4375, 0.4375};
    c.eta = 0.5;
    c.median_exit_time = 0.0459870682436529;
    c.t_bracket_lo = 0.045;
    c.t_bracket_hi = 0.047;
    c.norm_kind = "lorentz(n/2,1)";
    c.ball = BallSpec{{0.4375, 0.4375, 0.4375}, 0.2144};
    c.norm_value = 3.2520341523059551;
    c.ball_vol = BallSpec{{0.4375, 0.4375, 0.4375}, 0.133};
    c.norm_value_vol = 2.9;
    c.threshold = 1.0;
    c.chain.T = c.median_exit_time;
    c.chain.survival_at_T = 0.5;
    c.chain.fk_value_at_T = 1.0;
    c.chain.fk_min_to_2T = 1.0;
    c.chain.exp_moment_2v = 10.58;
    c.chain.khas_alpha_2v = 2.418;
    c.chain.khas_deficit = 3.55e-7;
    c.chain.khas_pad = 1.7;
    c.baselines.lambda1 = c.lambda1;
    c.baselines.volume = 1.0;
    c.baselines.fk_classical_constant = 25.65;
    c.baselines.fk_product = 29.23;
    c.baselines.lambda1_lower_bound = 25.65;
    c.baselines.vmax = 29.23;
    c.baselines.barta_gap = 0.0;
    c.baselines.r_exponent = 2.0;
    c.baselines.lr_norm = 29.23;
    c.baselines.global_product = 29.23;
    c.baselines.global_rhs_scale = 1.0;
    c.verdict = "PASS";
    c.notes.push_back("hand-built row for serialization tests");
    return c;
}

}  // namespace

TEST_CASE("experiment config maps every section") {
    const std::string text = R"(# full experiment description
schema_version = 1
h = 0.0625
seed = 99
paths = 500
horizon = 0.25
out_dir = "results"
eta = 0.4

[[domain]]
kind = "box"
name = "slab"
dim = 3
sides = [1.0, 1.0, 2.0]
lo = [0.0, 0.0, -1.0]

[[domain]]
kind = "ball"
dim = 2
radius = 1.5
center = [0.5, 0.5]

[coefficients]
kind = "checkerboard"
a = 2.0
b = 0.5
period_cells = 3

[potential]
kind = "ball_indicator"
value = 4.0
radius = 0.25
center = [0.5, 0.5, 1.0]

[pipeline]
threshold_t1 = 0.8
r_exponent = 2.5
with_chain = false

[tolerances]
eig_rel_tol = 1e-9
chain_slack = 0.05
)";
    const auto cfg = parse_config_text(text, "inline");
    CHECK(cfg.schema_version == 1);
    CHECK(cfg.h == 0.0625);
    CHECK(cfg.seed == 99);
    CHECK(cfg.paths == 500);
    CHECK(cfg.horizon == 0.25);
    CHECK(cfg.out_dir == "results");

    REQUIRE(cfg.domains.size() == 2);
    CHECK(cfg.domains[0].name == "slab");
    CHECK(cfg.domains[0].dim == 3);
    CHECK(cfg.domains[0].sides[2] == 2.0);
    CHECK(cfg.domains[0].lo[2] == -1.0);
    CHECK(cfg.domains[1].dim == 2);
    CHECK(cfg.domains[1].radius == 1.5);
    CHECK(cfg.domains[1].center[0] == 0.5);

    CHECK(cfg.coefficients.kind == CoefficientSpec::Kind::checkerboard);
    CHECK(cfg.coefficients.a == 2.0);
    CHECK(cfg.coefficients.b == 0.5);
    CHECK(cfg.coefficients.period_cells == 3);

    CHECK(cfg.potential.kind == PotentialSpec::Kind::ball_indicator);
    CHECK(cfg.potential.value == 4.0);
    CHECK(cfg.potential.ball.radius == 0.25);
    CHECK(cfg.potential.ball.center[2] == 1.0);

    CHECK(cfg.pipeline.eta == 0.4);  // falls back to the top-level eta
    CHECK(cfg.pipeline.threshold_t1 == 0.8);
    CHECK(cfg.pipeline.r_exponent == 2.5);
    CHECK(cfg.pipeline.with_chain == false);
    CHECK(cfg.pipeline.tol.eig_rel_tol == 1e-9);
    CHECK(cfg.pipeline.tol.chain_slack == 0.05);
    CHECK(cfg.pipeline.step.theta == cfg.pipeline.tol.theta);
}

TEST_CASE("config rejections carry location information") {
    auto fails_with = [](const std::string& text, const char* needle) {
        try {
            parse_config_text(text, "bad.toml");
            FAIL_CHECK("expected rejection for: " << needle);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    // a minimal valid domain block, for probes that target later validators
    // (the missing-domain check preempts them otherwise)
    const std::string dom = "[[domain]]\nkind = \"box\"\ndim = 2\n";

    fails_with("h = 0.1\nh = 0.2\n", "duplicate");
    fails_with("hh = 0.1\n" + dom, "hh");                // unknown key named
    fails_with("schema_version = 2\n", "schema_version");
    fails_with("h = sideways\n", "bad.toml:1");
    fails_with("eta = 1.5\n" + dom, "eta");
    fails_with(dom + "[unknown_table]\nx = 1\n", "unknown_table");
    fails_with("[[coefficients]]\nkind = \"identity\"\n", "domain");
    fails_with("[domain]\nkind = \"box\"\ndim = 4\n", "dim");
    fails_with("[domain]\nkind = \"ball\"\ndim = 2\nradius = -1.0\n", "radius");
    fails_with(dom + "[potential]\nkind = \"log_spike\"\nepsilon = 0.7\n", "epsilon");
    fails_with("paths = 0\n", "paths");
    fails_with("h = \"unterminated\n", "bad.toml:1");
}

TEST_CASE("missing config file raises a config error") {
    CHECK_THROWS_AS(load_config("/nonexistent/path/exp.toml"), ConfigError);
}

TEST_CASE("certificate serialization is byte-stable and parseable") {
    const Certificate cert = sample_cert();
    const std::string a = certificate_to_json(cert);
    const std::string b = certificate_to_json(cert);
    CHECK(a == b);
    CHECK(a.back() == '\n');

    const auto j = nlohmann::json::parse(a);
    CHECK(j["schema_version"] == 1);
    CHECK(j["key"] == "T1-sample-h8");
    CHECK(j["kind"] == "T1");
    CHECK(j["domain"] == "sample");
    CHECK(j["dim"] == 3);
    CHECK(j["calibration"]["scale"] == 29.23);
    CHECK(j["x0"].size() == 3);
    CHECK(j["x0"][0] == 0.4375);
    CHECK(j["exit_time"]["median"] == doctest::Approx(0.0459870682436529));
    CHECK(j["norm"]["kind"] == "lorentz(n/2,1)");
    CHECK(j["norm"]["value"] == doctest::Approx(3.2520341523059551));
    CHECK(j["norm"]["threshold"] == 1.0);
    CHECK(j["ball"]["radius"] == doctest::Approx(0.2144));
    CHECK(j["chain"]["khasminskii_alpha_2v"] == doctest::Approx(2.418));
    CHECK(j["baselines"]["fk_product"] == doctest::Approx(29.23));
    CHECK(j["numerics"]["lorentz_normalization"] == "distribution-function");
    CHECK(j["numerics"]["reduction_order"] == "pairwise-tree-4096");
    CHECK(j["verdict"] == "PASS");
    CHECK(j["notes"].size() == 1);
    CHECK(!j.contains("dichotomy"));  // only the T3 flavor carries it

    // schema_version leads the fixed key order
    CHECK(a.find("\"schema_version\"") < a.find("\"key\""));
    CHECK(a.find("\"key\"") < a.find("\"verdict\""));

    Certificate t3 = cert;
    t3.kind = "T3";
    t3.hypothesis_holds = true;
    t3.intersection_fraction = 1.0;
    t3.fraction_bound = 2.0 / 3.0;
    const auto j3 = nlohmann::json::parse(certificate_to_json(t3));
    CHECK(j3["dichotomy"]["hypothesis_holds"] == true);
    CHECK(j3["dichotomy"]["intersection_fraction"] == 1.0);

    Certificate plain = cert;
    plain.chain = ChainRecord{};  // no chain measured -> block omitted
    CHECK(!nlohmann::json::parse(certificate_to_json(plain)).contains("chain"));
}

TEST_CASE("summary rows and the report table") {
    const auto dir = fresh_dir("report");
    const Certificate cert = sample_cert();
    write_certificate(cert, (dir / "b-cert.json").string());

    Certificate second = cert;
    second.key = "T1-other-h16";
    second.verdict = "FAIL";
    write_certificate(second, (dir / "a-cert.json").string());

    write_text_file((dir / "notes.json").string(), "{\"cells\": 12}\n");
    write_text_file((dir / "broken.json").string(), "{not json\n");

    const auto row = summarize_certificate_file((dir / "b-cert.json").string());
    CHECK(!row.malformed);
    CHECK(row.key == "T1-sample-h8");
    CHECK(row.kind == "T1");
    CHECK(row.domain == "sample");
    CHECK(row.verdict == "PASS");
    CHECK(row.h == 0.125);
    CHECK(row.eta == 0.5);
    CHECK(row.T == doctest::Approx(0.0459870682436529));
    CHECK(row.norm_value == doctest::Approx(3.2520341523059551));
    CHECK(row.threshold == 1.0);

    CHECK(summarize_certificate_file((dir / "broken.json").string()).malformed);
    // readable JSON that is not a certificate is reported malformed, not invented
    CHECK(summarize_certificate_file((dir / "notes.json").string()).malformed);

    const auto rows = report_directory(dir.string());
    REQUIRE(rows.size() == 4);  // sorted by file name
    CHECK(rows[0].file.find("a-cert") != std::string::npos);
    CHECK(rows[1].file.find("b-cert") != std::string::npos);

    std::vector<CertSummary> good;
    for (const auto& r : rows)
        if (!r.malformed) good.push_back(r);
    const std::string table = render_summary_table(good);
    CHECK(table.find("T1-sample-h8") != std::string::npos);
    CHECK(table.find("PASS") != std::string::npos);
    CHECK(table.find("FAIL") != std::string::npos);

    fs::remove_all(dir);
}

TEST_CASE("csv cells round-trip doubles exactly") {
    const auto dir = fresh_dir("csv");
    const double tricky = 0.1 + 0.2;  // 0.30000000000000004
    write_csv((dir / "t.csv").string(), {"a", "b"}, {{tricky, 1.0 / 3.0}});
    const std::string text = read_text_file((dir / "t.csv").string());
    CHECK(text.find("a,b\n") == 0);
    const auto comma = text.find(',', 4);
    const std::string cell = text.substr(4, comma - 4);
    CHECK(std::stod(cell) == tricky);
    fs::remove_all(dir);
}

TEST_CASE("mask export writes a header and a flat byte grid") {
    const auto dir = fresh_dir("mask");
    auto mask = build_domain(DomainSpec::make_ball(2, 1.0), 0.25);
    export_mask(*mask, (dir / "disk").string());

    const auto j = nlohmann::json::parse(read_text_file((dir / "disk.json").string()));
    CHECK(j["n"] == 2);
    CHECK(j["h"] == 0.25);
    CHECK(j["dims"].size() == 2);
    CHECK(j["cells"] == mask->cell_count());
    CHECK(j["origin"].size() == 2);

    std::ifstream bin(dir / "disk.bin", std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(bin)),
                            std::istreambuf_iterator<char>());
    const std::size_t grid = static_cast<std::size_t>(mask->dims[0]) * mask->dims[1];
    CHECK(bytes.size() == grid);
    std::size_t ones = 0;
    for (char c : bytes) {
        CHECK((c == 0 || c == 1));
        if (c == 1) ++ones;
    }
    CHECK(ones == mask->cell_count());
    fs::remove_all(dir);
}
