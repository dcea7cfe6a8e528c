// JSON run configuration, CSV/JSON serialization, and the command-line
// front end driven as a subprocess.
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "nlx/config.hpp"
#include "nlx/errors.hpp"
#include "nlx/io.hpp"

using namespace nlx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) { return parse_config(json::parse(text)); }

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const config_error& e) {
        return e.what();
    }
    return "";
}

fs::path work_dir() {
    static fs::path d = [] {
        fs::path p = fs::temp_directory_path() / "nlx_cli_tests";
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the installed command-line binary with the given arguments.
CliResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path so = work_dir() / ("stdout_" + std::to_string(counter) + ".txt");
    fs::path se = work_dir() / ("stderr_" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = std::string(NLX_CLI_PATH) + " " + args + " > " + so.string() + " 2> " +
                      se.string();
    int rc = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration parsing
// ---------------------------------------------------------------------------

TEST_CASE("empty config yields the documented defaults", "[config]") {
    RunConfig c = parse("{}");
    CHECK(c.kernel_id == "ball_abs+ball_linear");
    CHECK(c.domain.n == std::array<int, 3>{32, 32, 32});
    CHECK(c.domain.sides.x == 1.0);
    CHECK(c.field.family == "helix");
    CHECK(c.eps.empty());
    CHECK(c.deltas == std::vector<double>{0.5, 0.25, 0.125});
    CHECK(c.cone_aperture == 0.05);
    CHECK(c.delta_squared == 0.5);
    CHECK(c.recovery_tolerance == 0.08);
    CHECK(c.out_dir == ".");
    CHECK(c.threads == 0);
    CHECK_FALSE(c.csv_timing);
    CHECK_FALSE(c.has_relax);
}

TEST_CASE("unknown keys are rejected with their names", "[config]") {
    CHECK(error_of(R"({"bogus": 1})").find("bogus") != std::string::npos);
    CHECK(error_of(R"({"domain": {"shape": 3}})").find("shape") != std::string::npos);
    CHECK(error_of(R"({"domain": {"shape": 3}})").find("domain") != std::string::npos);
    // keys are gated per field family: a spiral has no radius
    CHECK(error_of(R"({"field": {"family": "helix", "radius": 0.2}})").find("radius") !=
          std::string::npos);
}

TEST_CASE("kernel block variants", "[config]") {
    CHECK(parse(R"({"kernel": {"pair": "prototype"}})").kernel_id == "ball_abs+ball_linear");
    CHECK(parse(R"({"kernel": {"rho": "gaussian_truncated", "nu": "ball_linear"}})").kernel_id ==
          "gaussian_truncated+ball_linear");
    CHECK(parse(R"({"kernel": {"rho": "ball_uniform", "nu": "ball_linear"}})").kernel_id ==
          "ball_uniform+ball_linear");
    CHECK_THROWS_AS(parse(R"({"kernel": {"pair": "other"}})"), config_error);
    CHECK_THROWS_AS(parse(R"({"kernel": {"rho": "no_such_profile", "nu": "ball_linear"}})"),
                    input_error);
    CHECK_THROWS_AS(parse(R"({"kernel": {"rho": "ball_abs", "nu": "no_such_profile"}})"),
                    config_error);
    CHECK_THROWS_AS(parse(R"({"kernel": {"rho": "ball_abs", "nu": {}}})"), config_error);
    CHECK_THROWS_AS(parse(R"({"kernel": {"rho": "ball_abs"}})"), config_error);  // nu missing
}

TEST_CASE("field blocks are family-gated", "[config]") {
    auto c1 = parse(R"({"field": {"family": "constant", "value": [0, 1, 0]}})");
    CHECK(c1.field.c.y == 1.0);
    CHECK(c1.field.on_sphere);

    auto c2 = parse(R"({"field": {"family": "linear",
                                  "matrix": [[1,0,0],[0,2,0],[0,0,3]]}})");
    CHECK(c2.field.A(2, 2) == 3.0);
    CHECK_FALSE(c2.field.on_sphere);

    auto c3 = parse(R"({"field": {"family": "helix", "k": 12.0, "axis": 2}})");
    CHECK(c3.field.k == 12.0);
    CHECK(c3.field.axis == 2);

    auto c4 = parse(R"({"field": {"family": "skyrmion_bubble", "radius": 0.3,
                                  "chirality": -1.0}})");
    CHECK(c4.field.radius == 0.3);
    CHECK(c4.field.chirality == -1.0);

    auto c5 = parse(R"({"field": {"family": "random_bandlimited", "seed": 11,
                                  "max_frequency": 3}})");
    CHECK(c5.field.seed == 11u);
    CHECK(c5.field.max_frequency == 3);

    CHECK_THROWS_AS(parse(R"({"field": {"family": "vortex"}})"), config_error);
    CHECK_THROWS_AS(parse(R"({"field": {}})"), config_error);  // family required
    CHECK_THROWS_AS(parse(R"({"field": {"family": "random_bandlimited", "seed": -4}})"),
                    config_error);
}

TEST_CASE("numeric validation of scalar settings", "[config]") {
    CHECK_THROWS_AS(parse(R"({"eps": [0.3, -0.1]})"), config_error);
    CHECK_THROWS_AS(parse(R"({"eps": [0.3, "x"]})"), config_error);
    CHECK_THROWS_AS(parse(R"({"threads": -1})"), config_error);
    CHECK_THROWS_AS(parse(R"({"csv_timing": 1})"), config_error);
    CHECK_THROWS_AS(parse(R"({"domain": {"resolution": [3, 8, 8]}})"), config_error);
    CHECK(parse(R"({"eps": [0.4, 0.2]})").eps == std::vector<double>{0.4, 0.2});
    CHECK(parse(R"({"threads": 3})").threads == 3);
    CHECK(parse(R"({"csv_timing": true})").csv_timing);
}

TEST_CASE("audit, tolerance and quadrature blocks", "[config]") {
    auto c = parse(R"({"audit": {"deltas": [0.4, 0.2], "cone_aperture": 0.1,
                                 "delta_squared": 0.25,
                                 "cone_directions": [[0,0,1],[0,1,0],[1,0,0]]},
                       "tolerances": {"recovery": 0.12, "mass": 1e-9},
                       "quadrature": {"rule": "cartesian", "cartesian_points": 48}})");
    CHECK(c.deltas == std::vector<double>{0.4, 0.2});
    CHECK(c.cone_aperture == 0.1);
    CHECK(c.delta_squared == 0.25);
    CHECK(c.cone_dirs[0].z == 1.0);
    CHECK(c.recovery_tolerance == 0.12);
    CHECK(c.hyp_tol.mass == 1e-9);
    CHECK(c.quadrature.rule == QuadratureSpec::Rule::cartesian);
    CHECK(c.quadrature.n_cart == 48);

    CHECK_THROWS_AS(parse(R"({"audit": {"cone_directions": [[0,0,1]]}})"), config_error);
    CHECK_THROWS_AS(parse(R"({"tolerances": {"wibble": 1}})"), config_error);
    CHECK_THROWS_AS(parse(R"({"quadrature": {"rule": "lebedev"}})"), config_error);
}

TEST_CASE("relax block parsing and validation wrapping", "[config]") {
    auto c = parse(R"({"relax": {"energy": "nonlocal", "eps": 0.35,
                                 "max_iterations": 40, "gradient_tolerance": 1e-4}})");
    CHECK(c.has_relax);
    CHECK(c.relax.selector == RelaxConfig::Energy::nonlocal);
    CHECK(c.relax.eps == 0.35);
    CHECK(c.relax.max_iterations == 40);

    auto c2 = parse(R"({"relax": {"energy": "local", "anisotropy": "isotropic",
                                  "coupling": "diagonal_third", "well_strength": 0.5}})");
    CHECK(c2.relax.selector == RelaxConfig::Energy::local);
    CHECK(c2.relax.well_strength == 0.5);
    CHECK(c2.relax.A.A(0, 0) == Catch::Approx(1.0 / 3.0));

    auto c3 = parse(R"({"relax": {"energy": "local",
                                  "anisotropy": [[0.5,0,0],[0,0.3,0],[0,0,0.2]],
                                  "coupling": [[0.1,0,0],[0,0.1,0],[0,0,0.1]]}})");
    CHECK(c3.relax.A.A(1, 1) == 0.3);
    CHECK(c3.relax.D.d[2].z == 0.1);

    CHECK_THROWS_AS(parse(R"({"relax": {}})"), config_error);  // energy required
    CHECK_THROWS_AS(parse(R"({"relax": {"energy": "thermal"}})"), config_error);
    CHECK_THROWS_AS(parse(R"({"relax": {"energy": "local", "anisotropy": "flat"}})"),
                    config_error);
    // carrier validation failures surface as config errors with context
    CHECK(error_of(R"({"relax": {"energy": "local",
                                 "anisotropy": [[1,0,0],[0,1,0],[0,0,1]]}})")
              .find("relax.anisotropy") != std::string::npos);
    CHECK(error_of(R"({"relax": {"energy": "local",
                                 "coupling": [[2,0,0],[0,2,0],[0,0,2]]}})")
              .find("relax.coupling") != std::string::npos);
    CHECK(error_of(R"({"relax": {"energy": "local", "max_iterations": -2}})")
              .find("relax") != std::string::npos);
}

TEST_CASE("field presets override the config", "[config]") {
    RunConfig c = parse(R"({"field": {"family": "constant"}})");
    apply_preset(c, "helix");
    CHECK(c.field.family == "helix");
    CHECK(c.field.k == Catch::Approx(2 * M_PI));
    apply_preset(c, "linear");
    CHECK(c.field.family == "linear");
    CHECK_FALSE(c.field.on_sphere);
    apply_preset(c, "skyrmion");
    CHECK(c.field.family == "skyrmion_bubble");
    apply_preset(c, "constant");
    CHECK(c.field.family == "constant");
    CHECK_THROWS_AS(apply_preset(c, "spiral"), config_error);
}

TEST_CASE("config files: missing and malformed", "[config]") {
    CHECK_THROWS_AS(load_config((work_dir() / "does_not_exist.json").string()), config_error);
    fs::path bad = work_dir() / "malformed.json";
    spit(bad, "{ not json ]");
    try {
        load_config(bad.string());
        FAIL("expected a config error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("parse error") != std::string::npos);
    }
}

TEST_CASE("bundled demo configs parse cleanly", "[config][demos]") {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(NLX_DEMO_DIR)) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().filename().string());
        RunConfig c = load_config(entry.path().string());
        ++seen;
        if (!c.eps.empty())
            for (std::size_t i = 0; i + 1 < c.eps.size(); ++i) CHECK(c.eps[i] > c.eps[i + 1]);
    }
    CHECK(seen >= 4);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

TEST_CASE("sweep CSV layout and timing suppression", "[io]") {
    EnergySweep s;
    SweepRow r;
    r.eps = 0.25;
    r.e.f_eps = 1.0 / 3.0;
    r.e.h_eps = -0.125;
    r.e.e_eps = 1.0 / 3.0 - 0.125;
    r.e.cross_term = 2.5;
    r.e.pairs = 123456789;
    r.e.seconds = 1.5;
    s.rows.push_back(r);

    std::string quiet = sweep_csv_string(s, false);
    std::istringstream lines(quiet);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "eps,f_eps,h_eps,e_eps,cross_term,pairs,seconds");
    CHECK(row.find("123456789") != std::string::npos);
    CHECK(row.substr(row.size() - 9) == ",0.000000");  // timing zeroed

    std::string timed = sweep_csv_string(s, true);
    CHECK(timed.find("1.500000") != std::string::npos);

    // %.17g survives a text round trip exactly
    std::string f_col = row.substr(row.find(',') + 1);
    f_col = f_col.substr(0, f_col.find(','));
    CHECK(std::stod(f_col) == 1.0 / 3.0);
}

TEST_CASE("trace CSV layout", "[io]") {
    RelaxTrace t;
    t.rows.push_back({0, 2.0, 0.5, 0.0});
    t.rows.push_back({1, 1.5, 0.25, 0.125});
    std::string csv = trace_csv_string(t);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "iter,energy,grad_norm,step");
    int rows = 0;
    for (std::string l; std::getline(lines, l);) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("JSON summaries map non-finite values to null", "[io]") {
    EnergyBreakdown e;
    e.f_eps = 1.0;
    e.cross_term = std::numeric_limits<double>::infinity();
    json j = to_json(e);
    CHECK(j["cross_term"].is_null());
    CHECK(j["f_eps"] == 1.0);
    CHECK(j["seconds"] == 0.0);

    EnergySweep s;
    s.field_id = "helix";
    s.kernel_id = "k";
    s.rows.push_back({0.3, e});
    json summary = sweep_summary_json(s);
    CHECK(summary["rows"].size() == 1);
    CHECK_FALSE(summary.contains("limits"));
    CHECK_FALSE(summary.contains("rates"));
    s.has_limits = true;
    s.f_limit = 2.0;
    summary = sweep_summary_json(s);
    CHECK(summary.contains("limits"));
    CHECK(summary["limits"]["f"] == 2.0);
}

// ---------------------------------------------------------------------------
// command-line front end (subprocess)
// ---------------------------------------------------------------------------

TEST_CASE("cli rejects missing and malformed configs", "[cli]") {
    auto r1 = run_cli("energy --config " + (work_dir() / "nope.json").string());
    CHECK(r1.exit_code == 2);
    CHECK(r1.err.find("config error") != std::string::npos);

    fs::path bad = work_dir() / "cli_malformed.json";
    spit(bad, "{{{");
    auto r2 = run_cli("energy --config " + bad.string());
    CHECK(r2.exit_code == 2);

    fs::path cfg = work_dir() / "cli_small.json";
    spit(cfg, R"({"domain": {"resolution": [8, 8, 8]}, "eps": [0.4]})");
    auto r3 = run_cli("energy --config " + cfg.string() + " --eps nonsense --out " +
                      (work_dir() / "o1").string());
    CHECK(r3.exit_code == 2);
    CHECK(r3.err.find("--eps") != std::string::npos);
}

TEST_CASE("cli surfaces the resolution floor with the required eps", "[cli]") {
    fs::path cfg = work_dir() / "cli_floor.json";
    spit(cfg, R"({"domain": {"resolution": [8, 8, 8]}, "eps": [0.1]})");
    auto r = run_cli("sweep --config " + cfg.string() + " --out " + (work_dir() / "o2").string());
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("smallest admissible eps") != std::string::npos);
    CHECK(r.err.find("0.25") != std::string::npos);
}

TEST_CASE("cli sweep is deterministic byte for byte", "[cli]") {
    fs::path cfg = work_dir() / "cli_sweep.json";
    spit(cfg, R"({"domain": {"resolution": [8, 8, 8]},
                  "field": {"family": "helix"},
                  "eps": [0.4, 0.3]})");
    fs::path oa = work_dir() / "sweep_a", ob = work_dir() / "sweep_b";
    auto ra = run_cli("sweep --config " + cfg.string() + " --out " + oa.string());
    auto rb = run_cli("sweep --config " + cfg.string() + " --out " + ob.string());
    REQUIRE(ra.exit_code == 0);
    REQUIRE(rb.exit_code == 0);
    CHECK(ra.out == rb.out);
    CHECK(ra.out.find("limits") != std::string::npos);
    CHECK(ra.out.find("audits: PASS") != std::string::npos);

    std::string name = "sweep_helix_ball_abs+ball_linear";
    CHECK(slurp(oa / (name + ".csv")) == slurp(ob / (name + ".csv")));
    CHECK(slurp(oa / (name + ".json")) == slurp(ob / (name + ".json")));

    json j = json::parse(slurp(oa / (name + ".json")));
    CHECK(j["rows"].size() == 2);
    CHECK(j["kernel"] == "ball_abs+ball_linear");
    CHECK(j.contains("limits"));
    CHECK(j.contains("audits"));
    CHECK(j.contains("recovery"));
}

TEST_CASE("cli hypothesis check passes and fails honestly", "[cli]") {
    fs::path cfg = work_dir() / "cli_check.json";
    spit(cfg, R"({"eps": [0.4, 0.2, 0.1]})");
    fs::path oc = work_dir() / "check_ok";
    auto ok = run_cli("check --config " + cfg.string() + " --out " + oc.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("FAIL") == std::string::npos);
    CHECK(fs::exists(oc / "hypotheses_ball_abs+ball_linear.json"));
    json j = json::parse(slurp(oc / "hypotheses_ball_abs+ball_linear.json"));
    CHECK(j["all_pass"] == true);
    CHECK(j["checks"].size() >= 8);

    // a sweep that never reaches small eps cannot satisfy the vanishing-tail
    // hypothesis; the command must say so and exit nonzero
    auto fail = run_cli("check --config " + cfg.string() + " --eps 0.4,0.3 --out " +
                        (work_dir() / "check_fail").string());
    CHECK(fail.exit_code == 1);
    CHECK(fail.out.find("FAIL") != std::string::npos);
}

TEST_CASE("cli single-point energy matches the library value", "[cli]") {
    fs::path cfg = work_dir() / "cli_energy.json";
    spit(cfg, R"({"domain": {"resolution": [12, 12, 12]},
                  "field": {"family": "helix"},
                  "eps": [0.4]})");
    fs::path oe = work_dir() / "energy_out";
    auto r = run_cli("energy --config " + cfg.string() + " --out " + oe.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("f=6.35841364202") != std::string::npos);
    CHECK(r.out.find("h=-0.814674397194") != std::string::npos);

    json j = json::parse(slurp(oe / "energy_helix_ball_abs+ball_linear.json"));
    CHECK(j["f_eps"].get<double>() == Catch::Approx(6.358413642024524).epsilon(1e-12));
    CHECK(j["eps"] == 0.4);

    // presets override the configured field
    auto rc = run_cli("energy --config " + cfg.string() + " --preset constant --out " +
                      (work_dir() / "energy_const").string());
    REQUIRE(rc.exit_code == 0);
    json jc = json::parse(
        slurp(work_dir() / "energy_const" / "energy_constant_ball_abs+ball_linear.json"));
    CHECK(jc["f_eps"] == 0.0);
    CHECK(jc["e_eps"] == 0.0);
}

TEST_CASE("cli relax reports convergence through exit codes", "[cli]") {
    // a uniform axis state with a zero coupling matrix and an easy-axis well is
    // already optimal: the run converges on the spot
    fs::path cfg = work_dir() / "cli_relax_ok.json";
    spit(cfg, R"({"domain": {"resolution": [6, 6, 6]},
                  "field": {"family": "constant", "value": [0, 0, 1]},
                  "relax": {"energy": "local",
                            "coupling": [[0,0,0],[0,0,0],[0,0,0]],
                            "well_strength": 0.5}})");
    fs::path oo = work_dir() / "relax_ok";
    auto ok = run_cli("relax --config " + cfg.string() + " --out " + oo.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("termination=tolerance") != std::string::npos);
    CHECK(fs::exists(oo / "relax_constant_trace.csv"));
    CHECK(fs::exists(oo / "relax_constant_field.txt"));
    json j = json::parse(slurp(oo / "relax_constant.json"));
    CHECK(j["reached_tolerance"] == true);
    CHECK(j["iterations"] == 0);

    // zero iteration budget on a non-critical seed: honest non-convergence
    fs::path cfg2 = work_dir() / "cli_relax_budget.json";
    spit(cfg2, R"({"domain": {"resolution": [6, 6, 6]},
                   "field": {"family": "helix"},
                   "relax": {"energy": "local", "max_iterations": 0}})");
    auto no = run_cli("relax --config " + cfg2.string() + " --out " +
                      (work_dir() / "relax_budget").string());
    CHECK(no.exit_code == 4);
    CHECK(no.out.find("termination=max_iterations") != std::string::npos);

    // relax without a relax block is a config error
    fs::path cfg3 = work_dir() / "cli_relax_missing.json";
    spit(cfg3, R"({"domain": {"resolution": [6, 6, 6]}})");
    auto miss = run_cli("relax --config " + cfg3.string() + " --out " +
                        (work_dir() / "relax_missing").string());
    CHECK(miss.exit_code == 2);
}
