// End-to-end checks of the command-line surface: verb dispatch, exit-code
// contract and CSV round trips, run against the installed binary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string out_path = "/tmp/spectral_cli_test_output.txt";
    const std::string cmd = std::string(SPECTRAL_CLI_PATH) + " " + args + " > " + out_path +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_path);
    std::stringstream buf;
    buf << in.rdbuf();
    int code = -1;
    if (WIFEXITED(status)) code = WEXITSTATUS(status);
    return {code, buf.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("bound verb and exit codes") {
    const RunResult ok =
        run_cli("bound --theorem A --delta0 1 --phi-norm 1 --a 0.3333 --n 1000");
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("gaussian") != std::string::npos);
    CHECK(ok.output.find("0.0151") != std::string::npos);
    // the run echoes its resolved configuration
    CHECK(ok.output.find("# theorem = A") != std::string::npos);
    CHECK(ok.output.find("# n = 1000") != std::string::npos);

    const RunResult below =
        run_cli("bound --theorem A --delta0 1 --phi-norm 1 --a 0.3333 --n 10");
    CHECK(below.exit_code == 2);  // inapplicable bound

    const RunResult contradictory =
        run_cli("bound --theorem C --delta0 1 --phi-tilde-norm 1 --n 100 --a 0.5");
    CHECK(contradictory.exit_code == 1);
    CHECK(contradictory.output.find("contradictory") != std::string::npos);

    const RunResult c_ok = run_cli("bound --theorem C --delta0 1 --phi-tilde-norm 1 --n 1000000");
    CHECK(c_ok.exit_code == 0);
    CHECK(c_ok.output.find("0.556") != std::string::npos);
}

TEST_CASE("plan verb") {
    const RunResult r = run_cli("plan --beta 0.01 --delta0 1 --phi-norm 1 --a 0.3333");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("planned_n 1081") != std::string::npos);
}

TEST_CASE("variance verb") {
    const RunResult exact =
        run_cli("variance --chain theta-lazy:4,0.5 --observable values:0,1,0,1");
    CHECK(exact.exit_code == 0);
    CHECK(exact.output.find("sigma2") != std::string::npos);

    const RunResult truncated = run_cli(
        "variance --chain theta-lazy:4,0.5 --observable values:0,1,0,1 --truncate 50 "
        "--out /tmp/spectral_cli_var.csv");
    CHECK(truncated.exit_code == 0);
    CHECK(truncated.output.find("tail_bound") != std::string::npos);
    const RunResult reparse = run_cli("report --in /tmp/spectral_cli_var.csv");
    CHECK(reparse.exit_code == 0);
}

TEST_CASE("verify-lemmas verb") {
    const RunResult r = run_cli(
        "verify-lemmas --chain theta-lazy:5,0.5 --suite 5.2 --phi-scale 0.8 --seed 3 "
        "--out /tmp/spectral_cli_lemmas.csv");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("0 failed") != std::string::npos);

    const std::string first = slurp("/tmp/spectral_cli_lemmas.csv");
    const RunResult round =
        run_cli("report --in /tmp/spectral_cli_lemmas.csv --out /tmp/spectral_cli_lemmas2.csv");
    CHECK(round.exit_code == 0);
    CHECK(slurp("/tmp/spectral_cli_lemmas2.csv") == first);
}

TEST_CASE("simulate and validate verbs with csv round trips") {
    const RunResult sim = run_cli(
        "simulate --chain theta-lazy:4,0.5 --observable values:0,1,1,0 --n 100 --trials 500 "
        "--seed 7 --a 0.1,0.4 --out /tmp/spectral_cli_sim.csv");
    CHECK(sim.exit_code == 0);
    CHECK(sim.output.find("ci_upper_99") != std::string::npos);

    const std::string sim_csv = slurp("/tmp/spectral_cli_sim.csv");
    const RunResult sim_round =
        run_cli("report --in /tmp/spectral_cli_sim.csv --out /tmp/spectral_cli_sim2.csv");
    CHECK(sim_round.exit_code == 0);
    CHECK(slurp("/tmp/spectral_cli_sim2.csv") == sim_csv);

    const RunResult val = run_cli(
        "validate --theorem A --chain theta-lazy:4,0.5 --observable values:0,1,1,0 "
        "--a-grid 0.2,0.45 --n-grid 119 --trials 400 --seed 5 --out /tmp/spectral_cli_val.csv");
    CHECK(val.exit_code == 0);
    CHECK(val.output.find("failures") != std::string::npos);
    const std::string val_csv = slurp("/tmp/spectral_cli_val.csv");
    CHECK(val_csv.rfind("chain,", 0) == 0);
    const RunResult val_round =
        run_cli("report --in /tmp/spectral_cli_val.csv --out /tmp/spectral_cli_val2.csv");
    CHECK(val_round.exit_code == 0);
    CHECK(slurp("/tmp/spectral_cli_val2.csv") == val_csv);

    // estimated-gap chains produce advisory lemma reports through the CLI too
    const RunResult advisory = run_cli(
        "verify-lemmas --chain hypercube:3 --norm localtv --suite 5.1 --seed 9");
    CHECK(advisory.exit_code == 0);
    CHECK(advisory.output.find("advisory") != std::string::npos);

    // sampler-only hypercube falls back to the step sampler with a warning
    const RunResult sampler = run_cli(
        "simulate --chain hypercube:22 --observable polarization --n 50 --trials 200 --seed 3");
    CHECK(sampler.exit_code == 0);
    CHECK(sampler.output.find("sampler only") != std::string::npos);

    // berry-esseen validation via exact DP, on a chain loaded from file
    std::ofstream spec("/tmp/spectral_cli_twostate.json");
    spec << R"({"states":["0","1"],"rows":[
      {"from":0,"to":0,"p":0.75},{"from":0,"to":1,"p":0.25},
      {"from":1,"to":0,"p":0.25},{"from":1,"to":1,"p":0.75}]})";
    spec.close();
    const RunResult be = run_cli(
        "validate --theorem C --chain file:/tmp/spectral_cli_twostate.json "
        "--observable values:0,1 --n-grid 100 --delta0 0.5");
    CHECK(be.exit_code == 0);
}

TEST_CASE("bound csv and json outputs round trip") {
    const RunResult csv = run_cli(
        "bound --theorem B --delta0 1 --phi-norm 1 --a 0.009 --n 1000000 --S 0.25 "
        "--out /tmp/spectral_cli_bound.csv");
    CHECK(csv.exit_code == 0);
    const std::string body = slurp("/tmp/spectral_cli_bound.csv");
    CHECK(body.rfind("theorem,", 0) == 0);
    const RunResult round =
        run_cli("report --in /tmp/spectral_cli_bound.csv --out /tmp/spectral_cli_bound2.csv");
    CHECK(round.exit_code == 0);
    CHECK(slurp("/tmp/spectral_cli_bound2.csv") == body);

    const RunResult json = run_cli(
        "bound --theorem A --delta0 0.5 --phi-norm 2 --a 0.1 --n 5000 "
        "--out /tmp/spectral_cli_bound.json");
    CHECK(json.exit_code == 0);
    const std::string jbody = slurp("/tmp/spectral_cli_bound.json");
    CHECK(jbody.find("\"theorem\": \"A\"") != std::string::npos);
}

TEST_CASE("bad inputs exit 1") {
    CHECK(run_cli("bound --theorem Z --delta0 1 --phi-norm 1 --a 0.1 --n 100").exit_code == 1);
    CHECK(run_cli("simulate --chain mystery:3 --observable values:0,1 --n 10 --trials 10")
              .exit_code == 1);
    CHECK(run_cli("variance --chain theta-lazy:4,0.5 --observable nonsense:1").exit_code == 1);
    CHECK(run_cli("report --in /tmp/definitely_missing_file.csv").exit_code == 1);
}
