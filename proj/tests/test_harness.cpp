#include "doctest.h"
#include "latkey/harness.hpp"
#include "latkey/json_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace latkey;

namespace {

CampaignConfig toy_config() {
    CampaignConfig c;
    c.ell = 16;
    c.p_bits = 32;
    c.delta = 8;
    c.delta_l = 4;
    c.signatures = 4;
    c.trials = 4;
    c.seed = 7;
    c.scheme = SchemeChoice::Dsa;
    c.block_size = 4;
    return c;
}

// strips the wall_ms column so reruns can be compared byte-for-byte
std::string strip_wall(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i == 3) continue;
            out += cells[i];
            out += ',';
        }
        out += '\n';
    }
    return out;
}

}  // namespace

TEST_CASE("run_trial succeeds on a toy config and reproduces itself") {
    auto c = toy_config();
    auto row = run_trial(c, 0);
    CHECK(row.success);
    CHECK(row.reason.empty());
    CHECK(row.points > 0);
    CHECK(row.nodes >= row.points);

    auto again = run_trial(c, 0);
    CHECK(again.success == row.success);
    CHECK(again.seed == row.seed);
    CHECK(again.points == row.points);
    CHECK(again.nodes == row.nodes);
    CHECK(again.index_tried == row.index_tried);

    auto other = run_trial(c, 1);
    CHECK(other.seed != row.seed);
}

TEST_CASE("run_campaign aggregates match the rows") {
    auto c = toy_config();
    auto report = run_campaign(c);
    REQUIRE(report.rows.size() == c.trials);
    for (std::size_t t = 0; t < c.trials; ++t) CHECK(report.rows[t].trial == t);

    CampaignReport copy = report;
    recompute_aggregates(copy);
    CHECK(copy.success_rate == report.success_rate);
    CHECK(copy.mean_wall_ms == report.mean_wall_ms);
    CHECK(copy.median_wall_ms == report.median_wall_ms);

    CampaignConfig single = c;
    single.trials = 1;
    auto one = run_campaign(single);
    CHECK(one.success_rate == (one.rows[0].success ? 1.0 : 0.0));
    CHECK(one.mean_wall_ms == one.rows[0].wall_ms);
    CHECK(one.median_wall_ms == one.rows[0].wall_ms);
}

TEST_CASE("campaign csv has the fixed schema and deterministic body") {
    auto c = toy_config();
    auto r1 = run_campaign(c);
    auto r2 = run_campaign(c);
    auto csv1 = campaign_csv(r1);
    auto csv2 = campaign_csv(r2);
    std::istringstream in(csv1);
    std::string header;
    std::getline(in, header);
    CHECK(header == "trial,seed,success,wall_ms,index_tried,points,nodes,hyp2_margin");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == c.trials);
    CHECK(strip_wall(csv1) == strip_wall(csv2));
}

TEST_CASE("workers do not change campaign rows") {
    auto c = toy_config();
    c.trials = 6;
    auto seq = run_campaign(c);
    c.workers = 3;
    auto par = run_campaign(c);
    CHECK(strip_wall(campaign_csv(seq)) == strip_wall(campaign_csv(par)));
}

TEST_CASE("uniform nonce mode gives key_not_found rows") {
    auto c = toy_config();
    c.ell = 32;
    c.p_bits = 64;
    c.delta = 16;
    c.delta_l = 8;
    c.signatures = 6;
    c.trials = 3;
    c.nonce_mode = NonceMode::Uniform;
    auto report = run_campaign(c);
    for (const auto& row : report.rows) {
        CHECK(!row.success);
        CHECK(row.reason == "key_not_found");
    }
    CHECK(report.success_rate == 0.0);
}

TEST_CASE("budget exhaustion reports clean rows") {
    auto c = toy_config();
    c.trials = 2;
    c.node_budget = 3;
    auto report = run_campaign(c);
    for (const auto& row : report.rows) {
        CHECK(!row.success);
        CHECK(row.reason == "budget_exceeded");
        CHECK(row.nodes == 3);
        CHECK(row.points == 0);
    }
}

TEST_CASE("ecdsa toy campaign works") {
    CampaignConfig c;
    c.scheme = SchemeChoice::EcdsaToy;
    c.ell = 16;
    c.delta = 8;
    c.delta_l = 4;
    c.signatures = 4;
    c.trials = 2;
    c.seed = 3;
    c.block_size = 4;
    auto report = run_campaign(c);
    CHECK(report.success_rate == 1.0);
}

TEST_CASE("config validation") {
    auto c = toy_config();
    c.signatures = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = toy_config();
    c.delta = 16;  // = ell
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = toy_config();
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = toy_config();
    c.p_bits = 16;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config json round trip") {
    auto c = toy_config();
    c.reduction = Reduction::Lll;
    c.nonce_mode = NonceMode::Uniform;
    c.hash_mode = HashMode::Hashed;
    c.node_budget = 12345;
    c.enum_workers = 2;
    auto j = config_to_json(c);
    auto back = config_from_json(j);
    CHECK(back.ell == c.ell);
    CHECK(back.p_bits == c.p_bits);
    CHECK(back.delta == c.delta);
    CHECK(back.delta_l == c.delta_l);
    CHECK(back.signatures == c.signatures);
    CHECK(back.trials == c.trials);
    CHECK(back.seed == c.seed);
    CHECK(back.reduction == c.reduction);
    CHECK(back.nonce_mode == c.nonce_mode);
    CHECK(back.hash_mode == c.hash_mode);
    CHECK(back.node_budget == c.node_budget);
    CHECK(back.enum_workers == c.enum_workers);

    CHECK(config_from_json(Json{{"delta", 20}}).delta_l == 10);  // default split
    CHECK_THROWS(config_from_json(Json{{"reduction", "fancy"}}));
}

TEST_CASE("instance json round trip preserves the attack") {
    Rng rng(5);
    auto params = gen_group_params(32, 64, rng);
    auto kp = keygen(params, rng);
    auto pattern = draw_pattern(params, 12, 6, rng);
    auto inst = make_instance(params, kp, 3, pattern, HashMode::Passthrough, rng);

    auto with_meta = instance_from_json(instance_to_json(inst, true));
    REQUIRE(with_meta.meta.has_value());
    CHECK(with_meta.meta->a == inst.meta->a);

    auto no_meta = instance_from_json(instance_to_json(inst, false));
    CHECK(!no_meta.meta.has_value());
    auto report = recover_key(no_meta);  // scans indices without the hint
    REQUIRE(report.success());
    CHECK(*report.key == inst.meta->a);

    // ecdsa variant
    auto curve = toy_curve();
    auto kp2 = keygen(curve, rng);
    auto pat2 = draw_pattern(curve, 8, 4, rng);
    auto inst2 = make_instance(curve, kp2, 3, pat2, HashMode::Passthrough, rng);
    auto back2 = instance_from_json(instance_to_json(inst2, true));
    CHECK(back2.params.kind == SchemeKind::Ecdsa);
    CHECK(verify(back2.params, back2.pub, back2.msgs[0].h, back2.msgs[0]));
}

TEST_CASE("instance json rejects tampering") {
    Rng rng(6);
    auto params = gen_group_params(32, 64, rng);
    auto kp = keygen(params, rng);
    auto pattern = draw_pattern(params, 12, 6, rng);
    auto inst = make_instance(params, kp, 2, pattern, HashMode::Passthrough, rng);
    auto j = instance_to_json(inst, false);
    j["signatures"][0]["s"] = "1";
    CHECK_THROWS_AS(instance_from_json(j), std::invalid_argument);
    auto j2 = instance_to_json(inst, false);
    j2["delta"] = 0;
    CHECK_THROWS_AS(instance_from_json(j2), std::invalid_argument);
}

TEST_CASE("report json carries outcome and counters") {
    auto c = toy_config();
    auto inst = build_trial_instance(c, 0);
    AttackOptions opts;
    opts.block_size = 4;
    auto report = recover_key(inst, opts);
    auto j = report_to_json(report);
    CHECK(j.at("success").get<bool>() == report.success());
    CHECK(j.at("radius_sq").get<std::string>() == to_dec(report.radius_sq));
    CHECK(j.at("per_index").size() == report.per_index.size());
}

TEST_CASE("bench table runs requested preset rows only") {
    CHECK_THROWS_AS(run_table1(toy_config(), {{7, 99}}), std::invalid_argument);
    // empty subset is a no-op
    auto table = run_table1(toy_config(), {});
    CHECK(table.rows.empty());
    CHECK(table1_text(table).find("delta") != std::string::npos);
}

#ifdef LATKEY_BIN
TEST_CASE("cli round trip: gen then attack") {
    std::string bin = LATKEY_BIN;
    std::string dir = "cli_test_tmp";
    std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());

    std::string gen = bin +
                      " gen --scheme dsa --ell 16 --p-bits 32 --delta 8 --delta-l 4"
                      " --signatures 4 --seed 9 --out " +
                      dir + "/inst.json";
    CHECK(std::system(gen.c_str()) == 0);

    std::string attack = bin + " attack --in " + dir + "/inst.json --block 4 --out " + dir +
                         "/report.json";
    CHECK(std::system(attack.c_str()) == 0);
    auto report = read_json_file(dir + "/report.json");
    CHECK(report.at("success").get<bool>());

    // meta stripped: the attack must scan but still succeed
    std::string gen2 = bin +
                       " gen --scheme dsa --ell 16 --p-bits 32 --delta 8 --delta-l 4"
                       " --signatures 4 --seed 9 --no-meta --out " +
                       dir + "/inst2.json";
    CHECK(std::system(gen2.c_str()) == 0);
    std::string attack2 =
        bin + " attack --in " + dir + "/inst2.json --block 4 --out " + dir + "/report2.json";
    CHECK(std::system(attack2.c_str()) == 0);

    // malformed input exits with code 2
    std::ofstream(dir + "/bad.json") << "{ not json";
    int rc = std::system((bin + " attack --in " + dir + "/bad.json 2>/dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == 2);

    // negative control instance: exit code 1 (key not found)
    std::string gen3 = bin +
                       " gen --scheme dsa --ell 32 --p-bits 64 --delta 16 --delta-l 8"
                       " --signatures 6 --seed 11 --uniform-nonces --out " +
                       dir + "/inst3.json";
    CHECK(std::system(gen3.c_str()) == 0);
    int rc3 = std::system(
        (bin + " attack --in " + dir + "/inst3.json --block 4 --out " + dir +
         "/report3.json 2>/dev/null")
            .c_str());
    CHECK(WEXITSTATUS(rc3) == 1);

    std::system(("rm -rf " + dir).c_str());
}

TEST_CASE("cli campaign writes csv and json") {
    std::string bin = LATKEY_BIN;
    std::string dir = "cli_camp_tmp";
    std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
    Json config = {{"ell", 16},   {"p_bits", 32},     {"delta", 8},  {"delta_l", 4},
                   {"signatures", 4}, {"trials", 3},  {"seed", 21},  {"block", 4},
                   {"scheme", "dsa"}};
    std::ofstream(dir + "/config.json") << config.dump();
    int rc = std::system(
        (bin + " campaign --config " + dir + "/config.json --out-prefix " + dir + "/run")
            .c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    std::ifstream csv(dir + "/run.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "trial,seed,success,wall_ms,index_tried,points,nodes,hyp2_margin");
    auto j = read_json_file(dir + "/run.json");
    CHECK(j.at("rows").size() == 3);
    std::system(("rm -rf " + dir).c_str());
}
#endif
