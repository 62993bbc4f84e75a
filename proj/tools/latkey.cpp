// latkey command line: instance generation, single attacks, seeded
// campaigns and the benchmark table.
//
// Exit codes: 0 key found / full success, 1 key not found, 2 bad input.

#include "latkey/harness.hpp"
#include "latkey/json_io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace latkey;

constexpr int kExitFound = 0;
constexpr int kExitNotFound = 1;
constexpr int kExitBadInput = 2;

struct GenArgs {
    std::string scheme = "dsa";
    std::string curve_file;
    unsigned ell = 160;
    unsigned p_bits = 1024;
    unsigned delta = 20;
    long delta_l = -1;
    std::size_t signatures = 8;
    std::uint64_t seed = 1;
    bool hashed = false;
    bool uniform = false;
    bool no_meta = false;
    std::string out;
};

int cmd_gen(const GenArgs& args) {
    Rng rng(args.seed);
    SchemeParams params;
    if (args.scheme == "dsa") {
        params = gen_group_params(args.ell, args.p_bits, rng);
    } else if (args.scheme == "toy") {
        params = toy_curve();
    } else if (args.scheme == "curve") {
        Json cj = read_json_file(args.curve_file);
        params = gen_curve_params(from_dec(cj.at("p").get<std::string>()),
                                  from_dec(cj.at("A").get<std::string>()),
                                  from_dec(cj.at("B").get<std::string>()),
                                  EcPoint(from_dec(cj.at("Gx").get<std::string>()),
                                          from_dec(cj.at("Gy").get<std::string>())),
                                  from_dec(cj.at("q").get<std::string>()));
    } else {
        throw std::invalid_argument("gen: scheme must be dsa, toy or curve");
    }
    unsigned delta_l = args.delta_l < 0 ? args.delta / 2 : static_cast<unsigned>(args.delta_l);
    if (args.signatures < 2) throw std::invalid_argument("gen: need at least 2 signatures");

    auto kp = keygen(params, rng);
    auto pattern = draw_pattern(params, args.delta, delta_l, rng);
    HashMode hm = args.hashed ? HashMode::Hashed : HashMode::Passthrough;
    AttackInstance inst =
        args.uniform ? make_instance_uniform(params, kp, args.signatures - 1, pattern, hm, rng)
                     : make_instance(params, kp, args.signatures - 1, pattern, hm, rng);

    Json j = instance_to_json(inst, !args.no_meta);
    std::string text = j.dump(2) + "\n";
    if (args.out.empty())
        std::cout << text;
    else
        write_text_file(args.out, text);
    return kExitFound;
}

struct AttackArgs {
    std::string in;
    std::string reduction = "bkz";
    int block = 8;
    long min_index = -1;
    bool scan = false;
    std::uint64_t budget = 1000000000ULL;
    unsigned workers = 0;
    std::string out;
};

int cmd_attack(const AttackArgs& args) {
    AttackInstance inst = instance_from_json(read_json_file(args.in));

    AttackOptions opts;
    if (args.reduction == "lll")
        opts.reduction = Reduction::Lll;
    else if (args.reduction == "bkz")
        opts.reduction = Reduction::Bkz;
    else
        throw std::invalid_argument("attack: reduction must be lll or bkz");
    opts.block_size = args.block;
    opts.node_budget = args.budget;
    opts.workers = args.workers;
    if (args.min_index >= 0)
        opts.min_index_hint = static_cast<std::size_t>(args.min_index);
    else if (!args.scan && inst.meta)
        opts.min_index_hint = inst.meta->min_index;

    AttackReport report = recover_key(inst, opts);
    Json j = report_to_json(report);
    std::string text = j.dump(2) + "\n";
    if (args.out.empty())
        std::cout << text;
    else
        write_text_file(args.out, text);
    if (!report.success())
        std::cerr << (report.outcome == AttackOutcome::BudgetExhausted
                          ? "attack: node budget exhausted\n"
                          : "attack: key not found\n");
    return report.success() ? kExitFound : kExitNotFound;
}

int cmd_campaign(const std::string& config_path, const std::string& out_prefix) {
    CampaignConfig config = config_from_json(read_json_file(config_path));
    CampaignReport report = run_campaign(config);
    std::string prefix = out_prefix.empty() ? "campaign" : out_prefix;
    write_text_file(prefix + ".csv", campaign_csv(report));
    write_text_file(prefix + ".json", campaign_to_json(report).dump(2) + "\n");
    std::cout << "trials " << report.rows.size() << ", success rate " << report.success_rate
              << ", mean wall " << report.mean_wall_ms / 1000.0 << " s\n";
    return report.success_rate == 1.0 ? kExitFound : kExitNotFound;
}

int cmd_table1(std::size_t trials, const std::vector<unsigned>& deltas,
               const std::string& out_prefix, std::uint64_t seed, std::uint64_t budget,
               unsigned workers, unsigned enum_workers) {
    std::vector<BenchRowSpec> rows;
    for (unsigned d : deltas) {
        bool found = false;
        for (const auto& spec : kBenchRows)
            if (spec.delta == d) {
                rows.push_back(spec);
                found = true;
            }
        if (!found) throw std::invalid_argument("table1: no preset row with delta " +
                                                std::to_string(d));
    }
    CampaignConfig base;
    base.trials = trials;
    base.seed = seed;
    base.node_budget = budget;
    base.workers = workers;
    base.enum_workers = enum_workers;
    BenchTable table = run_table1(base, rows);
    std::cout << table1_text(table);
    if (!out_prefix.empty()) {
        for (const auto& row : table.rows) {
            std::string stem = out_prefix + "_d" + std::to_string(row.spec.delta);
            write_text_file(stem + ".csv", campaign_csv(row.report));
            write_text_file(stem + ".json", campaign_to_json(row.report).dump(2) + "\n");
        }
    }
    bool all = true;
    for (const auto& row : table.rows)
        if (row.report.success_rate < 1.0) all = false;
    return all ? kExitFound : kExitNotFound;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shared-bit nonce lattice attack toolkit"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a signed instance file");
    gen_cmd->add_option("--scheme", gen.scheme, "dsa | toy | curve");
    gen_cmd->add_option("--curve-json", gen.curve_file, "curve parameter file for --scheme curve");
    gen_cmd->add_option("--ell", gen.ell, "bit length of q (dsa)");
    gen_cmd->add_option("--p-bits", gen.p_bits, "bit length of p (dsa)");
    gen_cmd->add_option("--delta", gen.delta, "total shared bits");
    gen_cmd->add_option("--delta-l", gen.delta_l, "shared low bits (default delta/2)");
    gen_cmd->add_option("--signatures", gen.signatures, "number of signatures (n+1)");
    gen_cmd->add_option("--seed", gen.seed, "prng seed");
    gen_cmd->add_flag("--hashed", gen.hashed, "hash random messages instead of raw h values");
    gen_cmd->add_flag("--uniform-nonces", gen.uniform, "negative control: independent nonces");
    gen_cmd->add_flag("--no-meta", gen.no_meta, "omit ground-truth metadata");
    gen_cmd->add_option("--out", gen.out, "output file (stdout when absent)");

    AttackArgs atk;
    auto* atk_cmd = app.add_subcommand("attack", "recover the key from an instance file");
    atk_cmd->add_option("--in", atk.in, "instance JSON")->required();
    atk_cmd->add_option("--reduction", atk.reduction, "lll | bkz");
    atk_cmd->add_option("--block", atk.block, "BKZ block size");
    atk_cmd->add_option("--min-index", atk.min_index, "candidate minimum-nonce index");
    atk_cmd->add_flag("--scan", atk.scan, "scan all indices even when meta is present");
    atk_cmd->add_option("--budget", atk.budget, "enumeration node budget per query");
    atk_cmd->add_option("--workers", atk.workers, "enumeration workers (0 = auto)");
    atk_cmd->add_option("--out", atk.out, "report JSON output (stdout when absent)");

    std::string config_path, out_prefix;
    auto* camp_cmd = app.add_subcommand("campaign", "run a seeded trial campaign");
    camp_cmd->add_option("--config", config_path, "campaign config JSON")->required();
    camp_cmd->add_option("--out-prefix", out_prefix, "output prefix (default 'campaign')");

    std::size_t t1_trials = 10;
    std::vector<unsigned> t1_deltas = {20};
    std::string t1_prefix;
    std::uint64_t t1_seed = 1, t1_budget = 200000000000ULL;
    unsigned t1_workers = 1, t1_enum_workers = 0;
    auto* t1_cmd = app.add_subcommand("table1", "benchmark sweep over (delta, signatures) presets");
    t1_cmd->add_option("--trials", t1_trials, "trials per row");
    t1_cmd->add_option("--rows", t1_deltas, "delta values of preset rows (e.g. 20 16 12)");
    t1_cmd->add_option("--out-prefix", t1_prefix, "per-row output prefix");
    t1_cmd->add_option("--seed", t1_seed, "base seed");
    t1_cmd->add_option("--budget", t1_budget, "node budget per enumeration");
    t1_cmd->add_option("--workers", t1_workers, "concurrent trials");
    t1_cmd->add_option("--enum-workers", t1_enum_workers, "enumeration workers (0 = auto)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitBadInput;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (atk_cmd->parsed()) return cmd_attack(atk);
        if (camp_cmd->parsed()) return cmd_campaign(config_path, out_prefix);
        if (t1_cmd->parsed())
            return cmd_table1(t1_trials, t1_deltas, t1_prefix, t1_seed, t1_budget, t1_workers,
                              t1_enum_workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return kExitBadInput;
}
