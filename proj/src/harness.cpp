#include "latkey/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

namespace latkey {

void CampaignConfig::validate() const {
    if (signatures < 2) throw std::invalid_argument("config: signatures must be >= 2");
    if (delta == 0 || delta_l > delta || delta >= ell)
        throw std::invalid_argument("config: need 0 < delta, delta_l <= delta < ell");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (scheme == SchemeChoice::Dsa && p_bits <= ell)
        throw std::invalid_argument("config: p_bits must exceed ell");
    if (block_size < 2) throw std::invalid_argument("config: block size must be >= 2");
}

AttackInstance build_trial_instance(const CampaignConfig& config, std::size_t trial_index) {
    Rng rng(Rng::mix(config.seed, trial_index));
    SchemeParams params;
    switch (config.scheme) {
        case SchemeChoice::Dsa:
            params = gen_group_params(config.ell, config.p_bits, rng);
            break;
        case SchemeChoice::EcdsaToy:
            params = toy_curve();
            break;
        case SchemeChoice::EcdsaCustom:
            params = config.custom_curve;
            break;
    }
    if (params.ell != config.ell)
        throw std::invalid_argument("config: ell does not match the chosen scheme");
    auto kp = keygen(params, rng);
    auto pattern = draw_pattern(params, config.delta, config.delta_l, rng);
    std::size_t n = config.signatures - 1;
    return config.nonce_mode == NonceMode::Shared
               ? make_instance(params, kp, n, pattern, config.hash_mode, rng)
               : make_instance_uniform(params, kp, n, pattern, config.hash_mode, rng);
}

TrialRow run_trial(const CampaignConfig& config, std::size_t trial_index) {
    TrialRow row;
    row.trial = trial_index;
    row.seed = Rng::mix(config.seed, trial_index);

    AttackInstance inst = build_trial_instance(config, trial_index);

    AttackOptions opts;
    opts.reduction = config.reduction;
    opts.block_size = config.block_size;
    opts.node_budget = config.node_budget;
    opts.workers = config.enum_workers;
    if (config.min_index_known) opts.min_index_hint = inst.meta->min_index;

    auto t0 = std::chrono::steady_clock::now();
    AttackReport report = recover_key(inst, opts);
    auto t1 = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    row.success = report.success();
    switch (report.outcome) {
        case AttackOutcome::FoundKey:
            row.reason = "";
            if (inst.meta && *report.key != inst.meta->a)
                throw std::logic_error("run_trial: recovered key differs from planted key");
            break;
        case AttackOutcome::KeyNotFound: row.reason = "key_not_found"; break;
        case AttackOutcome::BudgetExhausted: row.reason = "budget_exceeded"; break;
    }
    if (!report.per_index.empty()) {
        const auto& last = report.per_index.back();
        row.index_tried = static_cast<long>(last.index);
        row.hyp2_margin = last.hyp2_margin;
        for (const auto& ir : report.per_index) {
            row.points += ir.points;
            row.nodes += ir.nodes;
        }
    }
    return row;
}

void recompute_aggregates(CampaignReport& report) {
    std::size_t wins = 0;
    double sum = 0.0;
    std::vector<double> walls;
    walls.reserve(report.rows.size());
    for (const auto& r : report.rows) {
        wins += r.success ? 1 : 0;
        sum += r.wall_ms;
        walls.push_back(r.wall_ms);
    }
    const double nrows = static_cast<double>(report.rows.size());
    report.success_rate = nrows > 0 ? static_cast<double>(wins) / nrows : 0.0;
    report.mean_wall_ms = nrows > 0 ? sum / nrows : 0.0;
    std::sort(walls.begin(), walls.end());
    if (walls.empty())
        report.median_wall_ms = 0.0;
    else if (walls.size() % 2 == 1)
        report.median_wall_ms = walls[walls.size() / 2];
    else
        report.median_wall_ms = 0.5 * (walls[walls.size() / 2 - 1] + walls[walls.size() / 2]);
}

CampaignReport run_campaign(const CampaignConfig& config) {
    config.validate();
    CampaignReport report;
    report.config = config;
    report.rows.resize(config.trials);

    unsigned workers = std::max(1u, config.workers);
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, config.trials));

    if (workers == 1) {
        for (std::size_t t = 0; t < config.trials; ++t) report.rows[t] = run_trial(config, t);
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::string error;
        std::mutex error_mu;
        auto worker_fn = [&]() {
            for (;;) {
                std::size_t t = next.fetch_add(1);
                if (t >= config.trials || failed.load()) return;
                try {
                    report.rows[t] = run_trial(config, t);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    failed.store(true);
                    error = e.what();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker_fn);
        for (auto& th : pool) th.join();
        if (failed.load()) throw std::runtime_error("campaign trial failed: " + error);
    }
    recompute_aggregates(report);
    return report;
}

std::string campaign_csv(const CampaignReport& report) {
    std::ostringstream out;
    out << "trial,seed,success,wall_ms,index_tried,points,nodes,hyp2_margin\n";
    for (const auto& r : report.rows) {
        char margin[64];
        std::snprintf(margin, sizeof(margin), "%.6g", r.hyp2_margin);
        out << r.trial << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
            << static_cast<long long>(r.wall_ms + 0.5) << ',' << r.index_tried << ','
            << r.points << ',' << r.nodes << ',' << margin << '\n';
    }
    return out.str();
}

BenchTable run_table1(const CampaignConfig& base, const std::vector<BenchRowSpec>& rows) {
    BenchTable table;
    for (const auto& spec : rows) {
        bool known = false;
        for (const auto& k : kBenchRows)
            if (k.delta == spec.delta && k.signatures == spec.signatures) known = true;
        if (!known)
            throw std::invalid_argument("table1: unknown (delta, signatures) row requested");
        CampaignConfig config = base;
        config.ell = 160;
        config.delta = spec.delta;
        config.delta_l = spec.delta / 2;
        config.signatures = spec.signatures;
        config.reduction = Reduction::Bkz;
        config.block_size = 8;
        config.min_index_known = true;
        BenchRowResult row;
        row.spec = spec;
        row.report = run_campaign(config);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string table1_text(const BenchTable& table) {
    std::ostringstream out;
    out << "delta  signatures  success  mean_s   median_s\n";
    for (const auto& row : table.rows) {
        char line[128];
        std::snprintf(line, sizeof(line), "%5u  %10zu  %7.2f  %7.2f  %8.2f\n", row.spec.delta,
                      row.spec.signatures, row.report.success_rate,
                      row.report.mean_wall_ms / 1000.0, row.report.median_wall_ms / 1000.0);
        out << line;
    }
    return out.str();
}

}  // namespace latkey
