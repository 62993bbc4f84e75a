#pragma once

#include "latkey/attack.hpp"
#include "latkey/scheme.hpp"

#include <array>
#include <string>

namespace latkey {

enum class NonceMode { Shared, Uniform };
enum class SchemeChoice { Dsa, EcdsaToy, EcdsaCustom };

struct CampaignConfig {
    unsigned ell = 160;
    // DSA field size. Only signing and candidate verification touch p, so
    // campaigns default to a compact field; raise it for protocol realism.
    unsigned p_bits = 256;
    unsigned delta = 20;
    unsigned delta_l = 10;
    std::size_t signatures = 8;   // n + 1
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    Reduction reduction = Reduction::Bkz;
    int block_size = 8;
    bool min_index_known = true;
    SchemeChoice scheme = SchemeChoice::Dsa;
    SchemeParams custom_curve;    // used when scheme == EcdsaCustom
    std::uint64_t node_budget = 1000000000ULL;
    unsigned workers = 1;         // concurrent trials
    unsigned enum_workers = 0;    // per-trial enumeration workers; 0 = auto
    NonceMode nonce_mode = NonceMode::Shared;
    HashMode hash_mode = HashMode::Passthrough;

    void validate() const;
};

struct TrialRow {
    std::size_t trial = 0;
    std::uint64_t seed = 0;       // derived per-trial seed
    bool success = false;
    double wall_ms = 0.0;         // recover_key only; instance setup excluded
    long index_tried = -1;        // successful index, or last index examined
    std::uint64_t points = 0;
    std::uint64_t nodes = 0;
    double hyp2_margin = 0.0;
    std::string reason;           // "", "key_not_found" or "budget_exceeded"
};

struct CampaignReport {
    CampaignConfig config;
    std::vector<TrialRow> rows;
    double success_rate = 0.0;
    double mean_wall_ms = 0.0;
    double median_wall_ms = 0.0;
};

// Builds the planted (or negative-control) instance for one trial. The
// instance is fully determined by (config, trial_index).
AttackInstance build_trial_instance(const CampaignConfig& config, std::size_t trial_index);

TrialRow run_trial(const CampaignConfig& config, std::size_t trial_index);

// Runs config.trials independent trials (config.workers at a time) and
// aggregates. Row order is by trial index regardless of scheduling.
CampaignReport run_campaign(const CampaignConfig& config);

// CSV with the fixed schema
// trial,seed,success,wall_ms,index_tried,points,nodes,hyp2_margin
std::string campaign_csv(const CampaignReport& report);

// Aggregates recomputed from rows (used by tests and the writers).
void recompute_aggregates(CampaignReport& report);

struct BenchRowSpec {
    unsigned delta;
    std::size_t signatures;
};

// The (shared bits, signature count) presets the benchmark table sweeps.
inline constexpr std::array<BenchRowSpec, 9> kBenchRows = {{{5, 58},
                                                            {6, 40},
                                                            {8, 25},
                                                            {10, 18},
                                                            {12, 14},
                                                            {14, 12},
                                                            {16, 11},
                                                            {18, 9},
                                                            {20, 8}}};

struct BenchRowResult {
    BenchRowSpec spec{};
    CampaignReport report;
};

struct BenchTable {
    std::vector<BenchRowResult> rows;
};

// Benchmark sweep at ell=160: BKZ-8, known minimum index, delta_l = delta/2.
// `base` supplies trials/seed/budget/worker knobs.
BenchTable run_table1(const CampaignConfig& base, const std::vector<BenchRowSpec>& rows);

// Aligned human-readable rendering of the sweep.
std::string table1_text(const BenchTable& table);

}  // namespace latkey
