#include "latkey/json_io.hpp"

#include <cstdlib>
#include <fstream>

namespace latkey {

namespace {

Json point_to_json(const EcPoint& p) {
    return Json{{"x", to_dec(p.x)}, {"y", to_dec(p.y)}};
}

EcPoint point_from_json(const Json& j) {
    return EcPoint(from_dec(j.at("x").get<std::string>()),
                   from_dec(j.at("y").get<std::string>()));
}

Int dec_field(const Json& j, const char* key) {
    return from_dec(j.at(key).get<std::string>());
}

}  // namespace

Json instance_to_json(const AttackInstance& inst, bool include_meta) {
    Json j;
    j["kind"] = inst.params.kind == SchemeKind::Dsa ? "dsa" : "ecdsa";
    j["p"] = to_dec(inst.params.p);
    j["q"] = to_dec(inst.params.q);
    if (inst.params.kind == SchemeKind::Dsa) {
        j["g"] = to_dec(inst.params.g);
        j["pub"] = to_dec(inst.pub.dsa);
    } else {
        j["A"] = to_dec(inst.params.curve_a);
        j["B"] = to_dec(inst.params.curve_b);
        j["Gx"] = to_dec(inst.params.gen.x);
        j["Gy"] = to_dec(inst.params.gen.y);
        j["pub"] = point_to_json(inst.pub.ec);
    }
    j["ell"] = inst.ell;
    j["delta"] = inst.delta;
    j["delta_l"] = inst.delta_l;
    Json sigs = Json::array();
    for (const auto& m : inst.msgs)
        sigs.push_back(Json{{"h", to_dec(m.h)}, {"r", to_dec(m.r)}, {"s", to_dec(m.s)}});
    j["signatures"] = std::move(sigs);
    if (include_meta && inst.meta) {
        Json meta;
        meta["a"] = to_dec(inst.meta->a);
        Json ks = Json::array();
        for (const auto& k : inst.meta->k) ks.push_back(to_dec(k));
        meta["k"] = std::move(ks);
        meta["min_index"] = inst.meta->min_index;
        j["meta"] = std::move(meta);
    }
    return j;
}

AttackInstance instance_from_json(const Json& j) {
    AttackInstance inst;
    std::string kind = j.at("kind").get<std::string>();
    inst.params.p = dec_field(j, "p");
    inst.params.q = dec_field(j, "q");
    inst.params.ell = bit_length(inst.params.q);
    if (kind == "dsa") {
        inst.params.kind = SchemeKind::Dsa;
        inst.params.g = dec_field(j, "g");
        inst.pub.dsa = from_dec(j.at("pub").get<std::string>());
    } else if (kind == "ecdsa") {
        inst.params.kind = SchemeKind::Ecdsa;
        inst.params.curve_a = dec_field(j, "A");
        inst.params.curve_b = dec_field(j, "B");
        inst.params.gen = EcPoint(dec_field(j, "Gx"), dec_field(j, "Gy"));
        inst.pub.ec = point_from_json(j.at("pub"));
    } else {
        throw std::invalid_argument("instance: unknown scheme kind '" + kind + "'");
    }
    inst.params.validate();

    inst.ell = j.at("ell").get<unsigned>();
    inst.delta = j.at("delta").get<unsigned>();
    inst.delta_l = j.at("delta_l").get<unsigned>();
    if (inst.ell != inst.params.ell)
        throw std::invalid_argument("instance: ell does not match bit length of q");
    if (inst.delta_l > inst.delta || inst.delta == 0 || inst.delta >= inst.ell)
        throw std::invalid_argument("instance: invalid (delta, delta_l)");

    for (const auto& s : j.at("signatures")) {
        SignedMessage m{dec_field(s, "h"), dec_field(s, "r"), dec_field(s, "s")};
        if (m.r < 1 || m.r >= inst.params.q || m.s < 1 || m.s >= inst.params.q)
            throw std::invalid_argument("instance: signature out of range");
        if (!verify(inst.params, inst.pub, m.h, m))
            throw std::invalid_argument("instance: signature does not verify");
        inst.msgs.push_back(std::move(m));
    }
    if (inst.msgs.size() < 2) throw std::invalid_argument("instance: need at least 2 signatures");

    if (j.contains("meta")) {
        InstanceMeta meta;
        const Json& mj = j.at("meta");
        meta.a = dec_field(mj, "a");
        for (const auto& k : mj.at("k")) meta.k.push_back(from_dec(k.get<std::string>()));
        meta.min_index = mj.at("min_index").get<std::size_t>();
        if (meta.k.size() != inst.msgs.size() || meta.min_index >= meta.k.size())
            throw std::invalid_argument("instance: malformed meta");
        inst.meta = std::move(meta);
    }
    return inst;
}

Json report_to_json(const AttackReport& report) {
    Json j;
    j["success"] = report.success();
    switch (report.outcome) {
        case AttackOutcome::FoundKey: j["outcome"] = "found_key"; break;
        case AttackOutcome::KeyNotFound: j["outcome"] = "key_not_found"; break;
        case AttackOutcome::BudgetExhausted: j["outcome"] = "budget_exceeded"; break;
    }
    if (report.key) j["key"] = to_dec(*report.key);
    j["i_star"] = report.i_star;
    j["radius_sq"] = to_dec(report.radius_sq);
    Json per = Json::array();
    for (const auto& ir : report.per_index) {
        per.push_back(Json{{"index", ir.index},
                           {"hyp2_holds", ir.hyp2_holds},
                           {"hyp2_margin", ir.hyp2_margin},
                           {"ball_count_bound", ir.ball_count_bound},
                           {"points", ir.points},
                           {"nodes", ir.nodes},
                           {"wall_ms", ir.wall_ms}});
    }
    j["per_index"] = std::move(per);
    return j;
}

CampaignConfig config_from_json(const Json& j) {
    CampaignConfig c;
    c.ell = j.value("ell", c.ell);
    c.p_bits = j.value("p_bits", c.p_bits);
    c.delta = j.value("delta", c.delta);
    c.delta_l = j.contains("delta_l") ? j.at("delta_l").get<unsigned>() : c.delta / 2;
    c.signatures = j.value("signatures", c.signatures);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    if (j.contains("reduction")) {
        std::string r = j.at("reduction").get<std::string>();
        if (r == "lll")
            c.reduction = Reduction::Lll;
        else if (r == "bkz")
            c.reduction = Reduction::Bkz;
        else
            throw std::invalid_argument("config: reduction must be 'lll' or 'bkz'");
    }
    c.block_size = j.value("block", c.block_size);
    c.min_index_known = j.value("min_index_known", c.min_index_known);
    if (j.contains("scheme")) {
        const Json& s = j.at("scheme");
        if (s.is_string() && s.get<std::string>() == "dsa") {
            c.scheme = SchemeChoice::Dsa;
        } else if (s.is_string() &&
                   (s.get<std::string>() == "toy_curve" || s.get<std::string>() == "ecdsa_toy")) {
            c.scheme = SchemeChoice::EcdsaToy;
        } else if (s.is_object()) {
            c.scheme = SchemeChoice::EcdsaCustom;
            c.custom_curve =
                gen_curve_params(dec_field(s, "p"), dec_field(s, "A"), dec_field(s, "B"),
                                 EcPoint(dec_field(s, "Gx"), dec_field(s, "Gy")),
                                 dec_field(s, "q"));
        } else {
            throw std::invalid_argument("config: bad scheme spec");
        }
    }
    c.node_budget = j.value("node_budget", c.node_budget);
    if (j.contains("workers")) {
        c.workers = j.at("workers").get<unsigned>();
    } else if (const char* env = std::getenv("LATKEY_WORKERS")) {
        unsigned w = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
        c.workers = w ? w : 1;
    }
    c.enum_workers = j.value("enum_workers", c.enum_workers);
    if (j.contains("nonce_mode")) {
        std::string m = j.at("nonce_mode").get<std::string>();
        if (m == "shared")
            c.nonce_mode = NonceMode::Shared;
        else if (m == "uniform")
            c.nonce_mode = NonceMode::Uniform;
        else
            throw std::invalid_argument("config: nonce_mode must be 'shared' or 'uniform'");
    }
    if (j.contains("hash_mode")) {
        std::string m = j.at("hash_mode").get<std::string>();
        if (m == "passthrough")
            c.hash_mode = HashMode::Passthrough;
        else if (m == "hashed")
            c.hash_mode = HashMode::Hashed;
        else
            throw std::invalid_argument("config: hash_mode must be 'passthrough' or 'hashed'");
    }
    c.validate();
    return c;
}

Json config_to_json(const CampaignConfig& c) {
    Json j;
    j["ell"] = c.ell;
    j["p_bits"] = c.p_bits;
    j["delta"] = c.delta;
    j["delta_l"] = c.delta_l;
    j["signatures"] = c.signatures;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["reduction"] = c.reduction == Reduction::Lll ? "lll" : "bkz";
    j["block"] = c.block_size;
    j["min_index_known"] = c.min_index_known;
    switch (c.scheme) {
        case SchemeChoice::Dsa: j["scheme"] = "dsa"; break;
        case SchemeChoice::EcdsaToy: j["scheme"] = "toy_curve"; break;
        case SchemeChoice::EcdsaCustom:
            j["scheme"] = Json{{"p", to_dec(c.custom_curve.p)},
                               {"A", to_dec(c.custom_curve.curve_a)},
                               {"B", to_dec(c.custom_curve.curve_b)},
                               {"Gx", to_dec(c.custom_curve.gen.x)},
                               {"Gy", to_dec(c.custom_curve.gen.y)},
                               {"q", to_dec(c.custom_curve.q)}};
            break;
    }
    j["node_budget"] = c.node_budget;
    j["workers"] = c.workers;
    j["enum_workers"] = c.enum_workers;
    j["nonce_mode"] = c.nonce_mode == NonceMode::Shared ? "shared" : "uniform";
    j["hash_mode"] = c.hash_mode == HashMode::Passthrough ? "passthrough" : "hashed";
    return j;
}

Json campaign_to_json(const CampaignReport& report) {
    Json j;
    j["config"] = config_to_json(report.config);
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        rows.push_back(Json{{"trial", r.trial},
                            {"seed", r.seed},
                            {"success", r.success},
                            {"wall_ms", r.wall_ms},
                            {"index_tried", r.index_tried},
                            {"points", r.points},
                            {"nodes", r.nodes},
                            {"hyp2_margin", r.hyp2_margin},
                            {"reason", r.reason}});
    }
    j["rows"] = std::move(rows);
    j["aggregate"] = Json{{"success_rate", report.success_rate},
                          {"mean_wall_ms", report.mean_wall_ms},
                          {"median_wall_ms", report.median_wall_ms}};
    return j;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    Json j;
    in >> j;
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace latkey
