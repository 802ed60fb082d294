#include "qdet/compare.hpp"

#include <nlohmann/json.hpp>

namespace qdet {

namespace {

using Point = std::pair<int, std::uint64_t>; // (D, P)

std::map<SharedKey, Point> index_side(const std::vector<Characteristics>& cs,
                                      const char* side) {
    std::map<SharedKey, Point> out;
    for (const Characteristics& c : cs) {
        SharedKey key{c.params, c.iterations};
        Point val{c.D, c.P};
        auto [it, inserted] = out.emplace(key, val);
        if (!inserted && it->second != val)
            throw DomainError(
                std::string("characteristic set ") + side +
                " has two different entries for the same parameter values");
    }
    return out;
}

Verdict verdict_of(long long delta) {
    if (delta < 0) return Verdict::Less;
    if (delta > 0) return Verdict::Greater;
    return Verdict::Equal;
}

} // namespace

ComparisonReport compare(const std::vector<Characteristics>& a,
                         const std::vector<Characteristics>& b) {
    if (a.empty() || b.empty()) throw NoCommonParameters();
    const Characteristics& ref = a.front();
    for (const auto* side : {&a, &b})
        for (const Characteristics& c : *side)
            if (c.sharing != ref.sharing || c.doubling != ref.doubling ||
                c.chain_count != ref.chain_count)
                throw DomainError(
                    "characteristics computed under different counting flags "
                    "cannot be compared");

    auto ma = index_side(a, "A");
    auto mb = index_side(b, "B");

    ComparisonReport r;
    for (const auto& [key, pa] : ma) {
        auto it = mb.find(key);
        if (it == mb.end()) continue;
        r.shared.push_back(key);
        r.delta_d += pa.first - it->second.first;
        r.delta_p += static_cast<long long>(pa.second) -
                     static_cast<long long>(it->second.second);
    }
    if (r.shared.empty()) throw NoCommonParameters();
    r.verdict_d = verdict_of(r.delta_d);
    r.verdict_p = verdict_of(r.delta_p);
    return r;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Less: return "less";
        case Verdict::Equal: return "equal";
        case Verdict::Greater: return "greater";
    }
    return "?";
}

std::string report_to_json(const ComparisonReport& r) {
    nlohmann::ordered_json j;
    j["shared"] = nlohmann::json::array();
    for (const SharedKey& k : r.shared) {
        nlohmann::ordered_json e;
        e["params"] = k.params;
        e["iterations"] = k.iterations;
        j["shared"].push_back(std::move(e));
    }
    j["deltaD"] = r.delta_d;
    j["deltaP"] = r.delta_p;
    j["verdictD"] = to_string(r.verdict_d);
    j["verdictP"] = to_string(r.verdict_p);
    return j.dump(2) + "\n";
}

} // namespace qdet
