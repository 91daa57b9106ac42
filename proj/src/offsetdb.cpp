#include "rbissim/offsetdb.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace rbissim {

std::uint64_t n_entries(std::int64_t m)
{
    if (m < 1) throw std::invalid_argument("AP count must be >= 1, got " + std::to_string(m));
    const auto um = static_cast<std::uint64_t>(m);
    return um * (um - 1) / 2;
}

OffsetMatrix::OffsetMatrix(std::vector<ApId> aps) : aps_(std::move(aps))
{
    std::sort(aps_.begin(), aps_.end());
    if (std::adjacent_find(aps_.begin(), aps_.end()) != aps_.end()) throw OffsetDbError("duplicate AP id");
}

bool OffsetMatrix::known(ApId a) const { return std::binary_search(aps_.begin(), aps_.end(), a); }

bool OffsetMatrix::upsert(const ApPairOffset& off)
{
    if (off.ap_i == off.ap_j) {
        if (off.delta.ns != 0)
            throw OffsetDbError("nonzero self offset for " + to_string(off.ap_i) + ": " + to_string(off.delta));
        return false;
    }
    if (!known(off.ap_i) || !known(off.ap_j))
        throw OffsetDbError("offset references unknown AP " + to_string(known(off.ap_i) ? off.ap_j : off.ap_i));

    ApPairOffset canon = off;
    if (canon.ap_j < canon.ap_i) {
        std::swap(canon.ap_i, canon.ap_j);
        canon.delta = -canon.delta;
    }
    const auto key = std::make_pair(canon.ap_i, canon.ap_j);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        entries_.emplace(key, canon);
        return true;
    }
    if (canon.measured_at <= it->second.measured_at) return false;
    it->second = canon;
    return true;
}

std::optional<SimDuration> OffsetMatrix::query_direct(ApId i, ApId j) const
{
    if (i == j) return SimDuration{};
    const bool flip = j < i;
    const auto it = entries_.find(flip ? std::make_pair(j, i) : std::make_pair(i, j));
    if (it == entries_.end()) return std::nullopt;
    return flip ? -it->second.delta : it->second.delta;
}

std::optional<SimDuration> OffsetMatrix::query(ApId i, ApId j) const
{
    if (auto d = query_direct(i, j)) return d;
    for (const ApId k : aps_) {
        if (k == i || k == j) continue;
        const auto a = query_direct(i, k);
        const auto b = query_direct(k, j);
        if (a && b) return *a + *b;
    }
    return std::nullopt;
}

std::vector<ApPairOffset> OffsetMatrix::entries() const
{
    std::vector<ApPairOffset> out;
    out.reserve(entries_.size());
    for (const auto& [key, value] : entries_) out.push_back(value);
    return out;
}

void write_offsets_csv(std::ostream& out, const OffsetMatrix& db)
{
    out << "ap_i,ap_j,delta_ns,measured_at_ns,reporter\n";
    for (const auto& e : db.entries())
        out << e.ap_i.value << ',' << e.ap_j.value << ',' << e.delta.ns << ',' << e.measured_at.ns << ','
            << e.reporter.value << '\n';
}

PublishPlan plan_publishing(std::int64_t m, double handover_rate, double channel_busy, const PublishPolicy& policy)
{
    if (handover_rate < 0 || channel_busy < 0 || channel_busy > 1)
        throw std::invalid_argument("handover rate must be >= 0 and channel_busy within [0, 1]");
    PublishPlan plan;
    plan.payload_entries = n_entries(m);
    const double budget = static_cast<double>(policy.payload_budget_bytes) * (1.0 - channel_busy);
    const double payload = static_cast<double>(plan.payload_entries * policy.entry_size_bytes);
    if (handover_rate >= policy.handover_rate_threshold && payload <= budget) {
        plan.mode = PublishPlan::Mode::cyclic;
        plan.period = policy.cyclic_period;
    }
    return plan;
}

} // namespace rbissim
