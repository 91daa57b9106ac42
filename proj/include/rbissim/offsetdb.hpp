#pragma once

#include "rbissim/rbis.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rbissim {

/// Number of independent entries of an m x m antisymmetric offset matrix
/// with zero diagonal: m(m+1)/2 - m = m(m-1)/2. Throws for m < 1.
std::uint64_t n_entries(std::int64_t m);

class OffsetDbError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// AP-to-AP offset store. Only the upper triangle (ap_i < ap_j) is kept;
/// reads of the lower triangle flip the sign and the diagonal is zero.
class OffsetMatrix {
public:
    OffsetMatrix() = default;
    explicit OffsetMatrix(std::vector<ApId> aps);

    std::size_t ap_count() const { return aps_.size(); }
    const std::vector<ApId>& aps() const { return aps_; }

    /// Inserts a report. Entries are canonicalized to (min, max) and the newer
    /// measured_at wins; equal or older reports are ignored. Returns true if
    /// the stored value changed.
    bool upsert(const ApPairOffset& off);

    /// Stored (direct) lookup with antisymmetry; 0 on the diagonal.
    std::optional<SimDuration> query_direct(ApId i, ApId j) const;

    /// Direct lookup, falling back to a single intermediate AP k with both
    /// legs i->k and k->j stored. The lowest such k is used.
    std::optional<SimDuration> query(ApId i, ApId j) const;

    std::size_t entry_count() const { return entries_.size(); }
    /// Stored entries in canonical (ap_i < ap_j) order.
    std::vector<ApPairOffset> entries() const;

    bool operator==(const OffsetMatrix&) const = default;

private:
    bool known(ApId a) const;

    std::vector<ApId> aps_;
    std::map<std::pair<ApId, ApId>, ApPairOffset> entries_;
};

inline OffsetMatrix db_upsert(OffsetMatrix db, const ApPairOffset& off)
{
    db.upsert(off);
    return db;
}

inline std::optional<SimDuration> db_query(const OffsetMatrix& db, ApId i, ApId j) { return db.query(i, j); }

/// CSV dump with header ap_i,ap_j,delta_ns,measured_at_ns,reporter.
void write_offsets_csv(std::ostream& out, const OffsetMatrix& db);

struct PublishPolicy {
    /// Handover rate (events/s) at or above which cyclic publishing is preferred.
    double handover_rate_threshold = 0.1;
    /// Bytes per matrix entry on the wire: two 4-byte AP ids and an 8-byte delta.
    std::uint64_t entry_size_bytes = 16;
    /// Payload that one publication may occupy (one UDP datagram in a 1500-byte MTU).
    std::uint64_t payload_budget_bytes = 1472;
    SimDuration cyclic_period = SimDuration::seconds(1);

    bool operator==(const PublishPolicy&) const = default;
};

struct PublishPlan {
    enum class Mode { cyclic, on_request };

    Mode mode = Mode::on_request;
    SimDuration period{};
    std::uint64_t payload_entries = 0;

    bool operator==(const PublishPlan&) const = default;
};

/// Cyclic publishing when handovers are frequent and the full matrix fits the
/// budget left over by a channel that is `channel_busy` (0..1) occupied.
PublishPlan plan_publishing(std::int64_t m, double handover_rate, double channel_busy,
                            const PublishPolicy& policy = {});

} // namespace rbissim
