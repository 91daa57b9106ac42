#pragma once

#include "rbissim/beacon.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace rbissim {

/// One captured beacon together with the capturing node's receive timestamp.
struct ReplayRecord {
    SimTime rx_time;
    BeaconFrame frame;

    bool operator==(const ReplayRecord&) const = default;
};

// Beacon-replay file: a sequence of
//   [8-byte LE receive timestamp, ns][4-byte LE frame length][frame bytes]
// with frame bytes in the encode_beacon layout.

void write_replay(std::ostream& out, const std::vector<ReplayRecord>& records);
std::vector<ReplayRecord> read_replay(std::istream& in);

void write_replay_file(const std::filesystem::path& path, const std::vector<ReplayRecord>& records);
std::vector<ReplayRecord> read_replay_file(const std::filesystem::path& path);

} // namespace rbissim
