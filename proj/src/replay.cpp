#include "rbissim/replay.hpp"

#include "rbissim/wire.hpp"

#include <fstream>
#include <iterator>

namespace rbissim {

void write_replay(std::ostream& out, const std::vector<ReplayRecord>& records)
{
    std::vector<std::uint8_t> buf;
    for (const auto& r : records) {
        const auto frame = encode_beacon(r.frame);
        buf.clear();
        wire::put_le(buf, r.rx_time.ns);
        wire::put_le(buf, static_cast<std::uint32_t>(frame.size()));
        buf.insert(buf.end(), frame.begin(), frame.end());
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
}

std::vector<ReplayRecord> read_replay(std::istream& in)
{
    const std::vector<std::uint8_t> data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const std::span<const std::uint8_t> all(data);

    std::vector<ReplayRecord> records;
    std::size_t pos = 0;
    while (pos < all.size()) {
        if (all.size() - pos < 12) throw BeaconError("truncated replay record header at offset " + std::to_string(pos));
        ReplayRecord r;
        r.rx_time = SimTime{wire::get_le<std::int64_t>(all.subspan(pos))};
        const auto len = wire::get_le<std::uint32_t>(all.subspan(pos + 8));
        pos += 12;
        if (all.size() - pos < len) throw BeaconError("truncated replay frame at offset " + std::to_string(pos));
        r.frame = decode_beacon(all.subspan(pos, len));
        pos += len;
        records.push_back(std::move(r));
    }
    return records;
}

void write_replay_file(const std::filesystem::path& path, const std::vector<ReplayRecord>& records)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_replay(out, records);
}

std::vector<ReplayRecord> read_replay_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_replay(in);
}

} // namespace rbissim
