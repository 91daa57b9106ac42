#include "rbissim/beacon.hpp"

#include "rbissim/wire.hpp"

#include <cstdio>

namespace rbissim {

namespace {

constexpr std::uint8_t fc_beacon_lo = 0x80;
constexpr std::uint8_t fc_beacon_hi = 0x00;
constexpr std::uint8_t ssid_element_id = 0;

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

Bssid Bssid::parse(std::string_view text)
{
    Bssid out;
    if (text.size() != 17) throw std::invalid_argument("malformed BSSID '" + std::string(text) + "'");
    for (std::size_t i = 0; i < 6; ++i) {
        const int hi = hex_value(text[i * 3]);
        const int lo = hex_value(text[i * 3 + 1]);
        if (hi < 0 || lo < 0 || (i < 5 && text[i * 3 + 2] != ':'))
            throw std::invalid_argument("malformed BSSID '" + std::string(text) + "'");
        out.octets[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return out;
}

std::string Bssid::to_string() const
{
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", octets[0], octets[1], octets[2], octets[3],
                  octets[4], octets[5]);
    return buf;
}

BeaconFrame make_beacon(const ApState& ap, SimTime true_time, RngState& rng)
{
    if (true_time < ap.tsf_epoch)
        throw BeaconError("beacon requested at " + to_string(true_time) + " before AP " + ap.bssid.to_string() +
                          " powered on");
    const SimTime reading = clock_read(ap.tsf_clock, SimTime{} + (true_time - ap.tsf_epoch), rng);
    if (reading.ns < 0) throw BeaconError("negative TSF reading for AP " + ap.bssid.to_string());

    BeaconFrame f;
    f.bssid = ap.bssid;
    f.tsf_timestamp = static_cast<std::uint64_t>(reading.ns / 1000);
    f.beacon_interval_tu = ap.beacon_interval_tu;
    f.ssid = ap.ssid;
    return f;
}

std::vector<std::uint8_t> encode_beacon(const BeaconFrame& frame)
{
    if (frame.ssid.size() > max_ssid_length)
        throw BeaconError("SSID of " + std::to_string(frame.ssid.size()) + " bytes exceeds 32");

    std::vector<std::uint8_t> out;
    out.reserve(beacon_header_length + frame.ssid.size());
    out.push_back(fc_beacon_lo);
    out.push_back(fc_beacon_hi);
    wire::put_le(out, std::uint16_t{0}); // duration
    out.insert(out.end(), 6, 0xff);      // DA
    out.insert(out.end(), frame.bssid.octets.begin(), frame.bssid.octets.end()); // SA
    out.insert(out.end(), frame.bssid.octets.begin(), frame.bssid.octets.end()); // BSSID
    wire::put_le(out, std::uint16_t{0}); // sequence control
    wire::put_le(out, frame.tsf_timestamp);
    wire::put_le(out, frame.beacon_interval_tu);
    wire::put_le(out, std::uint16_t{0x0001}); // capability: ESS
    out.push_back(ssid_element_id);
    out.push_back(static_cast<std::uint8_t>(frame.ssid.size()));
    out.insert(out.end(), frame.ssid.begin(), frame.ssid.end());
    return out;
}

BeaconFrame decode_beacon(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < beacon_header_length)
        throw BeaconError("truncated beacon: " + std::to_string(bytes.size()) + " bytes");
    if (bytes[0] != fc_beacon_lo || bytes[1] != fc_beacon_hi) throw BeaconError("frame control is not a beacon");
    for (std::size_t i = 4; i < 10; ++i)
        if (bytes[i] != 0xff) throw BeaconError("destination is not broadcast");
    if (bytes[36] != ssid_element_id) throw BeaconError("first element is not an SSID");

    BeaconFrame f;
    std::copy(bytes.begin() + 16, bytes.begin() + 22, f.bssid.octets.begin());
    f.tsf_timestamp = wire::get_le<std::uint64_t>(bytes.subspan(24));
    f.beacon_interval_tu = wire::get_le<std::uint16_t>(bytes.subspan(32));
    const std::size_t len = bytes[37];
    if (len > max_ssid_length) throw BeaconError("SSID element longer than 32 bytes");
    if (beacon_header_length + len > bytes.size()) throw BeaconError("SSID length overruns buffer");
    f.ssid.assign(bytes.begin() + beacon_header_length, bytes.begin() + beacon_header_length + len);
    return f;
}

} // namespace rbissim
