#include "rbissim/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rbissim {

std::optional<std::string_view> TraceRecord::field(std::string_view key) const
{
    for (const auto& [k, v] : fields)
        if (k == key) return std::string_view(v);
    return std::nullopt;
}

std::int64_t TraceRecord::int_field(std::string_view key) const
{
    const auto v = field(key);
    if (!v) throw std::out_of_range("trace record " + kind + " has no field " + std::string(key));
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
        throw std::out_of_range("trace field " + std::string(key) + " is not an integer");
    return out;
}

void TraceLog::append(SimTime t, std::string_view kind, std::string node,
                      std::vector<std::pair<std::string, std::string>> fields)
{
    records_.push_back({t, std::string(kind), std::move(node), std::move(fields)});
}

void TraceLog::write(std::ostream& out) const
{
    for (const auto& r : records_) {
        out << r.time.ns << ' ' << r.kind << ' ' << r.node;
        for (const auto& [k, v] : r.fields) out << ' ' << k << '=' << v;
        out << '\n';
    }
}

TraceLog TraceLog::read(std::istream& in)
{
    TraceLog log;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        TraceRecord r;
        if (!(ls >> r.time.ns >> r.kind >> r.node))
            throw std::runtime_error("malformed trace line " + std::to_string(lineno));
        std::string token;
        while (ls >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("malformed field '" + token + "' on trace line " + std::to_string(lineno));
            r.fields.emplace_back(token.substr(0, eq), token.substr(eq + 1));
        }
        log.append(std::move(r));
    }
    return log;
}

void TraceLog::write_file(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write(out);
}

} // namespace rbissim
