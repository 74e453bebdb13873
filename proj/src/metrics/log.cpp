// Copyright (c) 2026 The churnsim developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <churnsim/metrics.h>

#include <charconv>
#include <ostream>

namespace churnsim {

namespace {

bool NeedsEscape(char c)
{
    return c == ' ' || c == '=' || c == '%' || c == ',' || c == '\n' || c == '\r' || c == '\t';
}

int HexDigit(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

void CheckKey(const std::string& key)
{
    if (key.empty()) throw std::invalid_argument("empty log key");
    for (char c : key) {
        if (NeedsEscape(c)) throw std::invalid_argument("log key contains a reserved character: " + key);
    }
}

std::vector<std::string> SplitSpaces(const std::string& line)
{
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= line.size()) {
        size_t next = line.find(' ', pos);
        if (next == std::string::npos) next = line.size();
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

std::pair<std::string, std::string> SplitField(const std::string& field)
{
    size_t eq = field.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("malformed log field: " + field);
    return {field.substr(0, eq), UnescapeLogValue(field.substr(eq + 1))};
}

template <typename T>
T ParseNumber(const std::string& s, const char* what)
{
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument(std::string("bad ") + what + ": " + s);
    return value;
}

std::string Expect(const std::string& field, const char* key)
{
    auto [k, v] = SplitField(field);
    if (k != key) throw std::invalid_argument(std::string("expected ") + key + ", got " + k);
    return v;
}

} // namespace

std::string EscapeLogValue(const std::string& value)
{
    static const char* HEX = "0123456789ABCDEF";
    std::string out;
    out.reserve(value.size());
    for (char c : value) {
        if (NeedsEscape(c)) {
            out.push_back('%');
            out.push_back(HEX[(uint8_t(c) >> 4) & 0xF]);
            out.push_back(HEX[uint8_t(c) & 0xF]);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string UnescapeLogValue(const std::string& value)
{
    std::string out;
    out.reserve(value.size());
    for (size_t i = 0; i < value.size(); ++i) {
        if (value[i] != '%') {
            out.push_back(value[i]);
            continue;
        }
        if (i + 2 >= value.size()) throw std::invalid_argument("truncated escape");
        int hi = HexDigit(value[i + 1]);
        int lo = HexDigit(value[i + 2]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("bad escape in: " + value);
        out.push_back(char(hi << 4 | lo));
        i += 2;
    }
    return out;
}

std::string FormatLogLine(const LogEntry& entry)
{
    std::string line = "time=" + std::to_string(entry.time) + " node=" + std::to_string(entry.node) +
                       " kind=" + EscapeLogValue(entry.kind);
    for (const auto& [k, v] : entry.attrs) {
        CheckKey(k);
        if (k == "detail") throw std::invalid_argument("attribute key 'detail' is reserved");
        line += ' ';
        line += k;
        line += '=';
        line += EscapeLogValue(v);
    }
    if (entry.detail) line += " detail=" + EscapeLogValue(*entry.detail);
    return line;
}

LogEntry ParseLogLine(const std::string& line)
{
    std::vector<std::string> fields = SplitSpaces(line);
    if (fields.size() < 3) throw std::invalid_argument("log line too short");
    LogEntry entry;
    entry.time = ParseNumber<SimTime>(Expect(fields[0], "time"), "time");
    entry.node = ParseNumber<NodeId>(Expect(fields[1], "node"), "node");
    entry.kind = Expect(fields[2], "kind");
    for (size_t i = 3; i < fields.size(); ++i) {
        auto [k, v] = SplitField(fields[i]);
        if (k == "detail") {
            if (i + 1 != fields.size()) throw std::invalid_argument("detail must be the last field");
            entry.detail = std::move(v);
        } else {
            entry.attrs.emplace_back(std::move(k), std::move(v));
        }
    }
    return entry;
}

std::string FormatDetailLine(const DetailRecord& record)
{
    std::string line = "detail=" + EscapeLogValue(record.id) + " kind=" + EscapeLogValue(record.kind) + " values=";
    for (size_t i = 0; i < record.values.size(); ++i) {
        if (i) line += ',';
        line += EscapeLogValue(record.values[i]);
    }
    return line;
}

DetailRecord ParseDetailLine(const std::string& line)
{
    std::vector<std::string> fields = SplitSpaces(line);
    if (fields.size() != 3) throw std::invalid_argument("detail line needs three fields");
    DetailRecord record;
    record.id = Expect(fields[0], "detail");
    record.kind = Expect(fields[1], "kind");
    const std::string& raw = fields[2];
    if (raw.rfind("values=", 0) != 0) throw std::invalid_argument("expected values");
    std::string list = raw.substr(7);
    if (!list.empty()) {
        size_t pos = 0;
        while (true) {
            size_t next = list.find(',', pos);
            record.values.push_back(UnescapeLogValue(list.substr(pos, next == std::string::npos ? next : next - pos)));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
    }
    return record;
}

EventLog::EventLog(std::ostream* main, std::ostream* detail) : m_main{main}, m_detail{detail} {}

void EventLog::Record(const LogEntry& entry)
{
    ++m_entries;
    if (!m_main) return;
    *m_main << FormatLogLine(entry) << '\n';
    m_main->flush();
    if (!*m_main) throw std::runtime_error("log write failed");
}

void EventLog::RecordDetail(const DetailRecord& record)
{
    if (!m_detail) return;
    *m_detail << FormatDetailLine(record) << '\n';
    m_detail->flush();
    if (!*m_detail) throw std::runtime_error("detail log write failed");
}

} // namespace churnsim
