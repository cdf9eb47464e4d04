#include "genrehawkes/ingest.hpp"

#include "genrehawkes/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace genrehawkes {

bool canonical_less(const Event& a, const Event& b) {
    if (a.upload_time != b.upload_time) return a.upload_time < b.upload_time;
    return a.video_id < b.video_id;
}

EventStream::EventStream(double origin_epoch, std::vector<Event> events, std::optional<double> horizon)
    : origin_epoch_(origin_epoch), events_(std::move(events)) {
    std::stable_sort(events_.begin(), events_.end(), canonical_less);
    if (horizon) {
        horizon_ = *horizon;
    } else {
        horizon_ = events_.empty() ? 0.0 : events_.back().upload_time;
    }
}

std::vector<double> EventStream::times() const {
    std::vector<double> out;
    out.reserve(events_.size());
    for (const auto& e : events_) out.push_back(e.upload_time);
    return out;
}

EventStream EventStream::with_events(std::vector<Event> events) const {
    return EventStream(origin_epoch_, std::move(events), horizon_);
}

EventStream EventStream::with_horizon(double horizon) const {
    EventStream copy = *this;
    copy.horizon_ = horizon;
    return copy;
}

InputFormat format_from_path(const std::string& path) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".csv")) return InputFormat::csv;
    return InputFormat::jsonl;
}

namespace {

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    Int value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::optional<double> parse_iso8601(std::string_view s) {
    // YYYY-MM-DD
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto y = parse_int<int>(s.substr(0, 4));
    auto m = parse_int<unsigned>(s.substr(5, 2));
    auto d = parse_int<unsigned>(s.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{*m}, std::chrono::day{*d}};
    if (!ymd.ok()) return std::nullopt;
    double seconds = static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count()) * kSecondsPerDay;
    s.remove_prefix(10);
    if (s.empty()) return seconds;

    if (s[0] != 'T' && s[0] != ' ') return std::nullopt;
    s.remove_prefix(1);
    if (s.size() < 5 || s[2] != ':') return std::nullopt;
    auto hh = parse_int<int>(s.substr(0, 2));
    auto mm = parse_int<int>(s.substr(3, 2));
    if (!hh || !mm || *hh > 23 || *mm > 59) return std::nullopt;
    seconds += *hh * 3600.0 + *mm * 60.0;
    s.remove_prefix(5);
    if (!s.empty() && s[0] == ':') {
        std::size_t end = 1;
        while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.')) ++end;
        auto ss = parse_double(s.substr(1, end - 1));
        if (!ss || *ss < 0.0 || *ss >= 61.0) return std::nullopt;
        seconds += *ss;
        s.remove_prefix(end);
    }
    if (s.empty() || s == "Z") return seconds;
    if ((s[0] == '+' || s[0] == '-') && s.size() == 6 && s[3] == ':') {
        auto oh = parse_int<int>(s.substr(1, 2));
        auto om = parse_int<int>(s.substr(4, 2));
        if (!oh || !om) return std::nullopt;
        const double offset = *oh * 3600.0 + *om * 60.0;
        return s[0] == '+' ? seconds - offset : seconds + offset;
    }
    return std::nullopt;
}

struct RawRecord {
    std::size_t line;
    std::string video_id;
    double ts;
    std::string uploader_id;
    std::vector<std::string> tags;
    std::int64_t views;
    std::int64_t comments;
};

void normalize_tags(RawRecord& r, const std::string& source) {
    if (r.tags.empty()) throw ParseError(source, r.line, "tags", "record '" + r.video_id + "' has no tags");
    for (const auto& t : r.tags) {
        if (t.empty()) throw ParseError(source, r.line, "tags", "record '" + r.video_id + "' has an empty tag");
    }
    std::sort(r.tags.begin(), r.tags.end());
    r.tags.erase(std::unique(r.tags.begin(), r.tags.end()), r.tags.end());
}

void check_counts(const RawRecord& r, const std::string& source) {
    if (r.views < 0) throw ParseError(source, r.line, "views", "negative count");
    if (r.comments < 0) throw ParseError(source, r.line, "comments", "negative count");
}

RawRecord parse_jsonl_line(const std::string& text, std::size_t line, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, line, "<record>", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(source, line, "<record>", "expected a JSON object");

    auto require = [&](const char* key) -> const nlohmann::json& {
        auto it = j.find(key);
        if (it == j.end()) throw ParseError(source, line, key, "missing");
        return *it;
    };
    auto require_string = [&](const char* key) {
        const auto& v = require(key);
        if (!v.is_string()) throw ParseError(source, line, key, "expected a string");
        return v.get<std::string>();
    };
    auto require_int = [&](const char* key) {
        const auto& v = require(key);
        if (!v.is_number_integer()) throw ParseError(source, line, key, "expected an integer");
        return v.get<std::int64_t>();
    };

    RawRecord r;
    r.line = line;
    r.video_id = require_string("video_id");
    if (r.video_id.empty()) throw ParseError(source, line, "video_id", "empty");

    const auto& ts = require("ts");
    std::optional<double> seconds;
    if (ts.is_number()) {
        seconds = ts.get<double>();
    } else if (ts.is_string()) {
        seconds = parse_timestamp(ts.get<std::string>());
    }
    if (!seconds || !std::isfinite(*seconds)) throw ParseError(source, line, "ts", "not an ISO-8601 date or epoch seconds");
    r.ts = *seconds;

    r.uploader_id = require_string("uploader_id");
    if (r.uploader_id.empty()) throw ParseError(source, line, "uploader_id", "empty");

    const auto& tags = require("tags");
    if (!tags.is_array()) throw ParseError(source, line, "tags", "expected an array of strings");
    for (const auto& t : tags) {
        if (!t.is_string()) throw ParseError(source, line, "tags", "expected an array of strings");
        r.tags.push_back(t.get<std::string>());
    }
    r.views = require_int("views");
    r.comments = require_int("comments");
    return r;
}

constexpr std::string_view kCsvHeader = "video_id,ts,uploader_id,tags,views,comments";

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

RawRecord parse_csv_line(std::string_view text, std::size_t line, const std::string& source) {
    auto fields = split(text, ',');
    if (fields.size() != 6) {
        throw ParseError(source, line, "<record>", "expected 6 comma-separated fields, got " + std::to_string(fields.size()));
    }
    RawRecord r;
    r.line = line;
    r.video_id = std::string(fields[0]);
    if (r.video_id.empty()) throw ParseError(source, line, "video_id", "empty");

    auto seconds = parse_double(fields[1]);
    if (!seconds) seconds = parse_timestamp(fields[1]);
    if (!seconds || !std::isfinite(*seconds)) throw ParseError(source, line, "ts", "not an ISO-8601 date or epoch seconds");
    r.ts = *seconds;

    r.uploader_id = std::string(fields[2]);
    if (r.uploader_id.empty()) throw ParseError(source, line, "uploader_id", "empty");

    if (!fields[3].empty()) {
        for (auto t : split(fields[3], '|')) r.tags.emplace_back(t);
    }
    auto views = parse_int<std::int64_t>(fields[4]);
    if (!views) throw ParseError(source, line, "views", "expected an integer");
    auto comments = parse_int<std::int64_t>(fields[5]);
    if (!comments) throw ParseError(source, line, "comments", "expected an integer");
    r.views = *views;
    r.comments = *comments;
    return r;
}

}  // namespace

std::optional<double> parse_timestamp(std::string_view text) {
    if (auto n = parse_double(text)) return n;
    return parse_iso8601(text);
}

EventStream parse_events(std::istream& in, InputFormat format, const std::string& source_name, const ParseOptions& opts) {
    std::vector<RawRecord> records;
    std::unordered_set<std::string> seen_ids;
    std::string text;
    std::size_t line = 0;
    bool header_seen = false;

    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;

        RawRecord r;
        if (format == InputFormat::csv) {
            if (!header_seen) {
                if (text != kCsvHeader) {
                    throw ParseError(source_name, line, "<header>", "expected '" + std::string(kCsvHeader) + "'");
                }
                header_seen = true;
                continue;
            }
            r = parse_csv_line(text, line, source_name);
        } else {
            r = parse_jsonl_line(text, line, source_name);
        }
        normalize_tags(r, source_name);
        check_counts(r, source_name);
        if (!seen_ids.insert(r.video_id).second) {
            throw ParseError(source_name, line, "video_id", "duplicate video_id '" + r.video_id + "'");
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) throw ParseError(source_name, line, "<file>", "no records");

    double origin = std::numeric_limits<double>::infinity();
    for (const auto& r : records) origin = std::min(origin, r.ts);

    std::vector<Event> events;
    events.reserve(records.size());
    for (auto& r : records) {
        events.push_back(Event{std::move(r.video_id), (r.ts - origin) / kSecondsPerDay, std::move(r.uploader_id),
                               std::move(r.tags), r.views, r.comments});
    }
    EventStream stream(origin, std::move(events), opts.horizon);
    if (opts.horizon && *opts.horizon < stream.events().back().upload_time) {
        throw Error(source_name + ": horizon " + std::to_string(*opts.horizon) +
                    " days ends before the last event");
    }
    return stream;
}

EventStream parse_events(const std::string& path, InputFormat format, const ParseOptions& opts) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open input file '" + path + "'");
    return parse_events(in, format, path, opts);
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

void write_events(std::ostream& out, const EventStream& stream, InputFormat format) {
    if (format == InputFormat::csv) {
        out << kCsvHeader << '\n';
        for (const auto& e : stream.events()) {
            auto check = [&](const std::string& s, bool is_tag) {
                if (s.find_first_of(is_tag ? ",|\n\r" : ",\n\r") != std::string::npos) {
                    throw Error("value '" + s + "' of video '" + e.video_id + "' cannot be written as CSV");
                }
            };
            check(e.video_id, false);
            check(e.uploader_id, false);
            out << e.video_id << ',' << format_double(stream.origin_epoch() + e.upload_time * kSecondsPerDay) << ','
                << e.uploader_id << ',';
            for (std::size_t i = 0; i < e.tags.size(); ++i) {
                check(e.tags[i], true);
                if (i) out << '|';
                out << e.tags[i];
            }
            out << ',' << e.n_views << ',' << e.n_comments << '\n';
        }
        return;
    }
    for (const auto& e : stream.events()) {
        nlohmann::ordered_json j;
        j["video_id"] = e.video_id;
        j["ts"] = stream.origin_epoch() + e.upload_time * kSecondsPerDay;
        j["uploader_id"] = e.uploader_id;
        j["tags"] = e.tags;
        j["views"] = e.n_views;
        j["comments"] = e.n_comments;
        out << j.dump() << '\n';
    }
}

std::vector<Violation> validate_stream(const EventStream& stream) {
    std::vector<Violation> out;
    const auto events = stream.events();
    if (!std::isfinite(stream.horizon()) || stream.horizon() < 0.0) {
        out.push_back({std::nullopt, "horizon must be finite and non-negative"});
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (!std::isfinite(e.upload_time) || e.upload_time < 0.0) {
            out.push_back({i, "upload_time must be finite and non-negative"});
        } else if (e.upload_time > stream.horizon()) {
            out.push_back({i, "upload_time is after the stream horizon"});
        }
        if (e.tags.empty()) {
            out.push_back({i, "tag set is empty"});
        } else if (std::any_of(e.tags.begin(), e.tags.end(), [](const std::string& t) { return t.empty(); })) {
            out.push_back({i, "tag set contains an empty tag"});
        }
        if (e.n_views < 0) out.push_back({i, "n_views is negative"});
        if (e.n_comments < 0) out.push_back({i, "n_comments is negative"});
        if (i > 0 && canonical_less(e, events[i - 1])) {
            out.push_back({i, "events are not in canonical order"});
        }
    }
    return out;
}

}  // namespace genrehawkes
