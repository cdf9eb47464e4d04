#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genrehawkes {

inline constexpr double kSecondsPerDay = 86400.0;

/// One upload. Times are fractional days since the stream origin.
struct Event {
    std::string video_id;
    double upload_time{0.0};
    std::string uploader_id;
    std::vector<std::string> tags;  // sorted, unique
    std::int64_t n_views{0};
    std::int64_t n_comments{0};

    friend bool operator==(const Event&, const Event&) = default;
};

/// Strict weak order used everywhere events are sequenced: time first, then
/// video_id, so that equal timestamps still have a fixed causal order.
[[nodiscard]] bool canonical_less(const Event& a, const Event& b);

/// Time-ordered, immutable collection of events over the window [0, horizon].
///
/// The constructor only sorts; it does not reject invalid events, so that
/// `validate_stream` can report on arbitrary input. `parse_events` validates
/// before returning.
class EventStream {
public:
    EventStream() = default;

    /// `origin_epoch` is the absolute time (Unix seconds) of upload_time 0.
    /// When `horizon` is empty it defaults to the last event time (0 if empty).
    EventStream(double origin_epoch, std::vector<Event> events, std::optional<double> horizon = {});

    [[nodiscard]] double origin_epoch() const noexcept { return origin_epoch_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::span<const Event> events() const noexcept { return events_; }
    [[nodiscard]] std::size_t size() const noexcept { return events_.size(); }
    [[nodiscard]] bool empty() const noexcept { return events_.empty(); }
    [[nodiscard]] const Event& operator[](std::size_t i) const { return events_[i]; }

    /// Upload times in canonical order.
    [[nodiscard]] std::vector<double> times() const;

    /// Same origin and horizon, different member events.
    [[nodiscard]] EventStream with_events(std::vector<Event> events) const;
    [[nodiscard]] EventStream with_horizon(double horizon) const;

    friend bool operator==(const EventStream&, const EventStream&) = default;

private:
    double origin_epoch_{0.0};
    std::vector<Event> events_;
    double horizon_{0.0};
};

enum class InputFormat { jsonl, csv };

[[nodiscard]] InputFormat format_from_path(const std::string& path);

struct ParseOptions {
    std::optional<double> horizon;  // days after origin; default = last event
};

/// Reads a JSONL or CSV event file. Throws ParseError on malformed records
/// (naming the line and field), duplicate video ids, or an empty file.
[[nodiscard]] EventStream parse_events(const std::string& path, InputFormat format, const ParseOptions& opts = {});
[[nodiscard]] EventStream parse_events(std::istream& in, InputFormat format, const std::string& source_name,
                                       const ParseOptions& opts = {});

/// Writes the stream back in the ingest schema. Timestamps are epoch seconds
/// (origin + upload_time * 86400), printed with round-trip precision.
void write_events(std::ostream& out, const EventStream& stream, InputFormat format);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDThh:mm[:ss[.fff]][Z|±hh:mm]" or a plain
/// number of epoch seconds. Returns Unix seconds, or nullopt if unparseable.
[[nodiscard]] std::optional<double> parse_timestamp(std::string_view text);

struct Violation {
    std::optional<std::size_t> index;  // empty for stream-level violations
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every Event and EventStream invariant. Never throws.
[[nodiscard]] std::vector<Violation> validate_stream(const EventStream& stream);

}  // namespace genrehawkes
