#pragma once

#include <adt/envelope.hpp>
#include <adt/errors.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace adt {

struct ReorderConfig {
    std::size_t capacity = 64;
    Millis max_wait = 500.0;
    /// First sequence number the sender uses. When unset, the first forced
    /// release establishes the start without reporting a gap.
    std::optional<std::uint64_t> first_seq;
};

struct ReorderNotice {
    enum class Kind {
        Gap,        ///< [first, last] were skipped and will never be emitted
        Duplicate,  ///< seq was already emitted or already buffered
        Late,       ///< seq arrived after its slot was skipped
    };
    Kind kind = Kind::Gap;
    std::string user_id;
    std::uint64_t first = 0;
    std::uint64_t last = 0;

    bool operator==(const ReorderNotice&) const = default;
};

struct ReorderOutput {
    std::vector<Envelope> emitted;
    std::vector<ReorderNotice> notices;

    void append(ReorderOutput&& other) {
        for (auto& e : other.emitted) emitted.push_back(std::move(e));
        for (auto& n : other.notices) notices.push_back(std::move(n));
    }
};

/// Restores per-source sequence order from out-of-order delivery.
///
/// One buffer serves one (session, user) stream. Envelopes are released
/// when they are the next expected seq; when the buffer is full, or when
/// the oldest buffered envelope has waited `max_wait`, the missing range is
/// skipped with a Gap notice. `now` is the receiver clock in milliseconds.
class ReorderBuffer {
public:
    explicit ReorderBuffer(ReorderConfig cfg = {}) : cfg_(cfg) {
        if (cfg_.capacity < 1) throw ParameterError("reorder capacity must be >= 1");
        if (!(cfg_.max_wait >= 0.0)) throw ParameterError("reorder max_wait must be non-negative");
        next_ = cfg_.first_seq;
    }

    ReorderOutput push(Envelope e, Millis now) {
        ReorderOutput out;
        const std::uint64_t seq = e.seq;
        if (next_ && seq < *next_) {
            const auto kind = was_skipped(seq) ? ReorderNotice::Kind::Late : ReorderNotice::Kind::Duplicate;
            out.notices.push_back({kind, e.user_id, seq, seq});
        } else if (pending_.contains(seq)) {
            out.notices.push_back({ReorderNotice::Kind::Duplicate, e.user_id, seq, seq});
        } else {
            if (user_id_.empty()) user_id_ = e.user_id;
            pending_.emplace(seq, Slot{std::move(e), now});
            drain(out);
            while (pending_.size() >= cfg_.capacity) force_front(out);
        }
        out.append(poll(now));
        return out;
    }

    /// Releases envelopes whose wait has expired.
    ReorderOutput poll(Millis now) {
        ReorderOutput out;
        while (!pending_.empty() && now - oldest_arrival() >= cfg_.max_wait) force_front(out);
        return out;
    }

    /// Releases everything still buffered (end of stream).
    ReorderOutput flush() {
        ReorderOutput out;
        while (!pending_.empty()) force_front(out);
        return out;
    }

    std::size_t pending() const { return pending_.size(); }
    std::optional<std::uint64_t> next_expected() const { return next_; }

private:
    struct Slot {
        Envelope envelope;
        Millis arrival;
    };

    Millis oldest_arrival() const {
        Millis t = pending_.begin()->second.arrival;
        for (const auto& [seq, slot] : pending_) t = std::min(t, slot.arrival);
        return t;
    }

    void drain(ReorderOutput& out) {
        while (next_ && !pending_.empty() && pending_.begin()->first == *next_) {
            out.emitted.push_back(std::move(pending_.begin()->second.envelope));
            pending_.erase(pending_.begin());
            ++*next_;
        }
    }

    void force_front(ReorderOutput& out) {
        const std::uint64_t front = pending_.begin()->first;
        if (next_ && front > *next_) {
            out.notices.push_back({ReorderNotice::Kind::Gap, user_id_, *next_, front - 1});
            skipped_.emplace_back(*next_, front - 1);
        }
        next_ = front;
        drain(out);
    }

    bool was_skipped(std::uint64_t seq) const {
        for (const auto& [a, b] : skipped_)
            if (seq >= a && seq <= b) return true;
        return false;
    }

    ReorderConfig cfg_;
    std::map<std::uint64_t, Slot> pending_;
    std::optional<std::uint64_t> next_;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> skipped_;
    std::string user_id_;
};

}  // namespace adt
