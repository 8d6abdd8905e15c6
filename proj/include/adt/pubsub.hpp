#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace adt {

/// MQTT topic-filter matching: `+` matches one level, a trailing `#`
/// matches any number of remaining levels (including none).
inline bool topic_matches(std::string_view filter, std::string_view topic) {
    auto next_level = [](std::string_view& s) {
        const auto pos = s.find('/');
        std::string_view level = s.substr(0, pos);
        s = pos == std::string_view::npos ? std::string_view{} : s.substr(pos + 1);
        return std::pair{level, pos != std::string_view::npos};
    };
    bool topic_more = true;
    while (true) {
        auto [f, f_more] = next_level(filter);
        if (f == "#") return !f_more;
        if (!topic_more) return false;
        auto [t, t_more] = next_level(topic);
        if (f != "+" && f != t) return false;
        if (!f_more) return !t_more;
        topic_more = t_more;
    }
}

/// Minimal in-process publish/subscribe broker speaking MQTT-style topics.
///
/// Delivery is synchronous on the publisher's thread; subscribers must be
/// thread-safe if several threads publish. Dropping the returned
/// Subscription unsubscribes.
class Broker {
public:
    using Handler = std::function<void(const std::string& topic, const std::string& payload)>;

    class Subscription {
    public:
        Subscription() = default;
        Subscription(const Subscription&) = delete;
        Subscription& operator=(const Subscription&) = delete;
        Subscription(Subscription&&) noexcept = default;
        Subscription& operator=(Subscription&& other) noexcept {
            reset();
            entry_ = std::move(other.entry_);
            return *this;
        }
        ~Subscription() { reset(); }

        void reset() {
            if (auto e = entry_.lock()) {
                std::lock_guard lock(e->mutex);
                e->active = false;
            }
            entry_.reset();
        }

    private:
        friend class Broker;
        struct Entry {
            std::string filter;
            Handler handler;
            std::recursive_mutex mutex;  // held while the handler runs
            std::atomic<bool> active{true};
        };
        explicit Subscription(std::weak_ptr<Entry> e) : entry_(std::move(e)) {}
        std::weak_ptr<Entry> entry_;
    };

    [[nodiscard]] Subscription subscribe(std::string filter, Handler handler) {
        auto entry = std::make_shared<Subscription::Entry>();
        entry->filter = std::move(filter);
        entry->handler = std::move(handler);
        std::lock_guard lock(mutex_);
        entries_.push_back(entry);
        return Subscription(entry);
    }

    /// Returns the number of subscribers the message was delivered to.
    std::size_t publish(const std::string& topic, const std::string& payload) {
        std::vector<std::shared_ptr<Subscription::Entry>> targets;
        {
            std::lock_guard lock(mutex_);
            std::erase_if(entries_, [](const auto& e) { return !e->active; });
            for (const auto& e : entries_)
                if (topic_matches(e->filter, topic)) targets.push_back(e);
        }
        std::size_t delivered = 0;
        for (const auto& e : targets) {
            std::lock_guard l(e->mutex);
            if (!e->active) continue;
            e->handler(topic, payload);
            ++delivered;
        }
        return delivered;
    }

private:
    std::mutex mutex_;
    std::vector<std::shared_ptr<Subscription::Entry>> entries_;
};

}  // namespace adt
