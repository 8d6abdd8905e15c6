#pragma once

#include <adt/measure_point.hpp>

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace adt {

/// Fan-out of measure points to dashboard clients.
///
/// Keeps the most recent `depth` points per channel. `attach` returns that
/// snapshot and registers the listener under one lock, and `publish`
/// appends and notifies under the same lock, so a client sees every point
/// exactly once across the snapshot/live seam. Listeners run under the hub
/// lock and must only enqueue.
class MeasureHub {
public:
    using Listener = std::function<void(const std::vector<MeasurePoint>&)>;

    class Attachment {
    public:
        Attachment() = default;
        Attachment(const Attachment&) = delete;
        Attachment& operator=(const Attachment&) = delete;
        Attachment(Attachment&& o) noexcept : hub_(std::exchange(o.hub_, nullptr)), id_(o.id_) {}
        Attachment& operator=(Attachment&& o) noexcept {
            detach();
            hub_ = std::exchange(o.hub_, nullptr);
            id_ = o.id_;
            return *this;
        }
        ~Attachment() { detach(); }

        void detach() {
            if (hub_) hub_->remove(id_);
            hub_ = nullptr;
        }

    private:
        friend class MeasureHub;
        Attachment(MeasureHub* hub, std::size_t id) : hub_(hub), id_(id) {}
        MeasureHub* hub_ = nullptr;
        std::size_t id_ = 0;
    };

    explicit MeasureHub(std::size_t depth = 200) : depth_(depth) {}

    MeasureHub(const MeasureHub&) = delete;
    MeasureHub& operator=(const MeasureHub&) = delete;

    void publish(const std::vector<MeasurePoint>& batch) {
        if (batch.empty()) return;
        std::lock_guard lock(mutex_);
        for (const auto& p : batch) {
            auto& ring = rings_[p.channel];
            ring.push_back(p);
            while (ring.size() > depth_) ring.pop_front();
        }
        for (const auto& [id, listener] : listeners_) listener(batch);
    }

    std::vector<MeasurePoint> snapshot() const {
        std::lock_guard lock(mutex_);
        return snapshot_locked();
    }

    [[nodiscard]] Attachment attach(Listener listener, std::vector<MeasurePoint>& snapshot_out) {
        std::lock_guard lock(mutex_);
        snapshot_out = snapshot_locked();
        const std::size_t id = next_id_++;
        listeners_.emplace(id, std::move(listener));
        return Attachment(this, id);
    }

    std::size_t listener_count() const {
        std::lock_guard lock(mutex_);
        return listeners_.size();
    }

    std::size_t depth() const { return depth_; }

private:
    std::vector<MeasurePoint> snapshot_locked() const {
        std::vector<MeasurePoint> out;
        for (const auto& [chan, ring] : rings_) out.insert(out.end(), ring.begin(), ring.end());
        return out;
    }

    void remove(std::size_t id) {
        std::lock_guard lock(mutex_);
        listeners_.erase(id);
    }

    std::size_t depth_;
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<MeasurePoint>> rings_;
    std::map<std::size_t, Listener> listeners_;
    std::size_t next_id_ = 0;
};

}  // namespace adt
