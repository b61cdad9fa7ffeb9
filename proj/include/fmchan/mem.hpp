#ifndef FMCHAN_MEM_HPP
#define FMCHAN_MEM_HPP

#include <atomic>
#include <cstddef>
#include <limits>
#include <new>

namespace fmchan::mem {

// Process-wide byte accounting for the numeric buffers (tensors and complex
// matrices). Peak tracking is resettable so a benchmark can attribute a
// high-water mark to a single call, which a process RSS counter cannot.

namespace detail {
inline std::atomic<std::size_t> live_bytes{0};
inline std::atomic<std::size_t> peak_bytes{0};
} // namespace detail

inline std::size_t live() { return detail::live_bytes.load(std::memory_order_relaxed); }
inline std::size_t peak() { return detail::peak_bytes.load(std::memory_order_relaxed); }

inline void reset_peak() {
    detail::peak_bytes.store(detail::live_bytes.load(std::memory_order_relaxed),
                             std::memory_order_relaxed);
}

inline void on_alloc(std::size_t bytes) {
    const std::size_t now =
        detail::live_bytes.fetch_add(bytes, std::memory_order_relaxed) + bytes;
    std::size_t prev = detail::peak_bytes.load(std::memory_order_relaxed);
    while (prev < now &&
           !detail::peak_bytes.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
    }
}

inline void on_free(std::size_t bytes) {
    detail::live_bytes.fetch_sub(bytes, std::memory_order_relaxed);
}

// Minimal allocator that reports into the counters above.
template <class T>
struct TrackingAllocator {
    using value_type = T;

    TrackingAllocator() noexcept = default;
    template <class U>
    TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        if (n > std::numeric_limits<std::size_t>::max() / sizeof(T)) throw std::bad_alloc();
        T* p = static_cast<T*>(::operator new(n * sizeof(T)));
        on_alloc(n * sizeof(T));
        return p;
    }
    void deallocate(T* p, std::size_t n) noexcept {
        on_free(n * sizeof(T));
        ::operator delete(p);
    }

    template <class U>
    bool operator==(const TrackingAllocator<U>&) const noexcept {
        return true;
    }
};

} // namespace fmchan::mem

#endif
