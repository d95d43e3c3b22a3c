#ifndef NETCODE_COUNTERS_HPP
#define NETCODE_COUNTERS_HPP

#include <cstdint>

namespace netcode {

/// Operation counters for complexity measurements. Field multiplications and
/// additions are recorded by the arithmetic layer whenever a CounterScope is
/// active on the current thread; message/iteration counts are recorded by the
/// message passing engines. Inversions count as one multiplication (a
/// division is an inversion plus a multiplication, hence two), subtractions
/// and negations as one addition.
struct OpCounters {
    std::uint64_t mul = 0;
    std::uint64_t add = 0;
    std::uint64_t messages = 0;
    std::uint64_t iterations = 0;

    std::uint64_t field_ops() const { return mul + add; }

    OpCounters& operator+=(const OpCounters& o) {
        mul += o.mul;
        add += o.add;
        messages += o.messages;
        iterations += o.iterations;
        return *this;
    }
};

namespace counters {

namespace detail {
extern thread_local OpCounters* active;
}

inline void count_mul(std::uint64_t k = 1) {
    if (detail::active) detail::active->mul += k;
}

inline void count_add(std::uint64_t k = 1) {
    if (detail::active) detail::active->add += k;
}

inline void count_message(std::uint64_t k = 1) {
    if (detail::active) detail::active->messages += k;
}

inline void count_iteration(std::uint64_t k = 1) {
    if (detail::active) detail::active->iterations += k;
}

/// Routes counting on this thread into `target` while alive. Scopes nest;
/// the previous target is restored on destruction.
class Scope {
  public:
    explicit Scope(OpCounters& target) : prev_(detail::active) { detail::active = &target; }
    ~Scope() { detail::active = prev_; }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

  private:
    OpCounters* prev_;
};

/// Suspends counting while alive. Used around self-checks and diagnostics so
/// they do not perturb the measured operation counts.
class Pause {
  public:
    Pause() : prev_(detail::active) { detail::active = nullptr; }
    ~Pause() { detail::active = prev_; }
    Pause(const Pause&) = delete;
    Pause& operator=(const Pause&) = delete;

  private:
    OpCounters* prev_;
};

} // namespace counters
} // namespace netcode

#endif
