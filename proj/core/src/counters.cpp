#include "netcode/counters.hpp"

namespace netcode::counters::detail {

thread_local OpCounters* active = nullptr;

} // namespace netcode::counters::detail
