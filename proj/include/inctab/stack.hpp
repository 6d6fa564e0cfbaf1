#pragma once

#include <cstddef>
#include <functional>

namespace inctab {

/// Runs `f` on a thread with a `bytes`-sized stack and waits for it.
/// Exceptions thrown by `f` are rethrown in the caller.
void run_with_stack(std::size_t bytes, const std::function<void()>& f);

} // namespace inctab
