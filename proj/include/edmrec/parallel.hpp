#pragma once

#include <functional>

namespace edmrec {

// Number of workers to use when the caller asked for `requested`;
// 0 means "all hardware threads".
int resolve_workers(int requested);

// Runs fn(i) for every i in [0, count) on up to `workers` threads.
// fn must only write to per-index state, so the outcome is independent
// of the worker count; any exception is rethrown on the calling thread.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

} // namespace edmrec
