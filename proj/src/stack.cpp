#include "inctab/stack.hpp"

#include <pthread.h>

#include <exception>
#include <stdexcept>

namespace inctab {

namespace {

struct Job {
    const std::function<void()>* f;
    std::exception_ptr error;
};

void* trampoline(void* p) {
    auto* job = static_cast<Job*>(p);
    try {
        (*job->f)();
    } catch (...) {
        job->error = std::current_exception();
    }
    return nullptr;
}

} // namespace

void run_with_stack(std::size_t bytes, const std::function<void()>& f) {
    Job job{&f, nullptr};
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    pthread_attr_setstacksize(&attr, bytes);
    pthread_t th;
    int rc = pthread_create(&th, &attr, trampoline, &job);
    pthread_attr_destroy(&attr);
    if (rc != 0) {
        // Fall back to the current thread.
        f();
        return;
    }
    pthread_join(th, nullptr);
    if (job.error) std::rethrow_exception(job.error);
}

} // namespace inctab
