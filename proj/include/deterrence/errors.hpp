#ifndef DETERRENCE_ERRORS_HPP
#define DETERRENCE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace deterrence {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// b - pi(p) s <= 0, or w0 < w_m where a deterring strategy is required.
struct DegenerateStrategy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoRootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonMonotoneError : std::domain_error {
    using std::domain_error::domain_error;
};

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace deterrence

#endif
