#pragma once

#include <stdexcept>
#include <string>

namespace msym {

// Every failure the library raises derives from Error so callers can catch
// the whole family at once; the concrete type carries the category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MSYM_DECLARE_ERROR(Name)                                               \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}   \
    }

MSYM_DECLARE_ERROR(NonConvexAt);
MSYM_DECLARE_ERROR(OutOfDomain);
MSYM_DECLARE_ERROR(NewtonDivergence);
MSYM_DECLARE_ERROR(LostConvexity);
MSYM_DECLARE_ERROR(MaxIterations);
MSYM_DECLARE_ERROR(HomotopyStall);
MSYM_DECLARE_ERROR(DegreeOverflow);
MSYM_DECLARE_ERROR(NotClosed);
MSYM_DECLARE_ERROR(WrongArity);
MSYM_DECLARE_ERROR(DimensionTooLarge);
MSYM_DECLARE_ERROR(SingularJacobian);
MSYM_DECLARE_ERROR(NotInvertible);
MSYM_DECLARE_ERROR(NotFiberLinear);
MSYM_DECLARE_ERROR(ConfigError);
MSYM_DECLARE_ERROR(IoError);
MSYM_DECLARE_ERROR(InvalidArgument);

#undef MSYM_DECLARE_ERROR

}  // namespace msym
