#pragma once

#include <stdexcept>
#include <string>

namespace lfshield {

// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorClass {
    Usage,      // bad arguments or configuration (exit 1)
    Data,       // malformed or unusable input data (exit 2)
    Invariant,  // internal consistency violation (exit 3)
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
    ErrorClass error_class() const noexcept { return class_; }

private:
    ErrorClass class_;
};

#define LFSHIELD_DEFINE_ERROR(Name, Class)                                        \
    class Name : public Error {                                                   \
    public:                                                                       \
        explicit Name(const std::string& what) : Error(ErrorClass::Class, what) {} \
    }

LFSHIELD_DEFINE_ERROR(MalformedUrl, Data);
LFSHIELD_DEFINE_ERROR(IoError, Data);
LFSHIELD_DEFINE_ERROR(SchemaError, Data);
LFSHIELD_DEFINE_ERROR(LabelError, Data);
LFSHIELD_DEFINE_ERROR(EmptyAfterCleaning, Data);
LFSHIELD_DEFINE_ERROR(DimensionError, Data);
LFSHIELD_DEFINE_ERROR(LengthError, Data);
LFSHIELD_DEFINE_ERROR(EmptyMatrixError, Data);
LFSHIELD_DEFINE_ERROR(RatioError, Usage);
LFSHIELD_DEFINE_ERROR(ArgError, Usage);
LFSHIELD_DEFINE_ERROR(RateError, Usage);
LFSHIELD_DEFINE_ERROR(KError, Usage);
LFSHIELD_DEFINE_ERROR(ConfigError, Usage);
LFSHIELD_DEFINE_ERROR(InvariantError, Invariant);

#undef LFSHIELD_DEFINE_ERROR

}  // namespace lfshield
