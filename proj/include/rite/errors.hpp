#pragma once

#include <stdexcept>
#include <string>

namespace rite {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateElement : public Error {
public:
    using Error::Error;
};

class NonPlanar : public Error {
public:
    using Error::Error;
};

class InvalidMesh : public Error {
public:
    using Error::Error;
};

class OutsideGrid : public Error {
public:
    using Error::Error;
};

class CoincidentPoints : public Error {
public:
    using Error::Error;
};

class AssemblyFailure : public Error {
public:
    using Error::Error;
};

class SingularInnerSystem : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class LineOutsideDomain : public Error {
public:
    using Error::Error;
};

} // namespace rite
