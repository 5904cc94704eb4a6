#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fixsim {

/** Base class of every error raised by the library. */
class Error : public std::runtime_error
{
    public:
        explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/** Input that is malformed or violates a documented precondition. */
class InvalidInput : public Error
{
    public:
        explicit InvalidInput(const std::string& what) : Error(what) {}
};

/** A coordinate sequence has the wrong length for the working dimension. */
class WrongArity : public InvalidInput
{
    public:
        explicit WrongArity(const std::string& what) : InvalidInput(what) {}
};

/** A coordinate sequence is not a point of the standard simplex. */
class NotOnSimplex : public InvalidInput
{
    public:
        explicit NotOnSimplex(const std::string& what) : InvalidInput(what) {}
};

/** A grid or search would exceed the configured cell budget. */
class ResourceLimit : public Error
{
    public:
        explicit ResourceLimit(const std::string& what) : Error(what) {}
};

/** A map produced a value that is not a point of the simplex. */
class MapRangeError : public Error
{
    public:
        explicit MapRangeError(const std::string& what) : Error(what) {}
};

/** Clamped map components summed to (numerically) zero. */
class DegenerateOutput : public MapRangeError
{
    public:
        explicit DegenerateOutput(const std::string& what) : MapRangeError(what) {}
};

/** A fully labeled cell search failed; only possible for inadmissible labelings. */
class SearchExhausted : public Error
{
    public:
        explicit SearchExhausted(const std::string& what) : Error(what) {}
};

/** No sampled pair was at least delta apart. */
class EmptyPairSet : public Error
{
    public:
        explicit EmptyPairSet(const std::string& what) : Error(what) {}
};

/** The perturbation tau is not strictly below every labeled coordinate. */
class TauTooLarge : public InvalidInput
{
    public:
        explicit TauTooLarge(const std::string& what) : InvalidInput(what) {}
};

/** The labeling breaks the boundary rules. */
class InadmissibleLabeling : public InvalidInput
{
    public:
        explicit InadmissibleLabeling(const std::string& what) : InvalidInput(what) {}
};

class NoFixedPointFound : public Error
{
    public:
        explicit NoFixedPointFound(const std::string& what) : Error(what) {}
};

class RoundTripMismatch : public Error
{
    public:
        explicit RoundTripMismatch(const std::string& what) : Error(what) {}
};

class UnsupportedDimension : public InvalidInput
{
    public:
        explicit UnsupportedDimension(const std::string& what) : InvalidInput(what) {}
};

/** Map text does not follow the grammar. Line and column are 1-based. */
class SyntaxError : public InvalidInput
{
    public:
        SyntaxError(const std::string& what, std::size_t line, std::size_t column)
            : InvalidInput(what + " at line " + std::to_string(line) + ", column "
                           + std::to_string(column)),
              line_(line), column_(column)
        {
        }

        std::size_t line() const { return line_; }
        std::size_t column() const { return column_; }

    private:
        std::size_t line_;
        std::size_t column_;
};

/** Component count or a variable index does not match the dimension. */
class ArityError : public InvalidInput
{
    public:
        explicit ArityError(const std::string& what) : InvalidInput(what) {}
};

class UnknownBuiltin : public InvalidInput
{
    public:
        explicit UnknownBuiltin(const std::string& what) : InvalidInput(what) {}
};

}   // namespace fixsim
