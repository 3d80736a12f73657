#ifndef MSGLON_SOBOL_HPP
#define MSGLON_SOBOL_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace msglon {

/// Unscrambled Sobol' sequence with Joe-Kuo (new-joe-kuo-6.21201) direction numbers.
///
/// Points are produced in Gray-code order and the first point is the origin, so the
/// one-dimensional prefix is 0, 0.5, 0.75, 0.25, ...  Coordinates carry 32 bits.
class SobolSequence {
public:
    static constexpr std::size_t max_dimension = 21;
    static constexpr int bits = 32;

    explicit SobolSequence(std::size_t dimension);

    std::size_t dimension() const { return dimension_; }

    /// Writes the next point into out (size == dimension()).
    void next(double* out);
    std::vector<double> next();

    /// Jumps so that the next call returns point number `index`.
    void seek(std::uint64_t index);

private:
    std::size_t dimension_;
    std::vector<std::uint32_t> directions_; // dimension_ x bits, row-major
    std::vector<std::uint32_t> state_;
    std::uint64_t index_ = 0;
};

/// First `count` points of the sequence, flattened row-major (count x dimension).
std::vector<double> sobol_points(std::size_t dimension, std::size_t count, std::uint64_t skip = 0);

} // namespace msglon

#endif
