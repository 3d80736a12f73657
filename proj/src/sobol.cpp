#include "msglon/sobol.hpp"

#include "msglon/error.hpp"

#include <array>
#include <bit>
#include <string>

namespace msglon {

namespace {

struct PrimitivePolynomial {
    int degree;
    std::uint32_t coefficients; // inner coefficients a_1..a_{s-1}
    std::array<std::uint32_t, 8> initial;
};

// Dimensions 2..21 of new-joe-kuo-6.21201. Dimension 1 uses m_k = 1 for all k.
constexpr std::array<PrimitivePolynomial, SobolSequence::max_dimension - 1> joe_kuo = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

} // namespace

SobolSequence::SobolSequence(std::size_t dimension)
    : dimension_(dimension), directions_(dimension * bits), state_(dimension, 0)
{
    if (dimension == 0)
        throw StructuralError("sobol: dimension must be positive");
    if (dimension > max_dimension)
        throw CapabilityError("sobol: dimension " + std::to_string(dimension) + " exceeds direction-number table (max "
                              + std::to_string(max_dimension) + ")");

    for (int k = 0; k < bits; ++k)
        directions_[k] = std::uint32_t{1} << (bits - 1 - k);

    for (std::size_t j = 1; j < dimension; ++j) {
        const auto& poly = joe_kuo[j - 1];
        const int s = poly.degree;
        std::uint32_t* v = &directions_[j * bits];
        for (int k = 0; k < s && k < bits; ++k)
            v[k] = poly.initial[k] << (bits - 1 - k);
        for (int k = s; k < bits; ++k) {
            std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
            for (int l = 1; l < s; ++l) {
                if ((poly.coefficients >> (s - 1 - l)) & 1u)
                    value ^= v[k - l];
            }
            v[k] = value;
        }
    }
}

void SobolSequence::next(double* out)
{
    constexpr double scale = 0x1.0p-32;
    for (std::size_t j = 0; j < dimension_; ++j)
        out[j] = static_cast<double>(state_[j]) * scale;

    // Gray-code step: flip the direction number at the lowest zero bit of the index.
    const int c = std::countr_one(index_);
    if (c >= bits)
        throw CapabilityError("sobol: sequence exhausted");
    for (std::size_t j = 0; j < dimension_; ++j)
        state_[j] ^= directions_[j * bits + c];
    ++index_;
}

std::vector<double> SobolSequence::next()
{
    std::vector<double> point(dimension_);
    next(point.data());
    return point;
}

void SobolSequence::seek(std::uint64_t index)
{
    const std::uint64_t gray = index ^ (index >> 1);
    for (std::size_t j = 0; j < dimension_; ++j) {
        std::uint32_t value = 0;
        for (int k = 0; k < bits; ++k) {
            if ((gray >> k) & 1u)
                value ^= directions_[j * bits + k];
        }
        state_[j] = value;
    }
    index_ = index;
}

std::vector<double> sobol_points(std::size_t dimension, std::size_t count, std::uint64_t skip)
{
    SobolSequence sequence(dimension);
    if (skip != 0)
        sequence.seek(skip);
    std::vector<double> points(dimension * count);
    for (std::size_t i = 0; i < count; ++i)
        sequence.next(&points[i * dimension]);
    return points;
}

} // namespace msglon
