#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace toda {

using cd = std::complex<double>;
using Mat3 = Eigen::Matrix3cd;
using Vec3 = Eigen::Vector3cd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class ErrorKind {
    ZeroLambda,
    RealityViolation,
    GridTooSmall,
    NoConvergence,
    Blowup,
    ResidualTooLarge,
    NonUnitDeterminant,
    ImaginaryResidue,
    SingularCell,
    EmptySearch,
    ConfigError,
    UnsupportedRepresentation,
};

const char* to_string(ErrorKind kind);

/// Library error. `history` carries residual traces (NoConvergence),
/// `indices` carries offending grid points (UnsupportedRepresentation).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

    std::vector<double> history;
    std::vector<std::pair<int, int>> indices;

private:
    ErrorKind kind_;
};

enum class Exec { Serial, Parallel };

/// Uniform rectangular grid; index i runs along a, j along b.
struct Grid {
    double a0 = 0.0;
    double b0 = 0.0;
    double ha = 1.0;
    double hb = 1.0;
    int na = 3;
    int nb = 3;

    double a(int i) const { return a0 + ha * i; }
    double b(int j) const { return b0 + hb * j; }
    std::size_t size() const { return static_cast<std::size_t>(na) * static_cast<std::size_t>(nb); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nb + j; }
};

/// Grid over [a0, a0+la] x [b0, b0+lb] with n points per side.
Grid make_grid(double a0, double b0, double la, double lb, int na, int nb);

template <typename T>
struct Field {
    Grid grid;
    std::vector<T> values;

    Field() = default;
    explicit Field(const Grid& g, const T& fill = T{}) : grid(g), values(g.size(), fill) {}

    T& operator()(int i, int j) { return values[grid.index(i, j)]; }
    const T& operator()(int i, int j) const { return values[grid.index(i, j)]; }
};

using ScalarField = Field<double>;

/// Frobenius norm of a 3x3 complex matrix.
inline double norm(const Mat3& m) { return m.norm(); }

}  // namespace toda
