#include "toda/core.hpp"

namespace toda {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ZeroLambda: return "ZeroLambda";
        case ErrorKind::RealityViolation: return "RealityViolation";
        case ErrorKind::GridTooSmall: return "GridTooSmall";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::Blowup: return "Blowup";
        case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
        case ErrorKind::NonUnitDeterminant: return "NonUnitDeterminant";
        case ErrorKind::ImaginaryResidue: return "ImaginaryResidue";
        case ErrorKind::SingularCell: return "SingularCell";
        case ErrorKind::EmptySearch: return "EmptySearch";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::UnsupportedRepresentation: return "UnsupportedRepresentation";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

Grid make_grid(double a0, double b0, double la, double lb, int na, int nb) {
    if (na < 3 || nb < 3) throw Error(ErrorKind::GridTooSmall, "grid needs at least 3 points per side");
    Grid g;
    g.a0 = a0;
    g.b0 = b0;
    g.na = na;
    g.nb = nb;
    g.ha = la / (na - 1);
    g.hb = lb / (nb - 1);
    return g;
}

}  // namespace toda
