// algebra.cpp — Two-level operator algebra

#include "pbgfluor/algebra.hpp"

#include <cmath>
#include <string>

#include "pbgfluor/error.hpp"

namespace pbgfluor::algebra {

namespace {

Error algebra_error(const std::string& msg) { return Error("algebra", msg); }

} // namespace

SystemOperator::SystemOperator(const Matrix2& m) : m_(m) {
    if (!m_.allFinite()) {
        throw algebra_error("operator entries must be finite");
    }
}

SystemOperator SystemOperator::basis(int k) {
    if (k < 0 || k > 3) {
        throw algebra_error("basis index out of range: " + std::to_string(k));
    }
    Matrix2 m = Matrix2::Zero();
    m(k / 2, k % 2) = 1.0;
    return SystemOperator(m, Unchecked{});
}

SystemOperator SystemOperator::R3() { return R22() - R11(); }

SystemOperator SystemOperator::identity() { return R11() + R22(); }

SystemOperator SystemOperator::from_coeffs(const Coeffs& c) {
    Matrix2 m;
    m << c(0), c(1), c(2), c(3);
    return SystemOperator(m);
}

Coeffs SystemOperator::expand() const {
    return Coeffs(m_(0, 0), m_(0, 1), m_(1, 0), m_(1, 1));
}

bool SystemOperator::is_hermitian(double tol) const {
    return (m_ - m_.adjoint()).norm() <= tol * std::max(1.0, m_.norm());
}

SystemOperator commutator(const SystemOperator& x, const SystemOperator& y) {
    return x * y - y * x;
}

SystemOperator heisenberg_rotate(const SystemOperator& x, double t, const SystemOperator& hamiltonian) {
    if (!hamiltonian.is_hermitian()) {
        throw algebra_error("heisenberg_rotate requires a hermitian Hamiltonian");
    }
    const Matrix2& h = hamiltonian.matrix();
    if (h(0, 1) == 0.0 && h(1, 0) == 0.0) {
        const double e0 = h(0, 0).real();
        const double e1 = h(1, 1).real();
        Matrix2 out = x.matrix();
        out(0, 1) *= std::polar(1.0, (e0 - e1) * t);
        out(1, 0) *= std::polar(1.0, (e1 - e0) * t);
        return SystemOperator(out);
    }
    Eigen::SelfAdjointEigenSolver<Matrix2> eig(h);
    const Matrix2& u = eig.eigenvectors();
    const Eigen::Vector2d& e = eig.eigenvalues();
    Matrix2 phase = Matrix2::Zero();
    phase(0, 0) = std::polar(1.0, e(0) * t);
    phase(1, 1) = std::polar(1.0, e(1) * t);
    const Matrix2 rot = u * phase * u.adjoint();
    return SystemOperator((rot * x.matrix() * rot.adjoint()).eval());
}

DressedAtom dressed_parameters(double epsilon, double detuning, double laser_frequency) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw algebra_error("Rabi coupling must be finite and >= 0");
    }
    if (!std::isfinite(detuning) || !std::isfinite(laser_frequency)) {
        throw algebra_error("detuning and laser frequency must be finite");
    }
    if (epsilon == 0.0 && detuning == 0.0) {
        throw algebra_error("degenerate dressing (epsilon = 0 and detuning = 0); "
                            "use the spontaneous-emission model instead");
    }
    DressedAtom a;
    a.epsilon = epsilon;
    a.detuning = detuning;
    a.laser_frequency = laser_frequency;
    a.rabi = std::sqrt(epsilon * epsilon + 0.25 * detuning * detuning);

    // sin^2 phi = (1 - D/(2 Omega)) / 2, sgn(0) = 0. The small side is formed
    // without cancellation: Omega -+ D/2 = eps^2 / (Omega +- D/2).
    double sin2 = 0.5;
    double cos2 = 0.5;
    if (detuning > 0.0) {
        sin2 = epsilon * epsilon / (2.0 * a.rabi * (a.rabi + 0.5 * detuning));
        cos2 = 1.0 - sin2;
    } else if (detuning < 0.0) {
        cos2 = epsilon * epsilon / (2.0 * a.rabi * (a.rabi - 0.5 * detuning));
        sin2 = 1.0 - cos2;
    }
    a.s = std::sqrt(sin2);
    a.c = std::sqrt(cos2);
    a.phi = std::atan2(a.s, a.c);
    return a;
}

SystemOperator coupling_operator(const DressedAtom& atom) {
    const double c = atom.c;
    const double s = atom.s;
    return cplx(c * s) * SystemOperator::R3() + cplx(c * c) * SystemOperator::R12()
         - cplx(s * s) * SystemOperator::R21();
}

SystemOperator dressed_hamiltonian(const DressedAtom& atom) {
    return cplx(atom.rabi) * SystemOperator::R3();
}

Matrix2 bare_rotating_hamiltonian(const DressedAtom& atom) {
    Matrix2 h;
    h << -0.5 * atom.detuning, atom.epsilon, atom.epsilon, 0.5 * atom.detuning;
    return h;
}

Matrix2 dressing_transform(const DressedAtom& atom) {
    Matrix2 t;
    t << atom.c, atom.s, -atom.s, atom.c;
    return t;
}

BareOperator parse_bare_operator(std::string_view name) {
    if (name == "sigma12" || name == "σ12" || name == "σ₁₂") return BareOperator::sigma12;
    if (name == "sigma21" || name == "σ21" || name == "σ₂₁") return BareOperator::sigma21;
    if (name == "sigma3" || name == "σ3" || name == "σ₃" || name == "sigma_z") return BareOperator::sigma3;
    throw algebra_error("unknown bare operator '" + std::string(name) + "'");
}

SystemOperator bare_from_dressed(BareOperator op, const DressedAtom& atom) {
    const double c = atom.c;
    const double s = atom.s;
    const auto R3 = SystemOperator::R3();
    const auto R12 = SystemOperator::R12();
    const auto R21 = SystemOperator::R21();
    switch (op) {
    case BareOperator::sigma12:
        return cplx(c * s) * R3 + cplx(c * c) * R12 - cplx(s * s) * R21;
    case BareOperator::sigma21:
        return cplx(c * s) * R3 - cplx(s * s) * R12 + cplx(c * c) * R21;
    case BareOperator::sigma3:
        return cplx(c * c - s * s) * R3 - cplx(2.0 * c * s) * (R12 + R21);
    }
    throw algebra_error("unhandled bare operator");
}

SystemOperator bare_from_dressed(std::string_view name, const DressedAtom& atom) {
    return bare_from_dressed(parse_bare_operator(name), atom);
}

Eigen::Vector2cd bare_state_in_dressed(int level, const DressedAtom& atom) {
    if (level != 1 && level != 2) {
        throw algebra_error("bare level must be 1 or 2");
    }
    Eigen::Vector2cd bare = Eigen::Vector2cd::Zero();
    bare(level - 1) = 1.0;
    return dressing_transform(atom).adjoint() * bare;
}

} // namespace pbgfluor::algebra
