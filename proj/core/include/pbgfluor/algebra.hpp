// algebra.hpp — Two-level operators in the dressed basis, dressing and free rotation

#pragma once

#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace pbgfluor {

using cplx = std::complex<double>;

namespace algebra {

using Matrix2 = Eigen::Matrix2cd;
using Coeffs = Eigen::Vector4cd;

// Position of R_ij (0-based i, j) in the basis (R11, R12, R21, R22).
constexpr int basis_index(int i, int j) noexcept { return 2 * i + j; }

// Index of the basis element whose adjoint is E_k (R12 <-> R21).
constexpr int adjoint_index(int k) noexcept { return k == 1 ? 2 : (k == 2 ? 1 : k); }

// A 2x2 operator on the dressed space {|1~>, |2~>}. Entries are always finite.
class SystemOperator {
public:
    SystemOperator() : m_(Matrix2::Zero()) {}
    explicit SystemOperator(const Matrix2& m);

    static SystemOperator basis(int k);
    static SystemOperator R11() { return basis(0); }
    static SystemOperator R12() { return basis(1); }
    static SystemOperator R21() { return basis(2); }
    static SystemOperator R22() { return basis(3); }
    static SystemOperator R3();
    static SystemOperator identity();
    static SystemOperator from_coeffs(const Coeffs& c);

    const Matrix2& matrix() const noexcept { return m_; }
    cplx operator()(int i, int j) const { return m_(i, j); }

    SystemOperator adjoint() const { return SystemOperator(m_.adjoint().eval(), Unchecked{}); }
    Coeffs expand() const;
    // <X> given the basis expectations <E_k>.
    cplx expectation(const Coeffs& basis_means) const { return expand().transpose() * basis_means; }

    bool is_hermitian(double tol = 1e-12) const;
    double norm() const { return m_.norm(); }

    SystemOperator& operator+=(const SystemOperator& o) { m_ += o.m_; return *this; }
    SystemOperator& operator-=(const SystemOperator& o) { m_ -= o.m_; return *this; }
    SystemOperator& operator*=(cplx a) { m_ *= a; return *this; }

    friend SystemOperator operator+(SystemOperator a, const SystemOperator& b) { return a += b; }
    friend SystemOperator operator-(SystemOperator a, const SystemOperator& b) { return a -= b; }
    friend SystemOperator operator*(cplx a, SystemOperator b) { return b *= a; }
    friend SystemOperator operator*(SystemOperator b, cplx a) { return b *= a; }
    friend SystemOperator operator*(const SystemOperator& a, const SystemOperator& b) {
        return SystemOperator((a.m_ * b.m_).eval(), Unchecked{});
    }
    friend bool operator==(const SystemOperator& a, const SystemOperator& b) { return a.m_ == b.m_; }

private:
    struct Unchecked {};
    SystemOperator(const Matrix2& m, Unchecked) : m_(m) {}

    Matrix2 m_;
};

SystemOperator commutator(const SystemOperator& x, const SystemOperator& y);

// e^{iHt} X e^{-iHt}. Diagonal H uses phase factors; otherwise H is diagonalized.
SystemOperator heisenberg_rotate(const SystemOperator& x, double t, const SystemOperator& hamiltonian);

// Laser-dressed two-level atom. Frequencies are angular; phi lies in [0, pi/2].
struct DressedAtom {
    double epsilon{0.0};         // Rabi coupling
    double detuning{0.0};        // atom - laser
    double laser_frequency{0.0};
    double rabi{0.0};            // generalized Rabi frequency Omega
    double c{1.0};
    double s{0.0};
    double phi{0.0};
};

DressedAtom dressed_parameters(double epsilon, double detuning, double laser_frequency);

// L = cs R3 + c^2 R12 - s^2 R21
SystemOperator coupling_operator(const DressedAtom& atom);

// Dressed free Hamiltonian Omega R3.
SystemOperator dressed_hamiltonian(const DressedAtom& atom);

// Rotating-frame bare Hamiltonian (D/2) sigma3 + eps (sigma12 + sigma21), written in the bare basis.
Matrix2 bare_rotating_hamiltonian(const DressedAtom& atom);

// Columns are the dressed kets expressed in the bare basis {|1>, |2>}.
Matrix2 dressing_transform(const DressedAtom& atom);

enum class BareOperator { sigma12, sigma21, sigma3 };

BareOperator parse_bare_operator(std::string_view name);
SystemOperator bare_from_dressed(BareOperator op, const DressedAtom& atom);
SystemOperator bare_from_dressed(std::string_view name, const DressedAtom& atom);

// Bare level |1> (ground) or |2> (excited) as dressed-basis amplitudes.
Eigen::Vector2cd bare_state_in_dressed(int level, const DressedAtom& atom);

} // namespace algebra
} // namespace pbgfluor
