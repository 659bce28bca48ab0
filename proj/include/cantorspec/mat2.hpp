// 2x2 matrix kernel for SL(2,R) / SU(1,1) cocycle arithmetic:
// frame conversion through the Cayley-type matrix P, triangular-corner
// seminorm, elliptic diagonalization, closed-form su(1,1) exponential
// and parabolic normal form.
#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

namespace cantorspec {

using cplx = std::complex<double>;

enum class Frame { Real, Disc };  // SL(2,R)/sl(2,R) vs SU(1,1)/su(1,1)

struct Mat2 {
    // row-major entries
    cplx a{0.0}, b{0.0}, c{0.0}, d{0.0};
    Frame frame = Frame::Real;

    Mat2() = default;
    Mat2(cplx a_, cplx b_, cplx c_, cplx d_, Frame f = Frame::Real)
        : a(a_), b(b_), c(c_), d(d_), frame(f) {}

    static Mat2 identity(Frame f = Frame::Real) { return {1.0, 0.0, 0.0, 1.0, f}; }
    static Mat2 zero(Frame f = Frame::Real) { return {0.0, 0.0, 0.0, 0.0, f}; }

    // rotation by phi turns, R_phi = [[cos 2*pi*phi, -sin 2*pi*phi], [sin, cos]]
    static Mat2 rotation_turns(double phi);
    // rotation with half-angle in radians, entries cos(x/2), used by the
    // degree-shift conjugations (angle x = <k,theta>)
    static Mat2 rotation_half_angle(double x);

    cplx trace() const { return a + d; }
    cplx det() const { return a * d - b * c; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d, frame};
    }
    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d, frame}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d, frame}; }
    Mat2 operator*(cplx s) const { return {a * s, b * s, c * s, d * s, frame}; }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s, frame}; }

    // adjugate; equals the inverse for det == 1
    Mat2 adjugate() const { return {d, -b, -c, a, frame}; }
    Mat2 inverse() const;

    double frobenius() const;
    // operator (spectral) norm, closed form from singular values
    double norm() const;

    bool near(const Mat2& o, double tol) const;
};

inline Mat2 operator*(cplx s, const Mat2& m) { return m * s; }
inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

// distance in operator norm
double mat_dist(const Mat2& x, const Mat2& y);

struct SpectralData {
    cplx mu1{0.0}, mu2{0.0};  // eigenvalues, mu1*mu2 = det
    double rho = 0.0;         // defined when elliptic: spec = {e^{+-i rho}}
    enum class Kind { Elliptic, Hyperbolic, Parabolic } kind = Kind::Parabolic;
};

struct NotElliptic : std::runtime_error {
    SpectralData spectral;
    explicit NotElliptic(SpectralData s)
        : std::runtime_error("not elliptic"), spectral(s) {}
};

struct NotParabolic : std::runtime_error {
    NotParabolic() : std::runtime_error("not parabolic") {}
};

// eigenvalues from the trace/determinant quadratic (no iteration)
SpectralData spectral(const Mat2& m, double tol = 1e-8);

// the fixed intertwiner P with P * SL(2,R) * P^{-1} = SU(1,1);
// normalization 1/sqrt(-2i) with the principal square root branch
const Mat2& frame_intertwiner();

// P m P^{-1} (to Disc) or P^{-1} m P (to Real); round-trip is identity
Mat2 convert_frame(const Mat2& m, Frame target);

// |A|_trc = |c| from a unitary triangularization U A U^* = [[*, c], [0, *]];
// computed by |c|^2 = ||A||_F^2 - |mu1|^2 - |mu2|^2
double trc_norm(const Mat2& m);

struct EllipticDiag {
    Mat2 p;               // in SU(1,1), p a p^{-1} = diag(e^{i rho}, e^{-i rho})
    double rho = 0.0;     // in (-pi, pi], nonzero
    bool norm_bound_ok = true;  // ||P||^2 <= 2 |rho|^{-1} ||A|| + 1e-8
};

// diagonalize an elliptic det-1 matrix inside SU(1,1); throws NotElliptic
// otherwise.  rho is intrinsic: no SU(1,1) conjugation swaps e^{i rho} and
// e^{-i rho}, so the sign is determined by the input.
EllipticDiag diagonalize_elliptic(const Mat2& m);

// closed-form exponential of c = [[ia, b], [conj b, -ia]] in su(1,1):
// cosh(mu) + i a sinh(mu)/mu on the diagonal, b sinh(mu)/mu off it,
// mu^2 = |b|^2 - a^2 (series below |mu| < 1e-4)
Mat2 exp_su11(const Mat2& m);

// inverse of exp_su11 for a result within the injectivity region
Mat2 log_su11(const Mat2& m);

// general 2x2 exponential by scaling and squaring (oracle-grade, used by
// pointwise checks)
Mat2 exp_series_mat(const Mat2& m);

// matrix log of a near-identity constant matrix by inverse scaling and
// squaring; requires ||m - I|| < 1
Mat2 log_near_identity(const Mat2& m);

struct ParabolicForm {
    double phi = 0.0;       // rotation angle in turns
    double zeta = 0.0;      // corner, >= 0
    int orientation = +1;   // sign of the rotation-invariant corner
};

// R_{-phi} a R_{phi} = [[1, orientation*zeta], [0, 1]]; requires
// spec(a) = {1, 1} within 1e-8 (real frame); throws NotParabolic otherwise
ParabolicForm parabolic_normalize(const Mat2& m);

}  // namespace cantorspec
