#include "cantorspec/mat2.hpp"

#include <algorithm>
#include <cmath>

namespace cantorspec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Mat2 Mat2::rotation_turns(double phi) {
    const double t = 2.0 * kPi * phi;
    return {std::cos(t), -std::sin(t), std::sin(t), std::cos(t), Frame::Real};
}

Mat2 Mat2::rotation_half_angle(double x) {
    const double t = 0.5 * x;
    return {std::cos(t), -std::sin(t), std::sin(t), std::cos(t), Frame::Real};
}

Mat2 Mat2::inverse() const {
    const cplx dd = det();
    return {d / dd, -b / dd, -c / dd, a / dd, frame};
}

double Mat2::frobenius() const {
    return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
}

double Mat2::norm() const {
    // singular values from the 2x2 Gram matrix: s^2 = (t +- sqrt(t^2 - 4 g)) / 2
    const double t = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
    const double g = std::norm(det());
    const double disc = std::max(t * t - 4.0 * g, 0.0);
    return std::sqrt(0.5 * (t + std::sqrt(disc)));
}

bool Mat2::near(const Mat2& o, double tol) const {
    return std::abs(a - o.a) <= tol && std::abs(b - o.b) <= tol &&
           std::abs(c - o.c) <= tol && std::abs(d - o.d) <= tol;
}

double mat_dist(const Mat2& x, const Mat2& y) { return (x - y).norm(); }

SpectralData spectral(const Mat2& m, double tol) {
    SpectralData out;
    const cplx t = m.trace();
    const cplx dd = m.det();
    const cplx disc = t * t - 4.0 * dd;
    const cplx root = std::sqrt(disc);
    out.mu1 = 0.5 * (t + root);
    out.mu2 = 0.5 * (t - root);
    // classification meaningful for det-1 real-trace inputs
    const double tr = t.real();
    if (std::abs(t.imag()) < tol && std::abs(dd - 1.0) < 1e-9) {
        if (std::abs(tr) < 2.0 - tol) {
            out.kind = SpectralData::Kind::Elliptic;
            out.rho = std::acos(std::clamp(tr / 2.0, -1.0, 1.0));
        } else if (std::abs(tr) > 2.0 + tol) {
            out.kind = SpectralData::Kind::Hyperbolic;
        } else {
            out.kind = SpectralData::Kind::Parabolic;
        }
    } else {
        out.kind = std::abs(out.mu1) > 1.0 + tol ? SpectralData::Kind::Hyperbolic
                                                 : SpectralData::Kind::Elliptic;
        out.rho = std::arg(out.mu1);
    }
    return out;
}

const Mat2& frame_intertwiner() {
    // P = (1/sqrt(-2i)) [[-i, -1], [-i, 1]]; principal branch gives
    // 1/sqrt(-2i) = (1+i)/2, and det P = 1.
    static const Mat2 p = [] {
        const cplx c0(0.5, 0.5);
        return Mat2{c0 * cplx(0.0, -1.0), c0 * cplx(-1.0, 0.0),
                    c0 * cplx(0.0, -1.0), c0 * cplx(1.0, 0.0), Frame::Real};
    }();
    return p;
}

Mat2 convert_frame(const Mat2& m, Frame target) {
    if (m.frame == target) return m;
    const Mat2& p = frame_intertwiner();
    Mat2 out = (target == Frame::Disc) ? p * m * p.adjugate() : p.adjugate() * m * p;
    out.frame = target;
    return out;
}

double trc_norm(const Mat2& m) {
    const SpectralData sp = spectral(m);
    const double f2 = std::norm(m.a) + std::norm(m.b) + std::norm(m.c) + std::norm(m.d);
    double r = f2 - std::norm(sp.mu1) - std::norm(sp.mu2);
    if (r < -1e-10)
        throw std::runtime_error("trc_norm: negative radicand, eigenvalue failure");
    return std::sqrt(std::max(r, 0.0));
}

EllipticDiag diagonalize_elliptic(const Mat2& m) {
    const Mat2 a = (m.frame == Frame::Disc) ? m : convert_frame(m, Frame::Disc);
    SpectralData sp = spectral(a);
    if (sp.kind != SpectralData::Kind::Elliptic || std::abs(sp.rho) < 1e-14)
        throw NotElliptic(sp);

    // in the disc frame a = [[u, w], [conj w, conj u]]; eigenvalues e^{+-i rho}
    // with the sign of rho read off the diagonal: lambda_1 = u + i * s, fix the
    // branch so that p a p^{-1} = diag(e^{i rho}, e^{-i rho}) with the actual
    // eigenvalue order of a.
    const cplx tr = a.trace();
    double rho = std::acos(std::clamp(tr.real() / 2.0, -1.0, 1.0));
    // choose the eigenvalue whose eigenvector has |v1| > |v2| (SU(1,1)
    // normalizable); for a in SU(1,1) this pins the sign of rho intrinsically.
    EllipticDiag out;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const cplx lam = std::exp(cplx(0.0, rho));
        // eigenvector of a for lam: (b, lam - a11) unless degenerate
        cplx v1 = a.b, v2 = lam - a.a;
        if (std::abs(v1) < 1e-12 && std::abs(v2) < 1e-12) {
            v1 = lam - a.d;
            v2 = a.c;
        }
        const double q = std::norm(v1) - std::norm(v2);
        if (q <= 1e-300) {
            rho = -rho;
            continue;
        }
        const double nrm = 1.0 / std::sqrt(q);
        v1 *= nrm;
        v2 *= nrm;
        // columns of p^{-1} are (v1, v2) and its su(1,1) partner
        // (conj v2, conj v1); p in SU(1,1) by construction
        Mat2 pinv{v1, std::conj(v2), v2, std::conj(v1), Frame::Disc};
        out.p = pinv.adjugate();
        out.p.frame = Frame::Disc;
        out.rho = rho;
        const double bound = 2.0 / std::abs(rho) * a.norm() + 1e-8;
        out.norm_bound_ok = out.p.norm() * out.p.norm() <= bound;
        return out;
    }
    throw NotElliptic(sp);
}

Mat2 exp_su11(const Mat2& m) {
    // m = [[ia, b], [conj b, -ia]]; mu^2 = |b|^2 - a^2 real
    const double a = m.a.imag();
    const cplx b = m.b;
    const double x = std::norm(b) - a * a;  // mu^2
    double ch, sh_over_mu;                  // cosh(mu), sinh(mu)/mu
    const double ax = std::sqrt(std::abs(x));
    if (ax < 1e-4) {
        // series in x = mu^2
        ch = 1.0 + x / 2.0 + x * x / 24.0;
        sh_over_mu = 1.0 + x / 6.0 + x * x / 120.0;
    } else if (x > 0.0) {
        ch = std::cosh(ax);
        sh_over_mu = std::sinh(ax) / ax;
    } else {
        ch = std::cos(ax);
        sh_over_mu = std::sin(ax) / ax;
    }
    return {cplx(ch, a * sh_over_mu), b * sh_over_mu,
            std::conj(b) * sh_over_mu, cplx(ch, -a * sh_over_mu), Frame::Disc};
}

Mat2 log_su11(const Mat2& m) {
    // invert the closed form: diagonal = cosh(mu) +- ia sinh(mu)/mu
    const double ch = m.a.real();
    double x;  // mu^2
    if (ch >= 1.0) {
        const double mu = std::acosh(ch);
        x = mu * mu;
    } else {
        const double mu = std::acos(std::clamp(ch, -1.0, 1.0));
        x = -mu * mu;
    }
    const double ax = std::sqrt(std::abs(x));
    double sh_over_mu;
    if (ax < 1e-4)
        sh_over_mu = 1.0 + x / 6.0 + x * x / 120.0;
    else if (x > 0.0)
        sh_over_mu = std::sinh(ax) / ax;
    else
        sh_over_mu = std::sin(ax) / ax;
    const double a = m.a.imag() / sh_over_mu;
    const cplx b = m.b / sh_over_mu;
    return {cplx(0.0, a), b, std::conj(b), cplx(0.0, -a), Frame::Disc};
}

Mat2 exp_series_mat(const Mat2& m) {
    // scaling and squaring with a 16-term Taylor core
    const double nm = m.norm();
    int sq = 0;
    Mat2 x = m;
    while (x.norm() > 0.25) {
        x = x * 0.5;
        ++sq;
        if (sq > 80) break;
    }
    Mat2 term = Mat2::identity(m.frame);
    Mat2 sum = term;
    for (int n = 1; n <= 16; ++n) {
        term = term * x * (1.0 / n);
        sum = sum + term;
    }
    for (int i = 0; i < sq; ++i) sum = sum * sum;
    sum.frame = m.frame;
    (void)nm;
    return sum;
}

Mat2 log_near_identity(const Mat2& m) {
    Mat2 x = m;
    // inverse scaling and squaring: repeated principal square roots of a 2x2
    // matrix via the Denman-Beavers iteration until close to I
    int sq = 0;
    while (mat_dist(x, Mat2::identity(m.frame)) > 1.0 / 16.0 && sq < 40) {
        Mat2 y = x, z = Mat2::identity(m.frame);
        for (int it = 0; it < 60; ++it) {
            const Mat2 yn = (y + z.inverse()) * 0.5;
            const Mat2 zn = (z + y.inverse()) * 0.5;
            if (mat_dist(yn, y) < 1e-15) { y = yn; z = zn; break; }
            y = yn;
            z = zn;
        }
        x = y;
        ++sq;
    }
    const Mat2 e = x - Mat2::identity(m.frame);
    Mat2 term = e;
    Mat2 sum = e;
    for (int n = 2; n <= 24; ++n) {
        term = term * e;
        sum = sum + term * ((n % 2 == 0 ? -1.0 : 1.0) / n);
    }
    sum = sum * std::pow(2.0, sq);
    sum.frame = m.frame;
    return sum;
}

ParabolicForm parabolic_normalize(const Mat2& m) {
    const Mat2 a = (m.frame == Frame::Real) ? m : convert_frame(m, Frame::Real);
    if (std::abs(a.trace().real() - 2.0) > 1e-8 || std::abs(a.trace().imag()) > 1e-8 ||
        std::abs(a.det() - 1.0) > 1e-8)
        throw NotParabolic();

    ParabolicForm out;
    const Mat2 n = a - Mat2::identity();  // nilpotent part
    const double nn = n.norm();
    if (nn < 1e-14) return out;  // identity

    // kernel direction of n: rotate it onto e_1.  n (cos t, sin t)^T = 0 with
    // (cos t, sin t) along (n12, -n11) (or (n22, -n21)).
    double kx = n.b.real(), ky = -n.a.real();
    if (std::hypot(kx, ky) < 1e-14) {
        kx = n.d.real();
        ky = -n.c.real();
    }
    const double t = std::atan2(ky, kx);
    out.phi = t / (2.0 * kPi);
    Mat2 r = Mat2::rotation_turns(out.phi);
    Mat2 nf = r.adjugate() * a * r;
    double corner = nf.b.real();
    if (std::abs(nf.c) > 1e-8 * (1.0 + nn))
        throw NotParabolic();
    out.orientation = corner >= 0.0 ? +1 : -1;
    out.zeta = std::abs(corner);
    return out;
}

}  // namespace cantorspec
