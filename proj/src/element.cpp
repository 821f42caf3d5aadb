#include "presstop/element.hpp"

#include <cmath>

namespace presstop {

namespace {

Eigen::Matrix<double, 8, 8> plane_stress_ke(double dx, double dy, double t,
                                            double nu) {
    // 2x2 Gauss quadrature is exact for the bilinear shape functions on a
    // rectangle. Natural node order matches [BL, BR, TR, TL].
    Eigen::Matrix3d c;
    c << 1.0, nu, 0.0,
         nu, 1.0, 0.0,
         0.0, 0.0, (1.0 - nu) / 2.0;
    c /= (1.0 - nu * nu);

    const double g = 1.0 / std::sqrt(3.0);
    const double xs[2] = {-g, g};
    const double detj = dx * dy / 4.0;

    Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
    for (double xi : xs) {
        for (double eta : xs) {
            const double dnxi[4] = {-(1 - eta) / 4, (1 - eta) / 4,
                                    (1 + eta) / 4, -(1 + eta) / 4};
            const double dneta[4] = {-(1 - xi) / 4, -(1 + xi) / 4,
                                     (1 + xi) / 4, (1 - xi) / 4};
            Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
            for (int k = 0; k < 4; ++k) {
                const double dnx = dnxi[k] * 2.0 / dx;
                const double dny = dneta[k] * 2.0 / dy;
                b(0, 2 * k) = dnx;
                b(1, 2 * k + 1) = dny;
                b(2, 2 * k) = dny;
                b(2, 2 * k + 1) = dnx;
            }
            ke += b.transpose() * c * b * detj;
        }
    }
    return t * ke;
}

} // namespace

ElementMatrices reference_element_matrices(double nu) {
    ElementMatrices em;

    em.kp << 4, -1, -2, -1,
             -1, 4, -1, -2,
             -2, -1, 4, -1,
             -1, -2, -1, 4;
    em.kp /= 6.0;

    em.kdp << 4, 2, 1, 2,
              2, 4, 2, 1,
              1, 2, 4, 2,
              2, 1, 2, 4;
    em.kdp /= 36.0;

    em.te << -2, 2, 1, -1,
             -2, -1, 1, 2,
             -2, 2, 1, -1,
             -1, -2, 2, 1,
             -1, 1, 2, -2,
             -1, -2, 2, 1,
             -1, 1, 2, -2,
             -2, -1, 1, 2;
    em.te /= 12.0;

    Eigen::Matrix4d a11, a12, b11, b12;
    a11 << 12, 3, -6, -3,
           3, 12, 3, 0,
           -6, 3, 12, -3,
           -3, 0, -3, 12;
    a12 << -6, -3, 0, 3,
           -3, -6, -3, -6,
           0, -3, -6, 3,
           3, -6, 3, -6;
    b11 << -4, 3, -2, 9,
           3, -4, -9, 4,
           -2, -9, -4, -3,
           9, 4, -3, -4;
    b12 << 2, -3, 4, -9,
           -3, 2, 9, -2,
           4, 9, 2, 3,
           -9, -2, 3, 2;

    Eigen::Matrix<double, 8, 8> a, b;
    a << a11, a12, a12.transpose(), a11;
    b << b11, b12, b12.transpose(), b11;
    em.ke = (a + nu * b) / (24.0 * (1.0 - nu * nu));

    return em;
}

ElementMatrices rectangle_element_matrices(double dx, double dy, double t,
                                           double nu) {
    ElementMatrices em;

    Eigen::Matrix4d kx, ky;
    kx << 2, -2, -1, 1,
          -2, 2, 1, -1,
          -1, 1, 2, -2,
          1, -1, -2, 2;
    ky << 2, 1, -1, -2,
          1, 2, -2, -1,
          -1, -2, 2, 1,
          -2, -1, 1, 2;
    em.kp = (t * dy / (6.0 * dx)) * kx + (t * dx / (6.0 * dy)) * ky;

    em.kdp << 4, 2, 1, 2,
              2, 4, 2, 1,
              1, 2, 4, 2,
              2, 1, 2, 4;
    em.kdp *= t * dx * dy / 36.0;

    Eigen::Matrix<double, 8, 4> te;
    te << -2, 2, 1, -1,
          -2, -1, 1, 2,
          -2, 2, 1, -1,
          -1, -2, 2, 1,
          -1, 1, 2, -2,
          -1, -2, 2, 1,
          -1, 1, 2, -2,
          -2, -1, 1, 2;
    te /= 12.0;
    for (int i = 0; i < 8; ++i)
        te.row(i) *= t * (i % 2 == 0 ? dy : dx);
    em.te = te;

    em.ke = plane_stress_ke(dx, dy, t, nu);

    return em;
}

double heaviside(double x, double eta, double beta) {
    return (std::tanh(beta * eta) + std::tanh(beta * (x - eta))) /
           (std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta)));
}

double heaviside_derivative(double x, double eta, double beta) {
    const double th = std::tanh(beta * (x - eta));
    return beta * (1.0 - th * th) /
           (std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta)));
}

MaterialParams MaterialParams::make_defaults(double penal, double etaf,
                                             double betaf) {
    MaterialParams mp;
    mp.penal = penal;
    mp.etaf = etaf;
    mp.betaf = betaf;
    mp.etah = etaf;
    mp.betah = betaf;
    const double lr = std::log(mp.r) / mp.dels;
    mp.ds = lr * lr * mp.epsf;
    mp.kvs = mp.kv * (1.0 - mp.epsf);
    return mp;
}

double MaterialParams::flow_coefficient(double rho) const {
    return kv * (1.0 - (1.0 - epsf) * heaviside(rho, etaf, betaf));
}

double MaterialParams::flow_coefficient_derivative(double rho) const {
    return -kvs * heaviside_derivative(rho, etaf, betaf);
}

double MaterialParams::drainage_coefficient(double rho) const {
    return ds * heaviside(rho, etah, betah);
}

double MaterialParams::drainage_coefficient_derivative(double rho) const {
    return ds * heaviside_derivative(rho, etah, betah);
}

double MaterialParams::simp_modulus(double rho) const {
    return emin + std::pow(rho, penal) * (e1 - emin);
}

double MaterialParams::simp_modulus_derivative(double rho) const {
    return penal * std::pow(rho, penal - 1.0) * (e1 - emin);
}

} // namespace presstop
