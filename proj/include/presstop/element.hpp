#pragma once

#include <Eigen/Dense>

namespace presstop {

// Closed-form matrices for a single bilinear quadrilateral, node order
// [BL, BR, TR, TL]. kp/kdp/te are for unit material coefficients; scaling by
// the per-element flow, drainage, and stiffness coefficients happens at
// assembly time.
struct ElementMatrices {
    Eigen::Matrix4d kp;              // Darcy flow (pressure Laplacian)
    Eigen::Matrix4d kdp;             // drainage (pressure mass)
    Eigen::Matrix<double, 8, 4> te;  // pressure-to-nodal-force coupling
    Eigen::Matrix<double, 8, 8> ke;  // plane-stress stiffness, unit modulus
};

// Unit square element, unit thickness. kp, kdp, te are exact rationals; ke is
// assembled from the standard plane-stress block decomposition.
ElementMatrices reference_element_matrices(double nu = 0.30);

// General dx-by-dy rectangle with thickness t; reduces to the reference
// matrices at dx = dy = t = 1.
ElementMatrices rectangle_element_matrices(double dx, double dy, double t,
                                           double nu = 0.30);

// Smooth Heaviside step H(x) with position eta in (0,1) and slope beta > 0;
// H(0) = 0 and H(1) = 1 by construction.
double heaviside(double x, double eta, double beta);
double heaviside_derivative(double x, double eta, double beta);

// Material model shared by the flow and elasticity interpolations. ds and kvs
// are derived in make_defaults(); tests may override ds (e.g. to switch the
// drainage term off).
struct MaterialParams {
    double e1 = 1.0;      // solid Young's modulus
    double emin = 1e-6;   // void modulus floor
    double nu = 0.30;
    double penal = 3.0;   // SIMP exponent
    double kv = 1.0;      // void flow coefficient
    double epsf = 1e-7;   // flow contrast: solid coefficient = kv*epsf
    double r = 0.1;       // pressure ratio across the penetration depth
    double dels = 2.0;    // penetration depth
    double etaf = 0.2, betaf = 8.0;  // Heaviside pair for the flow coefficient
    double etah = 0.2, betah = 8.0;  // Heaviside pair for the drainage term
    double ds = 0.0;      // drainage parameter, derived
    double kvs = 0.0;     // kv*(1 - epsf), derived

    static MaterialParams make_defaults(double penal, double etaf, double betaf);

    double flow_coefficient(double rho) const;
    double flow_coefficient_derivative(double rho) const;
    double drainage_coefficient(double rho) const;
    double drainage_coefficient_derivative(double rho) const;
    double simp_modulus(double rho) const;
    double simp_modulus_derivative(double rho) const;
};

} // namespace presstop
