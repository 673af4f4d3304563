#pragma once

#include <Eigen/Dense>
#include <numbers>
#include <vector>

namespace mutomo {

using Vec3 = Eigen::Vector3d;

struct Direction {
    double theta = 0.0;  // [0, pi]
    double phi = 0.0;    // [0, 2pi)
    Vec3 n {0.0, 0.0, 1.0};

    Direction() = default;
    static Direction from_angles(double theta, double phi);
    static Direction from_vector(const Vec3& v);
    static Direction x() { return from_angles(std::numbers::pi / 2, 0.0); }
    static Direction y() { return from_angles(std::numbers::pi / 2, std::numbers::pi / 2); }
    static Direction z() { return from_angles(0.0, 0.0); }

    Vec3 perp() const;  // (-sin phi, cos phi, 0)
    Direction ppt() const;  // (n_x, -n_y, n_z)
};

struct QuadratureGrid {
    std::vector<Direction> nodes;
    std::vector<double> weights;  // sum to 1
    int degree = 0;
    int n_theta = 0;
    int n_phi = 0;

    // Gauss-Legendre in cos(theta) x trapezoid in phi, exact to `degree`
    static QuadratureGrid for_degree(int degree);
    std::size_t size() const { return nodes.size(); }
    // index of the node n -> (n_x, -n_y, n_z)
    std::vector<std::size_t> reflection_map() const;
};

// n-point Gauss-Legendre rule on [-1, 1]
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace mutomo
