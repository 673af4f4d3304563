#include "mutomo/sphere.hpp"

#include "mutomo/error.hpp"

#include <cmath>
#include <string>

namespace mutomo {

namespace {
constexpr double pi = std::numbers::pi;
}

Direction Direction::from_angles(double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi)) throw ValidationError("Direction: non-finite angle");
    if (theta < -1e-12 || theta > pi + 1e-12) throw ValidationError("Direction: theta outside [0, pi]");
    Direction d;
    d.theta = std::clamp(theta, 0.0, pi);
    d.phi = std::fmod(phi, 2 * pi);
    if (d.phi < 0) d.phi += 2 * pi;
    if (d.phi >= 2 * pi) d.phi = 0.0;
    d.n = Vec3(std::cos(d.phi) * std::sin(d.theta), std::sin(d.phi) * std::sin(d.theta), std::cos(d.theta));
    return d;
}

Direction Direction::from_vector(const Vec3& v) {
    double r = v.norm();
    if (!(r > 0) || !std::isfinite(r)) throw ValidationError("Direction: zero or non-finite vector");
    Vec3 u = v / r;
    Direction d = from_angles(std::acos(std::clamp(u(2), -1.0, 1.0)), std::atan2(u(1), u(0)));
    d.n = u;
    return d;
}

Vec3 Direction::perp() const { return Vec3(-std::sin(phi), std::cos(phi), 0.0); }

Direction Direction::ppt() const { return from_angles(theta, -phi); }

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1) throw ValidationError("gauss_legendre: need at least one node");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (z * p1 - p0) / (z * z - 1);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * dp * dp);
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
}

QuadratureGrid QuadratureGrid::for_degree(int degree) {
    if (degree < 0 || degree > 64) throw ValidationError("QuadratureGrid: degree out of range: " + std::to_string(degree));
    QuadratureGrid g;
    g.degree = degree;
    g.n_theta = degree + 1;
    g.n_phi = degree + 2;
    std::vector<double> x, w;
    gauss_legendre(g.n_theta, x, w);
    for (int i = 0; i < g.n_theta; ++i) {
        double theta = std::acos(std::clamp(x[i], -1.0, 1.0));
        for (int k = 0; k < g.n_phi; ++k) {
            g.nodes.push_back(Direction::from_angles(theta, 2 * pi * k / g.n_phi));
            g.weights.push_back(0.5 * w[i] / g.n_phi);
        }
    }
    return g;
}

std::vector<std::size_t> QuadratureGrid::reflection_map() const {
    std::vector<std::size_t> map(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Vec3 target(nodes[i].n(0), -nodes[i].n(1), nodes[i].n(2));
        bool found = false;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if ((nodes[j].n - target).norm() < 1e-12 && std::abs(weights[j] - weights[i]) < 1e-14) {
                map[i] = j;
                found = true;
                break;
            }
        }
        if (!found) throw ValidationError("QuadratureGrid: grid is not symmetric under phi -> -phi");
    }
    return map;
}

}  // namespace mutomo
