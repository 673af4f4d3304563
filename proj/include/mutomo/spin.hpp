#pragma once

#include "mutomo/linalg.hpp"

#include <compare>
#include <string>

namespace mutomo {

// integer or half-integer number, stored as twice its value
class HalfInt {
public:
    constexpr HalfInt() = default;
    explicit HalfInt(double v);
    static constexpr HalfInt from_twice(int t) { HalfInt h; h.twice_ = t; return h; }

    constexpr int twice() const { return twice_; }
    constexpr double value() const { return 0.5 * twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }
    std::string str() const;

    constexpr HalfInt operator-() const { return from_twice(-twice_); }
    friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return from_twice(a.twice_ + b.twice_); }
    friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return from_twice(a.twice_ - b.twice_); }
    friend constexpr bool operator==(HalfInt, HalfInt) = default;
    friend constexpr auto operator<=>(HalfInt, HalfInt) = default;

private:
    int twice_ = 0;
};

using Spin = HalfInt;

inline constexpr HalfInt half = HalfInt::from_twice(1);

inline int spin_dim(Spin j) { return j.twice() + 1; }
// m = j - i, basis ordered with m descending
inline HalfInt projection_at(Spin j, int i) { return HalfInt::from_twice(j.twice() - 2 * i); }
int projection_index(Spin j, HalfInt m);

void require_spin(Spin j, Spin max_j, const char* what);

struct SpinMatrices {
    ComplexMatrix x, y, z, plus, minus;
};

SpinMatrices spin_matrices(Spin j);

// J.v for a 3-vector
ComplexMatrix spin_along(const SpinMatrices& s, const Eigen::Vector3d& v);

}  // namespace mutomo
