#pragma once
#include <array>
#include <cmath>

namespace vnfp {

/// 3-vector with the handful of operations the kinetic kernels need.
struct Vec3 {
    double x = 0, y = 0, z = 0;

    double& operator[](int i) { return (&x)[i]; }
    double operator[](int i) const { return (&x)[i]; }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double c) const { return {c * x, c * y, c * z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double c, const Vec3& v) { return v * c; }

/// Dense 3x3 matrix, row-major.
struct Mat3 {
    std::array<double, 9> a{};

    double& operator()(int i, int j) { return a[3 * i + j]; }
    double operator()(int i, int j) const { return a[3 * i + j]; }

    static Mat3 identity() {
        Mat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = 1;
        return m;
    }
    static Mat3 scaled_identity(double c) {
        Mat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = c;
        return m;
    }
    /// c * v v^T
    static Mat3 outer(const Vec3& v, double c = 1) {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m(i, j) = c * v[i] * v[j];
        return m;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 m;
        for (int k = 0; k < 9; ++k) m.a[k] = a[k] + o.a[k];
        return m;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 m;
        for (int k = 0; k < 9; ++k) m.a[k] = a[k] - o.a[k];
        return m;
    }
    Mat3 operator*(double c) const {
        Mat3 m;
        for (int k = 0; k < 9; ++k) m.a[k] = c * a[k];
        return m;
    }
    Vec3 operator*(const Vec3& v) const {
        return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
                a[3] * v.x + a[4] * v.y + a[5] * v.z,
                a[6] * v.x + a[7] * v.y + a[8] * v.z};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                m(i, j) = s;
            }
        return m;
    }

    Mat3 transpose() const {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = (*this)(j, i);
        return m;
    }
    double trace() const { return a[0] + a[4] + a[8]; }

    /// max_ij |a_ij - o_ij|
    double max_abs_diff(const Mat3& o) const {
        double d = 0;
        for (int k = 0; k < 9; ++k) d = std::max(d, std::abs(a[k] - o.a[k]));
        return d;
    }
    double max_abs() const {
        double d = 0;
        for (int k = 0; k < 9; ++k) d = std::max(d, std::abs(a[k]));
        return d;
    }
};

inline Mat3 operator*(double c, const Mat3& m) { return m * c; }

}  // namespace vnfp
