// Copyright 2026 The CGS Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>

// Small fixed-size linear algebra, templated on the scalar type so the same
// formulas run on plain doubles and on autodiff variables.

namespace cgs {

template <typename T>
struct Vec2 {
  T x{}, y{};
};

template <typename T>
struct Vec3 {
  T x{}, y{}, z{};

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(T s) const { return {x * s, y * s, z * s}; }
  T dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
};

template <typename T>
T Norm(const Vec3<T>& v) {
  using std::sqrt;
  return sqrt(v.dot(v));
}

// Quaternion in (w, x, y, z) order; identity is (1, 0, 0, 0).
template <typename T>
struct Quat {
  T w{}, x{}, y{}, z{};
};

template <typename T>
Quat<T> QuatIdentity() {
  return {T(1), T(0), T(0), T(0)};
}

template <typename T>
T QuatNorm(const Quat<T>& q) {
  using std::sqrt;
  return sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
}

template <typename T>
Quat<T> QuatNormalize(const Quat<T>& q) {
  T n = QuatNorm(q);
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

// Hamilton product a*b: rotation b applied first, then a.
template <typename T>
Quat<T> QuatMul(const Quat<T>& a, const Quat<T>& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

// Row-major 3x3 matrix.
template <typename T>
struct Mat3 {
  std::array<T, 9> m{};

  T& operator()(int r, int c) { return m[r * 3 + c]; }
  const T& operator()(int r, int c) const { return m[r * 3 + c]; }

  Vec3<T> operator*(const Vec3<T>& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        T s = m[i * 3] * o.m[j];
        s = s + m[i * 3 + 1] * o.m[3 + j];
        s = s + m[i * 3 + 2] * o.m[6 + j];
        r.m[i * 3 + j] = s;
      }
    return r;
  }

  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[j * 3 + i] = m[i * 3 + j];
    return r;
  }
};

template <typename T>
Mat3<T> Mat3Identity() {
  Mat3<T> r;
  r.m = {T(1), T(0), T(0), T(0), T(1), T(0), T(0), T(0), T(1)};
  return r;
}

// Rotation matrix of a unit quaternion.
template <typename T>
Mat3<T> QuatToMat(const Quat<T>& q) {
  T ww = q.w * q.w, xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
  T wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
  T xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
  Mat3<T> r;
  r.m = {ww + xx - yy - zz, (xy - wz) + (xy - wz), (xz + wy) + (xz + wy),
         (xy + wz) + (xy + wz), ww - xx + yy - zz, (yz - wx) + (yz - wx),
         (xz - wy) + (xz - wy), (yz + wx) + (yz + wx), ww - xx - yy + zz};
  return r;
}

// World-space covariance from decomposed parameters:
//   Sigma = R(q_normalized) * diag(exp(s))^2 * R^T.
template <typename T>
Mat3<T> CovarianceFromParams(const Vec3<T>& log_scale, const Quat<T>& rot) {
  using std::exp;
  Quat<T> q = QuatNormalize(rot);
  Mat3<T> r = QuatToMat(q);
  T d0 = exp(log_scale.x + log_scale.x);
  T d1 = exp(log_scale.y + log_scale.y);
  T d2 = exp(log_scale.z + log_scale.z);
  // R * diag(d) * R^T
  Mat3<T> out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      T s = r(i, 0) * d0 * r(j, 0);
      s = s + r(i, 1) * d1 * r(j, 1);
      s = s + r(i, 2) * d2 * r(j, 2);
      out(i, j) = s;
    }
  return out;
}

}  // namespace cgs
